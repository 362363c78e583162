#pragma once

#include "phasespace/bessel.hpp"
#include "phasespace/quadrature.hpp"
#include "phasespace/wigner.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace phasespace {

// ---------------------------------------------------------------------------
// Spatial marginal of the diagonal family
// ---------------------------------------------------------------------------

/// P(r) = 4 pi M N_Em \int_0^{pi/2} cos(2 m theta) J_0(2 p0 r sin(theta)/hbar) dtheta,
/// by adaptive quadrature (any real m).
inline double marginal_P_Em(const EigenLabels& labels, const PhysParams& params, double r,
                            const QuadratureConfig& cfg = QuadratureConfig(1e-12, 1e-12)) {
    const double pi = std::numbers::pi;
    double N = norm_constants(labels, params).N_Em;
    double p0 = labels.p0(params);
    double scale = 2.0 * p0 * r / params.hbar;
    auto integrand = [&](double theta) {
        return std::cos(2.0 * labels.m * theta) * bessel_j(0.0, scale * std::sin(theta));
    };
    auto q = adaptive_integrate(integrand, 0.0, pi / 2.0, cfg);
    return 4.0 * pi * params.mass * N * q.value;
}

/// Closed form for integer m: P(r) = 2 pi^2 M N_Em J_m(p0 r / hbar)^2.
inline double marginal_P_Em_closed(const EigenLabels& labels, const PhysParams& params, double r) {
    if (!labels.integer_indices())
        throw std::invalid_argument("marginal_P_Em_closed: integer m only");
    const double pi = std::numbers::pi;
    double N = norm_constants(labels, params).N_Em;
    double jm = bessel_j(labels.m, labels.p0(params) * r / params.hbar);
    return 2.0 * pi * pi * params.mass * N * jm * jm;
}

// ---------------------------------------------------------------------------
// Gaussian-mollified Fourier transform of a shifted cosine
// ---------------------------------------------------------------------------

struct MollifiedFourier {
    std::complex<double> numeric;
    std::complex<double> analytic;
};

/// int cos(a x - b) e^{i t x} e^{-eps x^2} dx against the exact smeared form
/// (1/2) sqrt(pi/eps) [ e^{-ib} e^{-(t+a)^2/(4 eps)} + e^{ib} e^{-(t-a)^2/(4 eps)} ].
inline MollifiedFourier mollified_fourier_cos(double a, double b, double t, double eps,
                                              const QuadratureConfig& cfg = QuadratureConfig(1e-12, 1e-12, 20000)) {
    if (!(eps > 0)) throw std::invalid_argument("mollified_fourier_cos: eps must be positive");
    const double pi = std::numbers::pi;
    double cutoff = std::sqrt(745.0 / eps);
    auto f = [&](double x) {
        return std::cos(a * x - b) * std::exp(-eps * x * x) *
               std::exp(std::complex<double>(0.0, t * x));
    };
    auto [val, err] = adaptive_integrate_complex(f, -cutoff, cutoff, cfg);
    (void)err;
    std::complex<double> eb = std::exp(std::complex<double>(0.0, b));
    std::complex<double> analytic =
        0.5 * std::sqrt(pi / eps) *
        (std::conj(eb) * std::exp(-(t + a) * (t + a) / (4.0 * eps)) +
         eb * std::exp(-(t - a) * (t - a) / (4.0 * eps)));
    return {val, analytic};
}

// ---------------------------------------------------------------------------
// Weak pairings against factorized test functions
// ---------------------------------------------------------------------------

/// phi(chi, H, L) = exp(kappa (cos(chi - chi_center) - 1))
///                * exp(-(H - H_center)^2 / (2 H_width^2))
///                * exp(-L^2 / (2 sigmaL^2)).
struct TestFunction {
    double kappa = 2.0;
    double chi_center = 0.0;
    double H_center = 1.0;
    double H_width = 0.35;
    double sigmaL = 0.5;

    double chi_factor(double chi) const {
        return std::exp(kappa * (std::cos(chi - chi_center) - 1.0));
    }
    double H_factor(double H) const {
        double u = (H - H_center) / H_width;
        return std::exp(-0.5 * u * u);
    }
    double L_factor(double L) const {
        double u = L / sigmaL;
        return std::exp(-0.5 * u * u);
    }
    double operator()(double chi, double H, double L) const {
        return chi_factor(chi) * H_factor(H) * L_factor(L);
    }
};

/// <W_Emm', phi> = int dchi dH dL phi * W, with the L-integral done
/// analytically (int cos(aL - beta) e^{-L^2/2s^2} dL = sqrt(2pi) s e^{-a^2
/// s^2/2} cos beta) and H = E sin^2(u) removing both endpoint singularities.
inline std::complex<double> weak_pairing_energy_angular(
    const EigenLabels& labels, const PhysParams& params, const TestFunction& phi,
    const QuadratureConfig& cfg = QuadratureConfig(1e-12, 1e-11)) {
    const double pi = std::numbers::pi;
    auto N = norm_constants(labels, params).N_Emmp;
    double E = labels.E;
    double s = phi.sigmaL;
    double d = labels.m - labels.mprime;
    double mm = labels.m + labels.mprime;

    auto chi_int = adaptive_integrate_complex(
        [&](double chi) {
            return phi.chi_factor(chi) * std::exp(std::complex<double>(0.0, d * chi));
        },
        0.0, 2.0 * pi, cfg);

    // 1/sqrt(H(E-H)) dH = 2 du under H = E sin^2 u
    auto u_int = adaptive_integrate(
        [&](double u) {
            double su = std::sin(u), cu = std::cos(u);
            if (su <= 0.0) return 0.0;  // essential zero of the Gaussian damp factor
            double H = E * su * su;
            double a = 2.0 / params.hbar * (cu / su);
            double beta = mm * (pi / 2.0 - u) - labels.D_offset;
            double damp = std::exp(-0.5 * a * a * s * s);
            return 2.0 * phi.H_factor(H) * damp * std::cos(beta);
        },
        0.0, pi / 2.0, cfg);

    return N * chi_int.first * std::sqrt(2.0 * pi) * s * u_int.value;
}

/// Exact pairing of the momentum eigenstate (deltas evaluated).
inline double weak_pairing_momentum_exact(const MomentumEigenDescriptor& d,
                                          const TestFunction& phi) {
    const double pi = std::numbers::pi;
    return d.N * phi.chi_factor(d.chi0) * phi.H_factor(d.Etilde) * std::sqrt(2.0 * pi) * phi.sigmaL;
}

/// Pairing of the mollified momentum eigenstate (Gaussian deltas, numeric).
inline double weak_pairing_momentum_mollified(
    const MomentumEigenDescriptor& d, const TestFunction& phi, double eps,
    const QuadratureConfig& cfg = QuadratureConfig(1e-12, 1e-11)) {
    const double pi = std::numbers::pi;
    auto gauss = [&](double u) {
        return std::exp(-u * u / (2.0 * eps * eps)) / (eps * std::sqrt(2.0 * pi));
    };
    // integrate over the known mollifier support so the adaptive rule cannot
    // miss a narrow spike
    double w = std::min(12.0 * eps, pi);
    auto chi_int = adaptive_integrate(
        [&](double chi) {
            return phi.chi_factor(chi) * gauss(std::remainder(chi - d.chi0, 2.0 * pi));
        },
        d.chi0 - w, d.chi0 + w, cfg);
    double Hmin = std::max(0.0, d.Etilde - 12.0 * eps);
    double Hmax = d.Etilde + 12.0 * eps;
    auto h_int = adaptive_integrate(
        [&](double H) { return phi.H_factor(H) * gauss(H - d.Etilde); }, Hmin, Hmax, cfg);
    return d.N * chi_int.value * h_int.value * std::sqrt(2.0 * pi) * phi.sigmaL;
}

}  // namespace phasespace
