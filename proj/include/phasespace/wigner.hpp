#pragma once

#include "phasespace/charts.hpp"
#include "phasespace/weyl.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>

namespace phasespace {

/// Labels of one energy/angular-momentum (cross-)eigenfunction family.
struct EigenLabels {
    double E;
    double m = 0.0;
    double mprime = 0.0;
    double alpha = 0.0;     // normalization phase
    double D_offset = 0.0;  // phase constant of the diagonal family

    EigenLabels(double energy, double m_, double mprime_, double alpha_ = 0.0, double D = 0.0)
        : E(energy), m(m_), mprime(mprime_), alpha(alpha_), D_offset(D) {
        if (!(E > 0)) throw std::invalid_argument("EigenLabels: E must be positive");
    }
    static EigenLabels diagonal(double energy, double m_, double D = 0.0) {
        return EigenLabels(energy, m_, m_, 0.0, D);
    }

    bool integer_indices() const {
        return m == std::nearbyint(m) && mprime == std::nearbyint(mprime);
    }
    /// The D offset is a genuine eigenfunction phase only at integer multiples
    /// of pi; anything else evaluates but is flagged non-physical.
    bool physical_offset() const {
        double q = D_offset / std::numbers::pi;
        return std::abs(q - std::nearbyint(q)) < 1e-12;
    }
    double p0(const PhysParams& params) const { return std::sqrt(2.0 * params.mass * E); }
    double k0(const PhysParams& params) const { return p0(params) / params.hbar; }
};

struct CartesianMomentumLabels {
    double px0 = 0.0, py0 = 0.0;
};

struct WignerSpec {
    std::variant<EigenLabels, CartesianMomentumLabels> kind;
    PhysParams params;
};

struct NormConstants {
    double N_Em;
    std::complex<double> N_Emmp;
};

/// N_Em = 1/(4 pi^3 M hbar^2); N_Emm' = N_Em exp(i (m-m') alpha).
inline NormConstants norm_constants(const EigenLabels& labels, const PhysParams& params) {
    const double pi = std::numbers::pi;
    double n = 1.0 / (4.0 * pi * pi * pi * params.mass * params.hbar * params.hbar);
    std::complex<double> phase = std::exp(std::complex<double>(0.0, (labels.m - labels.mprime) * labels.alpha));
    return {n, n * phase};
}

struct WignerValue {
    double value = 0.0;
    bool singular = false;
};
struct WignerValueC {
    std::complex<double> value{0.0, 0.0};
    bool singular = false;
};

/// Diagonal eigenfunction in the (T, chi, H, L) chart. Zero for H > E, a
/// tagged singular marker on the H = E locus, an error for H <= 0.
inline WignerValue eval_W_Em(const EigenLabels& labels, const ActionAnglePoint& q,
                             const PhysParams& params) {
    if (!(q.H > 0)) throw ChartDomainError("eval_W_Em: H must be positive");
    if (q.H > labels.E) return {0.0, false};
    if (q.H == labels.E) return {0.0, true};
    double N = norm_constants(labels, params).N_Em;
    double root = std::sqrt((labels.E - q.H) / q.H);
    double arg = 2.0 * q.L / params.hbar * root -
                 2.0 * labels.m * std::acos(std::sqrt(q.H / labels.E)) + labels.D_offset;
    return {N / std::sqrt(q.H * (labels.E - q.H)) * std::cos(arg), false};
}

/// The same function through the non-symplectic polar chart (r, phi, p, chi).
inline WignerValue eval_W_Em_polar(const EigenLabels& labels, const PolarPoint& q,
                                   const PhysParams& params) {
    if (!(q.p > 0)) throw ChartDomainError("eval_W_Em_polar: p must be positive");
    double p0 = labels.p0(params);
    if (q.p > p0) return {0.0, false};
    if (q.p == p0) return {0.0, true};
    double N = norm_constants(labels, params).N_Em;
    double root = std::sqrt(p0 * p0 - q.p * q.p);
    double arg = 2.0 * q.r * root / params.hbar * std::sin(q.chi - q.phi) -
                 2.0 * labels.m * std::acos(q.p / p0) + labels.D_offset;
    return {2.0 * params.mass * N / (q.p * root) * std::cos(arg), false};
}

/// Cross-Wigner family: e^{i(m-m')chi} times the gated cosine form with
/// (m+m') in place of 2m. Reduces exactly to eval_W_Em when m = m'.
inline WignerValueC eval_W_Emmp(const EigenLabels& labels, const ActionAnglePoint& q,
                                const PhysParams& params) {
    if (!(q.H > 0)) throw ChartDomainError("eval_W_Emmp: H must be positive");
    if (q.H > labels.E) return {{0.0, 0.0}, false};
    if (q.H == labels.E) return {{0.0, 0.0}, true};
    auto N = norm_constants(labels, params).N_Emmp;
    double root = std::sqrt((labels.E - q.H) / q.H);
    double arg = 2.0 * q.L / params.hbar * root -
                 (labels.m + labels.mprime) * std::acos(std::sqrt(q.H / labels.E));
    std::complex<double> harmonic =
        std::exp(std::complex<double>(0.0, (labels.m - labels.mprime) * q.chi));
    return {harmonic * N / std::sqrt(q.H * (labels.E - q.H)) * std::cos(arg), false};
}

/// Parameters of the Cartesian-momentum eigenstate in the action-angle chart:
/// W = N delta(H - Etilde) delta(chi - chi0).
struct MomentumEigenDescriptor {
    double Etilde;
    double chi0;       // undefined when degenerate
    double N;
    bool degenerate;   // rest state (px0 = py0 = 0), excluded by the chart
    PhysParams params;

    /// Deltas replaced by normalized Gaussians of width eps (chi wrapped).
    double mollified(const ActionAnglePoint& q, double eps) const {
        if (degenerate) throw ChartDomainError("momentum eigenstate: degenerate rest state");
        if (!(eps > 0)) throw std::invalid_argument("mollified: eps must be positive");
        const double pi = std::numbers::pi;
        double dchi = std::remainder(q.chi - chi0, 2.0 * pi);
        auto gauss = [&](double u) {
            return std::exp(-u * u / (2.0 * eps * eps)) / (eps * std::sqrt(2.0 * pi));
        };
        return N * gauss(q.H - Etilde) * gauss(dchi);
    }
};

inline MomentumEigenDescriptor momentum_eigenstate(double px0, double py0,
                                                   const PhysParams& params) {
    const double pi = std::numbers::pi;
    MomentumEigenDescriptor d{};
    d.params = params;
    d.Etilde = (px0 * px0 + py0 * py0) / (2.0 * params.mass);
    d.degenerate = (px0 == 0.0 && py0 == 0.0);
    d.chi0 = d.degenerate ? 0.0 : wrap_angle(std::atan2(py0, px0));
    d.N = 1.0 / (4.0 * pi * pi * params.hbar * params.hbar * params.mass);
    return d;
}

/// Expansion coefficients of the Cartesian-momentum eigenstate over the
/// cross-Wigner family: C = (1/2pi) exp(i (m'-m)(alpha + chi0)).
inline std::complex<double> expansion_coefficient(long mt, long mtp, double chi0, double alpha) {
    const double pi = std::numbers::pi;
    double phase = static_cast<double>(mtp - mt) * (alpha + chi0);
    return std::exp(std::complex<double>(0.0, phase)) / (2.0 * pi);
}

// ---------------------------------------------------------------------------
// Analytic partial derivatives of the closed forms (for operator residuals)
// ---------------------------------------------------------------------------

/// Exact partials of W(T,chi,H,L) = e^{i d chi} g(H) cos(A(H) L - B(H) + D)
/// with g = N/sqrt(H(E-H)), A = (2/hbar) sqrt((E-H)/H),
/// B = (m+m') arccos(sqrt(H/E)); valid on 0 < H < E.
struct WignerPartials {
    double E, m, mprime, D, hbar;
    std::complex<double> Nc;
    double H, L, chi;

    WignerPartials(const EigenLabels& labels, const ActionAnglePoint& q, const PhysParams& params)
        : E(labels.E), m(labels.m), mprime(labels.mprime), D(labels.D_offset),
          hbar(params.hbar), H(q.H), L(q.L), chi(q.chi) {
        if (!(q.H > 0 && q.H < labels.E))
            throw ChartDomainError("WignerPartials: need 0 < H < E");
        Nc = norm_constants(labels, params).N_Emmp;
    }

    std::complex<double> partial(const MultiIndex& alpha) const {
        int dT = alpha.idx[0], dchi = alpha.idx[1], dH = alpha.idx[2], dL = alpha.idx[3];
        if (dT > 0) return {0.0, 0.0};
        if (dH + dL > 2) throw std::invalid_argument("WignerPartials: order > 2 in (H,L)");

        double g = 1.0 / std::sqrt(H * (E - H));
        double A = 2.0 / hbar * std::sqrt((E - H) / H);
        double B = (m + mprime) * std::acos(std::sqrt(H / E));
        double phi = A * L - B + D;

        double gp = -(E - 2.0 * H) / 2.0 * std::pow(H * (E - H), -1.5);
        double Ap = -E / (hbar * std::pow(H, 1.5) * std::sqrt(E - H));
        double Bp = -(m + mprime) / (2.0 * std::sqrt(H * (E - H)));
        double gpp = std::pow(H * (E - H), -1.5) +
                     0.75 * (E - 2.0 * H) * (E - 2.0 * H) * std::pow(H * (E - H), -2.5);
        double App = E / hbar *
                     (1.5 * std::pow(H, -2.5) * std::pow(E - H, -0.5) -
                      0.5 * std::pow(H, -1.5) * std::pow(E - H, -1.5));
        double Bpp = (m + mprime) * (E - 2.0 * H) / 4.0 * std::pow(H * (E - H), -1.5);

        double phip = Ap * L - Bp;
        double phipp = App * L - Bpp;
        double cs = std::cos(phi), sn = std::sin(phi);

        double V;
        if (dH == 0 && dL == 0) V = g * cs;
        else if (dH == 0 && dL == 1) V = -g * A * sn;
        else if (dH == 0 && dL == 2) V = -g * A * A * cs;
        else if (dH == 1 && dL == 0) V = gp * cs - g * phip * sn;
        else if (dH == 1 && dL == 1) V = -gp * A * sn - g * (Ap * sn + phip * A * cs);
        else  // dH == 2, dL == 0
            V = gpp * cs - 2.0 * gp * phip * sn - g * phip * phip * cs - g * phipp * sn;

        double d = m - mprime;
        std::complex<double> harmonic = std::exp(std::complex<double>(0.0, d * chi));
        std::complex<double> chi_factor{1.0, 0.0};
        for (int r = 0; r < dchi; ++r) chi_factor *= std::complex<double>(0.0, d);
        return Nc * harmonic * chi_factor * V;
    }
};

}  // namespace phasespace
