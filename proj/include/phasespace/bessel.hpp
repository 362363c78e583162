#pragma once

#include "phasespace/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace phasespace {

namespace bessel_detail {

// Ascending series: J_nu(x) = sum_k (-1)^k / (k! Gamma(nu+k+1)) (x/2)^(nu+2k).
// Safe for x <= max(12, 2 nu); beyond that cancellation eats digits.
inline double series(double nu, double x) {
    double half = 0.5 * x;
    double term = std::pow(half, nu) / std::tgamma(nu + 1.0);
    double sum = term;
    for (int k = 1; k < 400; ++k) {
        term *= -half * half / (k * (nu + k));
        sum += term;
        if (std::abs(term) < 1e-18 * (std::abs(sum) + 1e-300)) break;
    }
    return sum;
}

// Miller backward recurrence for all integer orders 0..n at once, normalized
// with J_0 + 2 J_2 + 2 J_4 + ... = 1.
inline std::vector<double> miller_all(int n, double x) {
    int start = std::max(n, static_cast<int>(std::ceil(x))) + 26 +
                static_cast<int>(1.5 * std::sqrt(std::max(1.0, x)));
    if (start % 2) ++start;
    std::vector<double> j(static_cast<std::size_t>(n) + 1, 0.0);
    double jp1 = 0.0, jc = 1e-300;
    double norm = 0.0;
    for (int k = start; k >= 1; --k) {
        double jm1 = (2.0 * k / x) * jc - jp1;
        jp1 = jc;
        jc = jm1;
        if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
            jc *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            for (auto& v : j) v *= 1e-250;
        }
        int ord = k - 1;
        if (ord <= n) j[static_cast<std::size_t>(ord)] = jc;
        if (ord >= 2 && ord % 2 == 0) norm += 2.0 * jc;
    }
    norm += jc;  // J_0 term
    for (auto& v : j) v /= norm;
    return j;
}

}  // namespace bessel_detail

/// J_0 .. J_n at one argument (series or one backward-recurrence sweep).
inline std::vector<double> bessel_j_upto(int n, double x) {
    if (x < 0) throw std::domain_error("bessel_j: x must be nonnegative");
    if (n < 0) throw std::domain_error("bessel_j_upto: order must be nonnegative");
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (x <= std::max(12.0, 2.0 * n)) {
        bool small_enough = x <= 12.0;
        if (small_enough) {
            for (int k = 0; k <= n; ++k) out[static_cast<std::size_t>(k)] = bessel_detail::series(k, x);
            return out;
        }
    }
    return bessel_detail::miller_all(n, x);
}

/// Bessel function of the first kind. Integer orders via series/backward
/// recurrence; real orders via series and, for large argument, the integral
/// representation J_nu = (1/pi) int_0^pi cos(nu t - x sin t) dt
///                        - sin(nu pi)/pi int_0^inf exp(-nu t - x sinh t) dt.
inline double bessel_j(double nu, double x) {
    if (x < 0) throw std::domain_error("bessel_j: x must be nonnegative");
    double nearest = std::nearbyint(nu);
    bool integral_order = nu == nearest;
    if (nu < 0 && !integral_order)
        throw std::domain_error("bessel_j: negative non-integer order not supported");
    if (integral_order) {
        int n = static_cast<int>(nearest);
        int sign = 1;
        if (n < 0) {
            n = -n;
            if (n % 2) sign = -1;  // J_{-n} = (-1)^n J_n
        }
        if (x == 0.0) return n == 0 ? 1.0 : 0.0;
        if (x <= 12.0) return sign * bessel_detail::series(n, x);
        if (x <= 2.0 * n) return sign * bessel_detail::series(n, x);
        return sign * bessel_detail::miller_all(n, x)[static_cast<std::size_t>(n)];
    }
    if (x == 0.0) return 0.0;  // nu > 0
    if (x <= std::max(12.0, 2.0 * nu)) return bessel_detail::series(nu, x);

    const double pi = std::numbers::pi;
    QuadratureConfig cfg(1e-13, 1e-13, 6000);
    auto osc = adaptive_integrate([&](double t) { return std::cos(nu * t - x * std::sin(t)); },
                                  0.0, pi, cfg);
    double tail = 0.0;
    double s = std::sin(nu * pi);
    if (s != 0.0) {
        double tmax = std::asinh(745.0 / x) + 1.0;
        auto tl = adaptive_integrate(
            [&](double t) { return std::exp(-nu * t - x * std::sinh(t)); }, 0.0, tmax, cfg);
        tail = s * tl.value;
    }
    return (osc.value - tail) / pi;
}

}  // namespace phasespace
