#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasespace {

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;
    bool endpoint_substitution = false;  // caller declares an explicit substitution was applied

    QuadratureConfig() = default;
    QuadratureConfig(double at, double rt, int ms = 4000) : abs_tol(at), rel_tol(rt), max_subdivisions(ms) {
        if (!(abs_tol > 0) || !(rel_tol > 0))
            throw std::invalid_argument("QuadratureConfig: tolerances must be positive");
    }
};

struct QuadratureResult {
    double value = 0;
    double error_estimate = 0;
    int subdivisions = 0;
};

struct QuadratureError : std::runtime_error {
    double best_value;
    double best_error;
    QuadratureError(const std::string& w, double v, double e)
        : std::runtime_error(w), best_value(v), best_error(e) {}
};

namespace quad_detail {

// Gauss-Kronrod 15-point rule on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    friend bool operator<(const Segment& s, const Segment& t) { return s.error < t.error; }
};

inline Segment gk15(const std::function<double(double)>& f, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fv[15];
    double fc = f(c);
    fv[7] = fc;
    for (int j = 0; j < 7; ++j) {
        double dx = h * xgk[j];
        fv[j] = f(c - dx);
        fv[14 - j] = f(c + dx);
    }
    for (double v : fv)
        if (!std::isfinite(v))
            throw QuadratureError("adaptive_integrate: non-finite integrand sample", 0.0, 0.0);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) resk += wgk[j] * (fv[j] + fv[14 - j]);
    for (int j = 0; j < 3; ++j) resg += wg[j] * (fv[2 * j + 1] + fv[13 - 2 * j]);
    double value = resk * h;
    double err = std::abs((resk - resg) * h);
    // QUADPACK-style error sharpening
    double resabs = 0;
    for (int j = 0; j < 7; ++j) resabs += wgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    resabs = (resabs + wgk[7] * std::abs(fc)) * std::abs(h);
    if (resabs != 0.0 && err != 0.0)
        err = resabs * std::min(1.0, std::pow(200.0 * err / resabs, 1.5));
    return {a, b, value, err};
}

}  // namespace quad_detail

/// Globally adaptive Gauss-Kronrod integration of a finite integrand on [a,b].
inline QuadratureResult adaptive_integrate(const std::function<double(double)>& f, double a,
                                           double b, const QuadratureConfig& cfg = {}) {
    if (a == b) return {0.0, 0.0, 0};
    std::priority_queue<quad_detail::Segment> segs;
    segs.push(quad_detail::gk15(f, a, b));
    double total = segs.top().value, toterr = segs.top().error;
    int n = 1;
    while (toterr > std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) {
        if (n >= cfg.max_subdivisions)
            throw QuadratureError("adaptive_integrate: subdivision budget exhausted", total, toterr);
        quad_detail::Segment worst = segs.top();
        segs.pop();
        total -= worst.value;
        toterr -= worst.error;
        double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b)
            throw QuadratureError("adaptive_integrate: interval collapsed", total, toterr);
        auto left = quad_detail::gk15(f, worst.a, mid);
        auto right = quad_detail::gk15(f, mid, worst.b);
        segs.push(left);
        segs.push(right);
        total += left.value + right.value;
        toterr += left.error + right.error;
        ++n;
    }
    return {total, toterr, n};
}

/// Complex integrand convenience wrapper.
inline std::pair<std::complex<double>, double> adaptive_integrate_complex(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    const QuadratureConfig& cfg = {}) {
    auto re = adaptive_integrate([&](double t) { return f(t).real(); }, a, b, cfg);
    auto im = adaptive_integrate([&](double t) { return f(t).imag(); }, a, b, cfg);
    return {{re.value, im.value}, re.error_estimate + im.error_estimate};
}

}  // namespace phasespace
