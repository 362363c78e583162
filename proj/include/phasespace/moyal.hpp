#pragma once

#include "phasespace/charts.hpp"
#include "phasespace/expr.hpp"
#include "phasespace/polynomial.hpp"

#include <array>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

namespace phasespace {

/// Complex polynomial (pair of exact real/imaginary parts).
struct CPoly {
    Polynomial re, im;

    CPoly() = default;
    explicit CPoly(Polynomial r) : re(std::move(r)), im(Polynomial::zero(re.vars())) {}
    CPoly(Polynomial r, Polynomial i) : re(std::move(r)), im(std::move(i)) {}

    static CPoly zero(const VarSetPtr& v) { return CPoly(Polynomial::zero(v)); }

    const VarSetPtr& vars() const { return re.vars(); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }

    friend CPoly operator+(const CPoly& a, const CPoly& b) { return {a.re + b.re, a.im + b.im}; }
    friend CPoly operator-(const CPoly& a, const CPoly& b) { return {a.re - b.re, a.im - b.im}; }
    friend CPoly operator*(const CPoly& a, const CPoly& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend bool operator==(const CPoly& a, const CPoly& b) { return a.re == b.re && a.im == b.im; }

    CPoly scaled(const GaussRat& s) const {
        return {re * s.re - im * s.im, re * s.im + im * s.re};
    }
    CPoly derivative(std::size_t var) const { return {re.derivative(var), im.derivative(var)}; }
    CPoly conj() const { return {re, -im}; }

    std::complex<double> eval(const std::vector<double>& pt) const {
        return {re.eval<double>(pt), im.eval<double>(pt)};
    }
};

/// Variable set of the Moyal reference ring: chart variables plus a formal
/// hbar slot appended at the end.
inline VarSetPtr moyal_vars(const Chart& chart) {
    std::vector<std::string> names = chart.vars()->names();
    names.push_back("hbar");
    return make_vars(std::move(names));
}

/// Parse/convert an observable into the Moyal polynomial ring (exact; the mass
/// parameter is bound from the chart). Rejects genuinely rational input.
inline CPoly to_moyal_polynomial(const Expr& e, const Chart& chart, const VarSetPtr& mvars) {
    RationalFunction rf = to_rational_function(e, mvars, {{"M", chart.mass()}});
    if (!rf.is_polynomial())
        throw std::invalid_argument("moyal reference: polynomial observables only");
    return CPoly(rf.num() * (Rational(1) / rf.den().constant_value()));
}

namespace moyal_detail {

inline Rational factorial(int n) {
    Rational r(1);
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

inline void enumerate_bounded(const std::vector<int>& bound,
                              const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> beta(bound.size(), 0);
    for (;;) {
        fn(beta);
        std::size_t pos = 0;
        while (pos < beta.size()) {
            if (beta[pos] < bound[pos]) {
                ++beta[pos];
                for (std::size_t q = 0; q < pos; ++q) beta[q] = 0;
                break;
            }
            ++pos;
        }
        if (pos == beta.size()) return;
    }
}

inline CPoly multi_derivative(const CPoly& p, const std::vector<int>& beta_pos,
                              const std::vector<int>& beta_mom, std::size_t n) {
    CPoly d = p;
    for (std::size_t a = 0; a < n; ++a) {
        for (int r = 0; r < beta_pos[a]; ++r) d = d.derivative(a);
        for (int r = 0; r < beta_mom[a]; ++r) d = d.derivative(a + n);
    }
    return d;
}

}  // namespace moyal_detail

/// Bidifferential Moyal series in the chart's canonical pairs, truncated at
/// order K; exact (and exactly terminating) on polynomials.
inline CPoly moyal_differential(const CPoly& f, const CPoly& g, const Chart& chart, int order = 6) {
    const VarSetPtr& mv = f.vars();
    const std::size_t n = chart.half_dimension();
    std::size_t hbar_idx = mv->size() - 1;

    CPoly acc = CPoly::zero(mv);
    int degf = std::max(f.re.degree(), f.im.degree());
    int degg = std::max(g.re.degree(), g.im.degree());
    int kmax = std::min(order, std::min(degf, degg));
    std::vector<int> bound_p(n), bound_m(n);
    for (std::size_t a = 0; a < n; ++a) {
        bound_p[a] = std::min(std::max(f.re.degree_in(a), f.im.degree_in(a)),
                              std::max(g.re.degree_in(a + n), g.im.degree_in(a + n)));
        bound_m[a] = std::min(std::max(f.re.degree_in(a + n), f.im.degree_in(a + n)),
                              std::max(g.re.degree_in(a), g.im.degree_in(a)));
    }
    moyal_detail::enumerate_bounded(bound_p, [&](const std::vector<int>& bp) {
        moyal_detail::enumerate_bounded(bound_m, [&](const std::vector<int>& bm) {
            int total = 0, minus = 0;
            for (std::size_t a = 0; a < n; ++a) {
                total += bp[a] + bm[a];
                minus += bm[a];
            }
            if (total > kmax) return;
            CPoly df = moyal_detail::multi_derivative(f, bp, bm, n);
            CPoly dg = moyal_detail::multi_derivative(g, bm, bp, n);
            if (df.is_zero() || dg.is_zero()) return;
            Rational num(1);
            for (std::size_t a = 0; a < n; ++a)
                num /= moyal_detail::factorial(bp[a]) * moyal_detail::factorial(bm[a]);
            num /= Rational(Integer(1) << total, Integer(1));
            if (minus % 2 == 1) num = -num;
            GaussRat scale = GaussRat::i_pow(total) * GaussRat(num);
            CPoly term = (df * dg).scaled(scale);
            // attach hbar^total
            Monomial hm(mv->size());
            hm.exp[hbar_idx] = total;
            CPoly hpow(Polynomial::term(mv, hm, Rational(1)));
            acc = acc + term * hpow;
        });
    });
    return acc;
}

inline CPoly moyal_differential(const Expr& f, const Expr& g, const Chart& chart, int order = 6) {
    VarSetPtr mv = moyal_vars(chart);
    return moyal_differential(to_moyal_polynomial(f, chart, mv), to_moyal_polynomial(g, chart, mv),
                              chart, order);
}

namespace moyal_detail {

/// Exact division of a polynomial by hbar^k (monomial shift).
inline Polynomial shift_hbar_down(const Polynomial& p, std::size_t hbar_idx, int k) {
    Polynomial out(p.vars());
    for (const auto& [m, c] : p.terms()) {
        if (m.exp[hbar_idx] < k)
            throw std::logic_error("moyal_bracket: expression not divisible by hbar");
        Monomial nm(m);
        nm.exp[hbar_idx] -= k;
        out.add_term(nm, c);
    }
    return out;
}

}  // namespace moyal_detail

/// (f*g - g*f)/(i hbar); for polynomials of degree <= 2 this is exactly the
/// Poisson bracket.
inline CPoly moyal_bracket(const CPoly& f, const CPoly& g, const Chart& chart, int order = 6) {
    CPoly d = moyal_differential(f, g, chart, order) - moyal_differential(g, f, chart, order);
    // divide by i: (a+bi)/i = b - ai
    CPoly overi(d.im, -d.re);
    std::size_t hbar_idx = f.vars()->size() - 1;
    return {moyal_detail::shift_hbar_down(overi.re, hbar_idx, 1),
            moyal_detail::shift_hbar_down(overi.im, hbar_idx, 1)};
}

inline CPoly moyal_bracket(const Expr& f, const Expr& g, const Chart& chart, int order = 6) {
    VarSetPtr mv = moyal_vars(chart);
    return moyal_bracket(to_moyal_polynomial(f, chart, mv), to_moyal_polynomial(g, chart, mv),
                         chart, order);
}

// ---------------------------------------------------------------------------
// Gaussian calculus for the integral form of the Moyal product
// ---------------------------------------------------------------------------

/// Polynomial times exp(-1/2 v^T A v + b^T v) on the 4-dimensional phase
/// space, with exact rational A (symmetric) and exact complex-rational b.
struct GaussianPolynomial {
    VarSetPtr vars;                          // chart variables, no hbar
    CPoly poly;                              // complex polynomial factor
    std::array<std::array<Rational, 4>, 4> quad{};  // A, symmetric
    std::array<GaussRat, 4> lin{};           // b

    static GaussianPolynomial make(const VarSetPtr& v, CPoly p,
                                   std::array<std::array<Rational, 4>, 4> A,
                                   std::array<GaussRat, 4> b = {}) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                    A[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                    throw std::invalid_argument("GaussianPolynomial: quadratic form must be symmetric");
        GaussianPolynomial g;
        g.vars = v;
        g.poly = std::move(p);
        g.quad = std::move(A);
        g.lin = std::move(b);
        return g;
    }

    std::complex<double> value(const std::vector<double>& pt) const {
        std::complex<double> e{0.0, 0.0};
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) e -= 0.5 * to_double(quad[i][j]) * pt[i] * pt[j];
            e += lin[i].to_complex() * pt[i];
        }
        return poly.eval(pt) * std::exp(e);
    }

    /// Exact partial derivative (closed under the class).
    GaussianPolynomial derivative(std::size_t var) const {
        GaussianPolynomial g(*this);
        // (P e^E)' = (P' + P E') e^E with E' = -(A v)_var + b_var
        CPoly ederiv = CPoly::zero(vars);
        for (std::size_t j = 0; j < 4; ++j) {
            if (quad[var][j] != 0) {
                Polynomial vj = Polynomial::variable(vars, j) * (-quad[var][j]);
                ederiv = ederiv + CPoly(vj);
            }
        }
        ederiv = ederiv + CPoly(Polynomial::constant(vars, lin[var].re),
                                Polynomial::constant(vars, lin[var].im));
        g.poly = poly.derivative(var) + poly * ederiv;
        return g;
    }
};

namespace moyal_detail {

// dense complex linear algebra, pivot-free LDL^T for complex symmetric
// matrices with positive-definite real part (pivots stay in the right
// half-plane, giving the canonical branch of 1/sqrt(det))
struct Cmplx8 {
    std::array<std::array<std::complex<double>, 8>, 8> a{};
};

inline bool ldl_decompose(const Cmplx8& m, std::array<std::complex<double>, 8>& pivots,
                          Cmplx8& lower) {
    double scale = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            scale = std::max(scale, std::abs(m.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) lower.a[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 0.0;
    for (int j = 0; j < 8; ++j) {
        auto ju = static_cast<std::size_t>(j);
        std::complex<double> d = m.a[ju][ju];
        for (int k = 0; k < j; ++k) {
            auto ku = static_cast<std::size_t>(k);
            d -= lower.a[ju][ku] * lower.a[ju][ku] * pivots[ku];
        }
        // admissible (Fresnel-Gaussian) pivots stay in the closed right
        // half-plane away from zero
        if (std::abs(d) < 1e-12 * scale || d.real() < -1e-9 * std::abs(d)) return false;
        pivots[ju] = d;
        lower.a[ju][ju] = 1.0;
        for (int i = j + 1; i < 8; ++i) {
            auto iu = static_cast<std::size_t>(i);
            std::complex<double> s = m.a[iu][ju];
            for (int k = 0; k < j; ++k) {
                auto ku = static_cast<std::size_t>(k);
                s -= lower.a[iu][ku] * lower.a[ju][ku] * pivots[ku];
            }
            lower.a[iu][ju] = s / d;
        }
    }
    return true;
}

inline std::array<std::complex<double>, 8> ldl_solve(const Cmplx8& lower,
                                                     const std::array<std::complex<double>, 8>& piv,
                                                     std::array<std::complex<double>, 8> rhs) {
    // L y = rhs
    for (int i = 0; i < 8; ++i) {
        auto iu = static_cast<std::size_t>(i);
        for (int k = 0; k < i; ++k)
            rhs[iu] -= lower.a[iu][static_cast<std::size_t>(k)] * rhs[static_cast<std::size_t>(k)];
    }
    for (int i = 0; i < 8; ++i) rhs[static_cast<std::size_t>(i)] /= piv[static_cast<std::size_t>(i)];
    // L^T x = y
    for (int i = 7; i >= 0; --i) {
        auto iu = static_cast<std::size_t>(i);
        for (int k = i + 1; k < 8; ++k)
            rhs[iu] -= lower.a[static_cast<std::size_t>(k)][iu] * rhs[static_cast<std::size_t>(k)];
    }
    return rhs;
}

// covariance entries Sigma_{ij} = (S^{-1})_{ij} via solves against unit vectors
inline std::array<std::array<std::complex<double>, 8>, 8> invert(const Cmplx8& lower,
                                                                 const std::array<std::complex<double>, 8>& piv) {
    std::array<std::array<std::complex<double>, 8>, 8> inv{};
    for (int c = 0; c < 8; ++c) {
        std::array<std::complex<double>, 8> e{};
        e[static_cast<std::size_t>(c)] = 1.0;
        auto col = ldl_solve(lower, piv, e);
        for (int r = 0; r < 8; ++r)
            inv[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = col[static_cast<std::size_t>(r)];
    }
    return inv;
}

// Gaussian moments with mean: E[u^m] via the recursion
//   E[u_i Q] = mu_i E[Q] + sum_j Sigma_ij E[dQ/du_j]
struct WickMemo {
    std::map<std::array<int, 8>, std::complex<double>> memo;
    const std::array<std::complex<double>, 8>* mu;
    const std::array<std::array<std::complex<double>, 8>, 8>* sigma;

    std::complex<double> moment(std::array<int, 8> m) {
        int total = 0;
        for (int e : m) total += e;
        if (total == 0) return {1.0, 0.0};
        auto it = memo.find(m);
        if (it != memo.end()) return it->second;
        std::size_t i = 0;
        while (m[i] == 0) ++i;
        std::array<int, 8> rest = m;
        rest[i] -= 1;
        std::complex<double> acc = (*mu)[i] * moment(rest);
        for (std::size_t j = 0; j < 8; ++j) {
            if (rest[j] == 0) continue;
            std::array<int, 8> rr = rest;
            rr[j] -= 1;
            acc += (*sigma)[i][j] * static_cast<double>(rest[j]) * moment(rr);
        }
        memo.emplace(m, acc);
        return acc;
    }
};

}  // namespace moyal_detail

/// The integral form of the Moyal product evaluated exactly on the
/// Gaussian-polynomial class by completing the square (no quadrature).
/// Requires both quadratic forms positive definite (absolute convergence).
inline std::complex<double> moyal_integral_gaussian(const GaussianPolynomial& f,
                                                    const GaussianPolynomial& g,
                                                    const CartesianPoint& at, double hbar) {
    using moyal_detail::Cmplx8;

    // convergence: real part of the combined quadratic form must be PD;
    // check each factor by a real Cholesky attempt
    for (const GaussianPolynomial* gp : {&f, &g}) {
        double a[4][4];
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) a[i][j] = to_double(gp->quad[i][j]);
        for (int c = 0; c < 4; ++c) {
            auto cu = static_cast<std::size_t>(c);
            double d = a[cu][cu];
            for (int k = 0; k < c; ++k) d -= a[cu][static_cast<std::size_t>(k)] * a[cu][static_cast<std::size_t>(k)];
            if (!(d > 0.0))
                throw std::domain_error("moyal_integral_gaussian: non-convergent quadratic form");
            d = std::sqrt(d);
            a[cu][cu] = d;
            for (int r = c + 1; r < 4; ++r) {
                auto ru = static_cast<std::size_t>(r);
                double s = a[ru][cu];
                for (int k = 0; k < c; ++k)
                    s -= a[ru][static_cast<std::size_t>(k)] * a[cu][static_cast<std::size_t>(k)];
                a[ru][cu] = s / d;
            }
            for (int r = 0; r < c; ++r) a[static_cast<std::size_t>(r)][cu] = 0.0;
        }
    }

    const std::complex<double> I{0.0, 1.0};
    const std::complex<double> kappa = 2.0 * I / hbar;

    // u = (x', y', px', py', x'', y'', px'', py'')
    Cmplx8 S;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            S.a[i][j] = to_double(f.quad[i][j]);
            S.a[i + 4][j + 4] = to_double(g.quad[i][j]);
        }
    // kernel exponent: kappa * (r'.p'' - r''.p') => -1/2 u^T S u contributions
    S.a[0][6] -= kappa; S.a[6][0] -= kappa;
    S.a[1][7] -= kappa; S.a[7][1] -= kappa;
    S.a[4][2] += kappa; S.a[2][4] += kappa;
    S.a[5][3] += kappa; S.a[3][5] += kappa;

    std::array<std::complex<double>, 8> c{};
    for (std::size_t i = 0; i < 4; ++i) {
        c[i] = f.lin[i].to_complex();
        c[i + 4] = g.lin[i].to_complex();
    }
    // kernel linear part: kappa*(r.(p'-p'') + p.(r''-r'))
    c[2] += kappa * at.x;  c[3] += kappa * at.y;
    c[6] -= kappa * at.x;  c[7] -= kappa * at.y;
    c[0] -= kappa * at.px; c[1] -= kappa * at.py;
    c[4] += kappa * at.px; c[5] += kappa * at.py;

    std::array<std::complex<double>, 8> piv{};
    Cmplx8 L;
    moyal_detail::ldl_decompose(S, piv, L);
    std::complex<double> sqrt_det{1.0, 0.0};
    for (const auto& d : piv) sqrt_det *= std::sqrt(d);  // pivots in the right half-plane

    auto mu = moyal_detail::ldl_solve(L, piv, c);
    auto sigma = moyal_detail::invert(L, piv);

    std::complex<double> quad_shift{0.0, 0.0};
    for (std::size_t i = 0; i < 8; ++i) quad_shift += 0.5 * c[i] * mu[i];

    // polynomial expectation: P(u) = f.poly(v') * g.poly(v'')
    moyal_detail::WickMemo wick;
    wick.mu = &mu;
    wick.sigma = &sigma;
    std::complex<double> expect{0.0, 0.0};
    auto accumulate = [&](const Polynomial& p, std::complex<double> unit, const Polynomial& q,
                          std::complex<double> qunit) {
        for (const auto& [mf, cf] : p.terms())
            for (const auto& [mg, cg] : q.terms()) {
                std::array<int, 8> m{};
                for (std::size_t i = 0; i < 4; ++i) {
                    m[i] += mf.exp[i];
                    m[i + 4] += mg.exp[i];
                }
                expect += unit * qunit * to_double(cf) * to_double(cg) * wick.moment(m);
            }
    };
    const std::complex<double> one{1.0, 0.0};
    accumulate(f.poly.re, one, g.poly.re, one);
    accumulate(f.poly.re, one, g.poly.im, I);
    accumulate(f.poly.im, I, g.poly.re, one);
    accumulate(f.poly.im, I, g.poly.im, I);

    const double pi = std::numbers::pi;
    std::complex<double> gauss_norm = std::pow(2.0 * pi, 4.0) / sqrt_det;
    std::complex<double> prefactor = 1.0 / std::pow(pi * hbar, 4.0);
    return prefactor * gauss_norm * std::exp(quad_shift) * expect;
}

/// Bidifferential series evaluated numerically with one polynomial factor and
/// one Gaussian-polynomial factor (terminates at the polynomial degree).
inline std::complex<double> moyal_differential_numeric(const CPoly& f, const GaussianPolynomial& g,
                                                       const CartesianPoint& at, double hbar,
                                                       int order = 8) {
    std::vector<double> pt{at.x, at.y, at.px, at.py};
    const std::size_t n = 2;
    int degf = std::max(f.re.degree(), f.im.degree());
    int kmax = std::min(order, degf);
    std::complex<double> acc{0.0, 0.0};
    const std::complex<double> I{0.0, 1.0};

    std::vector<int> bound_p(n), bound_m(n);
    for (std::size_t a = 0; a < n; ++a) {
        bound_p[a] = std::max(f.re.degree_in(a), f.im.degree_in(a));
        bound_m[a] = std::max(f.re.degree_in(a + n), f.im.degree_in(a + n));
    }
    moyal_detail::enumerate_bounded(bound_p, [&](const std::vector<int>& bp) {
        moyal_detail::enumerate_bounded(bound_m, [&](const std::vector<int>& bm) {
            int total = 0, minus = 0;
            for (std::size_t a = 0; a < n; ++a) {
                total += bp[a] + bm[a];
                minus += bm[a];
            }
            if (total > kmax) return;
            CPoly df = moyal_detail::multi_derivative(f, bp, bm, n);
            if (df.is_zero()) return;
            GaussianPolynomial dg = g;
            for (std::size_t a = 0; a < n; ++a) {
                for (int r = 0; r < bm[a]; ++r) dg = dg.derivative(a);
                for (int r = 0; r < bp[a]; ++r) dg = dg.derivative(a + n);
            }
            double fac = 1.0;
            for (std::size_t a = 0; a < n; ++a)
                for (int r = 2; r <= bp[a]; ++r) fac *= r;
            for (std::size_t a = 0; a < n; ++a)
                for (int r = 2; r <= bm[a]; ++r) fac *= r;
            std::complex<double> scale =
                std::pow(I * hbar / 2.0, total) / fac * (minus % 2 == 1 ? -1.0 : 1.0);
            acc += scale * df.eval(pt) * dg.value(pt);
        });
    });
    return acc;
}

}  // namespace phasespace
