#pragma once

#include "phasespace/charts.hpp"
#include "phasespace/rational_function.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace phasespace {

/// Truncation of the formal series: every stored term satisfies
/// deg_y + 2*deg_hbar <= max_grade and deg_hbar <= max_hbar.
struct TruncationConfig {
    int max_grade = 8;
    int max_hbar = 3;
    TruncationConfig() = default;
    TruncationConfig(int grade, int hbar) : max_grade(grade), max_hbar(hbar) {
        if (!(grade >= 2 * hbar && hbar >= 0))
            throw std::invalid_argument("TruncationConfig: need max_grade >= 2*max_hbar >= 0");
    }
    friend bool operator==(const TruncationConfig&, const TruncationConfig&) = default;
};

/// Derivative multi-index over the chart variables.
struct MultiIndex {
    std::vector<int> idx;

    MultiIndex() = default;
    explicit MultiIndex(std::size_t nvars) : idx(nvars, 0) {}
    explicit MultiIndex(std::vector<int> v) : idx(std::move(v)) {}

    int order() const {
        int s = 0;
        for (int e : idx) s += e;
        return s;
    }
    MultiIndex bumped(std::size_t var) const {
        MultiIndex m(*this);
        m.idx[var] += 1;
        return m;
    }
    friend bool operator<(const MultiIndex& a, const MultiIndex& b) {
        int oa = a.order(), ob = b.order();
        if (oa != ob) return oa < ob;
        return a.idx < b.idx;
    }
    friend bool operator==(const MultiIndex& a, const MultiIndex& b) { return a.idx == b.idx; }
};

/// Term key of a Weyl-bundle element: hbar power, fiber multidegree over
/// y^1..y^{2n}, and the (strictly increasing) form index set as a bitmask.
struct WeylKey {
    int hbar = 0;
    std::vector<int> mu;
    std::uint32_t forms = 0;

    int fiber_degree() const {
        int d = 0;
        for (int e : mu) d += e;
        return d;
    }
    int form_degree() const { return std::popcount(forms); }
    int grade() const { return fiber_degree() + 2 * hbar; }

    friend bool operator<(const WeylKey& a, const WeylKey& b) {
        return std::tie(a.hbar, a.mu, a.forms) < std::tie(b.hbar, b.mu, b.forms);
    }
    friend bool operator==(const WeylKey& a, const WeylKey& b) {
        return a.hbar == b.hbar && a.mu == b.mu && a.forms == b.forms;
    }
};

/// Linear-in-jets coefficient: sum of c_alpha(x) * (d^alpha g) over derivative
/// multi-indices alpha, for an undetermined symbol g. Used to extract star
/// products as differential operators with exact coefficients.
struct JetCoeff {
    VarSetPtr vars;
    std::map<MultiIndex, CRat> parts;

    JetCoeff() = default;
    explicit JetCoeff(VarSetPtr v) : vars(std::move(v)) {}

    static JetCoeff zero(const VarSetPtr& v) { return JetCoeff(v); }
    static JetCoeff seed(const VarSetPtr& v) {
        JetCoeff j(v);
        j.parts.emplace(MultiIndex(v->size()), CRat::constant(v, GaussRat(1)));
        return j;
    }

    bool is_zero() const { return parts.empty(); }

    void add_part(const MultiIndex& a, const CRat& c) {
        if (c.is_zero()) return;
        auto it = parts.find(a);
        if (it == parts.end()) parts.emplace(a, c);
        else {
            it->second = it->second + c;
            if (it->second.is_zero()) parts.erase(it);
        }
    }

    friend JetCoeff operator+(const JetCoeff& a, const JetCoeff& b) {
        JetCoeff r(a);
        if (!r.vars) r.vars = b.vars;
        for (const auto& [k, c] : b.parts) r.add_part(k, c);
        return r;
    }

    JetCoeff scaled(const GaussRat& s) const {
        JetCoeff r(vars);
        if (s.is_zero()) return r;
        for (const auto& [k, c] : parts) r.add_part(k, c.scaled(s));
        return r;
    }

    // d/dx^i acts on the coefficients and bumps the jet index.
    JetCoeff derivative(std::size_t var) const {
        JetCoeff r(vars);
        for (const auto& [k, c] : parts) {
            r.add_part(k, c.derivative(var));
            r.add_part(k.bumped(var), c);
        }
        return r;
    }

    friend bool operator==(const JetCoeff& a, const JetCoeff& b) { return a.parts == b.parts; }
};

inline CRat mul_coeff(const CRat& a, const CRat& b) { return a * b; }
inline JetCoeff mul_coeff(const CRat& a, const JetCoeff& b) {
    JetCoeff r(b.vars ? b.vars : a.vars());
    for (const auto& [k, c] : b.parts) r.add_part(k, a * c);
    return r;
}
inline JetCoeff mul_coeff(const JetCoeff& a, const CRat& b) { return mul_coeff(b, a); }

template <class C>
struct CoeffTraits;
template <>
struct CoeffTraits<CRat> {
    static CRat zero(const VarSetPtr& v) { return CRat::zero(v); }
};
template <>
struct CoeffTraits<JetCoeff> {
    static JetCoeff zero(const VarSetPtr& v) { return JetCoeff::zero(v); }
};

/// Formal-series element of the Weyl bundle over one chart.
template <class C>
class WeylElement {
  public:
    using Coeff = C;
    using TermMap = std::map<WeylKey, C>;

    WeylElement() = default;
    WeylElement(std::shared_ptr<const Chart> chart, TruncationConfig trunc)
        : chart_(std::move(chart)), trunc_(trunc) {}

    const std::shared_ptr<const Chart>& chart() const { return chart_; }
    const TruncationConfig& truncation() const { return trunc_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const WeylKey& key, const C& coeff) {
        if (coeff.is_zero()) return;
        if (key.grade() > trunc_.max_grade || key.hbar > trunc_.max_hbar) return;  // truncation
        if (key.hbar < 0) throw std::logic_error("WeylElement: negative hbar power");
        auto it = terms_.find(key);
        if (it == terms_.end()) terms_.emplace(key, coeff);
        else {
            it->second = it->second + coeff;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    friend WeylElement operator+(const WeylElement& a, const WeylElement& b) {
        WeylElement r(a);
        for (const auto& [k, c] : b.terms_) r.add_term(k, c);
        return r;
    }
    friend WeylElement operator-(const WeylElement& a, const WeylElement& b) {
        WeylElement r(a);
        for (const auto& [k, c] : b.terms_) r.add_term(k, c.scaled(GaussRat(-1)));
        return r;
    }
    WeylElement scaled(const GaussRat& s) const {
        WeylElement r(chart_, trunc_);
        for (const auto& [k, c] : terms_) r.add_term(k, c.scaled(s));
        return r;
    }

    friend bool operator==(const WeylElement& a, const WeylElement& b) {
        return a.terms_ == b.terms_;
    }

  private:
    std::shared_ptr<const Chart> chart_;
    TruncationConfig trunc_;
    TermMap terms_;
};

namespace weyl_detail {

inline Rational factorial(int n) {
    Rational r(1);
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}
inline Rational falling(int m, int b) {  // m (m-1) ... (m-b+1)
    Rational r(1);
    for (int i = 0; i < b; ++i) r *= (m - i);
    return r;
}

// sign of dx^{S1} ^ dx^{S2} when merging two disjoint ascending index sets
inline int wedge_sign(std::uint32_t s1, std::uint32_t s2) {
    int sign = 1;
    std::uint32_t rest = s1;
    while (rest) {
        std::uint32_t low = rest & (~rest + 1u);
        int i = std::countr_zero(low);
        // moving dx^i from the left block across all elements of s2 smaller than i
        std::uint32_t smaller = s2 & ((1u << i) - 1u);
        if (std::popcount(smaller) % 2 == 1) sign = -sign;
        rest ^= low;
    }
    return sign;
}

// enumerate componentwise multi-indices 0 <= beta <= bound
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

// One term-pair fiber product: the circ-series of the Weyl algebra with the
// Poisson pairing {q_a, p_a} = +1, plus exterior multiplication of the form
// factors. Contributions (prescaled by `pre`) are written into `out`.
template <class CA, class CB, class CR>
void circ_terms(const WeylKey& k1, const CA& c1, const WeylKey& k2, const CB& c2,
                WeylElement<CR>& out, const GaussRat& pre = GaussRat(1)) {
    if ((k1.forms & k2.forms) != 0) return;  // repeated dx -> 0
    const std::size_t n2 = k1.mu.size();
    const std::size_t n = n2 / 2;
    int wsign = wedge_sign(k1.forms, k2.forms);

    // beta_plus[a] differentiates a's position slot and b's momentum slot;
    // beta_minus[a] the other way round (with a minus sign per factor).
    std::vector<int> bound_p(n), bound_m(n);
    for (std::size_t a = 0; a < n; ++a) {
        bound_p[a] = std::min(k1.mu[a], k2.mu[a + n]);
        bound_m[a] = std::min(k1.mu[a + n], k2.mu[a]);
    }
    enumerate_bounded(bound_p, [&](const std::vector<int>& bp) {
        enumerate_bounded(bound_m, [&](const std::vector<int>& bm) {
            int total = 0, minus = 0;
            for (std::size_t a = 0; a < n; ++a) {
                total += bp[a] + bm[a];
                minus += bm[a];
            }
            WeylKey key;
            key.hbar = k1.hbar + k2.hbar + total;
            key.forms = k1.forms | k2.forms;
            key.mu.assign(n2, 0);
            Rational num(1);
            for (std::size_t a = 0; a < n; ++a) {
                key.mu[a] = k1.mu[a] - bp[a] + k2.mu[a] - bm[a];
                key.mu[a + n] = k1.mu[a + n] - bm[a] + k2.mu[a + n] - bp[a];
                num *= falling(k1.mu[a], bp[a]) * falling(k1.mu[a + n], bm[a]) *
                       falling(k2.mu[a], bm[a]) * falling(k2.mu[a + n], bp[a]);
                num /= factorial(bp[a]) * factorial(bm[a]);
            }
            if (key.grade() > out.truncation().max_grade || key.hbar > out.truncation().max_hbar)
                return;
            Rational half_pow(Integer(1), Integer(1) << total);
            GaussRat scale = GaussRat::i_pow(total) * GaussRat(num * half_pow * wsign) * pre;
            if (minus % 2 == 1) scale = -scale;
            out.add_term(key, mul_coeff(c1, c2).scaled(scale));
        });
    });
}

}  // namespace weyl_detail

template <class CA, class CB>
auto graded_product(const WeylElement<CA>& a, const WeylElement<CB>& b)
    -> WeylElement<decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()))> {
    using CR = decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()));
    if (!same_vars(a.chart()->vars(), b.chart()->vars()))
        throw std::invalid_argument("graded_product: chart mismatch");
    if (!(a.truncation() == b.truncation()))
        throw std::invalid_argument("graded_product: truncation mismatch");
    WeylElement<CR> out(a.chart(), a.truncation());
    for (const auto& [k1, c1] : a.terms())
        for (const auto& [k2, c2] : b.terms()) weyl_detail::circ_terms(k1, c1, k2, c2, out);
    return out;
}

/// Graded commutator [a, b] = a•b - (-1)^{q_a q_b} b•a, evaluated per term pair.
template <class CA, class CB>
auto graded_commutator(const WeylElement<CA>& a, const WeylElement<CB>& b)
    -> WeylElement<decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()))> {
    using CR = decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()));
    WeylElement<CR> out(b.chart() ? b.chart() : a.chart(), a.truncation());
    for (const auto& [k1, c1] : a.terms())
        for (const auto& [k2, c2] : b.terms()) {
            weyl_detail::circ_terms(k1, c1, k2, c2, out);
            int q = (k1.form_degree() * k2.form_degree()) % 2 ? 1 : -1;
            weyl_detail::circ_terms(k2, c2, k1, c1, out, GaussRat(q));
        }
    return out;
}

/// The part not containing y's (form factors retained).
template <class C>
WeylElement<C> project_P(const WeylElement<C>& a) {
    WeylElement<C> out(a.chart(), a.truncation());
    for (const auto& [k, c] : a.terms())
        if (k.fiber_degree() == 0) out.add_term(k, c);
    return out;
}

/// Grade-lowering homotopy operator: converts one form factor into a fiber
/// variable with prefactor 1/(l+q); vanishes on the scalar part.
template <class C>
WeylElement<C> delta_inv(const WeylElement<C>& a) {
    WeylElement<C> out(a.chart(), a.truncation());
    for (const auto& [k, c] : a.terms()) {
        int l = k.fiber_degree(), q = k.form_degree();
        if (l + q == 0 || q == 0) continue;
        Rational pref(1, l + q);
        int r = 1;
        std::uint32_t rest = k.forms;
        while (rest) {
            std::uint32_t low = rest & (~rest + 1u);
            int j = std::countr_zero(low);
            WeylKey nk;
            nk.hbar = k.hbar;
            nk.mu = k.mu;
            nk.mu[static_cast<std::size_t>(j)] += 1;
            nk.forms = k.forms ^ low;
            GaussRat s(pref * (r % 2 == 1 ? 1 : -1));
            out.add_term(nk, c.scaled(s));
            rest ^= low;
            ++r;
        }
    }
    return out;
}

/// Exterior derivative on the coefficients: da = dx^i ^ d(coeff)/dx^i.
template <class C>
WeylElement<C> exterior_d(const WeylElement<C>& a) {
    WeylElement<C> out(a.chart(), a.truncation());
    const std::size_t nv = a.chart()->vars()->size();
    for (const auto& [k, c] : a.terms()) {
        for (std::size_t i = 0; i < nv; ++i) {
            std::uint32_t bit = 1u << i;
            if (k.forms & bit) continue;
            C dc = c.derivative(i);
            if (dc.is_zero()) continue;
            WeylKey nk(k);
            nk.forms |= bit;
            int sign = weyl_detail::wedge_sign(bit, k.forms);
            out.add_term(nk, dc.scaled(GaussRat(sign)));
        }
    }
    return out;
}

namespace weyl_detail {

/// Gamma = (1/2) gamma_ijk y^i y^j dx^k built from the chart connection table.
inline WeylElement<CRat> gamma_element(const std::shared_ptr<const Chart>& chart,
                                       TruncationConfig trunc) {
    WeylElement<CRat> g(chart, trunc);
    const std::size_t nv = chart->vars()->size();
    const auto& table = chart->connection();
    if (table.is_zero()) return g;
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nv; ++j)
            for (std::size_t k = 0; k < nv; ++k) {
                const RationalFunction& v =
                    table.at(static_cast<int>(i), static_cast<int>(j), static_cast<int>(k));
                if (v.is_zero()) continue;
                WeylKey key;
                key.hbar = 0;
                key.mu.assign(nv, 0);
                key.mu[i] += 1;
                key.mu[j] += 1;
                key.forms = 1u << k;
                g.add_term(key, CRat(v * Rational(1, 2)));
            }
    return g;
}

/// omega_ij y^i dx^j (the Abelian part of the Fedosov connection).
inline WeylElement<CRat> omega_element(const std::shared_ptr<const Chart>& chart,
                                       TruncationConfig trunc) {
    WeylElement<CRat> g(chart, trunc);
    const std::size_t nv = chart->vars()->size();
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nv; ++j) {
            int w = chart->omega_lower(i, j);
            if (w == 0) continue;
            WeylKey key;
            key.hbar = 0;
            key.mu.assign(nv, 0);
            key.mu[i] += 1;
            key.forms = 1u << j;
            g.add_term(key, CRat::constant(chart->vars(), GaussRat(w)));
        }
    return g;
}

/// (i/hbar)[lhs, a]: the graded commutator is O(hbar) by construction, so the
/// division is an exact grade shift. A leftover hbar^0 part signals a bug or a
/// non-admissible input.
template <class C>
WeylElement<C> i_over_hbar_commutator(const WeylElement<CRat>& lhs, const WeylElement<C>& a) {
    WeylElement<C> com = graded_commutator(lhs, a);
    WeylElement<C> out(a.chart(), a.truncation());
    for (const auto& [k, c] : com.terms()) {
        if (k.hbar == 0)
            throw std::logic_error("connection commutator: negative hbar power after division");
        WeylKey nk(k);
        nk.hbar -= 1;
        out.add_term(nk, c.scaled(GaussRat::unit_i()));
    }
    return out;
}

}  // namespace weyl_detail

enum class ConnectionMode { symplectic, abelian };

/// Symplectic connection: da + (i/hbar)[Gamma, a]. Abelian mode adds
/// (i/hbar)[omega_ij y^i dx^j, a].
template <class C>
WeylElement<C> apply_connection(const WeylElement<C>& a, ConnectionMode mode) {
    WeylElement<C> out = exterior_d(a);
    WeylElement<CRat> gamma = weyl_detail::gamma_element(a.chart(), a.truncation());
    if (!gamma.is_zero()) out = out + weyl_detail::i_over_hbar_commutator(gamma, a);
    if (mode == ConnectionMode::abelian) {
        WeylElement<CRat> om = weyl_detail::omega_element(a.chart(), a.truncation());
        out = out + weyl_detail::i_over_hbar_commutator(om, a);
    }
    return out;
}

/// Formal series in hbar: power -> coefficient.
template <class C>
using HbarSeries = std::map<int, C>;

/// Scalar (y-free, form-free) part of an element as an hbar series.
template <class C>
HbarSeries<C> sigma(const WeylElement<C>& a) {
    HbarSeries<C> out;
    for (const auto& [k, c] : a.terms()) {
        if (k.fiber_degree() != 0 || k.forms != 0) continue;
        auto it = out.find(k.hbar);
        if (it == out.end()) out.emplace(k.hbar, c);
        else it->second = it->second + c;
    }
    return out;
}

namespace weyl_detail {

template <class C>
WeylElement<C> sigma_inv_impl(const WeylElement<C>& seed) {
    // fixed point of a = f + delta_inv(partial a), resolved as the Neumann
    // series a = sum_g (delta_inv o partial)^g f: each application raises the
    // grade by exactly one on flat charts, so the frontier slices are exact
    // and the series closes at the grade bound
    WeylElement<C> a = seed;
    WeylElement<C> frontier = seed;
    for (int g = 0; g <= a.truncation().max_grade; ++g) {
        if (frontier.is_zero()) return a;
        frontier = delta_inv(apply_connection(frontier, ConnectionMode::symplectic));
        a = a + frontier;
    }
    if (!frontier.is_zero())
        throw std::runtime_error("sigma_inv: recursion failed to close within the grade bound");
    return a;
}

}  // namespace weyl_detail

/// Flat section with scalar part f (the sigma^{-1} recursion; flat charts only).
inline WeylElement<CRat> sigma_inv(const CRat& f, std::shared_ptr<const Chart> chart,
                                   TruncationConfig trunc) {
    WeylElement<CRat> seed(chart, trunc);
    WeylKey k;
    k.mu.assign(chart->vars()->size(), 0);
    seed.add_term(k, f);
    return weyl_detail::sigma_inv_impl(seed);
}

inline WeylElement<CRat> sigma_inv(const RationalFunction& f, std::shared_ptr<const Chart> chart,
                                   TruncationConfig trunc) {
    return sigma_inv(CRat(f), std::move(chart), trunc);
}

/// Flat section of an undetermined symbol tracked through jet coordinates.
inline WeylElement<JetCoeff> sigma_inv_jet(std::shared_ptr<const Chart> chart,
                                           TruncationConfig trunc) {
    WeylElement<JetCoeff> seed(chart, trunc);
    WeylKey k;
    k.mu.assign(chart->vars()->size(), 0);
    seed.add_term(k, JetCoeff::seed(chart->vars()));
    return weyl_detail::sigma_inv_impl(seed);
}

/// Fast path for the scalar part of a circ product of two 0-form elements:
/// only full fiber contractions survive the projection.
template <class CA, class CB>
auto star_scalar_part(const WeylElement<CA>& a, const WeylElement<CB>& b)
    -> HbarSeries<decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()))> {
    using CR = decltype(mul_coeff(std::declval<CA>(), std::declval<CB>()));
    const std::size_t n2 = a.chart()->vars()->size();
    const std::size_t n = n2 / 2;
    const int K = a.truncation().max_hbar;

    std::map<std::vector<int>, std::vector<std::pair<int, const CB*>>> by_mu;
    for (const auto& [k, c] : b.terms()) {
        if (k.forms != 0) throw std::invalid_argument("star_scalar_part: form factors present");
        by_mu[k.mu].emplace_back(k.hbar, &c);
    }

    HbarSeries<CR> out;
    for (const auto& [k1, c1] : a.terms()) {
        if (k1.forms != 0) throw std::invalid_argument("star_scalar_part: form factors present");
        std::vector<int> target(n2);
        for (std::size_t i = 0; i < n; ++i) {
            target[i] = k1.mu[i + n];
            target[i + n] = k1.mu[i];
        }
        auto it = by_mu.find(target);
        if (it == by_mu.end()) continue;
        int total = k1.fiber_degree();
        int minus = 0;
        Rational fact(1);
        for (std::size_t i = 0; i < n2; ++i) fact *= weyl_detail::factorial(k1.mu[i]);
        for (std::size_t i = n; i < n2; ++i) minus += k1.mu[i];
        GaussRat scale = GaussRat::i_pow(total) * GaussRat(fact * Rational(1, Integer(1) << total));
        if (minus % 2 == 1) scale = -scale;
        for (const auto& [h2, c2] : it->second) {
            int h = k1.hbar + h2 + total;
            if (h > K) continue;
            CR term = mul_coeff(c1, *c2).scaled(scale);
            if (term.is_zero()) continue;
            auto oit = out.find(h);
            if (oit == out.end()) out.emplace(h, term);
            else {
                oit->second = oit->second + term;
                if (oit->second.is_zero()) out.erase(oit);
            }
        }
    }
    return out;
}

/// Fedosov star product of two observables: scalar part of
/// sigma^{-1}(f) o sigma^{-1}(g), as an exact hbar series.
inline HbarSeries<CRat> star_product(const RationalFunction& f, const RationalFunction& g,
                                     std::shared_ptr<const Chart> chart, TruncationConfig trunc) {
    WeylElement<CRat> A = sigma_inv(f, chart, trunc);
    WeylElement<CRat> B = sigma_inv(g, chart, trunc);
    return star_scalar_part(A, B);
}

/// Star multiplication extracted as a differential operator: derivative
/// multi-index -> hbar power -> exact complex rational coefficient.
struct DifferentialOperator {
    std::shared_ptr<const Chart> chart;
    std::map<MultiIndex, std::map<int, CRat>> terms;

    void add(const MultiIndex& a, int hbar, const CRat& c) {
        if (c.is_zero()) return;
        auto& slot = terms[a];
        auto it = slot.find(hbar);
        if (it == slot.end()) slot.emplace(hbar, c);
        else {
            it->second = it->second + c;
            if (it->second.is_zero()) slot.erase(it);
        }
        if (slot.empty()) terms.erase(a);
    }

    /// hbar-homogeneous slice (exact).
    std::map<MultiIndex, CRat> hbar_part(int k) const {
        std::map<MultiIndex, CRat> out;
        for (const auto& [a, by_h] : terms) {
            auto it = by_h.find(k);
            if (it != by_h.end()) out.emplace(a, it->second);
        }
        return out;
    }

    /// Apply to a target supplying exact/analytic partials at a point.
    std::complex<double> apply(
        const std::function<std::complex<double>(const MultiIndex&)>& partials,
        const std::vector<double>& point, double hbar) const {
        std::complex<double> acc{0.0, 0.0};
        for (const auto& [a, by_h] : terms) {
            std::complex<double> dW = partials(a);
            if (dW == std::complex<double>(0.0, 0.0)) continue;
            for (const auto& [k, c] : by_h) acc += std::pow(hbar, k) * c.eval(point) * dW;
        }
        return acc;
    }

    std::string pretty() const {
        std::ostringstream os;
        for (const auto& [a, by_h] : terms) {
            for (const auto& [k, c] : by_h) {
                os << "hbar^" << k << " ";
                if (a.order() == 0) {
                    os << "1";
                } else {
                    os << "d^" << a.order() << "/";
                    for (std::size_t i = 0; i < a.idx.size(); ++i) {
                        for (int rep = 0; rep < a.idx[i]; ++rep)
                            os << "d" << chart->vars()->name(i);
                    }
                }
                os << " : " << c.str() << "\n";
            }
        }
        return os.str();
    }

    friend bool operator==(const DifferentialOperator& a, const DifferentialOperator& b) {
        return a.terms == b.terms;
    }
};

namespace weyl_detail {

inline DifferentialOperator collect_operator(const HbarSeries<JetCoeff>& s,
                                             std::shared_ptr<const Chart> chart) {
    DifferentialOperator op;
    op.chart = std::move(chart);
    for (const auto& [h, jet] : s)
        for (const auto& [alpha, c] : jet.parts) op.add(alpha, h, c);
    return op;
}

}  // namespace weyl_detail

/// g |-> f * g as a differential operator acting on g; the jet section can be
/// shared between several derivations on one chart.
inline DifferentialOperator star_left_operator(const WeylElement<CRat>& flat_f,
                                               const WeylElement<JetCoeff>& jet_section) {
    return weyl_detail::collect_operator(star_scalar_part(flat_f, jet_section), flat_f.chart());
}

inline DifferentialOperator star_left_operator(const RationalFunction& f,
                                               std::shared_ptr<const Chart> chart,
                                               TruncationConfig trunc) {
    return star_left_operator(sigma_inv(f, chart, trunc), sigma_inv_jet(chart, trunc));
}

/// g |-> g * f as a differential operator acting on g.
inline DifferentialOperator star_right_operator(const WeylElement<CRat>& flat_f,
                                                const WeylElement<JetCoeff>& jet_section) {
    return weyl_detail::collect_operator(star_scalar_part(jet_section, flat_f), flat_f.chart());
}

inline DifferentialOperator star_right_operator(const RationalFunction& f,
                                                std::shared_ptr<const Chart> chart,
                                                TruncationConfig trunc) {
    return star_right_operator(sigma_inv(f, chart, trunc), sigma_inv_jet(chart, trunc));
}

}  // namespace phasespace
