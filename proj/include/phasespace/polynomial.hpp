#pragma once

#include "phasespace/rational.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasespace {

/// Immutable ordered list of variable names shared by all polynomials of one ring.
class VarSet {
  public:
    explicit VarSet(std::vector<std::string> names) : names_(std::move(names)) {}

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<std::size_t> index_of(const std::string& n) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == n) return i;
        return std::nullopt;
    }

    friend bool operator==(const VarSet& a, const VarSet& b) { return a.names_ == b.names_; }

  private:
    std::vector<std::string> names_;
};

using VarSetPtr = std::shared_ptr<const VarSet>;

inline VarSetPtr make_vars(std::vector<std::string> names) {
    return std::make_shared<const VarSet>(std::move(names));
}

inline bool same_vars(const VarSetPtr& a, const VarSetPtr& b) {
    return a == b || (a && b && *a == *b);
}

/// Exponent vector of one monomial.
struct Monomial {
    std::vector<int> exp;

    explicit Monomial(std::size_t nvars = 0) : exp(nvars, 0) {}
    explicit Monomial(std::vector<int> e) : exp(std::move(e)) {}

    int degree() const {
        int d = 0;
        for (int e : exp) d += e;
        return d;
    }
    bool divides(const Monomial& other) const {
        for (std::size_t i = 0; i < exp.size(); ++i)
            if (exp[i] > other.exp[i]) return false;
        return true;
    }
    Monomial operator*(const Monomial& o) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < exp.size(); ++i) r.exp[i] += o.exp[i];
        return r;
    }
    Monomial divide(const Monomial& o) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < exp.size(); ++i) r.exp[i] -= o.exp[i];
        return r;
    }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.exp == b.exp; }
};

// Graded lexicographic order: total degree first, then lexicographic with the
// first variable most significant. Ascending in std::map; leading term = last.
struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        // lex: earlier variable more significant, larger exponent = larger monomial
        for (std::size_t i = 0; i < a.exp.size(); ++i) {
            if (a.exp[i] != b.exp[i]) return a.exp[i] < b.exp[i];
        }
        return false;
    }
};

/// Sparse multivariate polynomial over exact rationals.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, Rational, GradedLexLess>;

    Polynomial() = default;
    explicit Polynomial(VarSetPtr vars) : vars_(std::move(vars)) {}

    static Polynomial zero(VarSetPtr vars) { return Polynomial(std::move(vars)); }

    static Polynomial constant(VarSetPtr vars, Rational c) {
        Polynomial p(std::move(vars));
        if (c != 0) p.terms_.emplace(Monomial(p.vars_->size()), std::move(c));
        return p;
    }

    static Polynomial variable(VarSetPtr vars, std::size_t idx) {
        Polynomial p(vars);
        if (idx >= vars->size()) throw std::out_of_range("Polynomial::variable: bad index");
        Monomial m(vars->size());
        m.exp[idx] = 1;
        p.terms_.emplace(std::move(m), Rational(1));
        return p;
    }

    static Polynomial term(VarSetPtr vars, Monomial m, Rational c) {
        Polynomial p(std::move(vars));
        if (c != 0) p.terms_.emplace(std::move(m), std::move(c));
        return p;
    }

    const VarSetPtr& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.degree() == 0);
    }
    Rational constant_value() const {
        if (terms_.empty()) return Rational(0);
        if (!is_constant()) throw std::logic_error("Polynomial: not a constant");
        return terms_.begin()->second;
    }

    int degree() const {
        if (terms_.empty()) return -1;
        return terms_.rbegin()->first.degree();
    }
    int degree_in(std::size_t var) const {
        int d = -1;
        for (const auto& [m, c] : terms_) d = std::max(d, m.exp[var]);
        return d;
    }
    bool depends_on(std::size_t var) const { return degree_in(var) > 0; }

    const Monomial& leading_monomial() const {
        if (terms_.empty()) throw std::logic_error("Polynomial: leading term of zero");
        return terms_.rbegin()->first;
    }
    const Rational& leading_coefficient() const {
        if (terms_.empty()) throw std::logic_error("Polynomial: leading term of zero");
        return terms_.rbegin()->second;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        check_compatible(a, b);
        Polynomial r(a);
        for (const auto& [m, c] : b.terms_) r.add_term(m, c);
        return r;
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        check_compatible(a, b);
        Polynomial r(a);
        for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
        return r;
    }
    friend Polynomial operator-(const Polynomial& a) {
        Polynomial r(a);
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        check_compatible(a, b);
        Polynomial r(a.vars_ ? a.vars_ : b.vars_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
        return r;
    }
    friend Polynomial operator*(const Polynomial& a, const Rational& s) {
        Polynomial r(a.vars_);
        if (s == 0) return r;
        r.terms_ = a.terms_;
        for (auto& [m, c] : r.terms_) c *= s;
        return r;
    }
    friend Polynomial operator*(const Rational& s, const Polynomial& a) { return a * s; }

    Polynomial& operator+=(const Polynomial& o) { *this = *this + o; return *this; }
    Polynomial& operator-=(const Polynomial& o) { *this = *this - o; return *this; }
    Polynomial& operator*=(const Polynomial& o) { *this = *this * o; return *this; }

    Polynomial pow(unsigned k) const {
        Polynomial r = constant(vars_, Rational(1));
        Polynomial base(*this);
        while (k) {
            if (k & 1u) r = r * base;
            base = base * base;
            k >>= 1u;
        }
        return r;
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        check_compatible(a, b);
        return a.terms_ == b.terms_;
    }
    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    Polynomial derivative(std::size_t var) const {
        Polynomial r(vars_);
        for (const auto& [m, c] : terms_) {
            if (m.exp[var] == 0) continue;
            Monomial d(m);
            Rational nc = c * m.exp[var];
            d.exp[var] -= 1;
            r.add_term(d, nc);
        }
        return r;
    }

    template <class T>
    T eval(const std::vector<T>& point) const {
        if (point.size() != vars_->size()) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
        T acc{};
        for (const auto& [m, c] : terms_) {
            T t = coeff_cast<T>(c);
            for (std::size_t i = 0; i < m.exp.size(); ++i)
                for (int k = 0; k < m.exp[i]; ++k) t = t * point[i];
            acc = acc + t;
        }
        return acc;
    }

    // --- gcd machinery ------------------------------------------------------

    /// Exact division; nullopt when b does not divide a.
    static std::optional<Polynomial> exact_divide(const Polynomial& a, const Polynomial& b) {
        check_compatible(a, b);
        if (b.is_zero()) throw std::domain_error("Polynomial: division by zero");
        Polynomial rem(a);
        Polynomial q(a.vars_ ? a.vars_ : b.vars_);
        while (!rem.is_zero()) {
            const Monomial& lm = rem.leading_monomial();
            const Monomial& lb = b.leading_monomial();
            if (!lb.divides(lm)) return std::nullopt;
            Monomial t = lm.divide(lb);
            Rational tc = rem.leading_coefficient() / b.leading_coefficient();
            q.add_term(t, tc);
            rem = rem - Polynomial::term(rem.vars_, t, tc) * b;
        }
        return q;
    }

    /// Multivariate gcd (primitive PRS), normalized to a monic leading coefficient.
    static Polynomial gcd(const Polynomial& a, const Polynomial& b) {
        Polynomial g = gcd_raw(a, b);
        if (g.is_zero()) return g;
        return g * (Rational(1) / g.leading_coefficient());
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        // print leading (highest) terms first
        for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
            const auto& [m, c] = *it;
            Rational ac = c < 0 ? Rational(-c) : c;
            if (first) {
                if (c < 0) os << "-";
                first = false;
            } else {
                os << (c < 0 ? " - " : " + ");
            }
            bool havevars = m.degree() > 0;
            if (ac != 1 || !havevars) {
                os << ac;
                if (havevars) os << "*";
            }
            bool firstvar = true;
            for (std::size_t i = 0; i < m.exp.size(); ++i) {
                if (m.exp[i] == 0) continue;
                if (!firstvar) os << "*";
                firstvar = false;
                os << vars_->name(i);
                if (m.exp[i] > 1) os << "^" << m.exp[i];
            }
        }
        return os.str();
    }

  private:
    template <class T>
    static T coeff_cast(const Rational& c) {
        if constexpr (std::is_same_v<T, Rational>) return c;
        else return T(to_double(c));
    }

    static void check_compatible(const Polynomial& a, const Polynomial& b) {
        if (!same_vars(a.vars_, b.vars_))
            throw std::invalid_argument("Polynomial: variable-set mismatch");
    }

    // Univariate-in-var view: dense coefficient list (polynomials in remaining vars).
    std::vector<Polynomial> coeffs_in(std::size_t var) const {
        std::vector<Polynomial> out(static_cast<std::size_t>(std::max(0, degree_in(var))) + 1,
                                    Polynomial(vars_));
        for (const auto& [m, c] : terms_) {
            Monomial red(m);
            int e = red.exp[var];
            red.exp[var] = 0;
            out[static_cast<std::size_t>(e)].add_term(red, c);
        }
        return out;
    }

    static Polynomial from_coeffs_in(std::size_t var, const std::vector<Polynomial>& cs, VarSetPtr vars) {
        Polynomial r(vars);
        for (std::size_t e = 0; e < cs.size(); ++e) {
            for (const auto& [m, c] : cs[e].terms_) {
                Monomial full(m);
                full.exp[var] += static_cast<int>(e);
                r.add_term(full, c);
            }
        }
        return r;
    }

    // content wrt var: gcd of the var-coefficients (recursion into fewer variables)
    static Polynomial content_in(const Polynomial& p, std::size_t var) {
        auto cs = p.coeffs_in(var);
        Polynomial g(p.vars_);
        for (const auto& c : cs) {
            if (c.is_zero()) continue;
            g = gcd_raw(g, c);
            if (g.is_constant() && !g.is_zero()) break;
        }
        return g;
    }

    // pseudo-remainder of a by b wrt var (both nonzero, deg_var a >= deg_var b)
    static Polynomial prem(const Polynomial& a, const Polynomial& b, std::size_t var) {
        auto ca = a.coeffs_in(var);
        auto cb = b.coeffs_in(var);
        auto lcb = cb.back();
        int db = static_cast<int>(cb.size()) - 1;
        std::vector<Polynomial> r = ca;
        while (static_cast<int>(r.size()) - 1 >= db) {
            while (!r.empty() && r.back().is_zero()) r.pop_back();
            if (static_cast<int>(r.size()) - 1 < db) break;
            int dr = static_cast<int>(r.size()) - 1;
            Polynomial lr = r.back();
            // r <- lcb*r - lr * x^{dr-db} * b
            for (auto& c : r) c = c * lcb;
            for (int j = 0; j <= db; ++j) {
                std::size_t idx = static_cast<std::size_t>(dr - db + j);
                r[idx] = r[idx] - lr * cb[static_cast<std::size_t>(j)];
            }
            r.pop_back();
        }
        return from_coeffs_in(var, r, a.vars_ ? a.vars_ : b.vars_);
    }

    static Polynomial gcd_raw(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        if (a.is_constant() || b.is_constant())
            return constant(a.vars_ ? a.vars_ : b.vars_, Rational(1));

        // main variable: first one appearing in either operand
        std::size_t var = 0;
        const std::size_t n = a.vars_->size();
        while (var < n && a.degree_in(var) <= 0 && b.degree_in(var) <= 0) ++var;

        if (a.degree_in(var) <= 0) {
            // gcd is free of var; it must divide every var-coefficient of b
            return gcd_raw(a, content_in(b, var));
        }
        if (b.degree_in(var) <= 0) return gcd_raw(content_in(a, var), b);

        Polynomial ca = content_in(a, var);
        Polynomial cb = content_in(b, var);
        Polynomial pa = *exact_divide(a, ca);
        Polynomial pb = *exact_divide(b, cb);
        Polynomial gc = gcd_raw(ca, cb);

        // primitive PRS
        Polynomial A = pa, B = pb;
        if (A.degree_in(var) < B.degree_in(var)) std::swap(A, B);
        while (!B.is_zero()) {
            Polynomial R = prem(A, B, var);
            A = B;
            if (R.is_zero()) { B = R; break; }
            Polynomial cr = content_in(R, var);
            B = *exact_divide(R, cr);
        }
        return gc * A;
    }

    VarSetPtr vars_;
    TermMap terms_;
};

}  // namespace phasespace
