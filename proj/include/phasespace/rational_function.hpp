#pragma once

#include "phasespace/polynomial.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace phasespace {

/// Multivariate rational function in canonical form: numerator and denominator
/// share no polynomial factor and the denominator is monic under graded lex.
/// Zero is uniquely 0/1.
class RationalFunction {
  public:
    RationalFunction() = default;
    explicit RationalFunction(Polynomial num)
        : num_(std::move(num)), den_(Polynomial::constant(num_.vars(), Rational(1))) {}
    RationalFunction(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw std::domain_error("RationalFunction: zero denominator");
        canonicalize();
    }

    static RationalFunction zero(const VarSetPtr& vars) {
        return RationalFunction(Polynomial::zero(vars));
    }
    static RationalFunction constant(const VarSetPtr& vars, const Rational& c) {
        return RationalFunction(Polynomial::constant(vars, c));
    }
    static RationalFunction variable(const VarSetPtr& vars, std::size_t idx) {
        return RationalFunction(Polynomial::variable(vars, idx));
    }

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    const VarSetPtr& vars() const { return num_.vars(); }

    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    Rational constant_value() const { return num_.constant_value() / den_.constant_value(); }
    bool is_polynomial() const { return den_.is_constant(); }

    friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RationalFunction operator-(const RationalFunction& a) {
        RationalFunction r(a);
        r.num_ = -r.num_;
        return r;
    }
    friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
        return RationalFunction(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
        if (b.is_zero()) throw std::domain_error("RationalFunction: division by zero");
        return RationalFunction(a.num_ * b.den_, a.den_ * b.num_);
    }
    friend RationalFunction operator*(const RationalFunction& a, const Rational& s) {
        return RationalFunction(a.num_ * s, a.den_);
    }
    friend RationalFunction operator*(const Rational& s, const RationalFunction& a) { return a * s; }

    RationalFunction& operator+=(const RationalFunction& o) { *this = *this + o; return *this; }
    RationalFunction& operator-=(const RationalFunction& o) { *this = *this - o; return *this; }
    RationalFunction& operator*=(const RationalFunction& o) { *this = *this * o; return *this; }

    friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const RationalFunction& a, const RationalFunction& b) { return !(a == b); }

    /// Exact partial derivative (quotient rule, re-canonicalized).
    RationalFunction derivative(std::size_t var) const {
        return RationalFunction(num_.derivative(var) * den_ - num_ * den_.derivative(var),
                                den_ * den_);
    }

    template <class T>
    T eval(const std::vector<T>& point) const {
        T d = den_.eval<T>(point);
        if (d == T{}) throw std::domain_error("RationalFunction: evaluation at a pole");
        return num_.eval<T>(point) / d;
    }

    std::string str() const {
        if (den_.is_constant() && den_.constant_value() == 1) return num_.str();
        std::string n = num_.terms().size() > 1 ? "(" + num_.str() + ")" : num_.str();
        std::string d = den_.terms().size() > 1 ? "(" + den_.str() + ")" : den_.str();
        return n + "/" + d;
    }

  private:
    void canonicalize() {
        if (num_.is_zero()) {
            den_ = Polynomial::constant(num_.vars(), Rational(1));
            return;
        }
        if (den_.is_constant()) {
            Rational c = den_.constant_value();
            if (c != 1) {
                num_ = num_ * (Rational(1) / c);
                den_ = Polynomial::constant(num_.vars(), Rational(1));
            }
            return;
        }
        if (den_.terms().size() == 1) {
            // monomial denominator (the common case here: powers of one chart
            // variable): cancel the shared monomial factor directly
            const Monomial& dm = den_.terms().begin()->first;
            Monomial common(dm);
            for (const auto& [m, c] : num_.terms())
                for (std::size_t i = 0; i < common.exp.size(); ++i)
                    common.exp[i] = std::min(common.exp[i], m.exp[i]);
            if (common.degree() > 0) {
                Polynomial n2(num_.vars());
                for (const auto& [m, c] : num_.terms()) n2.add_term(m.divide(common), c);
                num_ = n2;
                den_ = Polynomial::term(den_.vars(), dm.divide(common),
                                        den_.terms().begin()->second);
            }
            if (den_.is_constant()) {
                canonicalize();
                return;
            }
            Rational lc0 = den_.leading_coefficient();
            if (lc0 != 1) {
                Rational inv = Rational(1) / lc0;
                num_ = num_ * inv;
                den_ = den_ * inv;
            }
            return;
        }
        Polynomial g = Polynomial::gcd(num_, den_);
        if (!(g.is_constant() && g.constant_value() == 1)) {
            num_ = *Polynomial::exact_divide(num_, g);
            den_ = *Polynomial::exact_divide(den_, g);
        }
        Rational lc = den_.leading_coefficient();
        if (lc != 1) {
            Rational inv = Rational(1) / lc;
            num_ = num_ * inv;
            den_ = den_ * inv;
        }
    }

    Polynomial num_;
    Polynomial den_;
};

/// Complex rational function: re + i*im with exact parts.
struct CRat {
    RationalFunction re;
    RationalFunction im;

    CRat() = default;
    explicit CRat(RationalFunction r) : re(std::move(r)), im(RationalFunction::zero(re.vars())) {}
    CRat(RationalFunction r, RationalFunction i) : re(std::move(r)), im(std::move(i)) {}

    static CRat zero(const VarSetPtr& vars) {
        return CRat(RationalFunction::zero(vars), RationalFunction::zero(vars));
    }
    static CRat constant(const VarSetPtr& vars, const GaussRat& c) {
        return CRat(RationalFunction::constant(vars, c.re), RationalFunction::constant(vars, c.im));
    }

    const VarSetPtr& vars() const { return re.vars(); }
    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    bool is_real() const { return im.is_zero(); }

    CRat conj() const { return {re, -im}; }

    friend CRat operator+(const CRat& a, const CRat& b) { return {a.re + b.re, a.im + b.im}; }
    friend CRat operator-(const CRat& a, const CRat& b) { return {a.re - b.re, a.im - b.im}; }
    friend CRat operator-(const CRat& a) { return {-a.re, -a.im}; }
    friend CRat operator*(const CRat& a, const CRat& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend CRat operator/(const CRat& a, const CRat& b) {
        RationalFunction n = b.re * b.re + b.im * b.im;
        if (n.is_zero()) throw std::domain_error("CRat: division by zero");
        CRat p = a * b.conj();
        return {p.re / n, p.im / n};
    }
    CRat& operator+=(const CRat& o) { *this = *this + o; return *this; }
    CRat& operator*=(const CRat& o) { *this = *this * o; return *this; }

    CRat scaled(const GaussRat& s) const {
        RationalFunction sre = RationalFunction::constant(vars(), s.re);
        RationalFunction sim = RationalFunction::constant(vars(), s.im);
        return {re * sre - im * sim, re * sim + im * sre};
    }

    CRat derivative(std::size_t var) const { return {re.derivative(var), im.derivative(var)}; }

    friend bool operator==(const CRat& a, const CRat& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const CRat& a, const CRat& b) { return !(a == b); }

    std::complex<double> eval(const std::vector<double>& point) const {
        return {re.eval<double>(point), im.eval<double>(point)};
    }

    std::string str() const {
        if (im.is_zero()) return re.str();
        if (re.is_zero()) return "i*" + im.str();
        return re.str() + " + i*" + im.str();
    }
};

}  // namespace phasespace
