#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <string>

namespace phasespace {

using Integer  = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Gaussian rational: re + i*im with exact rational parts.
struct GaussRat {
    Rational re{0};
    Rational im{0};

    GaussRat() = default;
    GaussRat(int v) : re(v) {}                        // NOLINT(google-explicit-constructor)
    GaussRat(Rational r) : re(std::move(r)) {}        // NOLINT(google-explicit-constructor)
    GaussRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

    static GaussRat unit_i() { return {Rational(0), Rational(1)}; }

    // i^k for any integer k (k mod 4 decides the value).
    static GaussRat i_pow(long k) {
        long m = ((k % 4) + 4) % 4;
        switch (m) {
            case 0: return {Rational(1), Rational(0)};
            case 1: return {Rational(0), Rational(1)};
            case 2: return {Rational(-1), Rational(0)};
            default: return {Rational(0), Rational(-1)};
        }
    }

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    GaussRat conj() const { return {re, -im}; }

    friend GaussRat operator+(const GaussRat& a, const GaussRat& b) { return {a.re + b.re, a.im + b.im}; }
    friend GaussRat operator-(const GaussRat& a, const GaussRat& b) { return {a.re - b.re, a.im - b.im}; }
    friend GaussRat operator-(const GaussRat& a) { return {-a.re, -a.im}; }
    friend GaussRat operator*(const GaussRat& a, const GaussRat& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend GaussRat operator/(const GaussRat& a, const GaussRat& b) {
        Rational n = b.re * b.re + b.im * b.im;
        if (n == 0) throw std::domain_error("GaussRat: division by zero");
        GaussRat p = a * b.conj();
        return {p.re / n, p.im / n};
    }
    GaussRat& operator+=(const GaussRat& o) { re += o.re; im += o.im; return *this; }
    GaussRat& operator-=(const GaussRat& o) { re -= o.re; im -= o.im; return *this; }
    GaussRat& operator*=(const GaussRat& o) { *this = *this * o; return *this; }

    friend bool operator==(const GaussRat& a, const GaussRat& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }

    std::complex<double> to_complex() const { return {to_double(re), to_double(im)}; }
};

}  // namespace phasespace
