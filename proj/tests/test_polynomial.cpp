#include "phasespace/polynomial.hpp"
#include "phasespace/rational_function.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace phasespace;
using phasespace::testing::random_polynomial;
using phasespace::testing::random_ratfun;

namespace {
VarSetPtr aa_vars() { return make_vars({"T", "chi", "H", "L"}); }

RationalFunction rf(const VarSetPtr& v, const std::string& text) {
    // tiny builder for test fixtures: H and L only
    auto H = RationalFunction::variable(v, 2);
    auto L = RationalFunction::variable(v, 3);
    if (text == "1/(2H)") return RationalFunction::constant(v, Rational(1)) / (H * Rational(2));
    if (text == "L/(2H^2)") return L / (H * H * Rational(2));
    if (text == "-2H") return H * Rational(-2);
    throw std::logic_error("fixture");
}
}  // namespace

TEST_CASE("rational function arithmetic on the connection coefficients") {
    auto v = aa_vars();
    auto H = RationalFunction::variable(v, 2);
    auto L = RationalFunction::variable(v, 3);
    auto half_inv_H = rf(v, "1/(2H)");

    SECTION("like-term addition: 1/(2H) + 1/(2H) = 1/H") {
        auto sum = half_inv_H + half_inv_H;
        REQUIRE(sum == RationalFunction::constant(v, Rational(1)) / H);
    }
    SECTION("cancellation: (L/(2H^2)) * 2H = L/H") {
        auto prod = rf(v, "L/(2H^2)") * (H * Rational(2));
        REQUIRE(prod == L / H);
    }
    SECTION("cancellation: (-2H)/H = -2") {
        auto q = rf(v, "-2H") / H;
        REQUIRE(q.is_constant());
        REQUIRE(q.constant_value() == Rational(-2));
    }
    SECTION("division by zero is rejected") {
        REQUIRE_THROWS_AS(H / RationalFunction::zero(v), std::domain_error);
    }
}

TEST_CASE("canonical form: monic denominator, no common factor, unique zero") {
    auto v = aa_vars();
    auto H = Polynomial::variable(v, 2);
    auto L = Polynomial::variable(v, 3);

    RationalFunction a(L * H, H * H * Rational(2));  // LH / 2H^2 -> (1/2 L)/H
    REQUIRE(a.den() == H);
    REQUIRE(a.num() == L * Rational(1, 2));
    REQUIRE(a.den().leading_coefficient() == 1);

    RationalFunction z(Polynomial::zero(v), H);
    REQUIRE(z.is_zero());
    REQUIRE(z.den() == Polynomial::constant(v, Rational(1)));
}

TEST_CASE("exact partial derivatives with the quotient rule") {
    auto v = aa_vars();
    auto H = RationalFunction::variable(v, 2);
    auto L = RationalFunction::variable(v, 3);
    auto one = RationalFunction::constant(v, Rational(1));

    SECTION("d/dH (-1/(2H)) = 1/(2H^2)") {
        auto f = -(one / (H * Rational(2)));
        REQUIRE(f.derivative(2) == one / (H * H * Rational(2)));
    }
    SECTION("d/dL (L/(2H^2)) = 1/(2H^2)") {
        auto f = L / (H * H * Rational(2));
        REQUIRE(f.derivative(3) == one / (H * H * Rational(2)));
    }
    SECTION("d/dpx ((px^2+py^2)/2M) = px/M with M = 3/2") {
        auto cart = make_vars({"x", "y", "px", "py"});
        auto px = RationalFunction::variable(cart, 2);
        auto py = RationalFunction::variable(cart, 3);
        Rational M(3, 2);
        auto ham = (px * px + py * py) / RationalFunction::constant(cart, 2 * M);
        REQUIRE(ham.derivative(2) == px / RationalFunction::constant(cart, M));
    }
}

TEST_CASE("ring axioms hold exactly on random elements") {
    std::mt19937 rng(12345);
    auto v = aa_vars();
    for (int trial = 0; trial < 60; ++trial) {
        auto a = random_ratfun(rng, v);
        auto b = random_ratfun(rng, v);
        auto c = random_ratfun(rng, v);
        REQUIRE((a + b) + c == a + (b + c));
        REQUIRE(a * (b + c) == a * b + a * c);
        REQUIRE(a * b == b * a);
    }
}

TEST_CASE("derivative is linear and satisfies the Leibniz rule") {
    std::mt19937 rng(777);
    auto v = aa_vars();
    for (int trial = 0; trial < 40; ++trial) {
        auto a = random_ratfun(rng, v);
        auto b = random_ratfun(rng, v);
        for (std::size_t var : {2u, 3u}) {
            REQUIRE((a + b).derivative(var) == a.derivative(var) + b.derivative(var));
            REQUIRE((a * b).derivative(var) == a.derivative(var) * b + a * b.derivative(var));
        }
    }
}

TEST_CASE("gcd and exact division on structured polynomials") {
    std::mt19937 rng(2024);
    auto v = aa_vars();
    for (int trial = 0; trial < 30; ++trial) {
        auto a = random_polynomial(rng, v, 2, 3);
        auto b = random_polynomial(rng, v, 2, 3);
        auto g = random_polynomial(rng, v, 2, 2);
        if (a.is_zero() || b.is_zero() || g.is_zero()) continue;
        auto ag = a * g;
        auto bg = b * g;
        auto d = Polynomial::gcd(ag, bg);
        // g divides the gcd
        auto q = Polynomial::exact_divide(d, Polynomial::gcd(d, g));
        REQUIRE(q.has_value());
        REQUIRE(Polynomial::exact_divide(ag, d).has_value());
        REQUIRE(Polynomial::exact_divide(bg, d).has_value());
        auto gd = Polynomial::gcd(d, g);
        REQUIRE(Polynomial::exact_divide(g, gd).value().is_constant());
    }
}

TEST_CASE("graded lex order fixes the leading term") {
    auto v = aa_vars();
    auto H = Polynomial::variable(v, 2);
    auto L = Polynomial::variable(v, 3);
    auto T = Polynomial::variable(v, 0);
    auto p = H * H + T * L;  // same degree; T*L has the earlier variable
    REQUIRE(p.leading_monomial().exp == std::vector<int>({1, 0, 0, 1}));
    auto q = H * H * H + T * L;
    REQUIRE(q.leading_monomial().exp == std::vector<int>({0, 0, 3, 0}));
}
