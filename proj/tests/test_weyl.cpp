#include "phasespace/weyl.hpp"

#include "phasespace/moyal.hpp"
#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <functional>
#include <random>

using namespace phasespace;

namespace {

std::shared_ptr<const Chart> cart() {
    static auto c = std::make_shared<const Chart>(Chart::cartesian());
    return c;
}
std::shared_ptr<const Chart> aa() {
    static auto c = std::make_shared<const Chart>(Chart::action_angle());
    return c;
}

WeylKey key(int hbar, std::vector<int> mu, std::uint32_t forms = 0) {
    WeylKey k;
    k.hbar = hbar;
    k.mu = std::move(mu);
    k.forms = forms;
    return k;
}

WeylElement<CRat> term(const std::shared_ptr<const Chart>& chart, TruncationConfig tc,
                       const WeylKey& k, const CRat& c) {
    WeylElement<CRat> e(chart, tc);
    e.add_term(k, c);
    return e;
}

CRat crat_const(const std::shared_ptr<const Chart>& chart, const GaussRat& g) {
    return CRat::constant(chart->vars(), g);
}

WeylElement<CRat> random_element(std::mt19937& rng, const std::shared_ptr<const Chart>& chart,
                                 TruncationConfig tc, int max_terms, int max_deg,
                                 bool with_forms) {
    std::uniform_int_distribution<int> nterms(1, max_terms);
    std::uniform_int_distribution<int> deg(0, max_deg);
    std::uniform_int_distribution<int> var(0, 3);
    std::uniform_int_distribution<int> formbits(0, with_forms ? 15 : 0);
    WeylElement<CRat> e(chart, tc);
    int n = nterms(rng);
    for (int t = 0; t < n; ++t) {
        WeylKey k;
        k.hbar = 0;
        k.mu.assign(4, 0);
        int budget = deg(rng);
        for (int d = 0; d < budget; ++d) k.mu[static_cast<std::size_t>(var(rng))] += 1;
        k.forms = static_cast<std::uint32_t>(formbits(rng));
        Polynomial p = phasespace::testing::random_polynomial(rng, chart->vars(), 2, 2);
        e.add_term(k, CRat(RationalFunction(p)));
    }
    return e;
}

// Independent oracle for flat charts: the Taylor lift
//   sigma^{-1}(f) = sum_alpha (1/alpha!) (d^alpha f) y^alpha.
WeylElement<CRat> taylor_lift(const RationalFunction& f, const std::shared_ptr<const Chart>& chart,
                              TruncationConfig tc) {
    WeylElement<CRat> out(chart, tc);
    std::vector<std::vector<int>> alphas;
    std::vector<int> cur(4, 0);
    std::function<void(std::size_t, int)> gen = [&](std::size_t pos, int remaining) {
        if (pos == 4) {
            alphas.push_back(cur);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            cur[pos] = e;
            gen(pos + 1, remaining - e);
        }
        cur[pos] = 0;
    };
    gen(0, tc.max_grade);
    for (const auto& alpha : alphas) {
        RationalFunction d = f;
        Rational fact(1);
        for (std::size_t v = 0; v < 4; ++v) {
            for (int r = 0; r < alpha[v]; ++r) d = d.derivative(v);
            for (int r = 2; r <= alpha[v]; ++r) fact *= r;
        }
        if (d.is_zero()) continue;
        out.add_term(key(0, alpha), CRat(d * (Rational(1) / fact)));
    }
    return out;
}

Polynomial embed_in_moyal_vars(const Polynomial& p, const VarSetPtr& mvars) {
    Polynomial out(mvars);
    for (const auto& [m, c] : p.terms()) {
        Monomial big(mvars->size());
        for (std::size_t i = 0; i < m.exp.size(); ++i) big.exp[i] = m.exp[i];
        out.add_term(big, c);
    }
    return out;
}

}  // namespace

TEST_CASE("fiber product: lowest contraction term") {
    TruncationConfig tc(6, 3);
    auto chart = cart();
    // y^x o y^px = y^x y^px + (i hbar / 2) {x, px}
    auto yx = term(chart, tc, key(0, {1, 0, 0, 0}), crat_const(chart, GaussRat(1)));
    auto ypx = term(chart, tc, key(0, {0, 0, 1, 0}), crat_const(chart, GaussRat(1)));
    auto prod = graded_product(yx, ypx);

    WeylElement<CRat> expected(chart, tc);
    expected.add_term(key(0, {1, 0, 1, 0}), crat_const(chart, GaussRat(1)));
    expected.add_term(key(1, {0, 0, 0, 0}), crat_const(chart, GaussRat(Rational(0), Rational(1, 2))));
    REQUIRE(prod == expected);

    // opposite order flips the contraction sign
    auto prod2 = graded_product(ypx, yx);
    WeylElement<CRat> expected2(chart, tc);
    expected2.add_term(key(0, {1, 0, 1, 0}), crat_const(chart, GaussRat(1)));
    expected2.add_term(key(1, {0, 0, 0, 0}),
                       crat_const(chart, GaussRat(Rational(0), Rational(-1, 2))));
    REQUIRE(prod2 == expected2);
}

TEST_CASE("unit element and associativity") {
    TruncationConfig tc(6, 3);
    auto chart = cart();
    auto one = term(chart, tc, key(0, {0, 0, 0, 0}), crat_const(chart, GaussRat(1)));
    std::mt19937 rng(2718);

    for (int trial = 0; trial < 200; ++trial) {
        auto a = random_element(rng, chart, tc, 3, 3, false);
        auto b = random_element(rng, chart, tc, 3, 3, false);
        auto c = random_element(rng, chart, tc, 2, 2, false);
        REQUIRE(graded_product(a, one) == a);
        REQUIRE(graded_product(one, a) == a);
        REQUIRE(graded_product(graded_product(a, b), c) ==
                graded_product(a, graded_product(b, c)));
    }
}

TEST_CASE("projection P") {
    TruncationConfig tc(6, 3);
    auto chart = cart();
    WeylElement<CRat> e(chart, tc);
    e.add_term(key(0, {1, 1, 0, 0}), crat_const(chart, GaussRat(1)));
    e.add_term(key(0, {0, 0, 0, 0}), crat_const(chart, GaussRat(3)));
    e.add_term(key(1, {0, 0, 1, 0}), crat_const(chart, GaussRat(1)));

    auto p = project_P(e);
    WeylElement<CRat> expected(chart, tc);
    expected.add_term(key(0, {0, 0, 0, 0}), crat_const(chart, GaussRat(3)));
    REQUIRE(p == expected);
    REQUIRE(project_P(p) == p);

    std::mt19937 rng(515);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_element(rng, chart, tc, 4, 3, true);
        REQUIRE(project_P(project_P(a)) == project_P(a));
        REQUIRE(project_P(delta_inv(a)).is_zero());
    }
}

TEST_CASE("delta_inv on monomials and nilpotency") {
    TruncationConfig tc(6, 3);
    auto chart = cart();

    SECTION("dx^1 -> y^1") {
        auto e = term(chart, tc, key(0, {0, 0, 0, 0}, 0b0001), crat_const(chart, GaussRat(1)));
        auto expected = term(chart, tc, key(0, {1, 0, 0, 0}), crat_const(chart, GaussRat(1)));
        REQUIRE(delta_inv(e) == expected);
    }
    SECTION("y^2 dx^1 -> (1/2) y^1 y^2") {
        auto e = term(chart, tc, key(0, {0, 1, 0, 0}, 0b0001), crat_const(chart, GaussRat(1)));
        auto expected =
            term(chart, tc, key(0, {1, 1, 0, 0}), crat_const(chart, GaussRat(Rational(1, 2))));
        REQUIRE(delta_inv(e) == expected);
    }
    SECTION("no form factors -> 0") {
        auto e = term(chart, tc, key(0, {1, 1, 0, 0}), crat_const(chart, GaussRat(1)));
        REQUIRE(delta_inv(e).is_zero());
    }
    SECTION("delta_inv twice is zero on 500 random elements") {
        std::mt19937 rng(161803);
        for (int trial = 0; trial < 500; ++trial) {
            auto a = random_element(rng, chart, tc, 4, 3, true);
            REQUIRE(delta_inv(delta_inv(a)).is_zero());
        }
    }
}

TEST_CASE("symplectic connection") {
    TruncationConfig tc(8, 3);
    SECTION("cartesian chart reduces to the exterior derivative") {
        auto chart = cart();
        auto x2 = RationalFunction::variable(chart->vars(), 0) *
                  RationalFunction::variable(chart->vars(), 0);
        auto e = term(chart, tc, key(0, {0, 0, 0, 0}), CRat(x2));
        auto de = apply_connection(e, ConnectionMode::symplectic);
        WeylElement<CRat> expected(chart, tc);
        expected.add_term(key(0, {0, 0, 0, 0}, 0b0001),
                          CRat(RationalFunction::variable(chart->vars(), 0) * Rational(2)));
        REQUIRE(de == expected);
    }
    SECTION("action-angle chart: one-step commutator with Gamma") {
        auto chart = aa();
        auto H = RationalFunction::variable(chart->vars(), 2);
        // partial(y^H) = 2H y^chi dx^chi + (1/2H) y^H dx^H
        auto e = term(chart, tc, key(0, {0, 0, 1, 0}), crat_const(chart, GaussRat(1)));
        auto de = apply_connection(e, ConnectionMode::symplectic);
        WeylElement<CRat> expected(chart, tc);
        expected.add_term(key(0, {0, 1, 0, 0}, 0b0010), CRat(H * Rational(2)));
        expected.add_term(key(0, {0, 0, 1, 0}, 0b0100),
                          CRat(RationalFunction::constant(chart->vars(), Rational(1)) /
                               (H * Rational(2))));
        REQUIRE(de == expected);
    }
}

TEST_CASE("flatness: D^2 = 0") {
    auto chart = aa();
    TruncationConfig tc(8, 3);
    std::mt19937 rng(4040);
    for (int trial = 0; trial < 60; ++trial) {
        auto a = random_element(rng, chart, tc, 3, 4, false);  // grade <= 4 <= G-2
        auto da = apply_connection(a, ConnectionMode::abelian);
        auto dda = apply_connection(da, ConnectionMode::abelian);
        REQUIRE(dda.is_zero());
    }
}

TEST_CASE("sigma_inv: flat-section recursion") {
    SECTION("constants are fixed points") {
        TruncationConfig tc(6, 3);
        auto chart = aa();
        auto c = sigma_inv(RationalFunction::constant(chart->vars(), Rational(7)), chart, tc);
        auto expected = term(chart, tc, key(0, {0, 0, 0, 0}), crat_const(chart, GaussRat(7)));
        REQUIRE(c == expected);
    }
    SECTION("cartesian chart: Taylor lift, exact at G=6") {
        TruncationConfig tc(6, 3);
        auto chart = cart();
        auto x = RationalFunction::variable(chart->vars(), 0);
        auto px = RationalFunction::variable(chart->vars(), 2);
        auto f = x * x * px;
        REQUIRE(sigma_inv(f, chart, tc) == taylor_lift(f, chart, tc));

        std::mt19937 rng(600);
        for (int t = 0; t < 10; ++t) {
            auto p = phasespace::testing::random_polynomial(rng, chart->vars(), 3, 3);
            RationalFunction rf(p);
            REQUIRE(sigma_inv(rf, chart, tc) == taylor_lift(rf, chart, tc));
        }
    }
    SECTION("action-angle chart, f = H: low-degree structure") {
        TruncationConfig tc(8, 3);
        auto chart = aa();
        auto vars = chart->vars();
        auto H = RationalFunction::variable(vars, 2);
        auto a = sigma_inv(H, chart, tc);

        auto s = sigma(a);
        REQUIRE(s.size() == 1);
        REQUIRE(s.at(0) == CRat(H));

        int deg1 = 0;
        for (const auto& [k, c] : a.terms()) {
            if (k.fiber_degree() != 1) continue;
            ++deg1;
            REQUIRE(k.mu == std::vector<int>({0, 0, 1, 0}));
            REQUIRE(c == crat_const(chart, GaussRat(1)));
        }
        REQUIRE(deg1 == 1);

        std::map<std::vector<int>, CRat> deg2;
        for (const auto& [k, c] : a.terms())
            if (k.fiber_degree() == 2) deg2.emplace(k.mu, c);
        REQUIRE(deg2.size() == 2);
        REQUIRE(deg2.at({0, 2, 0, 0}) == CRat(H));
        REQUIRE(deg2.at({0, 0, 2, 0}) ==
                CRat(RationalFunction::constant(vars, Rational(1)) / (H * Rational(4))));

        for (const auto& [k, c] : a.terms()) REQUIRE(k.hbar == 0);

        // flat section: D a vanishes below the truncation boundary
        auto da = apply_connection(a, ConnectionMode::abelian);
        for (const auto& [k, c] : da.terms()) REQUIRE(k.grade() >= tc.max_grade);
    }
}

TEST_CASE("fedosov star equals the reference Moyal product in the cartesian chart") {
    auto chart = cart();
    TruncationConfig tc(8, 4);
    VarSetPtr mvars = moyal_vars(*chart);
    std::size_t hbar_idx = 4;
    std::mt19937 rng(112233);

    for (int trial = 0; trial < 12; ++trial) {
        auto f = phasespace::testing::random_polynomial(rng, chart->vars(), 4, 4);
        auto g = phasespace::testing::random_polynomial(rng, chart->vars(), 4, 4);
        auto fed = star_product(RationalFunction(f), RationalFunction(g), chart, tc);
        CPoly moy = moyal_differential(CPoly(embed_in_moyal_vars(f, mvars)),
                                       CPoly(embed_in_moyal_vars(g, mvars)), *chart, 6);
        for (int k = 0; k <= 4; ++k) {
            Polynomial re_k(mvars), im_k(mvars);
            for (const auto& [m, c] : moy.re.terms())
                if (m.exp[hbar_idx] == k) {
                    Monomial m4(m);
                    m4.exp[hbar_idx] = 0;
                    re_k.add_term(m4, c);
                }
            for (const auto& [m, c] : moy.im.terms())
                if (m.exp[hbar_idx] == k) {
                    Monomial m4(m);
                    m4.exp[hbar_idx] = 0;
                    im_k.add_term(m4, c);
                }
            auto it = fed.find(k);
            if (it == fed.end()) {
                REQUIRE(re_k.is_zero());
                REQUIRE(im_k.is_zero());
            } else {
                REQUIRE(it->second.re.is_polynomial());
                REQUIRE(it->second.im.is_polynomial());
                REQUIRE(embed_in_moyal_vars(it->second.re.num(), mvars) ==
                        re_k * it->second.re.den().constant_value());
                REQUIRE(embed_in_moyal_vars(it->second.im.num(), mvars) ==
                        im_k * it->second.im.den().constant_value());
            }
        }
    }
}

TEST_CASE("star-left operator in the cartesian chart") {
    auto chart = cart();
    TruncationConfig tc(6, 2);
    auto x = RationalFunction::variable(chart->vars(), 0);
    auto op = star_left_operator(x, chart, tc);

    DifferentialOperator expected;
    expected.chart = chart;
    expected.add(MultiIndex({0, 0, 0, 0}), 0, CRat(x));
    expected.add(MultiIndex({0, 0, 1, 0}), 1,
                 CRat::constant(chart->vars(), GaussRat(Rational(0), Rational(1, 2))));
    REQUIRE(op == expected);
}

TEST_CASE("derived operators reproduce the star-eigenvalue tables") {
    auto chart = aa();
    TruncationConfig tc(8, 3);
    auto vars = chart->vars();
    auto H = RationalFunction::variable(vars, 2);
    auto L = RationalFunction::variable(vars, 3);
    auto one = RationalFunction::constant(vars, Rational(1));
    auto iover2 = CRat::constant(vars, GaussRat(Rational(0), Rational(1, 2)));

    SECTION("left multiplication by H") {
        auto op = star_left_operator(H, chart, tc);
        DifferentialOperator expected;
        expected.chart = chart;
        expected.add(MultiIndex({0, 0, 0, 0}), 0, CRat(H));
        expected.add(MultiIndex({1, 0, 0, 0}), 1,
                     CRat::constant(vars, GaussRat(Rational(0), Rational(-1, 2))));
        expected.add(MultiIndex({0, 0, 0, 2}), 2, CRat(-(H * Rational(1, 4))));
        expected.add(MultiIndex({2, 0, 0, 0}), 2, CRat(-(one / (H * Rational(16)))));
        REQUIRE(op == expected);
        REQUIRE(op.hbar_part(3).empty());
    }
    SECTION("left multiplication by L") {
        auto op = star_left_operator(L, chart, tc);
        DifferentialOperator expected;
        expected.chart = chart;
        expected.add(MultiIndex({0, 0, 0, 0}), 0, CRat(L));
        expected.add(MultiIndex({0, 1, 0, 0}), 1,
                     CRat::constant(vars, GaussRat(Rational(0), Rational(-1, 2))));
        expected.add(MultiIndex({0, 0, 0, 1}), 2, CRat::constant(vars, GaussRat(Rational(-1, 2))));
        expected.add(MultiIndex({0, 0, 0, 2}), 2, CRat(-(L * Rational(1, 4))));
        expected.add(MultiIndex({0, 0, 1, 1}), 2, CRat(-(H * Rational(1, 2))));
        // the mixed T-chi coefficient is -1/(8H): adjudicated against the
        // chart-independent Moyal series (see the operator cross-check in
        // test_verify); the term is annihilated by the side conditions anyway
        expected.add(MultiIndex({1, 1, 0, 0}), 2, CRat(-(one / (H * Rational(8)))));
        expected.add(MultiIndex({2, 0, 0, 0}), 2, CRat(L / (H * H * Rational(16))));
        REQUIRE(op == expected);
        REQUIRE(op.hbar_part(3).empty());
    }
    SECTION("right multiplication by L flips the first-order term only") {
        auto left = star_left_operator(L, chart, tc);
        auto right = star_right_operator(L, chart, tc);
        REQUIRE(right.hbar_part(0) == left.hbar_part(0));
        REQUIRE(right.hbar_part(2) == left.hbar_part(2));
        REQUIRE(right.hbar_part(3).empty());
        auto r1 = right.hbar_part(1);
        REQUIRE(r1.size() == 1);
        REQUIRE(r1.at(MultiIndex({0, 1, 0, 0})) == iover2);
    }
}

TEST_CASE("sigma is a left inverse of sigma_inv") {
    auto chart = aa();
    TruncationConfig tc(6, 3);
    std::mt19937 rng(31415);
    auto H = Polynomial::variable(chart->vars(), 2);
    for (int t = 0; t < 5; ++t) {
        // polynomials over powers of H: the coefficient class the construction
        // actually produces on this chart
        auto p = phasespace::testing::random_polynomial(rng, chart->vars(), 3, 3);
        RationalFunction f(p, t % 3 == 0 ? H * H : (t % 3 == 1 ? H : Polynomial::constant(chart->vars(), Rational(1))));
        auto s = sigma(sigma_inv(f, chart, tc));
        REQUIRE(s.size() == 1);
        REQUIRE(s.at(0) == CRat(f));
    }
}
