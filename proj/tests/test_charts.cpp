#include "phasespace/charts.hpp"

#include "test_helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace phasespace;

namespace {
const double pi = std::numbers::pi;

CartesianPoint random_cartesian(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    CartesianPoint q{u(rng), u(rng), u(rng), u(rng)};
    while (q.px * q.px + q.py * q.py < 0.1) {
        q.px = u(rng);
        q.py = u(rng);
    }
    return q;
}
}  // namespace

TEST_CASE("forward map on hand-checked points") {
    PhysParams params;  // M = 1
    SECTION("(3,4,0,2) -> (T=2, chi=pi/2, H=2, L=6)") {
        auto aa = to_action_angle({3, 4, 0, 2}, params);
        REQUIRE(aa.T == Catch::Approx(2.0).margin(1e-14));
        REQUIRE(aa.chi == Catch::Approx(pi / 2).margin(1e-14));
        REQUIRE(aa.H == Catch::Approx(2.0).margin(1e-14));
        REQUIRE(aa.L == Catch::Approx(6.0).margin(1e-14));
    }
    SECTION("unit momentum at the origin") {
        auto aa = to_action_angle({0, 0, 1, 0}, params);
        REQUIRE(aa.T == 0.0);
        REQUIRE(aa.chi == 0.0);
        REQUIRE(aa.H == Catch::Approx(0.5));
        REQUIRE(aa.L == 0.0);
    }
    SECTION("rest points are rejected") {
        REQUIRE_THROWS_AS(to_action_angle({1, 1, 0, 0}, params), RestPointError);
    }
}

TEST_CASE("inverse map and round trips") {
    PhysParams params;
    SECTION("(2, pi/2, 2, 6) -> (3,4,0,2)") {
        auto q = from_action_angle({2, pi / 2, 2, 6}, params);
        REQUIRE(q.x == Catch::Approx(3.0).margin(1e-12));
        REQUIRE(q.y == Catch::Approx(4.0).margin(1e-12));
        REQUIRE(q.px == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(q.py == Catch::Approx(2.0).margin(1e-12));
    }
    SECTION("(0,0,1/2,0) -> (0,0,1,0)") {
        auto q = from_action_angle({0, 0, 0.5, 0}, params);
        REQUIRE(q.x == Catch::Approx(0.0).margin(1e-15));
        REQUIRE(q.px == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("nonpositive H rejected") {
        REQUIRE_THROWS_AS(from_action_angle({0, 0, -1, 0}, params), ChartDomainError);
        REQUIRE_THROWS_AS(from_action_angle({0, 0, 0, 0}, params), ChartDomainError);
    }
    SECTION("1000 random round trips at 1e-12 relative") {
        std::mt19937 rng(31337);
        PhysParams p2{1.7, 1.0};
        for (int i = 0; i < 1000; ++i) {
            CartesianPoint q = random_cartesian(rng);
            auto aa = to_action_angle(q, p2);
            auto back = from_action_angle(aa, p2);
            double scale = std::max({1.0, std::abs(q.x), std::abs(q.y), std::abs(q.px), std::abs(q.py)});
            REQUIRE(std::abs(back.x - q.x) / scale < 1e-12);
            REQUIRE(std::abs(back.y - q.y) / scale < 1e-12);
            REQUIRE(std::abs(back.px - q.px) / scale < 1e-12);
            REQUIRE(std::abs(back.py - q.py) / scale < 1e-12);
        }
    }
}

TEST_CASE("jacobian determinant of the forward map") {
    auto chart = Chart::action_angle();
    SECTION("equals 1 at 100 random valid points") {
        std::mt19937 rng(555);
        for (int i = 0; i < 100; ++i) {
            auto q = random_cartesian(rng);
            REQUIRE(chart_jacobian_det(chart, q) == Catch::Approx(1.0).margin(1e-12));
        }
    }
    SECTION("identity chart: exactly 1") {
        auto cart = Chart::cartesian();
        REQUIRE(chart_jacobian_det(cart, {0.3, -0.2, 0.9, 1.4}) == 1.0);
        auto det = chart_jacobian_det_symbolic(cart);
        REQUIRE(det.is_constant());
        REQUIRE(det.constant_value() == Rational(1));
    }
    SECTION("symbolic determinant is identically 1") {
        auto det = chart_jacobian_det_symbolic(chart);
        REQUIRE(det.is_constant());
        REQUIRE(det.constant_value() == Rational(1));
    }
    SECTION("finite-difference jacobian agrees with the exact one") {
        std::mt19937 rng(808);
        PhysParams params;
        auto q = random_cartesian(rng);
        std::vector<double> pt{q.x, q.y, q.px, q.py};
        double h = 1e-5;
        auto map = [&](const CartesianPoint& c) {
            auto aa = to_action_angle(c, params);
            return std::array<double, 4>{aa.T, aa.chi, aa.H, aa.L};
        };
        for (std::size_t row = 0; row < 4; ++row)
            for (std::size_t col = 0; col < 4; ++col) {
                CartesianPoint up = q, dn = q;
                double* f_up[4] = {&up.x, &up.y, &up.px, &up.py};
                double* f_dn[4] = {&dn.x, &dn.y, &dn.px, &dn.py};
                *f_up[col] += h;
                *f_dn[col] -= h;
                double fd = (map(up)[row] - map(dn)[row]) / (2 * h);
                double exact = chart.forward_jacobian()[row][col].eval<double>(pt);
                REQUIRE(std::abs(fd - exact) < 1e-6);
            }
    }
}

TEST_CASE("connection transport reproduces the exact table") {
    auto chart = Chart::action_angle();
    const auto& table = chart.connection();
    auto v = chart.vars();
    auto H = RationalFunction::variable(v, 2);
    auto L = RationalFunction::variable(v, 3);
    auto one = RationalFunction::constant(v, Rational(1));

    // indices: T=0, chi=1, H=2, L=3
    REQUIRE(table.at(0, 1, 1) == H * Rational(-2));
    REQUIRE(table.at(0, 2, 2) == -(one / (H * Rational(2))));
    REQUIRE(table.at(1, 1, 1) == L * Rational(-2));
    REQUIRE(table.at(1, 2, 2) == L / (H * H * Rational(2)));
    REQUIRE(table.at(1, 2, 3) == -(one / (H * Rational(2))));

    SECTION("exactly five nonzero canonical entries") {
        REQUIRE(table.entries().size() == 5);
    }
    SECTION("independent of the mass parameter") {
        auto heavy = Chart::action_angle(Rational(7, 2));
        REQUIRE(heavy.connection().entries().size() == 5);
        REQUIRE(heavy.connection().at(0, 1, 1) == H * Rational(-2));
        REQUIRE(heavy.connection().at(1, 2, 2) == L / (H * H * Rational(2)));
    }
    SECTION("numeric spot check at (H,L) = (2,5)") {
        std::vector<double> pt{0.0, 0.0, 2.0, 5.0};
        REQUIRE(table.at(0, 1, 1).eval<double>(pt) == Catch::Approx(-4.0));
        REQUIRE(table.at(0, 2, 2).eval<double>(pt) == Catch::Approx(-0.25));
        REQUIRE(table.at(1, 1, 1).eval<double>(pt) == Catch::Approx(-10.0));
        REQUIRE(table.at(1, 2, 2).eval<double>(pt) == Catch::Approx(0.625));
        REQUIRE(table.at(1, 2, 3).eval<double>(pt) == Catch::Approx(-0.25));
    }
    SECTION("identity chart transports to the zero table") {
        auto cart = Chart::cartesian();
        REQUIRE(transform_connection(cart).is_zero());
    }
    SECTION("total symmetry under stored-index permutations") {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    REQUIRE(table.at(i, j, k) == table.at(j, i, k));
                    REQUIRE(table.at(i, j, k) == table.at(i, k, j));
                    REQUIRE(table.at(i, j, k) == table.at(k, j, i));
                }
    }
}

TEST_CASE("transported connection preserves omega") {
    // In Darboux coordinates with a totally symmetric lowered table this is
    // gamma_{kij} = gamma_{jik}; check the index-raised statement numerically:
    // d_i omega_jk - gamma^l_{ij} omega_lk - gamma^l_{ik} omega_jl = 0.
    auto chart = Chart::action_angle();
    std::mt19937 rng(1212);
    std::uniform_real_distribution<double> uH(0.3, 3.0), uL(-3.0, 3.0);
    // inverse of the lower omega matrix
    int omega_inv[4][4] = {{0, 0, -1, 0}, {0, 0, 0, -1}, {1, 0, 0, 0}, {0, 1, 0, 0}};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> pt{0.4, 1.0, uH(rng), uL(rng)};
        double gam[4][4][4];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k)
                    gam[i][j][k] = chart.connection().at(i, j, k).eval<double>(pt);
        double raised[4][4][4];  // gamma^s_{jk}
        for (int s = 0; s < 4; ++s)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    double acc = 0;
                    for (int i = 0; i < 4; ++i) acc += omega_inv[s][i] * gam[i][j][k];
                    raised[s][j][k] = acc;
                }
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    double nabla = 0.0;
                    for (int l = 0; l < 4; ++l) {
                        nabla -= raised[l][i][j] *
                                 chart.omega_lower(static_cast<std::size_t>(l), static_cast<std::size_t>(k));
                        nabla -= raised[l][i][k] *
                                 chart.omega_lower(static_cast<std::size_t>(j), static_cast<std::size_t>(l));
                    }
                    REQUIRE(std::abs(nabla) < 1e-10);
                }
    }
}

TEST_CASE("poisson brackets in both charts") {
    std::mt19937 rng(90210);
    std::uniform_real_distribution<double> u(0.4, 2.0);

    SECTION("canonical pairs in the action-angle chart") {
        auto chart = Chart::action_angle();
        Expr T = parse_observable("T"), chi = parse_observable("chi");
        Expr H = parse_observable("H"), L = parse_observable("L");
        for (int i = 0; i < 25; ++i) {
            std::map<std::string, double> pt{{"T", u(rng)}, {"chi", u(rng)}, {"H", u(rng)}, {"L", u(rng)}};
            REQUIRE(poisson_bracket(T, H, pt, chart) == Catch::Approx(1.0).margin(1e-12));
            REQUIRE(poisson_bracket(chi, L, pt, chart) == Catch::Approx(1.0).margin(1e-12));
            REQUIRE(poisson_bracket(T, chi, pt, chart) == Catch::Approx(0.0).margin(1e-12));
            REQUIRE(poisson_bracket(T, L, pt, chart) == Catch::Approx(0.0).margin(1e-12));
            REQUIRE(poisson_bracket(chi, H, pt, chart) == Catch::Approx(0.0).margin(1e-12));
            REQUIRE(poisson_bracket(H, L, pt, chart) == Catch::Approx(0.0).margin(1e-12));
        }
    }
    SECTION("T and H expressed in Cartesian variables form a canonical pair") {
        auto chart = Chart::cartesian();
        Expr T = parse_observable("M*(x*px + y*py)/(px^2+py^2)");
        Expr H = parse_observable("(px^2+py^2)/(2*M)");
        Expr L = parse_observable("x*py - y*px");
        for (int i = 0; i < 25; ++i) {
            std::map<std::string, double> pt{{"x", u(rng)}, {"y", u(rng)}, {"px", u(rng)},
                                             {"py", u(rng)}, {"M", 1.0}};
            REQUIRE(poisson_bracket(T, H, pt, chart) == Catch::Approx(1.0).margin(1e-12));
            REQUIRE(poisson_bracket(H, L, pt, chart) == Catch::Approx(0.0).margin(1e-12));
        }
    }
    SECTION("{px, L} = -py") {
        auto chart = Chart::cartesian();
        Expr px = parse_observable("px"), L = parse_observable("x*py - y*px");
        std::map<std::string, double> pt{{"x", 1}, {"y", 2}, {"px", 3}, {"py", 4}};
        REQUIRE(poisson_bracket(px, L, pt, chart) == Catch::Approx(-4.0));
    }
}

TEST_CASE("polar conversions") {
    auto q = from_polar({2.0, pi / 6, 1.5, pi / 3});
    auto back = to_polar(q);
    REQUIRE(back.r == Catch::Approx(2.0));
    REQUIRE(back.phi == Catch::Approx(pi / 6));
    REQUIRE(back.p == Catch::Approx(1.5));
    REQUIRE(back.chi == Catch::Approx(pi / 3));
}
