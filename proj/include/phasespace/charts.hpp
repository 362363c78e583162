#pragma once

#include "phasespace/expr.hpp"
#include "phasespace/rational_function.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasespace {

struct PhysParams {
    double mass = 1.0;
    double hbar = 1.0;
};

struct CartesianPoint {
    double x = 0, y = 0, px = 0, py = 0;
};

struct ActionAnglePoint {
    double T = 0, chi = 0, H = 0, L = 0;
};

struct PolarPoint {
    double r = 0, phi = 0, p = 0, chi = 0;
};

struct RestPointError : std::domain_error {
    RestPointError() : std::domain_error("chart undefined at rest points (px^2 + py^2 = 0)") {}
};
struct ChartDomainError : std::domain_error {
    explicit ChartDomainError(const std::string& w) : std::domain_error(w) {}
};

inline double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r < 0) r += two_pi;
    return r;
}

/// (x, y, px, py) -> (T, chi, H, L); rejects the rest set px = py = 0.
inline ActionAnglePoint to_action_angle(const CartesianPoint& q, const PhysParams& params) {
    double p2 = q.px * q.px + q.py * q.py;
    if (p2 <= 0.0) throw RestPointError();
    ActionAnglePoint out;
    out.T = params.mass * (q.x * q.px + q.y * q.py) / p2;
    out.chi = wrap_angle(std::atan2(q.py, q.px));
    out.H = p2 / (2.0 * params.mass);
    out.L = q.x * q.py - q.y * q.px;
    return out;
}

/// Inverse map; requires H > 0.
inline CartesianPoint from_action_angle(const ActionAnglePoint& q, const PhysParams& params) {
    if (!(q.H > 0.0)) throw ChartDomainError("from_action_angle: H must be positive");
    double rho = std::sqrt(2.0 * params.mass * q.H);
    double c = std::cos(q.chi), s = std::sin(q.chi);
    CartesianPoint out;
    out.x = (2.0 * q.H * q.T * c + q.L * s) / rho;
    out.y = (2.0 * q.H * q.T * s - q.L * c) / rho;
    out.px = rho * c;
    out.py = rho * s;
    return out;
}

inline PolarPoint to_polar(const CartesianPoint& q) {
    PolarPoint out;
    out.r = std::hypot(q.x, q.y);
    out.phi = out.r > 0 ? wrap_angle(std::atan2(q.y, q.x)) : 0.0;
    out.p = std::hypot(q.px, q.py);
    out.chi = out.p > 0 ? wrap_angle(std::atan2(q.py, q.px)) : 0.0;
    return out;
}

inline CartesianPoint from_polar(const PolarPoint& q) {
    return {q.r * std::cos(q.phi), q.r * std::sin(q.phi), q.p * std::cos(q.chi),
            q.p * std::sin(q.chi)};
}

/// All-lower-index symplectic connection coefficients, totally symmetric;
/// storage is canonical sorted-index.
class ConnectionTable {
  public:
    explicit ConnectionTable(VarSetPtr vars) : vars_(std::move(vars)), zero_(RationalFunction::zero(vars_)) {}

    const VarSetPtr& vars() const { return vars_; }

    void set(int i, int j, int k, RationalFunction value) {
        auto key = sorted_key(i, j, k);
        if (value.is_zero()) entries_.erase(key);
        else entries_.insert_or_assign(key, std::move(value));
    }

    const RationalFunction& at(int i, int j, int k) const {
        auto it = entries_.find(sorted_key(i, j, k));
        return it == entries_.end() ? zero_ : it->second;
    }

    bool is_zero() const { return entries_.empty(); }
    const std::map<std::array<int, 3>, RationalFunction>& entries() const { return entries_; }

  private:
    static std::array<int, 3> sorted_key(int i, int j, int k) {
        std::array<int, 3> a{i, j, k};
        std::sort(a.begin(), a.end());
        return a;
    }
    VarSetPtr vars_;
    RationalFunction zero_;
    std::map<std::array<int, 3>, RationalFunction> entries_;
};

namespace detail {

// Exact computation ring for the action-angle chart: Laurent monomials
//   T^t * cos(chi)^c * sin(chi)^s * L^l * rho^r,   rho = sqrt(2 M H),
// reduced so that s <= 1 via sin^2 = 1 - cos^2. Division-free: the inverse
// coordinate map and all its derivatives live here.
struct TrigKey {
    int t = 0, c = 0, s = 0, l = 0, rho = 0;
    friend bool operator<(const TrigKey& a, const TrigKey& b) {
        return std::tie(a.t, a.c, a.s, a.l, a.rho) < std::tie(b.t, b.c, b.s, b.l, b.rho);
    }
    friend bool operator==(const TrigKey& a, const TrigKey& b) {
        return std::tie(a.t, a.c, a.s, a.l, a.rho) == std::tie(b.t, b.c, b.s, b.l, b.rho);
    }
};

class TrigSeries {
  public:
    TrigSeries() = default;

    static TrigSeries monomial(TrigKey k, Rational coeff) {
        TrigSeries r;
        r.add_reduced(k, coeff);
        return r;
    }
    static TrigSeries constant(Rational c) { return monomial(TrigKey{}, std::move(c)); }

    bool is_zero() const { return terms_.empty(); }
    const std::map<TrigKey, Rational>& terms() const { return terms_; }

    friend TrigSeries operator+(const TrigSeries& a, const TrigSeries& b) {
        TrigSeries r(a);
        for (const auto& [k, c] : b.terms_) r.add_reduced(k, c);
        return r;
    }
    friend TrigSeries operator-(const TrigSeries& a, const TrigSeries& b) {
        TrigSeries r(a);
        for (const auto& [k, c] : b.terms_) r.add_reduced(k, -c);
        return r;
    }
    friend TrigSeries operator*(const TrigSeries& a, const TrigSeries& b) {
        TrigSeries r;
        for (const auto& [ka, ca] : a.terms_)
            for (const auto& [kb, cb] : b.terms_) {
                TrigKey k{ka.t + kb.t, ka.c + kb.c, ka.s + kb.s, ka.l + kb.l, ka.rho + kb.rho};
                r.add_reduced(k, ca * cb);
            }
        return r;
    }
    friend TrigSeries operator*(const TrigSeries& a, const Rational& s) {
        TrigSeries r;
        for (const auto& [k, c] : a.terms_) r.add_reduced(k, c * s);
        return r;
    }

    // Partial derivative; var index over (T, chi, H, L). M enters through
    // d rho / dH = M / rho.
    TrigSeries derivative(int var, const Rational& mass) const {
        TrigSeries r;
        for (const auto& [k, c] : terms_) {
            switch (var) {
                case 0:
                    if (k.t != 0) r.add_reduced(TrigKey{k.t - 1, k.c, k.s, k.l, k.rho}, c * k.t);
                    break;
                case 1: {
                    // d/dchi (c^a s^b) = -a c^(a-1) s^(b+1) + b c^(a+1) s^(b-1)
                    if (k.c != 0)
                        r.add_reduced(TrigKey{k.t, k.c - 1, k.s + 1, k.l, k.rho}, c * (-k.c));
                    if (k.s != 0)
                        r.add_reduced(TrigKey{k.t, k.c + 1, k.s - 1, k.l, k.rho}, c * k.s);
                    break;
                }
                case 2:
                    if (k.rho != 0)
                        r.add_reduced(TrigKey{k.t, k.c, k.s, k.l, k.rho - 2}, c * k.rho * mass);
                    break;
                case 3:
                    if (k.l != 0) r.add_reduced(TrigKey{k.t, k.c, k.s, k.l - 1, k.rho}, c * k.l);
                    break;
                default: throw std::out_of_range("TrigSeries::derivative: bad variable");
            }
        }
        return r;
    }

    /// Convert to a rational function of the chart variables (T, chi, H, L).
    /// Requires the series to be free of cos/sin/T with even rho powers only.
    RationalFunction to_chart_function(const VarSetPtr& vars, const Rational& mass) const {
        RationalFunction out = RationalFunction::zero(vars);
        RationalFunction H = RationalFunction::variable(vars, 2);
        RationalFunction L = RationalFunction::variable(vars, 3);
        for (const auto& [k, c] : terms_) {
            if (k.c != 0 || k.s != 0 || k.t != 0)
                throw std::logic_error("TrigSeries: residual angle/T dependence");
            if (k.rho % 2 != 0) throw std::logic_error("TrigSeries: odd rho power");
            int half = k.rho / 2;  // rho^2 = 2 M H
            RationalFunction term = RationalFunction::constant(vars, c);
            for (int i = 0; i < k.l; ++i) term *= L;
            RationalFunction twoMH = H * Rational(2 * mass);
            if (half >= 0)
                for (int i = 0; i < half; ++i) term *= twoMH;
            else
                for (int i = 0; i < -half; ++i) term = term / twoMH;
            out += term;
        }
        return out;
    }

  private:
    void add_reduced(TrigKey k, Rational coeff) {
        if (coeff == 0) return;
        if (k.s >= 2) {
            // s^2 -> 1 - c^2, applied once then recurse
            TrigKey k1{k.t, k.c, k.s - 2, k.l, k.rho};
            TrigKey k2{k.t, k.c + 2, k.s - 2, k.l, k.rho};
            add_reduced(k1, coeff);
            add_reduced(k2, -coeff);
            return;
        }
        auto it = terms_.find(k);
        if (it == terms_.end()) terms_.emplace(k, std::move(coeff));
        else {
            it->second += coeff;
            if (it->second == 0) terms_.erase(it);
        }
    }

    std::map<TrigKey, Rational> terms_;
};

}  // namespace detail

/// A Darboux chart on (R^4, omega). Immutable; all operations reentrant.
class Chart {
  public:
    enum class Kind { cartesian, action_angle };

    static Chart cartesian(Rational mass = Rational(1)) {
        Chart c;
        c.kind_ = Kind::cartesian;
        c.name_ = "cartesian";
        c.vars_ = make_vars({"x", "y", "px", "py"});
        c.mass_ = std::move(mass);
        c.gamma_ = std::make_shared<ConnectionTable>(c.vars_);
        c.build_forward_jacobian();
        return c;
    }

    static Chart action_angle(Rational mass = Rational(1)) {
        Chart c;
        c.kind_ = Kind::action_angle;
        c.name_ = "action-angle";
        c.vars_ = make_vars({"T", "chi", "H", "L"});
        c.mass_ = std::move(mass);
        c.build_forward_jacobian();
        c.gamma_ = std::make_shared<ConnectionTable>(transport_from_flat(c));
        return c;
    }

    static Chart by_name(const std::string& name, Rational mass = Rational(1)) {
        if (name == "cartesian") return cartesian(std::move(mass));
        if (name == "action-angle") return action_angle(std::move(mass));
        throw std::invalid_argument("unknown chart '" + name + "' (expected cartesian or action-angle)");
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const VarSetPtr& vars() const { return vars_; }
    std::size_t dimension() const { return vars_->size(); }
    std::size_t half_dimension() const { return vars_->size() / 2; }
    const Rational& mass() const { return mass_; }
    const ConnectionTable& connection() const { return *gamma_; }

    /// Lower-index symplectic matrix omega_{ij} (Darboux block form).
    int omega_lower(std::size_t i, std::size_t j) const {
        std::size_t n = half_dimension();
        if (j == i + n) return 1;
        if (i == j + n) return -1;
        return 0;
    }
    /// Poisson tensor {Q^i, Q^j}: +1 on (coordinate, conjugate momentum).
    int poisson_tensor(std::size_t i, std::size_t j) const {
        std::size_t n = half_dimension();
        if (j == i + n) return 1;
        if (i == j + n) return -1;
        return 0;
    }

    /// Exact Jacobian of the forward map (new coordinates as functions of the
    /// Cartesian ones); entries are rational functions of (x, y, px, py).
    const std::vector<std::vector<RationalFunction>>& forward_jacobian() const {
        return forward_jacobian_;
    }
    const VarSetPtr& source_vars() const { return source_vars_; }

  private:
    friend ConnectionTable transform_connection(const Chart& target);

    static ConnectionTable transport_from_flat(const Chart& target);

    void build_forward_jacobian() {
        source_vars_ = make_vars({"x", "y", "px", "py"});
        const auto& v = source_vars_;
        auto X = RationalFunction::variable(v, 0);
        auto Y = RationalFunction::variable(v, 1);
        auto PX = RationalFunction::variable(v, 2);
        auto PY = RationalFunction::variable(v, 3);
        auto M = RationalFunction::constant(v, mass_);
        forward_jacobian_.assign(4, std::vector<RationalFunction>(4, RationalFunction::zero(v)));
        if (kind_ == Kind::cartesian) {
            for (int i = 0; i < 4; ++i)
                forward_jacobian_[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] =
                    RationalFunction::constant(v, Rational(1));
            return;
        }
        RationalFunction p2 = PX * PX + PY * PY;
        // T = M (x px + y py) / p2 ; chi = atan2(py, px) ; H = p2 / 2M ; L = x py - y px.
        RationalFunction T = M * (X * PX + Y * PY) / p2;
        RationalFunction H = p2 / (M * Rational(2));
        RationalFunction L = X * PY - Y * PX;
        for (std::size_t a = 0; a < 4; ++a) {
            forward_jacobian_[0][a] = T.derivative(a);
            forward_jacobian_[2][a] = H.derivative(a);
            forward_jacobian_[3][a] = L.derivative(a);
        }
        // atan2 itself is not rational but its gradient is
        forward_jacobian_[1][0] = RationalFunction::zero(v);
        forward_jacobian_[1][1] = RationalFunction::zero(v);
        forward_jacobian_[1][2] = -PY / p2;
        forward_jacobian_[1][3] = PX / p2;
    }

    Kind kind_ = Kind::cartesian;
    std::string name_;
    VarSetPtr vars_;
    VarSetPtr source_vars_;
    Rational mass_{1};
    std::shared_ptr<const ConnectionTable> gamma_;
    std::vector<std::vector<RationalFunction>> forward_jacobian_;
};

/// Transport of the identically-zero Cartesian connection into the target
/// chart: gamma~_ijk = omega_rd (dQ^r/dQ~^i)(d^2 Q^d / dQ~^j dQ~^k), computed
/// exactly and stored symmetrized.
inline ConnectionTable Chart::transport_from_flat(const Chart& target) {
    using detail::TrigKey;
    using detail::TrigSeries;

    ConnectionTable table(target.vars());
    if (target.kind_ == Kind::cartesian) return table;  // identity chart: zero table

    const Rational& M = target.mass_;
    const Rational invM = Rational(1) / M;

    // Inverse map components in the extension ring:
    //   x  = rho T c / M + L s / rho,  y = rho T s / M - L c / rho,
    //   px = rho c,                    py = rho s.
    std::array<TrigSeries, 4> inv;
    inv[0] = TrigSeries::monomial(TrigKey{1, 1, 0, 0, 1}, invM) +
             TrigSeries::monomial(TrigKey{0, 0, 1, 1, -1}, Rational(1));
    inv[1] = TrigSeries::monomial(TrigKey{1, 0, 1, 0, 1}, invM) +
             TrigSeries::monomial(TrigKey{0, 1, 0, 1, -1}, Rational(-1));
    inv[2] = TrigSeries::monomial(TrigKey{0, 1, 0, 0, 1}, Rational(1));
    inv[3] = TrigSeries::monomial(TrigKey{0, 0, 1, 0, 1}, Rational(1));

    // First derivatives dQ^a/dQ~^i and second derivatives
    std::array<std::array<TrigSeries, 4>, 4> d1;
    for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
            d1[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] =
                inv[static_cast<std::size_t>(a)].derivative(i, M);

    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = j; k < 4; ++k) {
                TrigSeries acc;
                for (int r = 0; r < 4; ++r)
                    for (int d = 0; d < 4; ++d) {
                        int w = target.omega_lower(static_cast<std::size_t>(r),
                                                   static_cast<std::size_t>(d));
                        if (w == 0) continue;
                        TrigSeries second =
                            d1[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)].derivative(j, M);
                        TrigSeries contrib =
                            d1[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] * second;
                        acc = (w > 0) ? (acc + contrib) : (acc - contrib);
                    }
                RationalFunction value = acc.to_chart_function(target.vars(), M);
                if (!value.is_zero()) {
                    // total symmetry is a consequence of the construction; verify
                    const RationalFunction& prev = table.at(i, j, k);
                    if (!prev.is_zero() && !(prev == value))
                        throw std::logic_error("connection transport: symmetry violation");
                    table.set(i, j, k, value);
                }
            }
    return table;
}

/// Spec operation: transported table for a target chart (source is the flat
/// Cartesian chart with the zero table).
inline ConnectionTable transform_connection(const Chart& target) {
    return Chart::transport_from_flat(target);
}

/// Determinant of the forward-map Jacobian at a Cartesian point.
inline double chart_jacobian_det(const Chart& chart, const CartesianPoint& q) {
    if (chart.kind() == Chart::Kind::action_angle && q.px * q.px + q.py * q.py <= 0.0)
        throw RestPointError();
    std::vector<double> pt{q.x, q.y, q.px, q.py};
    double m[4][4];
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m[i][j] = chart.forward_jacobian()[i][j].eval<double>(pt);
    // 4x4 determinant via partial-pivot LU
    double det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        if (m[piv][col] == 0.0) return 0.0;
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (int r = col + 1; r < 4; ++r) {
            double f = m[r][col] / m[col][col];
            for (int c2 = col; c2 < 4; ++c2) m[r][c2] -= f * m[col][c2];
        }
    }
    return det;
}

/// Symbolic determinant of the forward-map Jacobian (exact).
inline RationalFunction chart_jacobian_det_symbolic(const Chart& chart) {
    const auto& J = chart.forward_jacobian();
    // Leibniz over S4: 24 terms of 4-fold products; exact and cheap.
    std::array<int, 4> perm{0, 1, 2, 3};
    RationalFunction det = RationalFunction::zero(chart.source_vars());
    do {
        int sign = 1;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)]) sign = -sign;
        RationalFunction prod = RationalFunction::constant(chart.source_vars(), Rational(sign));
        for (std::size_t i = 0; i < 4; ++i) prod *= J[i][perm[i]];
        det += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

/// Poisson bracket of two observables at a point, summed over the chart's
/// conjugate pairs.
inline double poisson_bracket(const Expr& f, const Expr& g,
                              const std::map<std::string, double>& point, const Chart& chart) {
    double acc = 0.0;
    std::size_t n = chart.half_dimension();
    for (std::size_t a = 0; a < n; ++a) {
        const std::string& q = chart.vars()->name(a);
        const std::string& p = chart.vars()->name(a + n);
        acc += evaluate(derivative(f, q), point) * evaluate(derivative(g, p), point) -
               evaluate(derivative(f, p), point) * evaluate(derivative(g, q), point);
    }
    return acc;
}

}  // namespace phasespace
