#pragma once

#include "phasespace/rational_function.hpp"

#include <cctype>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace phasespace {

// Observable expression trees over the fixed identifier set
//   x, y, px, py, T, chi, H, L, M, hbar
// with +, -, *, /, integer ^ and parentheses.

enum class ExprOp { Const, Var, Add, Sub, Mul, Div, Pow, Neg };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    ExprOp op;
    Rational value;      // Const
    std::string name;    // Var
    int exponent = 0;    // Pow
    Expr lhs, rhs;
};

inline const std::set<std::string>& observable_identifiers() {
    static const std::set<std::string> ids = {"x", "y", "px", "py", "T", "chi", "H", "L", "M", "hbar"};
    return ids;
}

inline Expr make_const(Rational v) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Const;
    n->value = std::move(v);
    return n;
}
inline Expr make_var(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Var;
    n->name = std::move(name);
    return n;
}
inline Expr make_binary(ExprOp op, Expr a, Expr b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}
inline Expr make_pow(Expr base, int e) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Pow;
    n->lhs = std::move(base);
    n->exponent = e;
    return n;
}
inline Expr make_neg(Expr a) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Neg;
    n->lhs = std::move(a);
    return n;
}

struct ParseError : std::runtime_error {
    std::size_t offset;
    std::string expected;
    ParseError(std::size_t off, const std::string& what, std::string exp)
        : std::runtime_error("parse error at offset " + std::to_string(off) + ": " + what),
          offset(off), expected(std::move(exp)) {}
};

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expr parse() {
        Expr e = expr();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError(pos_, "unexpected trailing input", "end of input or operator");
        return e;
    }

  private:
    Expr expr() {
        skip_ws();
        bool neg = false;
        if (peek() == '-') { ++pos_; neg = true; }
        Expr e = term();
        if (neg) e = make_neg(e);
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '+' || c == '-') {
                ++pos_;
                e = make_binary(c == '+' ? ExprOp::Add : ExprOp::Sub, e, term());
            } else {
                return e;
            }
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '*' || c == '/') {
                ++pos_;
                e = make_binary(c == '*' ? ExprOp::Mul : ExprOp::Div, e, factor());
            } else {
                return e;
            }
        }
    }

    Expr factor() {
        Expr b = base();
        skip_ws();
        if (peek() == '^') {
            ++pos_;
            skip_ws();
            bool neg = false;
            if (peek() == '-') { ++pos_; neg = true; }
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == start) throw ParseError(pos_, "expected integer exponent", "integer");
            int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
            return make_pow(b, neg ? -e : e);
        }
        return b;
    }

    Expr base() {
        skip_ws();
        if (pos_ >= text_.size())
            throw ParseError(pos_, "unexpected end of input", "identifier, number or '('");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = expr();
            skip_ws();
            if (peek() != ')') throw ParseError(pos_, "expected ')'", "')'");
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string id(text_.substr(start, pos_ - start));
            if (!observable_identifiers().count(id))
                throw ParseError(start, "unknown identifier '" + id + "'",
                                 "one of x,y,px,py,T,chi,H,L,M,hbar");
            return make_var(id);
        }
        throw ParseError(pos_, std::string("unexpected character '") + c + "'",
                         "identifier, number or '('");
    }

    Expr number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        Integer ip(std::string(text_.substr(start, pos_ - start)));
        Rational v(ip);
        if (peek() == '.') {
            ++pos_;
            std::size_t fs = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == fs) throw ParseError(pos_, "expected digits after '.'", "digit");
            std::string frac(text_.substr(fs, pos_ - fs));
            Integer num(frac);
            Integer den = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
            v += Rational(num, den);
        }
        return make_const(v);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline int precedence(ExprOp op) {
    switch (op) {
        case ExprOp::Add:
        case ExprOp::Sub: return 1;
        case ExprOp::Mul:
        case ExprOp::Div: return 2;
        case ExprOp::Neg: return 1;  // prints at additive level
        case ExprOp::Pow: return 3;
        default: return 4;
    }
}

inline std::string rational_literal(const Rational& v) {
    // Finite-decimal rationals print as literals; anything else as p/q (which
    // re-parses as a division with the same value).
    Integer num = boost::multiprecision::numerator(v);
    Integer den = boost::multiprecision::denominator(v);
    if (den == 1) return num.str();
    Integer d = den;
    int twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    if (d == 1) {
        int k = std::max(twos, fives);
        Integer scale = 1;
        for (int i = 0; i < k; ++i) scale *= 10;
        Integer scaled = num * (scale / den);
        std::string digits = scaled.str();
        bool neg = false;
        if (!digits.empty() && digits[0] == '-') { neg = true; digits.erase(0, 1); }
        while (static_cast<int>(digits.size()) <= k) digits.insert(digits.begin(), '0');
        digits.insert(digits.size() - static_cast<std::size_t>(k), ".");
        return (neg ? "-" : "") + digits;
    }
    return num.str() + "/" + den.str();
}

inline void print_rec(const Expr& e, std::ostringstream& os, int parent_prec, bool right_operand) {
    int prec = precedence(e->op);
    bool parens = prec < parent_prec ||
                  (prec == parent_prec && right_operand &&
                   (e->op == ExprOp::Add || e->op == ExprOp::Sub || e->op == ExprOp::Mul ||
                    e->op == ExprOp::Div || e->op == ExprOp::Neg));
    if (parens) os << "(";
    switch (e->op) {
        case ExprOp::Const: os << rational_literal(e->value); break;
        case ExprOp::Var: os << e->name; break;
        case ExprOp::Neg:
            os << "-";
            print_rec(e->lhs, os, precedence(ExprOp::Neg) + 1, false);
            break;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div: {
            const char* sym = e->op == ExprOp::Add ? "+" : e->op == ExprOp::Sub ? "-"
                              : e->op == ExprOp::Mul ? "*" : "/";
            print_rec(e->lhs, os, prec, false);
            os << sym;
            print_rec(e->rhs, os, prec, true);
            break;
        }
        case ExprOp::Pow:
            print_rec(e->lhs, os, prec + 1, false);
            os << "^" << e->exponent;
            break;
    }
    if (parens) os << ")";
}

}  // namespace detail

inline Expr parse_observable(const std::string& text) { return detail::Parser(text).parse(); }

inline std::string print_observable(const Expr& e) {
    std::ostringstream os;
    detail::print_rec(e, os, 0, false);
    return os.str();
}

inline bool expr_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    switch (a->op) {
        case ExprOp::Const: return a->value == b->value;
        case ExprOp::Var: return a->name == b->name;
        case ExprOp::Neg: return expr_equal(a->lhs, b->lhs);
        case ExprOp::Pow: return a->exponent == b->exponent && expr_equal(a->lhs, b->lhs);
        default: return expr_equal(a->lhs, b->lhs) && expr_equal(a->rhs, b->rhs);
    }
}

inline double evaluate(const Expr& e, const std::map<std::string, double>& bind) {
    switch (e->op) {
        case ExprOp::Const: return to_double(e->value);
        case ExprOp::Var: {
            auto it = bind.find(e->name);
            if (it == bind.end()) throw std::invalid_argument("evaluate: unbound identifier " + e->name);
            return it->second;
        }
        case ExprOp::Neg: return -evaluate(e->lhs, bind);
        case ExprOp::Add: return evaluate(e->lhs, bind) + evaluate(e->rhs, bind);
        case ExprOp::Sub: return evaluate(e->lhs, bind) - evaluate(e->rhs, bind);
        case ExprOp::Mul: return evaluate(e->lhs, bind) * evaluate(e->rhs, bind);
        case ExprOp::Div: {
            double d = evaluate(e->rhs, bind);
            if (d == 0.0) throw std::domain_error("evaluate: division by zero");
            return evaluate(e->lhs, bind) / d;
        }
        case ExprOp::Pow: return std::pow(evaluate(e->lhs, bind), e->exponent);
    }
    throw std::logic_error("evaluate: bad node");
}

namespace detail {
inline Expr simplify_add(Expr a, Expr b) {
    if (a->op == ExprOp::Const && a->value == 0) return b;
    if (b->op == ExprOp::Const && b->value == 0) return a;
    if (a->op == ExprOp::Const && b->op == ExprOp::Const) return make_const(a->value + b->value);
    return make_binary(ExprOp::Add, a, b);
}
inline Expr simplify_mul(Expr a, Expr b) {
    if (a->op == ExprOp::Const) {
        if (a->value == 0) return make_const(Rational(0));
        if (a->value == 1) return b;
    }
    if (b->op == ExprOp::Const) {
        if (b->value == 0) return make_const(Rational(0));
        if (b->value == 1) return a;
    }
    if (a->op == ExprOp::Const && b->op == ExprOp::Const) return make_const(a->value * b->value);
    return make_binary(ExprOp::Mul, a, b);
}
}  // namespace detail

/// Symbolic derivative of an expression tree (lightly simplified).
inline Expr derivative(const Expr& e, const std::string& var) {
    using detail::simplify_add;
    using detail::simplify_mul;
    switch (e->op) {
        case ExprOp::Const: return make_const(Rational(0));
        case ExprOp::Var:
            if (!observable_identifiers().count(var))
                throw std::invalid_argument("derivative: unknown variable " + var);
            return make_const(Rational(e->name == var ? 1 : 0));
        case ExprOp::Neg: return make_neg(derivative(e->lhs, var));
        case ExprOp::Add: return simplify_add(derivative(e->lhs, var), derivative(e->rhs, var));
        case ExprOp::Sub:
            return make_binary(ExprOp::Sub, derivative(e->lhs, var), derivative(e->rhs, var));
        case ExprOp::Mul:
            return simplify_add(simplify_mul(derivative(e->lhs, var), e->rhs),
                                simplify_mul(e->lhs, derivative(e->rhs, var)));
        case ExprOp::Div:
            // (u/v)' = (u'v - uv')/v^2
            return make_binary(
                ExprOp::Div,
                make_binary(ExprOp::Sub, simplify_mul(derivative(e->lhs, var), e->rhs),
                            simplify_mul(e->lhs, derivative(e->rhs, var))),
                make_pow(e->rhs, 2));
        case ExprOp::Pow: {
            if (e->exponent == 0) return make_const(Rational(0));
            Expr inner = derivative(e->lhs, var);
            Expr p = make_pow(e->lhs, e->exponent - 1);
            return simplify_mul(make_const(Rational(e->exponent)), simplify_mul(p, inner));
        }
    }
    throw std::logic_error("derivative: bad node");
}

/// Convert an expression to an exact rational function over the given chart
/// variables. Identifiers outside the chart must be bound to exact rationals.
inline RationalFunction to_rational_function(const Expr& e, const VarSetPtr& vars,
                                             const std::map<std::string, Rational>& bind = {}) {
    switch (e->op) {
        case ExprOp::Const: return RationalFunction::constant(vars, e->value);
        case ExprOp::Var: {
            if (auto idx = vars->index_of(e->name)) return RationalFunction::variable(vars, *idx);
            auto it = bind.find(e->name);
            if (it == bind.end())
                throw std::invalid_argument("to_rational_function: identifier '" + e->name +
                                            "' is not a chart variable and has no binding");
            return RationalFunction::constant(vars, it->second);
        }
        case ExprOp::Neg: return -to_rational_function(e->lhs, vars, bind);
        case ExprOp::Add:
            return to_rational_function(e->lhs, vars, bind) + to_rational_function(e->rhs, vars, bind);
        case ExprOp::Sub:
            return to_rational_function(e->lhs, vars, bind) - to_rational_function(e->rhs, vars, bind);
        case ExprOp::Mul:
            return to_rational_function(e->lhs, vars, bind) * to_rational_function(e->rhs, vars, bind);
        case ExprOp::Div:
            return to_rational_function(e->lhs, vars, bind) / to_rational_function(e->rhs, vars, bind);
        case ExprOp::Pow: {
            RationalFunction b = to_rational_function(e->lhs, vars, bind);
            int n = e->exponent;
            RationalFunction r = RationalFunction::constant(vars, Rational(1));
            RationalFunction base = n < 0 ? RationalFunction::constant(vars, Rational(1)) / b : b;
            for (int i = 0; i < std::abs(n); ++i) r *= base;
            return r;
        }
    }
    throw std::logic_error("to_rational_function: bad node");
}

}  // namespace phasespace
