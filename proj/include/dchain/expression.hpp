#pragma once
/**
 * @file expression.hpp
 * @brief Immutable expression trees for form coefficients and map coordinates.
 *
 * The language is deliberately small: constants, variables, +, *, negation,
 * integer powers, sin and cos.  Affine substitution is just substitute().
 * Every node has an exact symbolic derivative and an interval enclosure over
 * boxes, which is what the form-norm bounds are built from.
 */

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace dchain {

/// Closed interval with outward-rounded arithmetic.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
    Interval(double l, double h) : lo(l), hi(h) {}

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    double mag() const { return std::max(std::abs(lo), std::abs(hi)); }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

namespace detail {

inline Interval widen(double lo, double hi) {
    return {std::nextafter(lo, -std::numeric_limits<double>::infinity()),
            std::nextafter(hi, std::numeric_limits<double>::infinity())};
}

// Does [lo, hi] contain phase + 2*pi*m for some integer m?
inline bool hits_phase(const Interval& x, double phase) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double m = std::ceil((x.lo - phase) / two_pi);
    return phase + two_pi * m <= x.hi;
}

}  // namespace detail

inline Interval operator+(const Interval& a, const Interval& b) { return detail::widen(a.lo + b.lo, a.hi + b.hi); }
inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
inline Interval operator-(const Interval& a, const Interval& b) { return a + (-b); }
inline Interval operator*(const Interval& a, const Interval& b) {
    const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return detail::widen(*std::min_element(p, p + 4), *std::max_element(p, p + 4));
}

inline Interval sin(const Interval& x) {
    if (x.width() >= 2.0 * std::numbers::pi) return {-1.0, 1.0};
    double lo = std::min(std::sin(x.lo), std::sin(x.hi));
    double hi = std::max(std::sin(x.lo), std::sin(x.hi));
    if (detail::hits_phase(x, 0.5 * std::numbers::pi)) hi = 1.0;
    if (detail::hits_phase(x, -0.5 * std::numbers::pi)) lo = -1.0;
    Interval out = detail::widen(lo, hi);
    return {std::max(out.lo, -1.0), std::min(out.hi, 1.0)};
}

inline Interval cos(const Interval& x) {
    if (x.width() >= 2.0 * std::numbers::pi) return {-1.0, 1.0};
    double lo = std::min(std::cos(x.lo), std::cos(x.hi));
    double hi = std::max(std::cos(x.lo), std::cos(x.hi));
    if (detail::hits_phase(x, 0.0)) hi = 1.0;
    if (detail::hits_phase(x, std::numbers::pi)) lo = -1.0;
    Interval out = detail::widen(lo, hi);
    return {std::max(out.lo, -1.0), std::min(out.hi, 1.0)};
}

inline Interval pow(const Interval& x, int e) {
    if (e == 0) return {1.0, 1.0};
    const double a = std::pow(x.lo, e), b = std::pow(x.hi, e);
    if (e % 2 == 1) return detail::widen(a, b);
    if (x.contains(0.0)) return detail::widen(0.0, std::max(a, b));
    return detail::widen(std::min(a, b), std::max(a, b));
}

class Expr {
public:
    enum class Op { Const, Var, Add, Mul, Neg, Sin, Cos, Pow };

    Expr() : Expr(0.0) {}
    Expr(double c) : node_(std::make_shared<Node>(Node{Op::Const, c, 0, nullptr, nullptr})) {}  // NOLINT

    static Expr constant(double c) { return Expr(c); }
    static Expr var(int i) {
        if (i < 0) throw ParseError("negative variable index");
        return Expr(std::make_shared<Node>(Node{Op::Var, 0.0, i, nullptr, nullptr}));
    }

    Op op() const { return node_->op; }
    bool is_const() const { return node_->op == Op::Const; }
    bool is_zero() const { return is_const() && node_->value == 0.0; }
    bool is_one() const { return is_const() && node_->value == 1.0; }
    double const_value() const { return node_->value; }

    /// Largest variable index referenced, or -1 for constants.
    int max_var() const {
        switch (node_->op) {
            case Op::Const: return -1;
            case Op::Var: return node_->index;
            default: {
                int m = lhs().max_var();
                if (node_->b) m = std::max(m, rhs().max_var());
                return m;
            }
        }
    }

    double eval(std::span<const double> x) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::Const: return n.value;
            case Op::Var:
                if (static_cast<std::size_t>(n.index) >= x.size()) throw DimensionError("expression variable out of range");
                return x[static_cast<std::size_t>(n.index)];
            case Op::Add: return lhs().eval(x) + rhs().eval(x);
            case Op::Mul: return lhs().eval(x) * rhs().eval(x);
            case Op::Neg: return -lhs().eval(x);
            case Op::Sin: return std::sin(lhs().eval(x));
            case Op::Cos: return std::cos(lhs().eval(x));
            case Op::Pow: return std::pow(lhs().eval(x), n.index);
        }
        return 0.0;
    }

    /// Enclosure of the expression's range over a box.
    Interval eval(std::span<const Interval> box) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::Const: return Interval(n.value);
            case Op::Var:
                if (static_cast<std::size_t>(n.index) >= box.size()) throw DimensionError("expression variable out of range");
                return box[static_cast<std::size_t>(n.index)];
            case Op::Add: return lhs().eval(box) + rhs().eval(box);
            case Op::Mul: return lhs().eval(box) * rhs().eval(box);
            case Op::Neg: return -lhs().eval(box);
            case Op::Sin: return dchain::sin(lhs().eval(box));
            case Op::Cos: return dchain::cos(lhs().eval(box));
            case Op::Pow: return dchain::pow(lhs().eval(box), n.index);
        }
        return {};
    }

    Expr derivative(int v) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::Const: return Expr(0.0);
            case Op::Var: return Expr(n.index == v ? 1.0 : 0.0);
            case Op::Add: return lhs().derivative(v) + rhs().derivative(v);
            case Op::Mul: return lhs().derivative(v) * rhs() + lhs() * rhs().derivative(v);
            case Op::Neg: return -lhs().derivative(v);
            case Op::Sin: return cos(lhs()) * lhs().derivative(v);
            case Op::Cos: return -(sin(lhs()) * lhs().derivative(v));
            case Op::Pow: return Expr(static_cast<double>(n.index)) * pow(lhs(), n.index - 1) * lhs().derivative(v);
        }
        return Expr(0.0);
    }

    /// Replace variable i by values[i].
    Expr substitute(std::span<const Expr> values) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::Const: return *this;
            case Op::Var:
                if (static_cast<std::size_t>(n.index) >= values.size()) throw DimensionError("substitution too short");
                return values[static_cast<std::size_t>(n.index)];
            case Op::Add: return lhs().substitute(values) + rhs().substitute(values);
            case Op::Mul: return lhs().substitute(values) * rhs().substitute(values);
            case Op::Neg: return -lhs().substitute(values);
            case Op::Sin: return sin(lhs().substitute(values));
            case Op::Cos: return cos(lhs().substitute(values));
            case Op::Pow: return pow(lhs().substitute(values), n.index);
        }
        return *this;
    }

    /// Prefix (s-expression) rendering; variable i prints as names[i] or x<i>.
    std::string to_prefix(std::span<const std::string> names = {}) const {
        const Node& n = *node_;
        switch (n.op) {
            case Op::Const: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                return buf;
            }
            case Op::Var:
                if (static_cast<std::size_t>(n.index) < names.size()) return names[static_cast<std::size_t>(n.index)];
                return "x" + std::to_string(n.index);
            case Op::Add: return "(+ " + lhs().to_prefix(names) + " " + rhs().to_prefix(names) + ")";
            case Op::Mul: return "(* " + lhs().to_prefix(names) + " " + rhs().to_prefix(names) + ")";
            case Op::Neg: return "(- " + lhs().to_prefix(names) + ")";
            case Op::Sin: return "(sin " + lhs().to_prefix(names) + ")";
            case Op::Cos: return "(cos " + lhs().to_prefix(names) + ")";
            case Op::Pow: return "(^ " + lhs().to_prefix(names) + " " + std::to_string(n.index) + ")";
        }
        return {};
    }

    friend Expr operator+(const Expr& a, const Expr& b) {
        if (a.is_const() && b.is_const()) return Expr(a.const_value() + b.const_value());
        if (a.is_zero()) return b;
        if (b.is_zero()) return a;
        return make(Op::Add, a, b);
    }
    friend Expr operator*(const Expr& a, const Expr& b) {
        if (a.is_const() && b.is_const()) return Expr(a.const_value() * b.const_value());
        if (a.is_zero() || b.is_zero()) return Expr(0.0);
        if (a.is_one()) return b;
        if (b.is_one()) return a;
        // Keep constants on the left so chains of scalings fold.
        if (b.is_const()) return b * a;
        if (a.is_const() && b.op() == Op::Mul && b.lhs().is_const())
            return Expr(a.const_value() * b.lhs().const_value()) * b.rhs();
        return make(Op::Mul, a, b);
    }
    friend Expr operator-(const Expr& a) {
        if (a.is_const()) return Expr(-a.const_value());
        if (a.op() == Op::Neg) return a.lhs();
        return make(Op::Neg, a, Expr());
    }
    friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

    friend Expr sin(const Expr& a) {
        if (a.is_const()) return Expr(std::sin(a.const_value()));
        return make(Op::Sin, a, Expr());
    }
    friend Expr cos(const Expr& a) {
        if (a.is_const()) return Expr(std::cos(a.const_value()));
        return make(Op::Cos, a, Expr());
    }
    friend Expr pow(const Expr& a, int e) {
        if (e < 0) throw ParseError("negative exponents are not supported");
        if (e == 0) return Expr(1.0);
        if (e == 1) return a;
        if (a.is_const()) return Expr(std::pow(a.const_value(), e));
        if (a.op() == Op::Pow) return pow(a.lhs(), a.node_->index * e);
        auto n = std::make_shared<Node>(Node{Op::Pow, 0.0, e, a.node_, nullptr});
        return Expr(std::move(n));
    }

    Expr lhs() const { return Expr(node_->a); }
    Expr rhs() const { return Expr(node_->b); }
    int exponent() const { return node_->index; }
    int var_index() const { return node_->index; }

private:
    struct Node {
        Op op;
        double value;
        int index;  // variable index or exponent
        std::shared_ptr<const Node> a;
        std::shared_ptr<const Node> b;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Expr make(Op op, const Expr& a, const Expr& b) {
        const bool unary = op == Op::Neg || op == Op::Sin || op == Op::Cos;
        return Expr(std::make_shared<Node>(Node{op, 0.0, 0, a.node_, unary ? nullptr : b.node_}));
    }

    std::shared_ptr<const Node> node_;
};

/// Default variable names: x, y, z, w for n <= 4; x0.. otherwise.
inline std::vector<std::string> default_var_names(int n) {
    static const char* short_names[] = {"x", "y", "z", "w"};
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.emplace_back(n <= 4 ? short_names[i] : "x" + std::to_string(i));
    return out;
}

/// Variable names for maps on [0,1] x R^n: t first, then the spatial names.
inline std::vector<std::string> homotopy_var_names(int n) {
    std::vector<std::string> out{"t"};
    for (auto& s : default_var_names(n)) out.push_back(s);
    return out;
}

namespace detail {

class PrefixParser {
public:
    PrefixParser(std::string_view src, std::span<const std::string> names) : src_(src), names_(names) {}

    Expr parse_all() {
        Expr e = parse();
        skip_ws();
        if (pos_ != src_.size()) fail("trailing input");
        return e;
    }

    Expr parse() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        if (src_[pos_] == '(') {
            ++pos_;
            const std::string head = token();
            std::vector<Expr> args;
            while (true) {
                skip_ws();
                if (pos_ >= src_.size()) fail("missing ')'");
                if (src_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                args.push_back(parse());
            }
            return apply(head, args);
        }
        return atom(token());
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("expression parse error at offset " + std::to_string(pos_) + ": " + what + " in '" +
                         std::string(src_) + "'");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    std::string token() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
               src_[pos_] != ')')
            ++pos_;
        if (start == pos_) fail("expected a token");
        return std::string(src_.substr(start, pos_ - start));
    }

    Expr atom(const std::string& tok) const {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc() && ptr == tok.data() + tok.size()) return Expr(v);
        if (tok == "pi") return Expr(std::numbers::pi);
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == tok) return Expr::var(static_cast<int>(i));
        if (tok.size() > 1 && tok[0] == 'x' && std::all_of(tok.begin() + 1, tok.end(), ::isdigit))
            return Expr::var(std::stoi(tok.substr(1)));
        fail("unknown symbol '" + tok + "'");
    }

    Expr apply(const std::string& head, const std::vector<Expr>& args) const {
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi) fail("wrong number of arguments to '" + head + "'");
        };
        if (head == "+") {
            need(1, 1000);
            Expr s = args[0];
            for (std::size_t i = 1; i < args.size(); ++i) s = s + args[i];
            return s;
        }
        if (head == "*") {
            need(1, 1000);
            Expr s = args[0];
            for (std::size_t i = 1; i < args.size(); ++i) s = s * args[i];
            return s;
        }
        if (head == "-") {
            need(1, 1000);
            if (args.size() == 1) return -args[0];
            Expr s = args[0];
            for (std::size_t i = 1; i < args.size(); ++i) s = s - args[i];
            return s;
        }
        if (head == "/") {
            need(2, 2);
            if (!args[1].is_const() || args[1].const_value() == 0.0) fail("'/' needs a nonzero constant divisor");
            return Expr(1.0 / args[1].const_value()) * args[0];
        }
        if (head == "^" || head == "pow") {
            need(2, 2);
            if (!args[1].is_const() || args[1].const_value() < 0 ||
                args[1].const_value() != std::floor(args[1].const_value()))
                fail("'^' needs a non-negative integer exponent");
            return pow(args[0], static_cast<int>(args[1].const_value()));
        }
        if (head == "sin") {
            need(1, 1);
            return sin(args[0]);
        }
        if (head == "cos") {
            need(1, 1);
            return cos(args[0]);
        }
        fail("unknown operator '" + head + "'");
    }

    std::string_view src_;
    std::span<const std::string> names_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse a prefix expression such as "(+ (* 2 x) (sin y))".
inline Expr parse_prefix(std::string_view src, std::span<const std::string> names) {
    return detail::PrefixParser(src, names).parse_all();
}

}  // namespace dchain
