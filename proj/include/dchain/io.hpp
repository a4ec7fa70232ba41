#pragma once
/**
 * @file io.hpp
 * @brief JSON encodings of multivectors, chains, domains, forms, maps and
 *        lattices, plus the one-line form shorthand ("x dy", "dx^dy").
 *
 * Requires nlohmann/json.  Blade keys are 1-based comma-separated coordinate
 * indices ("1,2" for e_12); the scalar blade is "".
 */

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "expression.hpp"
#include "forms.hpp"
#include "maps.hpp"
#include "norms.hpp"
#include "operators.hpp"

namespace dchain::io {

using json = nlohmann::json;

inline std::string blade_key(Mask m) {
    std::string s;
    for (int i : mask_indices(m)) {
        if (!s.empty()) s += ',';
        s += std::to_string(i + 1);
    }
    return s;
}

/// 0-based indices of a blade key, in the order written.
inline std::vector<int> key_indices(const std::string& key, int n, int k) {
    std::vector<int> idx;
    Mask seen = 0;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        int i = 0;
        try {
            i = std::stoi(part);
        } catch (const std::exception&) {
            throw ParseError("bad blade key '" + key + "'");
        }
        if (i < 1 || i > n) throw ParseError("blade index out of range in '" + key + "'");
        if (seen & (Mask{1} << (i - 1))) throw ParseError("repeated blade index in '" + key + "'");
        seen |= Mask{1} << (i - 1);
        idx.push_back(i - 1);
    }
    if (static_cast<int>(idx.size()) != k) throw ParseError("blade '" + key + "' does not have grade " + std::to_string(k));
    return idx;
}

/// Reads the coefficient object {"1,2": v, ...}; keys given out of increasing
/// order pick up the permutation sign.  A plain array lists coefficients in
/// lexicographic blade order.
inline MultiVector coeffs_from_json(const json& j, int n, int k) {
    MultiVector out(n, k);
    if (j.is_array()) {
        if (j.size() != out.size()) throw ParseError("coefficient array has the wrong length");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = j[i].get<double>();
        return out;
    }
    if (!j.is_object()) throw ParseError("multivector coefficients must be an object or array");
    for (auto it = j.begin(); it != j.end(); ++it)
        out += it.value().get<double>() * MultiVector::basis(n, key_indices(it.key(), n, k));
    return out;
}

inline json coeffs_to_json(const MultiVector& a) {
    json out = json::object();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0.0) out[blade_key(a.mask(i))] = a[i];
    return out;
}

inline json to_json(const MultiVector& a) { return {{"n", a.dim()}, {"k", a.grade()}, {"coeffs", coeffs_to_json(a)}}; }

inline MultiVector multivector_from_json(const json& j) {
    return coeffs_from_json(j.at("coeffs"), j.at("n").get<int>(), j.at("k").get<int>());
}

/// Canonical chain encoding: normalized, points sorted.
inline json to_json(const DiracChain& c) {
    json terms = json::array();
    for (const auto& t : c.normalized()) terms.push_back({{"p", t.point}, {"alpha", coeffs_to_json(t.alpha)}});
    return {{"n", c.dim()}, {"k", c.grade()}, {"terms", terms}};
}

inline DiracChain chain_from_json(const json& j) {
    const int n = j.at("n").get<int>(), k = j.at("k").get<int>();
    DiracChain c(n, k);
    for (const auto& t : j.at("terms")) c.add(t.at("p").get<Point>(), coeffs_from_json(t.at("alpha"), n, k));
    return c;
}

inline json to_json(const Domain& d) {
    if (d.is_box()) {
        json lo = json::array(), hi = json::array();
        for (double v : d.as_box().lo) lo.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        for (double v : d.as_box().hi) hi.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        return {{"box", {{"lo", lo}, {"hi", hi}}}};
    }
    return {{"ball", {{"center", d.as_ball().center}, {"radius", d.as_ball().radius}}}};
}

/// {"box": {"lo": [...], "hi": [...]}} (null bounds are infinite),
/// {"ball": {"center": [...], "radius": r}} or {"cube": {"n", "lo", "hi"}}.
inline Domain domain_from_json(const json& j, int n) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "whole")) return Domain::whole(n);
    if (j.contains("box")) {
        auto bound = [](const json& v, double inf) {
            Point p;
            for (const auto& x : v) p.push_back(x.is_null() ? inf : x.get<double>());
            return p;
        };
        const double inf = std::numeric_limits<double>::infinity();
        Domain d = Domain::box(bound(j["box"].at("lo"), -inf), bound(j["box"].at("hi"), inf));
        if (d.dim() != n) throw ParseError("domain dimension differs from " + std::to_string(n));
        return d;
    }
    if (j.contains("ball")) {
        Domain d = Domain::ball(j["ball"].at("center").get<Point>(), j["ball"].at("radius").get<double>());
        if (d.dim() != n) throw ParseError("domain dimension differs from " + std::to_string(n));
        return d;
    }
    if (j.contains("cube")) return Domain::cube(n, j["cube"].at("lo").get<double>(), j["cube"].at("hi").get<double>());
    throw ParseError("unknown domain encoding");
}

inline std::vector<std::string> names_from_json(const json& j, std::vector<std::string> fallback) {
    if (!j.contains("vars")) return fallback;
    return j["vars"].get<std::vector<std::string>>();
}

inline Expr expr_from_json(const json& v, std::span<const std::string> names) {
    if (v.is_number()) return Expr(v.get<double>());
    if (v.is_string()) return parse_prefix(v.get<std::string>(), names);
    throw ParseError("expression must be a number or a prefix string");
}

inline json to_json(const FormField& w) {
    const auto names = default_var_names(w.dim());
    json coeffs = json::object();
    for (std::size_t i = 0; i < w.coeffs().size(); ++i)
        if (!w.coeff(i).is_zero()) coeffs[blade_key(blade_mask(w.dim(), w.degree(), i))] = w.coeff(i).to_prefix(names);
    return {{"n", w.dim()}, {"k", w.degree()}, {"vars", names}, {"domain", to_json(w.domain())}, {"coeffs", coeffs}};
}

/// One-line shorthand: terms "coef d<v>^d<v>..." joined by + or -, where the
/// coefficient is a prefix expression or atom and may be omitted.  Examples:
/// "x dy", "dx^dy", "(* 0.5 x) dy - (* 0.5 y) dx", "(sin x)".
inline FormField parse_form_shorthand(std::string_view src, int n, const Domain& domain) {
    const auto names = default_var_names(n);
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < src.size();) {
        if (std::isspace(static_cast<unsigned char>(src[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        if (src[i] == '(') {
            int depth = 0;
            for (; j < src.size(); ++j) {
                if (src[j] == '(') ++depth;
                if (src[j] == ')' && --depth == 0) {
                    ++j;
                    break;
                }
            }
            if (depth != 0) throw ParseError("unbalanced parentheses in form '" + std::string(src) + "'");
        } else {
            while (j < src.size() && !std::isspace(static_cast<unsigned char>(src[j])) && src[j] != '(') ++j;
        }
        tokens.emplace_back(src.substr(i, j - i));
        i = j;
    }
    auto differential = [&](const std::string& tok) -> std::optional<std::vector<int>> {
        if (tok.size() < 2 || tok[0] != 'd') return std::nullopt;
        std::vector<int> idx;
        std::stringstream ss(tok);
        std::string part;
        while (std::getline(ss, part, '^')) {
            if (part.size() < 2 || part[0] != 'd') return std::nullopt;
            const std::string v = part.substr(1);
            const auto it = std::find(names.begin(), names.end(), v);
            if (it != names.end()) {
                idx.push_back(static_cast<int>(it - names.begin()));
            } else if (v.size() > 1 && v[0] == 'x' && std::all_of(v.begin() + 1, v.end(), ::isdigit)) {
                idx.push_back(std::stoi(v.substr(1)));
            } else {
                return std::nullopt;
            }
            if (idx.back() >= n) throw ParseError("differential '" + part + "' exceeds dimension " + std::to_string(n));
        }
        return idx;
    };
    std::optional<FormField> out;
    double sign = 1.0;
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (tokens[i] == "+" || tokens[i] == "-") {
            if (tokens[i] == "-") sign = -sign;
            ++i;
            continue;
        }
        Expr coef(1.0);
        if (!differential(tokens[i])) {
            coef = parse_prefix(tokens[i], names);
            ++i;
        }
        std::vector<int> idx;
        if (i < tokens.size()) {
            if (auto d = differential(tokens[i])) {
                idx = *d;
                ++i;
            }
        }
        const MultiVector blade = MultiVector::basis(n, idx);
        std::vector<Expr> cs(blade.size(), Expr(0.0));
        for (std::size_t b = 0; b < blade.size(); ++b)
            if (blade[b] != 0.0) cs[b] = Expr(sign * blade[b]) * coef;
        const FormField term(n, static_cast<int>(idx.size()), std::move(cs), domain);
        if (!out)
            out = term;
        else if (out->degree() != term.degree())
            throw ParseError("form shorthand mixes degrees: '" + std::string(src) + "'");
        else
            *out += term;
        sign = 1.0;
        if (i < tokens.size() && tokens[i] != "+" && tokens[i] != "-")
            throw ParseError("expected '+' or '-' before '" + tokens[i] + "' in form '" + std::string(src) + "'");
    }
    if (!out) throw ParseError("empty form");
    return *out;
}

/// {"n","k","domain","vars","coeffs":{"1,2":"(* x y)"}} or {"n","shorthand":"x dy","domain"}.
inline FormField form_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    const Domain dom = domain_from_json(j.value("domain", json(nullptr)), n);
    if (j.contains("shorthand")) return parse_form_shorthand(j["shorthand"].get<std::string>(), n, dom);
    const int k = j.at("k").get<int>();
    const auto names = names_from_json(j, default_var_names(n));
    std::vector<Expr> cs(binomial(n, k), Expr(0.0));
    for (auto it = j.at("coeffs").begin(); it != j.at("coeffs").end(); ++it) {
        const MultiVector unit = MultiVector::basis(n, key_indices(it.key(), n, k));
        const Expr e = expr_from_json(it.value(), names);
        for (std::size_t b = 0; b < unit.size(); ++b)
            if (unit[b] != 0.0) cs[b] = cs[b] + Expr(unit[b]) * e;
    }
    return FormField(n, k, std::move(cs), dom);
}

/// {"forms": [...]} or a bare array.
inline std::vector<FormField> battery_from_json(const json& j) {
    const json& arr = j.is_array() ? j : j.at("forms");
    std::vector<FormField> out;
    for (const auto& f : arr) out.push_back(form_from_json(f));
    return out;
}

/// Named cells ("unit-interval", "unit-square", "unit-cube") or {"vertex","edges"}.
inline Cell cell_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "unit-interval") return Cell::unit_cube(1);
        if (s == "unit-square") return Cell::unit_cube(2);
        if (s == "unit-cube") return Cell::unit_cube(3);
        throw ParseError("unknown cell name '" + s + "'");
    }
    return Cell{j.at("vertex").get<Point>(), j.at("edges").get<std::vector<Point>>()};
}

inline json to_json(const Cell& c) { return {{"vertex", c.vertex}, {"edges", c.edges}}; }

/// {"n_in", "coords": [...], "vars"?, "domain"?, "codomain"?}
inline MapField map_from_json(const json& j) {
    const int n = j.at("n_in").get<int>();
    const auto names = names_from_json(j, default_var_names(n));
    std::vector<Expr> cs;
    for (const auto& c : j.at("coords")) cs.push_back(expr_from_json(c, names));
    const int m = static_cast<int>(cs.size());
    return MapField(n, std::move(cs), domain_from_json(j.value("domain", json(nullptr)), n),
                    domain_from_json(j.value("codomain", json(nullptr)), m));
}

/// {"contraction": {"center": [...]}, "source", "target"} or
/// {"n", "coords": [...] in variables t, x, y, ..., "source", "target"}.
inline HomotopyMap homotopy_from_json(const json& j) {
    if (j.contains("contraction")) {
        const Point c = j["contraction"].at("center").get<Point>();
        const int n = static_cast<int>(c.size());
        return HomotopyMap::contraction(c, domain_from_json(j.at("source"), n), domain_from_json(j.at("target"), n));
    }
    const int n = j.at("n").get<int>();
    const auto names = names_from_json(j, homotopy_var_names(n));
    std::vector<Expr> cs;
    for (const auto& c : j.at("coords")) cs.push_back(expr_from_json(c, names));
    const int m = static_cast<int>(cs.size());
    return HomotopyMap(n, std::move(cs), domain_from_json(j.at("source"), n), domain_from_json(j.at("target"), m));
}

inline json to_json(const LatticeSpec& l) {
    return {{"origin", l.origin}, {"h", l.h}, {"counts", l.counts}, {"multiples", l.multiples}};
}

inline LatticeSpec lattice_from_json(const json& j) {
    return LatticeSpec::grid(j.at("origin").get<Point>(), j.at("h").get<double>(), j.at("counts").get<std::vector<int>>(),
                             j.value("multiples", 1));
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

}  // namespace dchain::io
