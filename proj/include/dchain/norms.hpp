#pragma once
/**
 * @file norms.hpp
 * @brief Integral pairing of chains with forms and the B^r norm of Dirac
 *        chains: exact LP value over a finite lattice of difference chains,
 *        plus a certified upper/lower sandwich.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "forms.hpp"
#include "lp.hpp"

namespace dchain {

/// Sum of omega(p_i; alpha_i) in term order.
template <FormLike F>
double pairing(const DiracChain& a, const F& form) {
    if (a.is_degenerate()) return 0.0;
    if (a.grade() != form.degree() || a.dim() != form.dim())
        throw GradeError("pairing: chain grade " + std::to_string(a.grade()) + " against a form of degree " +
                         std::to_string(form.degree()));
    double s = 0.0;
    for (const auto& t : a) s += form.evaluate(t.point, t.alpha);
    return s;
}

/// A representation A = sum of difference terms, each inside U.
struct Decomposition {
    std::vector<DifferenceTerm> terms;
    double total_cost = 0.0;

    DiracChain expand_all(int n, int k) const {
        DiracChain out(n, k);
        for (const auto& t : terms) out += expand(t);
        return out.normalized();
    }
};

/// Regular grid origin + h * (i_1, ..., i_n), 0 <= i_a < counts[a], with
/// difference vectors m h e_a for m = 1..multiples.
struct LatticeSpec {
    Point origin;
    double h = 1.0;
    std::vector<int> counts;
    int multiples = 1;
    std::vector<MultiVector> basis;  // empty: the coordinate blades of the chain grade

    static LatticeSpec grid(Point origin, double h, std::vector<int> counts, int multiples = 1) {
        LatticeSpec s;
        s.origin = std::move(origin);
        s.h = h;
        s.counts = std::move(counts);
        s.multiples = multiples;
        s.validate();
        return s;
    }

    int dim() const { return static_cast<int>(origin.size()); }

    std::size_t point_count() const {
        std::size_t c = 1;
        for (int x : counts) c *= static_cast<std::size_t>(std::max(0, x));
        return c;
    }

    void validate() const {
        if (counts.size() != origin.size()) throw DimensionError("lattice counts and origin differ in dimension");
        if (!(h > 0.0)) throw DomainError("lattice spacing must be positive");
        if (multiples < 1) throw DomainError("lattice multiples must be at least 1");
    }

    Point point(std::span<const int> idx) const {
        Point p = origin;
        for (std::size_t a = 0; a < p.size(); ++a) p[a] += h * idx[a];
        return p;
    }

    /// Lexicographic point list, last axis fastest.
    std::vector<Point> points() const {
        std::vector<Point> out;
        const std::size_t total = point_count();
        out.reserve(total);
        std::vector<int> idx(counts.size(), 0);
        for (std::size_t s = 0; s < total; ++s) {
            out.push_back(point(idx));
            for (int a = static_cast<int>(idx.size()) - 1; a >= 0; --a) {
                if (++idx[static_cast<std::size_t>(a)] < counts[static_cast<std::size_t>(a)]) break;
                idx[static_cast<std::size_t>(a)] = 0;
            }
        }
        return out;
    }

    /// Flat index of p if it lies on the grid (within 1e-9 h per coordinate).
    std::optional<std::size_t> locate(std::span<const double> p) const {
        if (p.size() != origin.size()) return std::nullopt;
        std::size_t flat = 0;
        for (std::size_t a = 0; a < p.size(); ++a) {
            const double q = (p[a] - origin[a]) / h;
            const double r = std::round(q);
            if (std::abs(q - r) > 1e-9 || r < 0 || r >= counts[a]) return std::nullopt;
            flat = flat * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(r);
        }
        return flat;
    }

    std::vector<MultiVector> basis_for(int k) const {
        if (!basis.empty()) return basis;
        std::vector<MultiVector> out;
        const int n = dim();
        for (std::size_t i = 0; i < binomial(n, k); ++i) out.push_back(MultiVector::from_mask(n, blade_mask(n, k, i)));
        return out;
    }
};

struct LatticeNormResult {
    double value = 0.0;
    Decomposition decomposition;
    std::size_t generator_count = 0;
};

namespace detail {

struct Generator {
    DifferenceTerm term;
    double cost;
};

// Nondecreasing index sequences into the difference-vector list; translations
// commute, so order within sigma does not change the expansion.
inline void sigma_multisets(std::size_t choices, int j, std::size_t start, std::vector<std::size_t>& cur,
                            std::vector<std::vector<std::size_t>>& out) {
    if (static_cast<int>(cur.size()) == j) {
        out.push_back(cur);
        return;
    }
    for (std::size_t c = start; c < choices; ++c) {
        cur.push_back(c);
        sigma_multisets(choices, j, c, cur, out);
        cur.pop_back();
    }
}

inline std::vector<Generator> lattice_generators(const DiracChain& a, int r, const LatticeSpec& l, const Domain& u) {
    const int n = a.dim(), k = a.grade();
    std::vector<Point> steps;
    for (int axis = 0; axis < n; ++axis)
        for (int m = 1; m <= l.multiples; ++m) {
            Point v(static_cast<std::size_t>(n), 0.0);
            v[static_cast<std::size_t>(axis)] = m * l.h;
            steps.push_back(std::move(v));
        }
    const auto basis = l.basis_for(k);
    std::vector<double> basis_cost;
    for (const auto& b : basis) {
        if (b.dim() != n || b.grade() != k) throw GradeError("lattice basis multivector has the wrong grade");
        basis_cost.push_back(mass(b).upper);
    }
    std::vector<Generator> out;
    // A's own elements first, so the LP value never exceeds the mass estimate.
    for (const auto& t : a.normalized()) out.push_back({DifferenceTerm{{}, t.point, t.alpha}, mass(t.alpha).upper});
    const auto pts = l.points();
    for (int j = 0; j <= r; ++j) {
        std::vector<std::vector<std::size_t>> sigmas;
        std::vector<std::size_t> cur;
        sigma_multisets(steps.size(), j, 0, cur, sigmas);
        for (const auto& p : pts) {
            if (!u.contains(p)) continue;
            for (const auto& s : sigmas) {
                DifferenceTerm probe{{}, p, basis.front()};
                for (std::size_t c : s) probe.sigma.push_back(steps[c]);
                bool ok = inside(probe, u);
                probe.for_each_vertex([&](const Point& q, double) { ok = ok && l.locate(q).has_value(); });
                if (!ok) continue;
                for (std::size_t b = 0; b < basis.size(); ++b) {
                    DifferenceTerm t{probe.sigma, p, basis[b]};
                    out.push_back({std::move(t), probe.sigma_norm() * basis_cost[b]});
                }
            }
        }
    }
    return out;
}

}  // namespace detail

/// Exact minimum of sum |c_g| cost(g) over lattice generators g (difference
/// terms of order <= r along lattice steps, inside U) with sum c_g expand(g) = A.
inline LatticeNormResult br_norm_lattice(const DiracChain& a, int r, const LatticeSpec& l, const Domain& u) {
    if (r < 0) throw GradeError("B^r norm needs r >= 0");
    l.validate();
    if (l.dim() != a.dim()) throw DimensionError("lattice dimension differs from chain dimension");
    LatticeNormResult res;
    if (a.is_degenerate()) return res;
    const int n = a.dim(), k = a.grade();
    const DiracChain target = a.normalized();
    if (target.empty()) return res;

    // Rows: (lattice point, coordinate blade).
    const std::size_t blades = binomial(n, k);
    for (const auto& t : target) {
        if (!l.locate(t.point)) throw InfeasibleError("chain point " + point_to_string(t.point) + " is not a lattice point");
        if (!u.contains(t.point)) throw InfeasibleError("chain point " + point_to_string(t.point) + " lies outside U");
    }
    if (!l.basis.empty()) {
        Eigen::MatrixXd span(static_cast<Eigen::Index>(blades), static_cast<Eigen::Index>(l.basis.size()));
        for (std::size_t c = 0; c < l.basis.size(); ++c)
            for (std::size_t i = 0; i < blades; ++i) span(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = l.basis[c][i];
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(span);
        for (const auto& t : target) {
            const Eigen::Map<const Eigen::VectorXd> v(t.alpha.coeffs().data(), static_cast<Eigen::Index>(blades));
            if ((span * cod.solve(v) - v).norm() > 1e-9 * std::max(1.0, v.norm()))
                throw InfeasibleError("multivector at " + point_to_string(t.point) + " is outside the lattice basis span");
        }
    }
    const auto gens = detail::lattice_generators(a, r, l, u);
    res.generator_count = gens.size();
    const auto rows = static_cast<Eigen::Index>(l.point_count() * blades);
    const auto g = static_cast<Eigen::Index>(gens.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, 2 * g);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    Eigen::VectorXd cost(2 * g);
    for (Eigen::Index c = 0; c < g; ++c) {
        const auto& gen = gens[static_cast<std::size_t>(c)];
        gen.term.for_each_vertex([&](const Point& q, double sign) {
            const auto row0 = static_cast<Eigen::Index>(*l.locate(q) * blades);
            for (std::size_t i = 0; i < blades; ++i) {
                const double v = sign * gen.term.alpha[i];
                m(row0 + static_cast<Eigen::Index>(i), c) += v;
                m(row0 + static_cast<Eigen::Index>(i), g + c) -= v;
            }
        });
        cost(c) = cost(g + c) = gen.cost;
    }
    for (const auto& t : target) {
        const auto row0 = static_cast<Eigen::Index>(*l.locate(t.point) * blades);
        for (std::size_t i = 0; i < blades; ++i) b(row0 + static_cast<Eigen::Index>(i)) += t.alpha[i];
    }
    // Rows untouched by every generator and the target carry no information.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < rows; ++i)
        if (b(i) != 0.0 || m.row(i).cwiseAbs().maxCoeff() > 0.0) keep.push_back(i);
    Eigen::MatrixXd mk(static_cast<Eigen::Index>(keep.size()), 2 * g);
    Eigen::VectorXd bk(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        mk.row(static_cast<Eigen::Index>(i)) = m.row(keep[i]);
        bk(static_cast<Eigen::Index>(i)) = b(keep[i]);
    }
    const LpResult lp = solve_lp(mk, bk, cost);
    if (lp.status == LpStatus::Infeasible) throw InfeasibleError("chain is not representable on the lattice");
    if (lp.status != LpStatus::Optimal) throw InfeasibleError("lattice LP did not reach an optimum");
    for (Eigen::Index c = 0; c < g; ++c) {
        const double coef = lp.x(c) - lp.x(g + c);
        if (std::abs(coef) <= 1e-13) continue;
        const auto& gen = gens[static_cast<std::size_t>(c)];
        res.decomposition.terms.push_back({gen.term.sigma, gen.term.point, coef * gen.term.alpha});
        res.decomposition.total_cost += std::abs(coef) * gen.cost;
    }
    res.value = res.decomposition.total_cost;
    return res;
}

/// Upper bound on ||A||_{B^r, U}: the lattice LP when a lattice is supplied
/// and the chain fits on it, otherwise the order-0 decomposition (mass).
struct BrUpper {
    double value = 0.0;
    Decomposition decomposition;
    std::string method;
};

inline BrUpper br_upper(const DiracChain& a, int r, const Domain& u, const std::optional<LatticeSpec>& lattice = std::nullopt) {
    BrUpper out;
    if (a.is_degenerate()) {
        out.method = "degenerate";
        return out;
    }
    for (const auto& t : a)
        if (!u.contains(t.point)) throw DomainError("chain support " + point_to_string(t.point) + " lies outside U");
    if (lattice) {
        try {
            auto lat = br_norm_lattice(a, r, *lattice, u);
            out.value = lat.value;
            out.decomposition = std::move(lat.decomposition);
            out.method = "lattice-lp";
            return out;
        } catch (const InfeasibleError&) {
        }
    }
    for (const auto& t : a.normalized()) {
        const double c = mass(t.alpha).upper;
        out.decomposition.terms.push_back({{}, t.point, t.alpha});
        out.decomposition.total_cost += c;
    }
    out.value = out.decomposition.total_cost;
    out.method = "mass";
    return out;
}

enum class BoundStatus { Ok, Warning };

struct BrLower {
    double value = 0.0;
    BoundStatus status = BoundStatus::Ok;
    std::optional<std::size_t> witness;  // battery index attaining the bound
    std::string message;
};

/// sup |pairing(A, w)| / ||w||_{B^r} over the battery.  Each form's domain
/// must contain U for the result to bound ||A||_{B^r, U} from below.
inline BrLower br_lower(const DiracChain& a, int r, const std::vector<FormField>& battery) {
    BrLower out;
    if (battery.empty()) {
        out.status = BoundStatus::Warning;
        out.message = "empty battery: lower bound defaults to 0";
        return out;
    }
    for (std::size_t i = 0; i < battery.size(); ++i) {
        const double norm = exact_br_norm(battery[i], r).value;
        if (!(norm > 0.0)) continue;
        const double v = std::abs(pairing(a, battery[i])) / norm;
        if (v > out.value || !out.witness) {
            out.value = std::max(out.value, v);
            out.witness = i;
        }
    }
    return out;
}

}  // namespace dchain
