#pragma once
/**
 * @file operators.hpp
 * @brief Operators on Dirac chains: difference-quotient boundary, extrusion,
 *        multiplication by functions, pushforward, Cartesian wedge product and
 *        midpoint representations of intervals and affine cells.
 *
 * Outputs are left unnormalized; pairings are linear so callers normalize
 * only when they need a canonical chain.  Terms are emitted in input order so
 * floating-point sums over them are reproducible.
 */

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "forms.hpp"
#include "maps.hpp"

namespace dchain {

inline constexpr double kDefaultStep = 1e-3;

namespace detail {

// Chooses the translate used by one difference quotient.  Forward p + h v if it
// stays in U, otherwise backward p - h v, otherwise halves h until one fits.
struct DifferenceStencil {
    Point ahead;   // gets +face / step
    Point behind;  // gets -face / step
    double step;
};

inline DifferenceStencil stencil(const Point& p, int axis, double h, const std::optional<Domain>& u) {
    const auto ax = static_cast<std::size_t>(axis);
    for (double step = h; step >= h * 1e-9; step *= 0.5) {
        Point fwd = p;
        fwd[ax] += step;
        if (!u || u->contains(fwd)) return {std::move(fwd), p, step};
        Point bwd = p;
        bwd[ax] -= step;
        if (u->contains(bwd)) return {p, std::move(bwd), step};
    }
    throw DomainError("no difference stencil fits inside the domain at " + point_to_string(p));
}

}  // namespace detail

/// Difference-quotient boundary.  On a basis element (p; e_{i1} ^ ... ^ e_{ik}):
///   sum_a (-1)^(a-1) / h [ (p + h e_{ia}; e_I minus i_a) - (p; e_I minus i_a) ].
/// When a domain is given, translates that would leave it switch to backward
/// differences (or a shrunken step).  Grade-0 chains map to the empty 0-chain.
inline DiracChain boundary_h(const DiracChain& a, double h = kDefaultStep, const std::optional<Domain>& u = std::nullopt) {
    if (!(h > 0.0)) throw DomainError("boundary_h needs a positive step");
    const int n = a.dim(), k = a.grade();
    if (k == 0) return DiracChain(n, 0);
    if (a.is_degenerate()) return DiracChain(n, k - 1);
    DiracChain out(n, k - 1);
    out.reserve(a.size() * 2 * static_cast<std::size_t>(k));
    for (const auto& term : a) {
        for (std::size_t b = 0; b < term.alpha.size(); ++b) {
            const double c = term.alpha[b];
            if (c == 0.0) continue;
            const Mask m = term.alpha.mask(b);
            const auto idx = mask_indices(m);
            for (std::size_t pos = 0; pos < idx.size(); ++pos) {
                const auto st = detail::stencil(term.point, idx[pos], h, u);
                const double w = ((pos & 1) ? -c : c) / st.step;
                const Mask face = m & ~(Mask{1} << idx[pos]);
                out.add(st.ahead, MultiVector::from_mask(n, face, w));
                out.add(st.behind, MultiVector::from_mask(n, face, -w));
            }
        }
    }
    return out;
}

/// E_beta: (p; alpha) -> (p; beta ^ alpha) for simple beta.  Grade overflow
/// returns the empty chain of grade k + s (a degenerate chain).
inline DiracChain extrusion(const MultiVector& beta, const DiracChain& a) {
    if (beta.dim() != a.dim()) throw DimensionError("extrusion: dimension mismatch");
    if (!is_simple(beta)) throw NotSimpleError("extrusion needs a simple multivector");
    const int k = a.grade() + beta.grade();
    DiracChain out(a.dim(), k);
    if (k > a.dim()) return out;
    out.reserve(a.size());
    for (const auto& t : a) out.add(t.point, beta.wedge_with(t.alpha));
    return out;
}

/// m_f: (p; alpha) -> (p; f(p) alpha) for a 0-form f.
inline DiracChain multiply(const FormField& f, const DiracChain& a) {
    if (f.degree() != 0) throw GradeError("multiply needs a 0-form");
    if (f.dim() != a.dim()) throw DimensionError("multiply: dimension mismatch");
    DiracChain out(a.dim(), a.grade());
    out.reserve(a.size());
    for (const auto& t : a) {
        if (!f.domain().contains(t.point))
            throw DomainError("chain support " + point_to_string(t.point) + " escapes the function's domain");
        out.add(t.point, f.coeff(0).eval(t.point) * t.alpha);
    }
    return out;
}

/// F_*: (p; alpha) -> (F(p); Lambda^k DF_p alpha).  Grades above the target
/// dimension give the empty degenerate chain.
inline DiracChain pushforward(const MapField& f, const DiracChain& a) {
    if (f.in_dim() != a.dim()) throw DimensionError("pushforward: chain dimension differs from map input");
    const int k = a.grade();
    DiracChain out(f.out_dim(), k);
    if (k > f.out_dim()) {
        for (const auto& t : a) (void)f.apply(t.point);
        return out;
    }
    out.reserve(a.size());
    for (const auto& t : a) out.add(f.apply(t.point), *push_multivector(f.jacobian(t.point), t.alpha));
    return out;
}

/// P x Q: ((p, q); iota1 alpha ^ iota2 beta), extended bilinearly.
inline DiracChain cartesian_wedge(const DiracChain& p, const DiracChain& q) {
    const int n = p.dim(), m = q.dim(), k = p.grade() + q.grade();
    if (n + m > kMaxDim) throw DimensionError("cartesian_wedge: product dimension too large");
    DiracChain out(n + m, k);
    if (p.is_degenerate() || q.is_degenerate()) return out;
    out.reserve(p.size() * q.size());
    for (const auto& a : p) {
        for (const auto& b : q) {
            Point pt = a.point;
            pt.insert(pt.end(), b.point.begin(), b.point.end());
            MultiVector w(n + m, k);
            for (std::size_t i = 0; i < a.alpha.size(); ++i) {
                if (a.alpha[i] == 0.0) continue;
                const Mask mi = a.alpha.mask(i);
                for (std::size_t j = 0; j < b.alpha.size(); ++j) {
                    if (b.alpha[j] == 0.0) continue;
                    // Indices of iota1 alpha all precede those of iota2 beta, so no sign.
                    w[blade_index(n + m, mi | (b.alpha.mask(j) << n))] += a.alpha[i] * b.alpha[j];
                }
            }
            out.add(std::move(pt), std::move(w));
        }
    }
    return out;
}

/// Midpoint representation of [a, b] in R^1: sum_j (a + (j - 1/2)(b - a)/N; (b - a)/N e_1).
inline DiracChain interval_chain(int subdivisions, double a = 0.0, double b = 1.0) {
    if (subdivisions < 1) throw DomainError("interval_chain needs N >= 1");
    DiracChain out(1, 1);
    out.reserve(static_cast<std::size_t>(subdivisions));
    const double w = (b - a) / subdivisions;
    for (int j = 1; j <= subdivisions; ++j) out.add({a + (j - 0.5) * w}, MultiVector(1, 1, {w}));
    return out;
}

/// Affine k-cell: vertex + { sum s_i edge_i : s in [0,1]^k }, oriented by the edge order.
struct Cell {
    Point vertex;
    std::vector<Point> edges;

    int dim() const { return static_cast<int>(vertex.size()); }
    int grade() const { return static_cast<int>(edges.size()); }

    /// edge_1 ^ ... ^ edge_k; its mass is the k-volume of the cell.
    MultiVector orientation() const { return wedge_vectors(dim(), edges); }

    static Cell unit_cube(int n) {
        Cell c{Point(static_cast<std::size_t>(n), 0.0), {}};
        for (int i = 0; i < n; ++i) {
            Point e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(i)] = 1.0;
            c.edges.push_back(e);
        }
        return c;
    }
};

struct OrientedCell {
    Cell cell;
    int sign = 1;
};

/// Midpoint product quadrature of a cell: N^k terms at subcell centres, each
/// carrying orientation / N^k.
inline DiracChain cell_chain(const Cell& cell, int subdivisions) {
    const int n = cell.dim(), k = cell.grade();
    for (const auto& e : cell.edges)
        if (static_cast<int>(e.size()) != n) throw DimensionError("cell edge dimension differs from vertex dimension");
    if (subdivisions < 1) throw DomainError("cell_chain needs N >= 1");
    const MultiVector orient = cell.orientation();
    double scale = 1.0;
    for (const auto& e : cell.edges) scale *= norm2(e);
    if (k > 0 && euclidean_norm(orient) <= 1e-14 * scale)
        throw DegenerateCellError("cell edge vectors are linearly dependent");
    DiracChain out(n, k);
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= static_cast<std::size_t>(subdivisions);
    out.reserve(total);
    const MultiVector weight = orient * (1.0 / static_cast<double>(total));
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    for (std::size_t s = 0; s < total; ++s) {
        Point p = cell.vertex;
        for (int i = 0; i < k; ++i) {
            const double frac = (idx[static_cast<std::size_t>(i)] + 0.5) / subdivisions;
            for (int c = 0; c < n; ++c)
                p[static_cast<std::size_t>(c)] += frac * cell.edges[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        }
        out.add(std::move(p), weight);
        for (int i = k - 1; i >= 0; --i) {
            if (++idx[static_cast<std::size_t>(i)] < subdivisions) break;
            idx[static_cast<std::size_t>(i)] = 0;
        }
    }
    return out;
}

/// Classical oriented faces: for edge i (0-based) the face at vertex + edge_i
/// carries (-1)^i and the face at vertex carries -(-1)^i.
inline std::vector<OrientedCell> cell_boundary(const Cell& cell) {
    std::vector<OrientedCell> out;
    for (int i = 0; i < cell.grade(); ++i) {
        Cell face{cell.vertex, {}};
        for (int j = 0; j < cell.grade(); ++j)
            if (j != i) face.edges.push_back(cell.edges[static_cast<std::size_t>(j)]);
        const int sign = (i & 1) ? -1 : 1;
        Cell far = face;
        far.vertex = far.vertex + cell.edges[static_cast<std::size_t>(i)];
        out.push_back({std::move(far), sign});
        out.push_back({std::move(face), -sign});
    }
    return out;
}

/// Sum of the oriented faces' midpoint chains.
inline DiracChain cell_boundary_chain(const Cell& cell, int subdivisions) {
    DiracChain out(cell.dim(), cell.grade() - 1);
    for (const auto& f : cell_boundary(cell)) {
        DiracChain c = cell_chain(f.cell, subdivisions);
        c *= static_cast<double>(f.sign);
        out += c;
    }
    return out;
}

/// Closed polygon through the vertices (last joins first), each segment
/// represented by cell_chain with the given subdivision count.
inline DiracChain polygon_chain(const std::vector<Point>& vertices, int per_segment = 1) {
    if (vertices.size() < 2) throw DomainError("polygon needs at least two vertices");
    const int n = static_cast<int>(vertices.front().size());
    DiracChain out(n, 1);
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Point& a = vertices[i];
        const Point& b = vertices[(i + 1) % vertices.size()];
        Point e(a.size());
        for (std::size_t c = 0; c < a.size(); ++c) e[c] = b[c] - a[c];
        out += cell_chain(Cell{a, {e}}, per_segment);
    }
    return out;
}

/// Counter-clockwise regular polygon inscribed in a circle in R^2.
inline std::vector<Point> circle_vertices(int segments, double radius = 1.0, const Point& center = {0.0, 0.0}) {
    std::vector<Point> out;
    for (int i = 0; i < segments; ++i) {
        const double a = 2.0 * std::numbers::pi * i / segments;
        out.push_back({center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)});
    }
    return out;
}

}  // namespace dchain
