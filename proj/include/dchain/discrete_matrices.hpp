#pragma once
/**
 * @file discrete_matrices.hpp
 * @brief Finite base-point setting: chain bases over a lattice, dense matrices
 *        of chain operators, and rank/defect diagnostics of the boundary complex.
 */

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "forms.hpp"
#include "maps.hpp"
#include "norms.hpp"
#include "operators.hpp"

namespace dchain {

/// Columns are (point, blade) pairs in lexicographic point order, blades in
/// lexicographic order within a point.
class ChainBasis {
public:
    struct Entry {
        std::size_t point;
        Mask blade;
    };

    /// Every coordinate blade at every lattice point.
    static ChainBasis full(const LatticeSpec& l, int k) { return build(l, k, false); }

    /// Blade e_I at p only when p + h e_a is a lattice point for every a in I,
    /// i.e. the unit cubical cells.  The lattice-spacing boundary maps this
    /// basis into the next lower one.
    static ChainBasis cubical(const LatticeSpec& l, int k) { return build(l, k, true); }

    int dim() const { return n_; }
    int grade() const { return k_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<Point>& points() const { return points_; }
    const std::vector<Entry>& entries() const { return entries_; }
    const LatticeSpec& lattice() const { return lattice_; }

    std::optional<std::size_t> column(std::span<const double> p, Mask blade) const {
        const auto pi = lattice_.locate(p);
        if (!pi) return std::nullopt;
        const auto it = index_.find({*pi, blade});
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// The basis chain of column j.
    DiracChain element(std::size_t j) const {
        const Entry& e = entries_.at(j);
        return DiracChain::element(points_[e.point], MultiVector::from_mask(n_, e.blade));
    }

    /// Coordinates of a chain in this basis.  Throws BasisEscapeError naming
    /// the points whose nonzero coefficients fall outside the span.
    Eigen::VectorXd coordinates(const DiracChain& a) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
        if (a.is_degenerate()) return out;
        if (a.dim() != n_ || a.grade() != k_) throw GradeError("chain does not match the basis grade or dimension");
        std::vector<Point> escaped;
        for (const auto& t : a) {
            for (std::size_t i = 0; i < t.alpha.size(); ++i) {
                if (t.alpha[i] == 0.0) continue;
                const auto col = column(t.point, t.alpha.mask(i));
                if (col)
                    out(static_cast<Eigen::Index>(*col)) += t.alpha[i];
                else if (escaped.empty() || escaped.back() != t.point)
                    escaped.push_back(t.point);
            }
        }
        if (!escaped.empty()) {
            std::string msg = "chain escapes the basis span at";
            for (std::size_t i = 0; i < escaped.size() && i < 8; ++i) msg += " " + point_to_string(escaped[i]);
            if (escaped.size() > 8) msg += " ... (" + std::to_string(escaped.size()) + " points)";
            throw BasisEscapeError(msg);
        }
        return out;
    }

    DiracChain chain_of(const Eigen::VectorXd& x) const {
        if (x.size() != static_cast<Eigen::Index>(size())) throw DimensionError("coordinate vector has the wrong length");
        DiracChain out(n_, k_);
        if (k_ > n_) return out;
        for (std::size_t j = 0; j < size(); ++j) {
            const double v = x(static_cast<Eigen::Index>(j));
            if (v != 0.0) out.add(points_[entries_[j].point], MultiVector::from_mask(n_, entries_[j].blade, v));
        }
        return out;
    }

private:
    static ChainBasis build(const LatticeSpec& l, int k, bool cubical) {
        l.validate();
        ChainBasis b;
        b.n_ = l.dim();
        b.k_ = k;
        b.lattice_ = l;
        b.points_ = l.points();
        if (k < 0) throw GradeError("negative basis grade");
        if (k > b.n_) return b;
        for (std::size_t pi = 0; pi < b.points_.size(); ++pi) {
            for (std::size_t i = 0; i < binomial(b.n_, k); ++i) {
                const Mask m = blade_mask(b.n_, k, i);
                if (cubical) {
                    bool ok = true;
                    for (int a : mask_indices(m)) {
                        Point q = b.points_[pi];
                        q[static_cast<std::size_t>(a)] += l.h;
                        ok = ok && l.locate(q).has_value();
                    }
                    if (!ok) continue;
                }
                b.index_[{pi, m}] = b.entries_.size();
                b.entries_.push_back({pi, m});
            }
        }
        return b;
    }

    int n_ = 0;
    int k_ = 0;
    LatticeSpec lattice_;
    std::vector<Point> points_;
    std::vector<Entry> entries_;
    std::map<std::pair<std::size_t, Mask>, std::size_t> index_;
};

using ChainOperator = std::function<DiracChain(const DiracChain&)>;

/// Column j holds the coordinates of op(basis_j) in the output basis.
inline Eigen::MatrixXd matrix_of(const ChainOperator& op, const ChainBasis& in, const ChainBasis& out) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(out.size()), static_cast<Eigen::Index>(in.size()));
    for (std::size_t j = 0; j < in.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = out.coordinates(op(in.element(j)));
    return m;
}

namespace ops {

inline ChainOperator boundary(double h) {
    return [h](const DiracChain& a) { return boundary_h(a, h); };
}
inline ChainOperator extrusion(MultiVector beta) {
    return [beta = std::move(beta)](const DiracChain& a) { return dchain::extrusion(beta, a); };
}
inline ChainOperator multiply(FormField f) {
    return [f = std::move(f)](const DiracChain& a) { return dchain::multiply(f, a); };
}
inline ChainOperator pushforward(MapField f) {
    return [f = std::move(f)](const DiracChain& a) { return dchain::pushforward(f, a); };
}

}  // namespace ops

struct GradeDiagnostics {
    int grade = 0;
    std::size_t dimension = 0;
    std::size_t rank = 0;    // rank of d_k : C_k -> C_{k-1}
    std::size_t kernel = 0;  // dim ker d_k
    long defect = 0;         // dim ker d_k - rank d_{k+1}
};

struct ComplexDiagnostics {
    std::vector<GradeDiagnostics> grades;  // k = 0..n
    double composition_max = 0.0;          // max entry of d_k d_{k+1} over k
    double rank_threshold = 1e-9;
};

inline std::size_t numerical_rank(const Eigen::MatrixXd& m, double rel) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++r;
    return r;
}

/// boundaries[k] is d_k : C_k -> C_{k-1} for k = 1..n (boundaries[0] unused);
/// dims[k] = dim C_k for k = 0..n.
inline ComplexDiagnostics complex_diagnostics(const std::vector<Eigen::MatrixXd>& boundaries,
                                              const std::vector<std::size_t>& dims, double rank_threshold = 1e-9,
                                              double composition_tol = 1e-8) {
    const int n = static_cast<int>(dims.size()) - 1;
    if (n < 0) return {};
    if (static_cast<int>(boundaries.size()) != n + 1) throw DimensionError("need one boundary matrix per grade 1..n");
    ComplexDiagnostics out;
    out.rank_threshold = rank_threshold;
    for (int k = 1; k < n; ++k) {
        const auto& a = boundaries[static_cast<std::size_t>(k)];
        const auto& b = boundaries[static_cast<std::size_t>(k + 1)];
        if (a.size() == 0 || b.size() == 0) continue;
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff() * b.cwiseAbs().maxCoeff());
        const double c = (a * b).cwiseAbs().maxCoeff();
        out.composition_max = std::max(out.composition_max, c);
        if (c > composition_tol * scale)
            throw Error("boundary matrices do not compose to zero at grade " + std::to_string(k + 1) +
                        " (lattice spacing and h differ?)");
    }
    std::vector<std::size_t> rank(static_cast<std::size_t>(n + 2), 0);
    for (int k = 1; k <= n; ++k) rank[static_cast<std::size_t>(k)] = numerical_rank(boundaries[static_cast<std::size_t>(k)], rank_threshold);
    for (int k = 0; k <= n; ++k) {
        GradeDiagnostics g;
        g.grade = k;
        g.dimension = dims[static_cast<std::size_t>(k)];
        g.rank = rank[static_cast<std::size_t>(k)];
        g.kernel = g.dimension - g.rank;
        g.defect = static_cast<long>(g.kernel) - static_cast<long>(rank[static_cast<std::size_t>(k + 1)]);
        out.grades.push_back(g);
    }
    return out;
}

/// Cubical bases for k = 0..n and the lattice-spacing boundary matrices.
struct LatticeComplex {
    std::vector<ChainBasis> bases;
    std::vector<Eigen::MatrixXd> boundaries;  // index k: d_k, k = 1..n

    std::vector<std::size_t> dims() const {
        std::vector<std::size_t> d;
        for (const auto& b : bases) d.push_back(b.size());
        return d;
    }
};

inline LatticeComplex lattice_complex(const LatticeSpec& l, bool cubical = true) {
    LatticeComplex c;
    const int n = l.dim();
    for (int k = 0; k <= n; ++k) c.bases.push_back(cubical ? ChainBasis::cubical(l, k) : ChainBasis::full(l, k));
    c.boundaries.emplace_back();
    for (int k = 1; k <= n; ++k)
        c.boundaries.push_back(matrix_of(ops::boundary(l.h), c.bases[static_cast<std::size_t>(k)], c.bases[static_cast<std::size_t>(k - 1)]));
    return c;
}

}  // namespace dchain
