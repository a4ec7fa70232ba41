#pragma once
/**
 * @file exterior_algebra.hpp
 * @brief Dense multivectors over R^n with the standard Euclidean inner product.
 *
 * A grade-k multivector stores binomial(n,k) coefficients, one per k-subset of
 * {0..n-1}, ordered lexicographically (e01 < e02 < ... < e12 < ...).  Subsets are
 * handled as bitmasks internally, so the ambient dimension is capped at kMaxDim.
 */

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace dchain {

inline constexpr int kMaxDim = 12;
inline constexpr double kAlgebraTol = 1e-10;

using Mask = std::uint32_t;

inline std::size_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

namespace detail {

// Lexicographic k-subsets of {0..n-1} for every n <= kMaxDim, plus the inverse map.
struct BasisTables {
    // masks[n][k] lists subsets in lexicographic order of their sorted index tuples.
    std::array<std::array<std::vector<Mask>, kMaxDim + 1>, kMaxDim + 1> masks;
    // index[n][mask] gives the position of mask inside masks[n][popcount(mask)].
    std::array<std::vector<std::uint32_t>, kMaxDim + 1> index;

    BasisTables() {
        for (int n = 0; n <= kMaxDim; ++n) {
            index[n].assign(std::size_t{1} << n, 0);
            for (int k = 0; k <= n; ++k) {
                std::vector<int> comb(k);
                std::iota(comb.begin(), comb.end(), 0);
                auto& out = masks[n][k];
                out.reserve(binomial(n, k));
                while (true) {
                    Mask m = 0;
                    for (int c : comb) m |= Mask{1} << c;
                    index[n][m] = static_cast<std::uint32_t>(out.size());
                    out.push_back(m);
                    int i = k - 1;
                    while (i >= 0 && comb[i] == n - k + i) --i;
                    if (i < 0) break;
                    ++comb[i];
                    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                }
            }
        }
    }
};

inline const BasisTables& tables() {
    static const BasisTables t;
    return t;
}

}  // namespace detail

/// Bitmask of the i-th lexicographic k-subset of {0..n-1}.
inline Mask blade_mask(int n, int k, std::size_t i) { return detail::tables().masks[n][k][i]; }

/// Position of a k-subset mask in the lexicographic basis.
inline std::size_t blade_index(int n, Mask m) { return detail::tables().index[n][m]; }

inline const std::vector<Mask>& blade_masks(int n, int k) { return detail::tables().masks[n][k]; }

inline std::vector<int> mask_indices(Mask m) {
    std::vector<int> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}

/// Sign of e_a ^ e_b relative to e_{a|b} in sorted order; the masks must be disjoint.
inline int reorder_sign(Mask a, Mask b) {
    int swaps = 0;
    while (b) {
        int j = std::countr_zero(b);
        b &= b - 1;
        swaps += std::popcount(a >> (j + 1));
    }
    return (swaps & 1) ? -1 : 1;
}

class MultiVector {
public:
    MultiVector() = default;

    MultiVector(int n, int k) : n_(n), k_(k) {
        check_shape(n, k);
        coeffs_.assign(binomial(n, k), 0.0);
    }

    MultiVector(int n, int k, std::vector<double> coeffs) : n_(n), k_(k), coeffs_(std::move(coeffs)) {
        check_shape(n, k);
        if (coeffs_.size() != binomial(n, k))
            throw DimensionError("multivector of grade " + std::to_string(k) + " in R^" + std::to_string(n) +
                                 " needs " + std::to_string(binomial(n, k)) + " coefficients");
    }

    static MultiVector scalar(int n, double value) { return MultiVector(n, 0, {value}); }

    static MultiVector vector(std::span<const double> v) {
        return MultiVector(static_cast<int>(v.size()), 1, std::vector<double>(v.begin(), v.end()));
    }

    /// Basis blade e_{i1} ^ ... ^ e_{ik} from 0-based indices in any order (sign follows the order).
    static MultiVector basis(int n, std::initializer_list<int> indices, double weight = 1.0) {
        return basis(n, std::span<const int>(indices.begin(), indices.size()), weight);
    }

    static MultiVector basis(int n, std::span<const int> indices, double weight = 1.0) {
        MultiVector out(n, 0, {weight});
        for (int i : indices) {
            if (i < 0 || i >= n) throw DimensionError("basis index out of range");
            MultiVector e(n, 1);
            e.coeffs_[static_cast<std::size_t>(i)] = 1.0;
            out = out.wedge_with(e);
        }
        return out;
    }

    static MultiVector from_mask(int n, Mask m, double weight = 1.0) {
        MultiVector out(n, std::popcount(m));
        out.coeffs_[blade_index(n, m)] = weight;
        return out;
    }

    int dim() const { return n_; }
    int grade() const { return k_; }
    std::size_t size() const { return coeffs_.size(); }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }
    double& operator[](std::size_t i) { return coeffs_[i]; }
    double coeff(Mask m) const { return coeffs_[blade_index(n_, m)]; }
    Mask mask(std::size_t i) const { return blade_mask(n_, k_, i); }

    bool is_zero(double tol = 0.0) const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [tol](double c) { return std::abs(c) <= tol; });
    }

    double max_abs() const {
        double m = 0.0;
        for (double c : coeffs_) m = std::max(m, std::abs(c));
        return m;
    }

    MultiVector& operator+=(const MultiVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    MultiVector& operator-=(const MultiVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    MultiVector& operator*=(double s) {
        for (double& c : coeffs_) c *= s;
        return *this;
    }
    friend MultiVector operator+(MultiVector a, const MultiVector& b) { return a += b; }
    friend MultiVector operator-(MultiVector a, const MultiVector& b) { return a -= b; }
    friend MultiVector operator*(double s, MultiVector a) { return a *= s; }
    friend MultiVector operator*(MultiVector a, double s) { return a *= s; }
    friend MultiVector operator-(MultiVector a) { return a *= -1.0; }
    friend bool operator==(const MultiVector&, const MultiVector&) = default;

    /// Exterior product; throws DegenerateGradeError when the grades sum past n.
    MultiVector wedge_with(const MultiVector& b) const {
        if (n_ != b.n_) throw DimensionError("wedge: ambient dimensions differ");
        if (k_ + b.k_ > n_)
            throw DegenerateGradeError("wedge: grade " + std::to_string(k_ + b.k_) + " exceeds dimension " +
                                       std::to_string(n_));
        MultiVector out(n_, k_ + b.k_);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i] == 0.0) continue;
            Mask ma = mask(i);
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
                if (b.coeffs_[j] == 0.0) continue;
                Mask mb = b.mask(j);
                if (ma & mb) continue;
                out.coeffs_[blade_index(n_, ma | mb)] += reorder_sign(ma, mb) * coeffs_[i] * b.coeffs_[j];
            }
        }
        return out;
    }

    std::string to_string() const {
        std::ostringstream os;
        os << "[n=" << n_ << ",k=" << k_ << "]";
        bool any = false;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i] == 0.0) continue;
            os << (any ? " + " : " ") << coeffs_[i] << "*e";
            for (int idx : mask_indices(mask(i))) os << idx + 1;
            any = true;
        }
        if (!any) os << " 0";
        return os.str();
    }

private:
    static void check_shape(int n, int k) {
        if (n < 0 || n > kMaxDim)
            throw DimensionError("ambient dimension " + std::to_string(n) + " outside [0," +
                                 std::to_string(kMaxDim) + "]");
        if (k < 0 || k > n)
            throw DegenerateGradeError("grade " + std::to_string(k) + " invalid in R^" + std::to_string(n));
    }
    void check_same(const MultiVector& o) const {
        if (n_ != o.n_ || k_ != o.k_) throw GradeError("multivector shapes differ");
    }

    int n_ = 0;
    int k_ = 0;
    std::vector<double> coeffs_{0.0};
};

inline MultiVector wedge(const MultiVector& a, const MultiVector& b) { return a.wedge_with(b); }

/// Wedge of a list of grade-1 vectors, v[0] ^ v[1] ^ ...
inline MultiVector wedge_vectors(int n, std::span<const std::vector<double>> vs) {
    MultiVector out = MultiVector::scalar(n, 1.0);
    for (const auto& v : vs) out = out.wedge_with(MultiVector::vector(v));
    return out;
}

/// Euclidean inner product; basis blades are orthonormal.
inline double inner(const MultiVector& a, const MultiVector& b) {
    if (a.dim() != b.dim()) throw DimensionError("inner: ambient dimensions differ");
    if (a.grade() != b.grade()) throw GradeError("inner: grades differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double euclidean_norm(const MultiVector& a) { return std::sqrt(inner(a, a)); }

/// Hodge star: e_I -> sign * e_{I^c} with e_I ^ e_{I^c} = sign * e_{0..n-1}.
inline MultiVector hodge(const MultiVector& a) {
    const int n = a.dim();
    const Mask full = n == 0 ? 0 : ((Mask{1} << n) - 1);
    MultiVector out(n, n - a.grade());
    for (std::size_t i = 0; i < a.size(); ++i) {
        Mask m = a.mask(i);
        out[blade_index(n, full & ~m)] = reorder_sign(m, full & ~m) * a[i];
    }
    return out;
}

namespace detail {

inline Eigen::MatrixXd skew_matrix(const MultiVector& a) {
    const int n = a.dim();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ij = mask_indices(a.mask(i));
        s(ij[0], ij[1]) = a[i];
        s(ij[1], ij[0]) = -a[i];
    }
    return s;
}

// Matrix of v -> v ^ a, size binomial(n,k+1) x n.
inline Eigen::MatrixXd annihilator_matrix(const MultiVector& a) {
    const int n = a.dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(binomial(n, a.grade() + 1)), n);
    for (int c = 0; c < n; ++c) {
        MultiVector w = MultiVector::basis(n, {c}).wedge_with(a);
        for (std::size_t r = 0; r < w.size(); ++r) m(static_cast<Eigen::Index>(r), c) = w[r];
    }
    return m;
}

}  // namespace detail

/// Decomposability test.  Grades 0, 1, n-1 and n are always simple; grade 2
/// checks a ^ a = 0; other grades count the null space of v -> v ^ a, which
/// has dimension k exactly when a is a nonzero simple k-vector.
inline bool is_simple(const MultiVector& a, double tol = kAlgebraTol) {
    const int n = a.dim(), k = a.grade();
    if (k <= 1 || k >= n - 1) return true;
    const double scale = a.max_abs();
    if (scale <= tol) return true;
    if (k == 2) return a.wedge_with(a).max_abs() <= tol * std::max(1.0, scale * scale);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::annihilator_matrix(a));
    const auto& sv = svd.singularValues();
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= 1e-9 * std::max(scale, sv(0))) ++nullity;
    return nullity == k;
}

struct MassEstimate {
    double lower = 0.0;
    double upper = 0.0;

    bool exact(double tol = kAlgebraTol) const { return upper - lower <= tol * std::max(1.0, upper); }
    MassEstimate& operator+=(const MassEstimate& o) {
        lower += o.lower;
        upper += o.upper;
        return *this;
    }
};

/// Explicit decomposition of a into simple pieces.  Grade-2 (and, via the Hodge
/// star, grade n-2) multivectors use the canonical block form of the skew
/// matrix; other non-simple grades fall back to coordinate blades.
inline std::vector<MultiVector> simple_decomposition(const MultiVector& a) {
    const int n = a.dim(), k = a.grade();
    if (a.is_zero()) return {};
    if (is_simple(a)) return {a};
    if (k == 2 || k == n - 2) {
        const bool dual = k != 2;
        const MultiVector two = dual ? hodge(a) : a;
        // A skew matrix is orthogonally similar to a block diagonal of
        // [[0, l], [-l, 0]] blocks; the real Schur frame Q realises it.
        const Eigen::MatrixXd s = detail::skew_matrix(two);
        Eigen::RealSchur<Eigen::MatrixXd> schur(s);
        const Eigen::MatrixXd& q = schur.matrixU();
        const Eigen::MatrixXd t = q.transpose() * s * q;
        const double tiny = 1e-14 * std::max(1.0, s.cwiseAbs().maxCoeff());
        std::vector<MultiVector> pieces;
        for (int i = 0; i + 1 < n; ++i) {
            const double lambda = 0.5 * (t(i, i + 1) - t(i + 1, i));
            if (std::abs(lambda) <= tiny) continue;
            std::vector<std::vector<double>> uv(2, std::vector<double>(static_cast<std::size_t>(n)));
            for (int r = 0; r < n; ++r) {
                uv[0][static_cast<std::size_t>(r)] = q(r, i);
                uv[1][static_cast<std::size_t>(r)] = q(r, i + 1);
            }
            const MultiVector piece = lambda * wedge_vectors(n, uv);
            // hodge(hodge(x)) = x on grade 2, so the pieces map straight back.
            pieces.push_back(dual ? hodge(piece) : piece);
            ++i;
        }
        return pieces;
    }
    std::vector<MultiVector> pieces;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0.0) pieces.push_back(MultiVector::from_mask(n, a.mask(i), a[i]));
    return pieces;
}

namespace detail {

// Dual lower bound for grade-2 mass: the partial isometry W of the polar
// decomposition S = W|S| is a 2-covector with <W, S> = sum(sigma) / 2, and the
// comass of a 2-covector equals the spectral norm of its skew matrix.
inline double grade2_witness_bound(const MultiVector& two) {
    const Eigen::MatrixXd s = skew_matrix(two);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0.0;
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-12 * sv(0)) w += svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
    w = 0.5 * (w - w.transpose()).eval();
    const double pairing = 0.5 * (w.array() * s.array()).sum();
    Eigen::JacobiSVD<Eigen::MatrixXd> wsvd(w);
    const double comass = wsvd.singularValues()(0);
    return comass > 0.0 ? pairing / comass : 0.0;
}

}  // namespace detail

/// Mass sandwich.  Simple multivectors get lower = upper = Euclidean norm.
/// Non-simple grade 2 and n-2 get a tight sandwich: the upper value sums the
/// pieces of simple_decomposition (plus the coordinate cost of whatever the
/// pieces fail to reproduce) and the lower value comes from a unit-comass dual
/// witness.  Other grades report the Euclidean norm below and the
/// coordinate-blade cost above.
inline MassEstimate mass(const MultiVector& a) {
    const int n = a.dim(), k = a.grade();
    const double e = euclidean_norm(a);
    if (e == 0.0) return {0.0, 0.0};
    if (is_simple(a)) return {e, e};
    double l1 = 0.0;
    for (double c : a.coeffs()) l1 += std::abs(c);
    if (k == 2 || k == n - 2) {
        const double lower = detail::grade2_witness_bound(k == 2 ? a : hodge(a));
        double upper = 0.0;
        MultiVector rebuilt(n, k);
        for (const auto& p : simple_decomposition(a)) {
            upper += euclidean_norm(p);
            rebuilt += p;
        }
        const MultiVector residual = a - rebuilt;
        for (double c : residual.coeffs()) upper += std::abs(c);
        upper = std::min(upper, l1);
        return {std::max(e, std::min(lower, upper)), upper};
    }
    return {e, l1};
}

}  // namespace dchain
