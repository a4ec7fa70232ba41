#pragma once
/**
 * @file lp.hpp
 * @brief Dense two-phase tableau simplex for  min c.x  s.t.  A x = b, x >= 0.
 *
 * Desk-scale only (a few thousand columns).  Dantzig pricing, switching to
 * Bland's rule after a run of degenerate pivots so cycling cannot occur.
 */

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace dchain {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    Eigen::VectorXd x;
};

struct LpOptions {
    double tol = 1e-10;
    long max_iterations = 200000;
    int degenerate_before_bland = 50;
};

namespace detail {

class Tableau {
public:
    // Rows 0..m-1 are constraints, row m the objective; last column the rhs.
    Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis, const LpOptions& opt)
        : t_(std::move(t)), basis_(std::move(basis)), opt_(opt) {}

    /// Pivots until optimal over the columns [0, allowed).  Returns the status.
    LpStatus run(Eigen::Index allowed) {
        const Eigen::Index m = rows(), rhs = t_.cols() - 1;
        int degenerate = 0;
        for (long it = 0; it < opt_.max_iterations; ++it) {
            const bool bland = degenerate >= opt_.degenerate_before_bland;
            Eigen::Index enter = -1;
            double best = -opt_.tol;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                const double rc = t_(m, j);
                if (rc < best) {
                    enter = j;
                    if (bland) break;
                    best = rc;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            Eigen::Index leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = t_(i, enter);
                if (a <= opt_.tol) continue;
                const double q = t_(i, rhs) / a;
                if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && leave >= 0 && basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                    ratio = q;
                    leave = i;
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            degenerate = ratio <= opt_.tol ? degenerate + 1 : 0;
            pivot(leave, enter);
        }
        return LpStatus::IterationLimit;
    }

    void pivot(Eigen::Index r, Eigen::Index c) {
        t_.row(r) /= t_(r, c);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        basis_[static_cast<std::size_t>(r)] = c;
    }

    Eigen::Index rows() const { return t_.rows() - 1; }
    Eigen::MatrixXd& table() { return t_; }
    std::vector<Eigen::Index>& basis() { return basis_; }

private:
    Eigen::MatrixXd t_;
    std::vector<Eigen::Index> basis_;
    LpOptions opt_;
};

}  // namespace detail

/// Solves min c.x subject to A x = b, x >= 0.
inline LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                         const LpOptions& opt = {}) {
    const Eigen::Index m = a.rows(), n = a.cols();
    LpResult res;
    res.x = Eigen::VectorXd::Zero(n);
    if (m == 0) {
        for (Eigen::Index j = 0; j < n; ++j)
            if (c(j) < -opt.tol) {
                res.status = LpStatus::Unbounded;
                return res;
            }
        res.status = LpStatus::Optimal;
        return res;
    }

    // Phase 1: artificial variable per row, rows sign-flipped so b >= 0.
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double s = b(i) < 0.0 ? -1.0 : 1.0;
        t.row(i).head(n) = s * a.row(i);
        t(i, n + i) = 1.0;
        t(i, n + m) = s * b(i);
        basis[static_cast<std::size_t>(i)] = n + i;
    }
    for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
    for (Eigen::Index i = 0; i < m; ++i) t(m, n + i) = 0.0;

    detail::Tableau tab(std::move(t), std::move(basis), opt);
    const LpStatus p1 = tab.run(n + m);
    if (p1 == LpStatus::IterationLimit) {
        res.status = p1;
        return res;
    }
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (-tab.table()(m, n + m) > 1e-9 * scale) {
        res.status = LpStatus::Infeasible;
        return res;
    }

    // Drive artificials out of the basis where possible; rows that cannot be
    // are redundant and keep a zero-valued artificial.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (tab.basis()[static_cast<std::size_t>(i)] < n) continue;
        for (Eigen::Index j = 0; j < n; ++j)
            if (std::abs(tab.table()(i, j)) > 1e-9) {
                tab.pivot(i, j);
                break;
            }
    }

    // Phase 2: artificials barred from entering.
    auto& tt = tab.table();
    tt.row(m).setZero();
    tt.row(m).head(n) = c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bj = tab.basis()[static_cast<std::size_t>(i)];
        if (bj < n && c(bj) != 0.0) tt.row(m) -= c(bj) * tt.row(i);
    }
    const LpStatus p2 = tab.run(n);
    res.status = p2;
    if (p2 != LpStatus::Optimal) return res;
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bj = tab.basis()[static_cast<std::size_t>(i)];
        if (bj < n) res.x(bj) = std::max(0.0, tt(i, n + m));
    }
    res.value = c.dot(res.x);
    return res;
}

}  // namespace dchain
