#include <gtest/gtest.h>

#include <limits>
#include <random>

#include <dchain/lp.hpp>

#include "oracles.hpp"

using namespace dchain;

namespace {

// Minimum of c.x over the basic feasible solutions of A x = b, x >= 0.
double vertex_enumerate(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
    double best = std::numeric_limits<double>::infinity();
    const auto n = a.cols();
    for (long mask = 1; mask < (1L << n); ++mask) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < n; ++j)
            if (mask & (1L << j)) cols.push_back(j);
        if (static_cast<Eigen::Index>(cols.size()) > a.rows()) continue;
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = a.col(cols[i]);
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
        if (qr.rank() != sub.cols()) continue;
        const Eigen::VectorXd x = qr.solve(b);
        if ((sub * x - b).cwiseAbs().maxCoeff() > 1e-9 || x.minCoeff() < -1e-12) continue;
        double v = 0.0;
        for (std::size_t i = 0; i < cols.size(); ++i) v += c(cols[i]) * x(static_cast<Eigen::Index>(i));
        best = std::min(best, v);
    }
    return best;
}

}  // namespace

TEST(Simplex, MatchesVertexEnumeration) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 60; ++trial) {
        const Eigen::Index m = 2 + trial % 3, n = 7;
        Eigen::MatrixXd a(m, n);
        for (Eigen::Index i = 0; i < m; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = g(rng);
        Eigen::VectorXd x0(n), c(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            x0(j) = u(rng);
            c(j) = u(rng);
        }
        const Eigen::VectorXd b = a * x0;
        const auto res = solve_lp(a, b, c);
        ASSERT_EQ(res.status, LpStatus::Optimal);
        EXPECT_NEAR(res.value, vertex_enumerate(a, b, c), 1e-8);
        EXPECT_LE((a * res.x - b).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_GE(res.x.minCoeff(), -1e-12);
    }
}

TEST(Simplex, L1SplittingMatchesEnumeration) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index m = 3, n = 6;
        Eigen::MatrixXd a(m, n);
        Eigen::VectorXd cost(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < m; ++i) a(i, j) = g(rng);
            cost(j) = u(rng);
        }
        Eigen::VectorXd b(m);
        for (Eigen::Index i = 0; i < m; ++i) b(i) = g(rng);
        Eigen::MatrixXd split(m, 2 * n);
        split << a, -a;
        Eigen::VectorXd c2(2 * n);
        c2 << cost, cost;
        const auto res = solve_lp(split, b, c2);
        ASSERT_EQ(res.status, LpStatus::Optimal);
        EXPECT_NEAR(res.value, oracle::l1_min_enumerate(a, b, cost), 1e-8);
    }
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
    Eigen::MatrixXd a(1, 2);
    a << 1.0, 1.0;
    EXPECT_EQ(solve_lp(a, Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Ones(2)).status, LpStatus::Infeasible);
    a << 1.0, -1.0;
    Eigen::VectorXd c(2);
    c << -1.0, 0.0;
    EXPECT_EQ(solve_lp(a, Eigen::VectorXd::Zero(1), c).status, LpStatus::Unbounded);
}

TEST(Simplex, RedundantAndDegenerateRows) {
    // duplicated constraint and a zero right-hand side
    Eigen::MatrixXd a(3, 4);
    a << 1, 1, 0, 0,
         1, 1, 0, 0,
         0, 1, 1, -1;
    Eigen::VectorXd b(3);
    b << 2, 2, 0;
    Eigen::VectorXd c(4);
    c << 1, 3, 1, 1;
    const auto res = solve_lp(a, b, c);
    ASSERT_EQ(res.status, LpStatus::Optimal);
    EXPECT_NEAR(res.value, 2.0, 1e-12);
}

TEST(Simplex, BlandFallbackTerminates) {
    // Beale's cycling example in equality form with slacks
    Eigen::MatrixXd a(3, 7);
    a << 0.25, -60, -1.0 / 25, 9, 1, 0, 0,
         0.5, -90, -1.0 / 50, 3, 0, 1, 0,
         0, 0, 1, 0, 0, 0, 1;
    Eigen::VectorXd b(3);
    b << 0, 0, 1;
    Eigen::VectorXd c(7);
    c << -0.75, 150, -1.0 / 50, 6, 0, 0, 0;
    LpOptions opt;
    opt.degenerate_before_bland = 1;
    const auto res = solve_lp(a, b, c, opt);
    ASSERT_EQ(res.status, LpStatus::Optimal);
    EXPECT_NEAR(res.value, -0.05, 1e-12);
}
