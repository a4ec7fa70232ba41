#include <gtest/gtest.h>

#include <random>

#include <dchain/discrete_matrices.hpp>

using namespace dchain;

namespace {

const Expr x = Expr::var(0), y = Expr::var(1);

Eigen::VectorXd random_coords(std::mt19937_64& rng, std::size_t size) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(static_cast<Eigen::Index>(size));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = g(rng);
    return v;
}

// Matrix application against direct application on random chains in the span.
double worst_mismatch(const ChainOperator& op, const ChainBasis& in, const ChainBasis& out, int trials, std::uint64_t seed) {
    const Eigen::MatrixXd m = matrix_of(op, in, out);
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Eigen::VectorXd c = random_coords(rng, in.size());
        const Eigen::VectorXd direct = out.coordinates(op(in.chain_of(c)));
        worst = std::max(worst, (m * c - direct).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace

TEST(ChainBasis, IndexIsBijective) {
    const auto l = LatticeSpec::grid({0.0, 0.0}, 0.5, {3, 2});
    const auto b = ChainBasis::full(l, 1);
    ASSERT_EQ(b.size(), 12u);
    for (std::size_t j = 0; j < b.size(); ++j) {
        const auto e = b.element(j);
        ASSERT_EQ(e.size(), 1u);
        const Eigen::VectorXd c = b.coordinates(e);
        EXPECT_DOUBLE_EQ(c(static_cast<Eigen::Index>(j)), 1.0);
        EXPECT_DOUBLE_EQ(c.cwiseAbs().sum(), 1.0);
    }
    // cubical 1-cells: horizontal edges need x + h on the grid, vertical ones y + h
    EXPECT_EQ(ChainBasis::cubical(l, 1).size(), 2u * 2u + 3u * 1u);
    EXPECT_EQ(ChainBasis::cubical(l, 2).size(), 2u);
}

TEST(ChainBasis, EscapeListsPoints) {
    const auto l = LatticeSpec::grid({0.0}, 0.5, {2});
    const auto b = ChainBasis::full(l, 0);
    try {
        b.coordinates(DiracChain::element({0.25}, MultiVector::scalar(1, 1.0)));
        FAIL() << "expected an escape";
    } catch (const BasisEscapeError& e) {
        EXPECT_NE(std::string(e.what()).find("0.25"), std::string::npos);
    }
}

TEST(MatrixOf, Examples) {
    const auto l = LatticeSpec::grid({0.0, 0.0}, 1.0, {1, 1});
    const auto m = matrix_of(ops::extrusion(MultiVector::basis(2, {0})), ChainBasis::full(l, 0), ChainBasis::full(l, 1));
    ASSERT_EQ(m.rows(), 2);
    ASSERT_EQ(m.cols(), 1);
    EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.0);

    const double h = 0.25;
    const auto seg = LatticeSpec::grid({0.0}, h, {2});
    const auto in = ChainBasis::cubical(seg, 1), out = ChainBasis::cubical(seg, 0);
    const auto d = matrix_of(ops::boundary(h), in, out);
    // the lattice interval chain (0; h e1) has boundary (h; 1) - (0; 1)
    const auto interval = DiracChain::element({0.0}, MultiVector::basis(1, {0}, h));
    const Eigen::VectorXd applied = d * in.coordinates(interval);
    const Eigen::VectorXd direct = out.coordinates(boundary_h(interval, h));
    EXPECT_NEAR(applied(0), -1.0, 1e-15);
    EXPECT_NEAR(applied(1), 1.0, 1e-15);
    EXPECT_LE((applied - direct).cwiseAbs().maxCoeff(), 1e-15);

    const auto z = matrix_of(ops::multiply(FormField::function(2, Expr(0.0))), ChainBasis::full(l, 1), ChainBasis::full(l, 1));
    EXPECT_DOUBLE_EQ(z.cwiseAbs().maxCoeff(), 0.0);
}

TEST(MatrixOf, BoundaryOutsideTheBasisEscapes) {
    const auto l = LatticeSpec::grid({0.0}, 0.5, {2});
    EXPECT_THROW(matrix_of(ops::boundary(0.5), ChainBasis::full(l, 1), ChainBasis::full(l, 0)), BasisEscapeError);
}

TEST(MatrixOf, IsLinearInTheOperator) {
    const auto l = LatticeSpec::grid({0.0, 0.0}, 0.5, {3, 3});
    const auto b = ChainBasis::full(l, 1);
    const FormField f = FormField::function(2, x + y), g = FormField::function(2, x * y);
    const ChainOperator sum = [&](const DiracChain& a) { return 2.0 * multiply(f, a) - 3.0 * multiply(g, a); };
    const Eigen::MatrixXd lhs = matrix_of(sum, b, b);
    const Eigen::MatrixXd rhs = 2.0 * matrix_of(ops::multiply(f), b, b) - 3.0 * matrix_of(ops::multiply(g), b, b);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MatrixOf, AgreesWithDirectApplication) {
    const auto l = LatticeSpec::grid({0.0, 0.0}, 0.5, {3, 3});
    EXPECT_LE(worst_mismatch(ops::boundary(0.5), ChainBasis::cubical(l, 2), ChainBasis::cubical(l, 1), 100, 1), 1e-12);
    EXPECT_LE(worst_mismatch(ops::boundary(0.5), ChainBasis::cubical(l, 1), ChainBasis::cubical(l, 0), 100, 2), 1e-12);
    EXPECT_LE(worst_mismatch(ops::extrusion(MultiVector::basis(2, {1})), ChainBasis::full(l, 1), ChainBasis::full(l, 2), 100, 3),
              1e-12);
    EXPECT_LE(worst_mismatch(ops::multiply(FormField::function(2, sin(x) + y)), ChainBasis::full(l, 1), ChainBasis::full(l, 1), 100, 4),
              1e-12);
    const MapField reflect(2, {Expr(1.0) - x, y});
    EXPECT_LE(worst_mismatch(ops::pushforward(reflect), ChainBasis::full(l, 1), ChainBasis::full(l, 1), 100, 5), 1e-12);
}

TEST(Complex, OneDimensionalThreePoints) {
    const auto c = lattice_complex(LatticeSpec::grid({0.0}, 1.0, {3}));
    const auto diag = complex_diagnostics(c.boundaries, c.dims());
    ASSERT_EQ(diag.grades.size(), 2u);
    EXPECT_EQ(diag.grades[1].rank, 2u);
    EXPECT_EQ(diag.grades[0].defect, 1);
    EXPECT_EQ(diag.grades[1].defect, 0);
}

TEST(Complex, SquareLatticeIsExact) {
    for (int side : {2, 3, 4}) {
        const auto l = LatticeSpec::grid({0.0, 0.0}, 0.5, {side, side});
        const auto c = lattice_complex(l);
        EXPECT_LE((c.boundaries[1] * c.boundaries[2]).cwiseAbs().maxCoeff(), 1e-12);
        const auto diag = complex_diagnostics(c.boundaries, c.dims());
        // Euler characteristic computed both ways
        long chi_dims = 0, chi_defects = 0;
        for (const auto& g : diag.grades) {
            const long sign = g.grade % 2 ? -1 : 1;
            chi_dims += sign * static_cast<long>(g.dimension);
            chi_defects += sign * g.defect;
            if (g.grade > 0) {
                const Eigen::FullPivLU<Eigen::MatrixXd> lu(c.boundaries[static_cast<std::size_t>(g.grade)]);
                EXPECT_EQ(g.rank, static_cast<std::size_t>(lu.rank()));
            }
        }
        EXPECT_EQ(chi_dims, chi_defects);
        EXPECT_EQ(diag.grades[0].defect, 1);
        EXPECT_EQ(diag.grades[1].defect, 0);
        EXPECT_EQ(diag.grades[2].defect, 0);
    }
}

TEST(Complex, EmptyLattice) {
    const auto c = lattice_complex(LatticeSpec::grid({0.0, 0.0}, 1.0, {0, 0}));
    const auto diag = complex_diagnostics(c.boundaries, c.dims());
    for (const auto& g : diag.grades) {
        EXPECT_EQ(g.dimension, 0u);
        EXPECT_EQ(g.rank, 0u);
        EXPECT_EQ(g.defect, 0);
    }
}

TEST(Complex, MismatchedSpacingIsRejected) {
    const auto l = LatticeSpec::grid({0.0, 0.0}, 0.5, {3, 3});
    const auto b0 = ChainBasis::full(l, 0), b1 = ChainBasis::full(l, 1), b2 = ChainBasis::full(l, 2);
    Eigen::MatrixXd d1 = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(b0.size()), static_cast<Eigen::Index>(b1.size()));
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(b1.size()), static_cast<Eigen::Index>(b2.size()));
    EXPECT_THROW(complex_diagnostics({Eigen::MatrixXd(), d1, d2}, {b0.size(), b1.size(), b2.size()}), Error);
}
