#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <dchain/forms.hpp>

using namespace dchain;

namespace {
const Expr x = Expr::var(0), y = Expr::var(1), z = Expr::var(2);

std::vector<Point> random_points(std::mt19937_64& rng, int n, int count, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<Point> out;
    for (int i = 0; i < count; ++i) {
        Point p(static_cast<std::size_t>(n));
        for (double& v : p) v = u(rng);
        out.push_back(p);
    }
    return out;
}

MultiVector random_mv(std::mt19937_64& rng, int n, int k) {
    std::normal_distribution<double> g;
    MultiVector a(n, k);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = g(rng);
    return a;
}
}  // namespace

TEST(Evaluate, Examples) {
    const auto xdy = FormField::monomial(2, {1}, x);
    EXPECT_DOUBLE_EQ(xdy.evaluate(Point{1.0, 0.0}, MultiVector::basis(2, {1})), 1.0);
    EXPECT_DOUBLE_EQ(xdy.evaluate(Point{1.0, 0.0}, MultiVector::basis(2, {0})), 0.0);
    const auto w = FormField::monomial(2, {0, 1}, pow(x, 2));
    EXPECT_DOUBLE_EQ(w.evaluate(Point{2.0, 5.0}, MultiVector::basis(2, {0, 1}, 3.0)), 12.0);
}

TEST(Evaluate, DomainAndGradeErrors) {
    const auto w = FormField::monomial(2, {0}, x, Domain::cube(2, 0.0, 1.0));
    EXPECT_THROW(w.evaluate(Point{2.0, 0.0}, MultiVector::basis(2, {0})), DomainError);
    EXPECT_THROW(w.evaluate(Point{0.5, 0.5}, MultiVector::basis(2, {0, 1})), GradeError);
}

TEST(ExteriorDerivative, Examples) {
    const auto d1 = FormField::monomial(2, {1}, x).d();
    EXPECT_EQ(d1.degree(), 2);
    EXPECT_DOUBLE_EQ(d1.coeff(0).eval(Point{0.3, 0.7}), 1.0);
    EXPECT_TRUE(FormField::function(2, Expr(3.0)).d().coeff(0).is_zero());
    const auto eta = FormField::monomial(2, {1}, Expr(0.5) * x) - FormField::monomial(2, {0}, Expr(0.5) * y);
    EXPECT_DOUBLE_EQ(eta.d().coeff(0).eval(Point{-0.4, 0.9}), 1.0);
    const auto top = FormField::monomial(2, {0, 1}, x * y).d();
    EXPECT_TRUE(top.is_degenerate());
}

TEST(ExteriorDerivative, SquaresToZero) {
    std::mt19937_64 rng(3);
    const auto pts = random_points(rng, 3, 20);
    for (int k = 0; k <= 1; ++k)
        for (const auto& w : standard_battery(3, k, Domain::cube(3, -1.0, 1.0), 12)) {
            const auto dd = w.d().d();
            for (const auto& p : pts)
                for (const auto& c : dd.coeffs()) EXPECT_NEAR(c.eval(p), 0.0, 1e-12);
        }
}

TEST(ExteriorDerivative, MatchesFiniteDifferences) {
    std::mt19937_64 rng(5);
    for (const auto& w : standard_battery(3, 1, Domain::cube(3, -1.0, 1.0), 8)) {
        const auto dw = w.d();
        for (const auto& p : random_points(rng, 3, 5, -0.5, 0.5)) {
            const auto a = random_mv(rng, 3, 2);
            EXPECT_NEAR(fd_exterior_derivative(w, p, a, 1e-5), dw.evaluate(p, a), 1e-7);
        }
    }
}

TEST(Interior, Examples) {
    const auto area = FormField::monomial(2, {0, 1}, Expr(1.0));
    const auto i1 = area.interior(MultiVector::basis(2, {0}));
    EXPECT_DOUBLE_EQ(i1.coeff(1).eval(Point{0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(i1.coeff(0).eval(Point{0, 0}), 0.0);
    const auto i2 = area.interior(MultiVector::basis(2, {1}));
    EXPECT_DOUBLE_EQ(i2.coeff(0).eval(Point{0, 0}), -1.0);
    const auto zero = FormField::monomial(2, {1}, Expr(1.0)).interior(MultiVector::basis(2, {0}));
    EXPECT_DOUBLE_EQ(zero.coeff(0).eval(Point{0, 0}), 0.0);
}

TEST(Interior, DualToExtrusion) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (const auto& w : standard_battery(4, 3, Domain::cube(4, -1.0, 1.0), 10)) {
        const MultiVector beta = wedge(MultiVector::vector(std::vector<double>{g(rng), g(rng), g(rng), g(rng)}),
                                       MultiVector::vector(std::vector<double>{g(rng), g(rng), g(rng), g(rng)}));
        const auto iw = w.interior(beta);
        for (const auto& p : random_points(rng, 4, 5)) {
            const auto a = random_mv(rng, 4, 1);
            EXPECT_NEAR(iw.evaluate(p, a), w.evaluate(p, wedge(beta, a)), 1e-12);
        }
    }
}

TEST(Interior, RejectsNonSimple) {
    const auto w = FormField::monomial(4, {0, 1, 2, 3}, Expr(1.0));
    EXPECT_THROW(w.interior(MultiVector::basis(4, {0, 1}) + MultiVector::basis(4, {2, 3})), NotSimpleError);
}

TEST(Wedge, ProductRule) {
    std::mt19937_64 rng(9);
    const Domain u = Domain::cube(3, -1.0, 1.0);
    const auto as = standard_battery(3, 1, u, 6, 1), bs = standard_battery(3, 1, u, 6, 2);
    const auto pts = random_points(rng, 3, 5);
    for (std::size_t i = 0; i < as.size(); ++i) {
        // d(a ^ b) = da ^ b - a ^ db for 1-forms
        const auto lhs = wedge(as[i], bs[i]).d();
        const auto rhs = wedge(as[i].d(), bs[i]) - wedge(as[i], bs[i].d());
        for (const auto& p : pts) EXPECT_NEAR(lhs.coeff(0).eval(p), rhs.coeff(0).eval(p), 1e-12);
    }
}

TEST(BrNorm, Examples) {
    const auto dx = FormField::monomial(2, {0}, Expr(1.0), Domain::cube(2, -3.0, 5.0));
    EXPECT_DOUBLE_EQ(exact_br_norm(dx, 1).value, 1.0);
    const auto xdy = FormField::monomial(2, {1}, x, Domain::cube(2, 0.0, 1.0));
    const auto n2 = exact_br_norm(xdy, 2);
    EXPECT_NEAR(n2.value, 1.0, 1e-12);
    EXPECT_NEAR(n2.per_order[0], 1.0, 1e-12);
    EXPECT_NEAR(n2.per_order[1], 1.0, 1e-12);
    EXPECT_NEAR(n2.lipschitz(), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(exact_br_norm(FormField::zero(2, 1, Domain::cube(2, 0.0, 1.0)), 3).value, 0.0);
    EXPECT_THROW(exact_br_norm(FormField::monomial(2, {0}, x), 1), DomainError);
}

TEST(BrNorm, ClosedFormOneDimensional) {
    const auto w = FormField::monomial(1, {0}, pow(x, 2), Domain::cube(1, 0.0, 3.0));
    const auto d = exact_br_norm(w, 3);
    EXPECT_NEAR(d.per_order[0], 9.0, 1e-9);
    EXPECT_NEAR(d.per_order[1], 6.0, 1e-9);
    EXPECT_NEAR(d.per_order[2], 2.0, 1e-9);
    EXPECT_NEAR(d.per_order[3], 0.0, 1e-12);
    const auto s = exact_br_norm(FormField::monomial(1, {0}, sin(x), Domain::cube(1, 0.0, 2.0)), 2);
    EXPECT_NEAR(s.per_order[0], 1.0, 1e-9);
    EXPECT_NEAR(s.per_order[1], 1.0, 1e-9);
    EXPECT_NEAR(s.per_order[2], 1.0, 1e-9);
    EXPECT_TRUE(s.tight());
}

TEST(BrNorm, DominatesSampledDirectionalDerivatives) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    const Domain u = Domain::cube(2, -1.0, 1.0);
    for (const auto& w : standard_battery(2, 1, u, 10)) {
        const auto data = exact_br_norm(w, 2);
        for (const auto& p : random_points(rng, 2, 30, -0.9, 0.9)) {
            Point v{g(rng), g(rng)};
            const double len = std::hypot(v[0], v[1]);
            v[0] /= len;
            v[1] /= len;
            const MultiVector a = MultiVector::vector(std::vector<double>{g(rng), g(rng)});
            const double ma = euclidean_norm(a);
            EXPECT_LE(std::abs(w.evaluate(p, a)), data.per_order[0] * ma + 1e-12);
            const double hstep = 1e-5;
            Point pp = p, pm = p;
            pp[0] += hstep * v[0];
            pp[1] += hstep * v[1];
            pm[0] -= hstep * v[0];
            pm[1] -= hstep * v[1];
            const double d1 = (w.evaluate(pp, a) - w.evaluate(pm, a)) / (2 * hstep);
            EXPECT_LE(std::abs(d1), data.per_order[1] * ma + 1e-6);
            const double d2 = (w.evaluate(pp, a) - 2 * w.evaluate(p, a) + w.evaluate(pm, a)) / (hstep * hstep);
            EXPECT_LE(std::abs(d2), data.per_order[2] * ma + 1e-3);
        }
    }
}

TEST(Battery, DeterministicAndProbesEveryBlade) {
    const Domain u = Domain::cube(3, -1.0, 1.0);
    const auto a = standard_battery(3, 2, u, 7), b = standard_battery(3, 2, u, 7);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(a[i].coeff(i).eval(Point{0.1, 0.2, 0.3}), 1.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_EQ(a[i].coeff(0).to_prefix(default_var_names(3)), b[i].coeff(0).to_prefix(default_var_names(3)));
}
