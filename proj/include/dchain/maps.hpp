#pragma once
/**
 * @file maps.hpp
 * @brief Differentiable maps between open sets, their k-th compound Jacobians,
 *        pullback of forms and homotopies [0,1] x U1 -> U2.
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "expression.hpp"
#include "forms.hpp"

namespace dchain {

/// k x k minors of J: entry (I', I) = det J[I', I], rows/cols in lexicographic blade order.
inline Eigen::MatrixXd compound_matrix(const Eigen::MatrixXd& jac, int k) {
    const int m = static_cast<int>(jac.rows()), n = static_cast<int>(jac.cols());
    const auto rows = static_cast<Eigen::Index>(binomial(m, k)), cols = static_cast<Eigen::Index>(binomial(n, k));
    Eigen::MatrixXd out(rows, cols);
    if (k == 0) {
        out.setOnes();
        return out;
    }
    Eigen::MatrixXd sub(k, k);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto ri = mask_indices(blade_mask(m, k, static_cast<std::size_t>(r)));
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto ci = mask_indices(blade_mask(n, k, static_cast<std::size_t>(c)));
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < k; ++b) sub(a, b) = jac(ri[static_cast<std::size_t>(a)], ci[static_cast<std::size_t>(b)]);
            out(r, c) = k == 1 ? sub(0, 0) : k == 2 ? sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0) : sub.determinant();
        }
    }
    return out;
}

/// Linear pushforward Lambda^k(J) alpha.  Returns nullopt when k exceeds the target dimension.
inline std::optional<MultiVector> push_multivector(const Eigen::MatrixXd& jac, const MultiVector& alpha) {
    const int m = static_cast<int>(jac.rows()), k = alpha.grade();
    if (static_cast<int>(jac.cols()) != alpha.dim()) throw DimensionError("Jacobian columns differ from multivector dimension");
    if (k > m) return std::nullopt;
    const Eigen::MatrixXd c = compound_matrix(jac, k);
    MultiVector out(m, k);
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
        double s = 0.0;
        for (Eigen::Index j = 0; j < c.cols(); ++j) s += c(r, j) * alpha[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(r)] = s;
    }
    return out;
}

/// F: U1 subset R^n -> U2 subset R^m.  Symbolic maps carry exact partials;
/// numeric maps fall back to central differences with step 1e-5.
class MapField {
public:
    using NumericFn = std::function<Point(std::span<const double>)>;

    MapField(int n_in, std::vector<Expr> coords, Domain domain, Domain codomain)
        : n_(n_in), m_(static_cast<int>(coords.size())), coords_(std::move(coords)), domain_(std::move(domain)),
          codomain_(std::move(codomain)) {
        for (const auto& c : coords_)
            if (c.max_var() >= n_) throw DimensionError("map coordinate uses a variable beyond the input dimension");
        check_domains();
        jac_.resize(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < n_; ++j) jac_[static_cast<std::size_t>(i)].push_back(coords_[static_cast<std::size_t>(i)].derivative(j));
    }

    MapField(int n_in, std::vector<Expr> coords)
        : MapField(n_in, coords, Domain::whole(n_in), Domain::whole(static_cast<int>(coords.size()))) {}

    static MapField numeric(int n_in, int m_out, NumericFn fn, Domain domain, Domain codomain, double fd_step = 1e-5) {
        MapField f;
        f.n_ = n_in;
        f.m_ = m_out;
        f.numeric_ = std::move(fn);
        f.fd_step_ = fd_step;
        f.domain_ = std::move(domain);
        f.codomain_ = std::move(codomain);
        f.check_domains();
        return f;
    }

    static MapField identity(int n) {
        std::vector<Expr> cs;
        for (int i = 0; i < n; ++i) cs.push_back(Expr::var(i));
        return MapField(n, std::move(cs));
    }

    static MapField constant(int n_in, const Point& c) {
        std::vector<Expr> cs;
        for (double v : c) cs.emplace_back(v);
        return MapField(n_in, std::move(cs));
    }

    /// x -> M x + b.
    static MapField affine(const Eigen::MatrixXd& mat, const Point& offset) {
        std::vector<Expr> cs;
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
            Expr e(offset.empty() ? 0.0 : offset[static_cast<std::size_t>(i)]);
            for (Eigen::Index j = 0; j < mat.cols(); ++j)
                if (mat(i, j) != 0.0) e = e + Expr(mat(i, j)) * Expr::var(static_cast<int>(j));
            cs.push_back(e);
        }
        return MapField(static_cast<int>(mat.cols()), std::move(cs));
    }

    int in_dim() const { return n_; }
    int out_dim() const { return m_; }
    bool symbolic() const { return !numeric_; }
    const std::vector<Expr>& coords() const { return coords_; }
    const Domain& domain() const { return domain_; }
    const Domain& codomain() const { return codomain_; }

    MapField with_domains(Domain domain, Domain codomain) const {
        MapField f = *this;
        f.domain_ = std::move(domain);
        f.codomain_ = std::move(codomain);
        f.check_domains();
        return f;
    }

    /// F(p) with domain and codomain checks.
    Point apply(std::span<const double> p) const {
        if (static_cast<int>(p.size()) != n_) throw DimensionError("map applied to a point of the wrong dimension");
        if (!domain_.contains(p)) throw DomainError("point " + point_to_string(p) + " lies outside the map's domain");
        Point out = raw_apply(p);
        if (!codomain_.contains(out))
            throw DomainError("image " + point_to_string(out) + " escapes the map's codomain");
        return out;
    }

    Eigen::MatrixXd jacobian(std::span<const double> p) const {
        Eigen::MatrixXd j(m_, n_);
        if (symbolic()) {
            for (int r = 0; r < m_; ++r)
                for (int c = 0; c < n_; ++c) j(r, c) = jac_[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].eval(p);
            return j;
        }
        Point a(p.begin(), p.end()), b(p.begin(), p.end());
        for (int c = 0; c < n_; ++c) {
            a[static_cast<std::size_t>(c)] += fd_step_;
            b[static_cast<std::size_t>(c)] -= fd_step_;
            const Point fa = numeric_(a), fb = numeric_(b);
            for (int r = 0; r < m_; ++r) j(r, c) = (fa[static_cast<std::size_t>(r)] - fb[static_cast<std::size_t>(r)]) / (2.0 * fd_step_);
            a[static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)];
            b[static_cast<std::size_t>(c)] = p[static_cast<std::size_t>(c)];
        }
        return j;
    }

    const Expr& partial(int i, int j) const { return jac_.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j)); }

    /// this o inner, symbolically.  The result takes inner's domain and this codomain.
    MapField compose(const MapField& inner) const {
        if (!symbolic() || !inner.symbolic()) throw Error("compose needs symbolic maps");
        if (inner.m_ != n_) throw DimensionError("compose: inner output dimension differs from outer input");
        std::vector<Expr> cs;
        for (const auto& c : coords_) cs.push_back(c.substitute(inner.coords_));
        return MapField(inner.n_, std::move(cs), inner.domain_, codomain_);
    }

    /// |F|_{D^r} = max_{i,j} ||d_j F_i||_{B^{r-1}} over the domain, r >= 1.
    double seminorm(int r) const {
        if (r < 1) throw GradeError("|F|_{D^r} needs r >= 1");
        if (!symbolic()) throw Error("seminorm needs a symbolic map");
        double best = 0.0;
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < n_; ++j)
                best = std::max(best, exact_br_norm(FormField::function(n_, partial(i, j), domain_), r - 1).value);
        return best;
    }

private:
    MapField() = default;

    void check_domains() const {
        if (domain_.dim() != n_) throw DimensionError("map domain dimension differs from input dimension");
        if (codomain_.dim() != m_) throw DimensionError("map codomain dimension differs from output dimension");
    }

    Point raw_apply(std::span<const double> p) const {
        if (!symbolic()) return numeric_(p);
        Point out(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) out[static_cast<std::size_t>(i)] = coords_[static_cast<std::size_t>(i)].eval(p);
        return out;
    }

    int n_ = 0;
    int m_ = 0;
    std::vector<Expr> coords_;
    std::vector<std::vector<Expr>> jac_;
    NumericFn numeric_;
    double fd_step_ = 1e-5;
    Domain domain_ = Domain::whole(0);
    Domain codomain_ = Domain::whole(0);
};

/// (F^* w)(p; alpha) = w(F(p); Lambda^k DF_p alpha).
template <FormLike F>
EvaluableForm pullback(const MapField& map, const F& form) {
    if (form.dim() != map.out_dim()) throw DimensionError("pullback: form dimension differs from map target");
    return EvaluableForm(map.in_dim(), form.degree(), [map, form](std::span<const double> p, const MultiVector& a) {
        const auto pushed = push_multivector(map.jacobian(p), a);
        if (!pushed) return 0.0;
        return form.evaluate(map.apply(p), *pushed);
    });
}

/// F: [0,1] x U1 -> U2 with t as input variable 0.
class HomotopyMap {
public:
    HomotopyMap(int n, std::vector<Expr> coords, Domain u1, Domain u2)
        : n_(n), u1_(std::move(u1)), u2_(std::move(u2)),
          map_(n + 1, std::move(coords), time_box(u1_), u2_) {
        if (u1_.dim() != n) throw DimensionError("homotopy source domain has the wrong dimension");
    }

    /// F(t, p) = (1 - t) p + t c: straight-line contraction of U1 to c.
    static HomotopyMap contraction(const Point& c, Domain u1, Domain u2) {
        const int n = static_cast<int>(c.size());
        std::vector<Expr> cs;
        const Expr t = Expr::var(0);
        for (int i = 0; i < n; ++i)
            cs.push_back((Expr(1.0) - t) * Expr::var(i + 1) + Expr(c[static_cast<std::size_t>(i)]) * t);
        return HomotopyMap(n, std::move(cs), std::move(u1), std::move(u2));
    }

    /// F(t, p) = p for every t.
    static HomotopyMap stationary(Domain u1, Domain u2) {
        const int n = u1.dim();
        std::vector<Expr> cs;
        for (int i = 0; i < n; ++i) cs.push_back(Expr::var(i + 1));
        return HomotopyMap(n, std::move(cs), std::move(u1), std::move(u2));
    }

    int source_dim() const { return n_; }
    int target_dim() const { return map_.out_dim(); }
    const Domain& source() const { return u1_; }
    const Domain& target() const { return u2_; }
    const MapField& as_map() const { return map_; }

    Point apply(double t, std::span<const double> p) const { return map_.apply(join(t, p)); }

    /// dF/dt at (t, p).
    Point time_derivative(double t, std::span<const double> p) const {
        const Eigen::MatrixXd j = map_.jacobian(join(t, p));
        Point out(static_cast<std::size_t>(j.rows()));
        for (Eigen::Index r = 0; r < j.rows(); ++r) out[static_cast<std::size_t>(r)] = j(r, 0);
        return out;
    }

    /// DF_t at p (spatial Jacobian).
    Eigen::MatrixXd spatial_jacobian(double t, std::span<const double> p) const {
        const Eigen::MatrixXd j = map_.jacobian(join(t, p));
        return j.rightCols(n_);
    }

    /// f_t = F(t, .) as a map U1 -> U2.
    MapField slice(double t) const {
        std::vector<Expr> subs{Expr(t)};
        for (int i = 0; i < n_; ++i) subs.push_back(Expr::var(i));
        std::vector<Expr> cs;
        for (const auto& c : map_.coords()) cs.push_back(c.substitute(subs));
        return MapField(n_, std::move(cs), u1_, u2_);
    }

    MapField start() const { return slice(0.0); }
    MapField end() const { return slice(1.0); }

    /// |F|_{D^r} over [0,1] x bbox(U1).
    double seminorm(int r) const { return map_.seminorm(r); }

    static Point join(double t, std::span<const double> p) {
        Point x{t};
        x.insert(x.end(), p.begin(), p.end());
        return x;
    }

private:
    static Domain time_box(const Domain& u1) {
        const Box b = u1.bounding_box();
        Point lo{0.0}, hi{1.0};
        lo.insert(lo.end(), b.lo.begin(), b.lo.end());
        hi.insert(hi.end(), b.hi.begin(), b.hi.end());
        return Domain::box(std::move(lo), std::move(hi));
    }

    int n_;
    Domain u1_;
    Domain u2_;
    MapField map_;
};

}  // namespace dchain
