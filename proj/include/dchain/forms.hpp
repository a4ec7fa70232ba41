#pragma once
/**
 * @file forms.hpp
 * @brief Differential forms with expression-tree coefficients.
 *
 * A degree-k form on R^n carries binomial(n,k) coefficient expressions in the
 * lexicographic blade order shared with MultiVector, so evaluation at (p; alpha)
 * is a dot product of coefficient values with alpha's coordinates.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "expression.hpp"

namespace dchain {

/// Anything that can be evaluated on k-elements.
template <class F>
concept FormLike = requires(const F& f, std::span<const double> p, const MultiVector& a) {
    { f.evaluate(p, a) } -> std::convertible_to<double>;
    { f.degree() } -> std::convertible_to<int>;
    { f.dim() } -> std::convertible_to<int>;
};

class FormField {
public:
    FormField() = default;

    FormField(int n, int k, std::vector<Expr> coeffs, Domain domain)
        : n_(n), k_(k), coeffs_(std::move(coeffs)), domain_(std::move(domain)) {
        if (n < 0 || n > kMaxDim) throw DimensionError("form ambient dimension out of range");
        if (k < 0) throw GradeError("negative form degree");
        if (coeffs_.size() != binomial(n, k))
            throw DimensionError("degree-" + std::to_string(k) + " form on R^" + std::to_string(n) + " needs " +
                                 std::to_string(binomial(n, k)) + " coefficients");
        if (domain_.dim() != n) throw DimensionError("form domain dimension differs from form dimension");
        for (const auto& c : coeffs_)
            if (c.max_var() >= n) throw DimensionError("coefficient uses a variable beyond the form dimension");
    }

    FormField(int n, int k, std::vector<Expr> coeffs) : FormField(n, k, std::move(coeffs), Domain::whole(n)) {}

    static FormField zero(int n, int k, Domain domain) {
        return FormField(n, k, std::vector<Expr>(binomial(n, k), Expr(0.0)), std::move(domain));
    }
    static FormField zero(int n, int k) { return zero(n, k, Domain::whole(n)); }

    /// coeff * dx_{i1} ^ ... ^ dx_{ik} from 0-based indices in any order.
    static FormField monomial(int n, std::initializer_list<int> indices, Expr coeff, Domain domain) {
        const MultiVector blade = MultiVector::basis(n, std::span<const int>(indices.begin(), indices.size()));
        std::vector<Expr> cs(blade.size(), Expr(0.0));
        for (std::size_t i = 0; i < blade.size(); ++i)
            if (blade[i] != 0.0) cs[i] = Expr(blade[i]) * coeff;
        return FormField(n, blade.grade(), std::move(cs), std::move(domain));
    }
    static FormField monomial(int n, std::initializer_list<int> indices, Expr coeff) {
        return monomial(n, indices, std::move(coeff), Domain::whole(n));
    }

    /// A 0-form from a function.
    static FormField function(int n, Expr f, Domain domain) { return FormField(n, 0, {std::move(f)}, std::move(domain)); }
    static FormField function(int n, Expr f) { return function(n, std::move(f), Domain::whole(n)); }

    int dim() const { return n_; }
    int degree() const { return k_; }
    /// Degree above the ambient dimension: the form lives in the zero space.
    bool is_degenerate() const { return k_ > n_; }
    const std::vector<Expr>& coeffs() const { return coeffs_; }
    const Expr& coeff(std::size_t i) const { return coeffs_[i]; }
    const Domain& domain() const { return domain_; }

    FormField with_domain(Domain d) const { return FormField(n_, k_, coeffs_, std::move(d)); }

    /// omega(p; alpha) = sum_I coeff_I(p) alpha_I.
    double evaluate(std::span<const double> p, const MultiVector& alpha) const {
        if (alpha.grade() != k_ || alpha.dim() != n_) throw GradeError("form degree and element grade differ");
        if (!domain_.contains(p)) throw DomainError("form evaluated outside its domain at " + point_to_string(p));
        double s = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i)
            if (alpha[i] != 0.0) s += coeffs_[i].eval(p) * alpha[i];
        return s;
    }

    /// Coefficient values at p as a grade-k multivector (the covector in the dual basis).
    MultiVector covector_at(std::span<const double> p) const {
        MultiVector out(n_, k_);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] = coeffs_[i].eval(p);
        return out;
    }

    FormField& operator+=(const FormField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = coeffs_[i] + o.coeffs_[i];
        return *this;
    }
    FormField& operator-=(const FormField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = coeffs_[i] - o.coeffs_[i];
        return *this;
    }
    friend FormField operator+(FormField a, const FormField& b) { return a += b; }
    friend FormField operator-(FormField a, const FormField& b) { return a -= b; }
    friend FormField operator*(const Expr& f, FormField a) {
        for (auto& c : a.coeffs_) c = f * c;
        return a;
    }
    friend FormField operator*(double s, FormField a) { return Expr(s) * std::move(a); }

    /// Exterior derivative.  Degree-n forms map to the degenerate zero form of degree n+1.
    FormField d() const {
        if (k_ >= n_) return FormField(n_, k_ + 1, {}, domain_, Degenerate{});
        std::vector<Expr> out(binomial(n_, k_ + 1), Expr(0.0));
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            if (coeffs_[i].is_zero()) continue;
            const Mask m = blade_mask(n_, k_, i);
            for (int j = 0; j < n_; ++j) {
                const Mask bit = Mask{1} << j;
                if (m & bit) continue;
                const Expr dj = coeffs_[i].derivative(j);
                if (dj.is_zero()) continue;
                const std::size_t idx = blade_index(n_, m | bit);
                out[idx] = out[idx] + Expr(static_cast<double>(reorder_sign(bit, m))) * dj;
            }
        }
        return FormField(n_, k_ + 1, std::move(out), domain_);
    }

    /// Interior product with a simple multivector: (i_beta w)(p; a) = w(p; beta ^ a).
    FormField interior(const MultiVector& beta) const {
        if (beta.dim() != n_) throw DimensionError("interior: dimension mismatch");
        if (beta.grade() > k_) throw GradeError("interior: multivector grade exceeds form degree");
        if (!is_simple(beta)) throw NotSimpleError("interior product needs a simple multivector");
        const int out_k = k_ - beta.grade();
        std::vector<Expr> out(binomial(n_, out_k), Expr(0.0));
        for (std::size_t j = 0; j < out.size(); ++j) {
            const MultiVector w = beta.wedge_with(MultiVector::from_mask(n_, blade_mask(n_, out_k, j)));
            for (std::size_t i = 0; i < w.size(); ++i)
                if (w[i] != 0.0) out[j] = out[j] + Expr(w[i]) * coeffs_[i];
        }
        return FormField(n_, out_k, std::move(out), domain_);
    }

    friend FormField wedge(const FormField& a, const FormField& b) {
        if (a.n_ != b.n_) throw DimensionError("form wedge: dimension mismatch");
        const int n = a.n_, k = a.k_ + b.k_;
        if (k > n) return FormField(n, k, {}, a.domain_, Degenerate{});
        std::vector<Expr> out(binomial(n, k), Expr(0.0));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (a.coeffs_[i].is_zero()) continue;
            const Mask mi = blade_mask(n, a.k_, i);
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
                const Mask mj = blade_mask(n, b.k_, j);
                if ((mi & mj) || b.coeffs_[j].is_zero()) continue;
                const std::size_t idx = blade_index(n, mi | mj);
                out[idx] = out[idx] + Expr(static_cast<double>(reorder_sign(mi, mj))) * a.coeffs_[i] * b.coeffs_[j];
            }
        }
        return FormField(n, k, std::move(out), a.domain_);
    }

    /// Sampled closedness check: max |d(w)| coefficient over the given points.
    double closedness_residual(std::span<const Point> samples) const {
        const FormField dw = d();
        double r = 0.0;
        for (const auto& p : samples)
            for (const auto& c : dw.coeffs_) r = std::max(r, std::abs(c.eval(p)));
        return r;
    }

private:
    struct Degenerate {};
    FormField(int n, int k, std::vector<Expr>, Domain domain, Degenerate) : n_(n), k_(k), domain_(std::move(domain)) {}

    void check_same(const FormField& o) const {
        if (n_ != o.n_ || k_ != o.k_) throw GradeError("forms differ in dimension or degree");
    }

    int n_ = 0;
    int k_ = 0;
    std::vector<Expr> coeffs_{Expr(0.0)};
    Domain domain_ = Domain::whole(0);
};

/// Type-erased evaluable form, used for pullbacks and homotopy operators
/// whose values come from numeric procedures rather than expression trees.
class EvaluableForm {
public:
    using Fn = std::function<double(std::span<const double>, const MultiVector&)>;

    EvaluableForm(int n, int k, Fn fn) : n_(n), k_(k), fn_(std::move(fn)) {}

    template <FormLike F>
        requires(!std::same_as<std::remove_cvref_t<F>, EvaluableForm>)
    EvaluableForm(const F& f)  // NOLINT(google-explicit-constructor)
        : n_(f.dim()), k_(f.degree()), fn_([f](std::span<const double> p, const MultiVector& a) {
              return f.evaluate(p, a);
          }) {}

    int dim() const { return n_; }
    int degree() const { return k_; }

    double evaluate(std::span<const double> p, const MultiVector& alpha) const {
        if (alpha.grade() != k_ || alpha.dim() != n_) throw GradeError("form degree and element grade differ");
        return fn_(p, alpha);
    }

private:
    int n_;
    int k_;
    Fn fn_;
};

/// Central finite-difference exterior derivative of an evaluable k-form:
/// (d eta)(p; e_I) = sum_a (-1)^a d/dx_{i_a} eta(p; e_{I minus i_a}).
template <FormLike F>
double fd_exterior_derivative(const F& eta, std::span<const double> p, const MultiVector& alpha, double step = 1e-4) {
    const int n = eta.dim(), k = eta.degree();
    if (alpha.grade() != k + 1 || alpha.dim() != n) throw GradeError("fd_exterior_derivative: grade mismatch");
    double total = 0.0;
    for (std::size_t b = 0; b < alpha.size(); ++b) {
        if (alpha[b] == 0.0) continue;
        const auto idx = mask_indices(alpha.mask(b));
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const Mask rest = alpha.mask(b) & ~(Mask{1} << idx[a]);
            const MultiVector face = MultiVector::from_mask(n, rest);
            Point plus(p.begin(), p.end()), minus(p.begin(), p.end());
            plus[static_cast<std::size_t>(idx[a])] += step;
            minus[static_cast<std::size_t>(idx[a])] -= step;
            const double deriv = (eta.evaluate(plus, face) - eta.evaluate(minus, face)) / (2.0 * step);
            total += ((a & 1) ? -1.0 : 1.0) * alpha[b] * deriv;
        }
    }
    return total;
}

/// B^r norm data of a form.  per_order[j] bounds the j-th directional
/// derivatives (comass over unit directions); for r >= 1 the last entry is the
/// Lipschitz constant of the (r-1)-st derivatives, i.e. the sup of the r-th.
struct FormNormData {
    int r = 0;
    double value = 0.0;
    std::vector<double> per_order;
    std::vector<double> per_order_lower;

    double lipschitz() const { return r >= 1 ? per_order.back() : 0.0; }
    bool tight(double rel = 1e-6) const {
        for (std::size_t j = 0; j < per_order.size(); ++j)
            if (per_order[j] - per_order_lower[j] > rel * std::max(1.0, per_order[j])) return false;
        return true;
    }
};

namespace detail {

// Multisets of derivative directions of size j, with the count of ordered tuples each represents.
inline void derivative_multisets(int n, int j, int start, std::vector<int>& cur,
                                 std::vector<std::pair<std::vector<int>, double>>& out) {
    if (static_cast<int>(cur.size()) == j) {
        // multinomial j! / prod(mult!)
        double count = std::tgamma(j + 1.0);
        std::map<int, int> mult;
        for (int c : cur) ++mult[c];
        for (auto& [_, m] : mult) count /= std::tgamma(m + 1.0);
        out.emplace_back(cur, count);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        derivative_multisets(n, j, i, cur, out);
        cur.pop_back();
    }
}

// Weighted squared entries whose sum bounds the squared comass of the j-th derivative tensor.
struct DerivativeTensor {
    std::vector<Expr> entries;
    std::vector<double> weights;

    double value(std::span<const double> p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const double v = entries[i].eval(p);
            s += weights[i] * v * v;
        }
        return std::sqrt(s);
    }
    double upper(std::span<const Interval> box) const {
        double s = 0.0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const double m = entries[i].eval(box).mag();
            s += weights[i] * m * m;
        }
        return std::nextafter(std::sqrt(s), std::numeric_limits<double>::infinity());
    }
};

inline DerivativeTensor derivative_tensor(const FormField& w, int j) {
    DerivativeTensor t;
    std::vector<std::pair<std::vector<int>, double>> sets;
    std::vector<int> cur;
    derivative_multisets(w.dim(), j, 0, cur, sets);
    for (const auto& c : w.coeffs()) {
        for (const auto& [dirs, count] : sets) {
            Expr e = c;
            for (int d : dirs) e = e.derivative(d);
            if (e.is_zero()) continue;
            t.entries.push_back(e);
            t.weights.push_back(count);
        }
    }
    return t;
}

// Branch and bound for sup over a box of the tensor's Frobenius norm.
// Returns {certified upper bound, best value found}.
inline std::pair<double, double> maximize_over_box(const DerivativeTensor& t, const Box& box, double rel_tol,
                                                   int max_boxes) {
    if (t.entries.empty()) return {0.0, 0.0};
    const std::size_t n = box.lo.size();
    struct Cell {
        double upper;
        std::vector<Interval> b;
        bool operator<(const Cell& o) const { return upper < o.upper; }
    };
    auto probe = [&](const std::vector<Interval>& b) {
        double best = 0.0;
        Point p(n);
        const std::size_t corners = n <= 4 ? (std::size_t{1} << n) : 0;
        for (std::size_t c = 0; c < corners; ++c) {
            for (std::size_t i = 0; i < n; ++i) p[i] = (c >> i & 1) ? b[i].hi : b[i].lo;
            best = std::max(best, t.value(p));
        }
        for (std::size_t i = 0; i < n; ++i) p[i] = b[i].mid();
        return std::max(best, t.value(p));
    };
    std::vector<Interval> root(n);
    for (std::size_t i = 0; i < n; ++i) root[i] = Interval(box.lo[i], box.hi[i]);
    std::priority_queue<Cell> queue;
    double lower = probe(root);
    queue.push({t.upper(root), root});
    int used = 1;
    while (!queue.empty()) {
        Cell top = queue.top();
        if (top.upper - lower <= rel_tol * std::max(1.0, lower) || used >= max_boxes) return {top.upper, lower};
        queue.pop();
        std::size_t axis = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (top.b[i].width() > top.b[axis].width()) axis = i;
        const double mid = top.b[axis].mid();
        for (int side = 0; side < 2; ++side) {
            auto b = top.b;
            (side ? b[axis].lo : b[axis].hi) = mid;
            lower = std::max(lower, probe(b));
            queue.push({std::min(top.upper, t.upper(b)), std::move(b)});
            ++used;
        }
    }
    return {lower, lower};
}

}  // namespace detail

/// Certified B^r norm of a form over (the bounding box of) its domain.
/// Each order j = 0..r is bounded by the sup over the box of the Frobenius
/// norm of the j-th derivative tensor, which dominates the comass of every
/// directional derivative along unit vectors.  The bound is exact when the
/// maximising point is found and the tensor has a single nonzero direction
/// per order (the usual case for the test batteries).
inline FormNormData exact_br_norm(const FormField& w, int r, double rel_tol = 1e-9, int max_boxes = 20000) {
    if (r < 0) throw GradeError("B^r norm needs r >= 0");
    FormNormData out;
    out.r = r;
    if (w.is_degenerate()) {
        out.per_order.assign(static_cast<std::size_t>(r + 1), 0.0);
        out.per_order_lower = out.per_order;
        return out;
    }
    if (!w.domain().bounded()) throw DomainError("B^r norms need a bounded domain");
    const Box box = w.domain().bounding_box();
    for (int j = 0; j <= r; ++j) {
        const auto tensor = detail::derivative_tensor(w, j);
        const auto [upper, lower] = detail::maximize_over_box(tensor, box, rel_tol, max_boxes);
        out.per_order.push_back(upper);
        out.per_order_lower.push_back(lower);
    }
    out.value = *std::max_element(out.per_order.begin(), out.per_order.end());
    return out;
}

/// Deterministic pseudo-random battery of degree-k test forms on a box.
/// Coefficients mix polynomial and trigonometric atoms of moderate size; the
/// first forms are the constant coordinate forms, so every blade is probed.
inline std::vector<FormField> standard_battery(int n, int k, const Domain& domain, int count, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> var(0, std::max(0, n - 1));
    std::uniform_int_distribution<int> atom_kind(0, 6);
    std::uniform_real_distribution<double> weight(-1.5, 1.5);
    const std::size_t blades = binomial(n, k);
    auto atom = [&]() -> Expr {
        const Expr a = Expr::var(var(rng)), b = Expr::var(var(rng));
        switch (atom_kind(rng)) {
            case 0: return a;
            case 1: return a * b;
            case 2: return pow(a, 2);
            case 3: return sin(a);
            case 4: return cos(a);
            case 5: return sin(a + b);
            default: return pow(a, 3);
        }
    };
    std::vector<FormField> out;
    for (int m = 0; m < count; ++m) {
        std::vector<Expr> cs(blades, Expr(0.0));
        if (static_cast<std::size_t>(m) < blades) {
            cs[static_cast<std::size_t>(m)] = Expr(1.0);
        } else {
            for (auto& c : cs) c = Expr(weight(rng)) * atom() + Expr(weight(rng)) * atom();
        }
        out.emplace_back(n, k, std::move(cs), domain);
    }
    return out;
}

}  // namespace dchain
