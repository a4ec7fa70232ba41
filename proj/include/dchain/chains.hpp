#pragma once
/**
 * @file chains.hpp
 * @brief Dirac k-chains, difference chains, convex domains and the mass norm.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "exterior_algebra.hpp"

namespace dchain {

using Point = std::vector<double>;

inline Point operator+(Point a, std::span<const double> b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline std::string point_to_string(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

/// Closed axis-aligned box.  Infinite bounds give unbounded slabs.
struct Box {
    Point lo;
    Point hi;
};

/// Closed Euclidean ball.
struct Ball {
    Point center;
    double radius = 0.0;
};

/// Convex region used for "inside" tests and form domains.  Membership is
/// closed: boundary points count as inside.
class Domain {
public:
    Domain() = default;
    Domain(Box b) : shape_(std::move(b)) {  // NOLINT(google-explicit-constructor)
        const Box& box = std::get<Box>(shape_);
        if (box.lo.size() != box.hi.size()) throw DimensionError("box corners differ in dimension");
    }
    Domain(Ball b) : shape_(std::move(b)) {  // NOLINT(google-explicit-constructor)
        if (std::get<Ball>(shape_).radius < 0.0) throw DomainError("negative ball radius");
    }

    static Domain box(Point lo, Point hi) { return Domain(Box{std::move(lo), std::move(hi)}); }
    static Domain ball(Point c, double r) { return Domain(Ball{std::move(c), r}); }
    static Domain cube(int n, double lo, double hi) { return box(Point(n, lo), Point(n, hi)); }
    static Domain whole(int n) {
        const double inf = std::numeric_limits<double>::infinity();
        return box(Point(n, -inf), Point(n, inf));
    }

    bool is_box() const { return std::holds_alternative<Box>(shape_); }
    const Box& as_box() const { return std::get<Box>(shape_); }
    const Ball& as_ball() const { return std::get<Ball>(shape_); }

    int dim() const {
        return static_cast<int>(is_box() ? as_box().lo.size() : as_ball().center.size());
    }

    bool contains(std::span<const double> p) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        if (is_box()) {
            const Box& b = as_box();
            for (std::size_t i = 0; i < p.size(); ++i)
                if (!(p[i] >= b.lo[i] && p[i] <= b.hi[i])) return false;
            return true;
        }
        const Ball& b = as_ball();
        double d2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - b.center[i]) * (p[i] - b.center[i]);
        return d2 <= b.radius * b.radius;
    }

    /// Smallest box containing the domain.
    Box bounding_box() const {
        if (is_box()) return as_box();
        const Ball& b = as_ball();
        Box out{b.center, b.center};
        for (std::size_t i = 0; i < b.center.size(); ++i) {
            out.lo[i] -= b.radius;
            out.hi[i] += b.radius;
        }
        return out;
    }

    bool bounded() const {
        const Box b = bounding_box();
        for (std::size_t i = 0; i < b.lo.size(); ++i)
            if (!std::isfinite(b.lo[i]) || !std::isfinite(b.hi[i])) return false;
        return true;
    }

private:
    std::variant<Box, Ball> shape_ = Box{};
};

/// A k-element (p; alpha).
struct Element {
    Point point;
    MultiVector alpha;
};

/// Finite formal sum of k-elements in R^n.  Chains of grade k > n are allowed
/// only as the (necessarily empty) zero chain; they arise from operators whose
/// output grade overflows the ambient dimension.
class DiracChain {
public:
    DiracChain() = default;
    DiracChain(int n, int k) : n_(n), k_(k) {
        if (n < 0 || n > kMaxDim) throw DimensionError("chain ambient dimension out of range");
        if (k < 0) throw GradeError("negative chain grade");
    }

    static DiracChain element(Point p, MultiVector alpha) {
        DiracChain c(alpha.dim(), alpha.grade());
        c.add(std::move(p), std::move(alpha));
        return c;
    }

    int dim() const { return n_; }
    int grade() const { return k_; }
    bool is_degenerate() const { return k_ > n_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::vector<Element>& terms() const { return terms_; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    void reserve(std::size_t n) { terms_.reserve(n); }

    void add(Point p, MultiVector alpha) {
        if (is_degenerate()) throw DegenerateGradeError("cannot add terms to a chain of grade above its dimension");
        if (static_cast<int>(p.size()) != n_ || alpha.dim() != n_)
            throw DimensionError("element dimension differs from chain dimension " + std::to_string(n_));
        if (alpha.grade() != k_) throw GradeError("element grade differs from chain grade " + std::to_string(k_));
        terms_.push_back({std::move(p), std::move(alpha)});
    }

    DiracChain& operator+=(const DiracChain& o) {
        check_same(o);
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        return *this;
    }
    DiracChain& operator-=(const DiracChain& o) {
        check_same(o);
        terms_.reserve(terms_.size() + o.terms_.size());
        for (const auto& t : o.terms_) terms_.push_back({t.point, -t.alpha});
        return *this;
    }
    DiracChain& operator*=(double s) {
        for (auto& t : terms_) t.alpha *= s;
        return *this;
    }
    friend DiracChain operator+(DiracChain a, const DiracChain& b) { return a += b; }
    friend DiracChain operator-(DiracChain a, const DiracChain& b) { return a -= b; }
    friend DiracChain operator*(double s, DiracChain a) { return a *= s; }
    friend DiracChain operator-(DiracChain a) { return a *= -1.0; }

    /// Canonical form: coincident points merged, zero terms dropped, points
    /// sorted lexicographically.  Points coincide when bitwise equal, or when
    /// they round to the same multiple of snap (snap > 0).
    DiracChain normalized(double snap = 0.0) const {
        DiracChain out(n_, k_);
        if (terms_.empty()) return out;
        std::vector<Element> ts = terms_;
        if (snap > 0.0)
            for (auto& t : ts)
                for (double& x : t.point) x = std::round(x / snap) * snap;
        std::stable_sort(ts.begin(), ts.end(),
                         [](const Element& a, const Element& b) { return a.point < b.point; });
        for (auto& t : ts) {
            if (!out.terms_.empty() && out.terms_.back().point == t.point)
                out.terms_.back().alpha += t.alpha;
            else
                out.terms_.push_back(std::move(t));
        }
        std::erase_if(out.terms_, [](const Element& e) { return e.alpha.is_zero(); });
        return out;
    }

    /// Largest coefficient magnitude over all terms.
    double max_abs() const {
        double m = 0.0;
        for (const auto& t : terms_) m = std::max(m, t.alpha.max_abs());
        return m;
    }

private:
    void check_same(const DiracChain& o) const {
        if (n_ != o.n_ || k_ != o.k_) throw GradeError("chains differ in dimension or grade");
    }

    int n_ = 0;
    int k_ = 0;
    std::vector<Element> terms_;
};

inline DiracChain normalize(const DiracChain& a, double snap = 0.0) { return a.normalized(snap); }

/// Mass (B^0) norm: sum of per-term mass sandwiches after normalization.
inline MassEstimate mass_norm(const DiracChain& a) {
    MassEstimate m;
    for (const auto& t : a.normalized()) m += mass(t.alpha);
    return m;
}

/// Points carrying a nonzero multivector.
inline std::vector<Point> support(const DiracChain& a) {
    std::vector<Point> out;
    for (const auto& t : a.normalized()) out.push_back(t.point);
    return out;
}

/// Iterated difference Delta_{u_j o ... o u_1}(p; alpha).
struct DifferenceTerm {
    std::vector<Point> sigma;
    Point point;
    MultiVector alpha;

    int order() const { return static_cast<int>(sigma.size()); }

    double sigma_norm() const {
        double s = 1.0;
        for (const auto& u : sigma) s *= norm2(u);
        return s;
    }

    /// ||sigma|| * mass(alpha), using the upper mass estimate.
    double cost() const { return sigma_norm() * mass(alpha).upper; }

    /// The 2^j translated points p + sum_{i in S} u_i with their signs (-1)^{j-|S|}.
    template <class F>
    void for_each_vertex(F&& f) const {
        const std::size_t j = sigma.size();
        for (std::size_t s = 0; s < (std::size_t{1} << j); ++s) {
            Point q = point;
            int count = 0;
            for (std::size_t i = 0; i < j; ++i)
                if (s & (std::size_t{1} << i)) {
                    q = q + sigma[i];
                    ++count;
                }
            f(q, ((static_cast<int>(j) - count) & 1) ? -1.0 : 1.0);
        }
    }
};

inline DiracChain expand(const DifferenceTerm& d) {
    DiracChain out(d.alpha.dim(), d.alpha.grade());
    d.for_each_vertex([&](const Point& q, double sign) { out.add(q, sign * d.alpha); });
    return out.normalized();
}

/// A difference term is inside a convex U iff every vertex of its expansion is;
/// the vertices contain the extreme points of their convex hull.
inline bool inside(const DifferenceTerm& d, const Domain& u) {
    bool ok = true;
    d.for_each_vertex([&](const Point& q, double) { ok = ok && u.contains(q); });
    return ok;
}

}  // namespace dchain
