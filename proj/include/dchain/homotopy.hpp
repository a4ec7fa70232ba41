#pragma once
/**
 * @file homotopy.hpp
 * @brief Cone operator K = F_* L, the chain-homotopy identity, Poincare lemmas
 *        for chains and forms, and the intermediate-value biconditionals.
 *
 * Sign convention: F(0, .) is the identity and F(1, .) the constant map, so
 * d K J = -J on cycles of grade >= 1 and the filling is C = -K J.  Likewise
 * eta = -A omega for closed omega.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chains.hpp"
#include "errors.hpp"
#include "exterior_algebra.hpp"
#include "forms.hpp"
#include "maps.hpp"
#include "norms.hpp"
#include "operators.hpp"

namespace dchain {

/// Deterministic points in a domain, kept at least `margin` from a box's faces.
inline std::vector<Point> sample_points(const Domain& u, int count, std::uint64_t seed = 11, double margin = 0.0) {
    if (!u.bounded()) throw DomainError("sampling needs a bounded domain");
    const Box b = u.bounding_box();
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> axes;
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        const double lo = b.lo[i] + margin, hi = b.hi[i] - margin;
        if (!(lo <= hi)) throw DomainError("sampling margin exceeds the domain");
        axes.emplace_back(lo, hi);
    }
    std::vector<Point> out;
    for (int tries = 0; static_cast<int>(out.size()) < count; ++tries) {
        if (tries > 1000 * std::max(count, 1)) throw DomainError("could not sample inside the domain");
        Point p(b.lo.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = axes[i](rng);
        if (!u.contains(p)) continue;
        if (!u.is_box() && margin > 0.0) {
            const Ball& ball = u.as_ball();
            Point d = p;
            for (std::size_t i = 0; i < d.size(); ++i) d[i] -= ball.center[i];
            if (norm2(d) > ball.radius - margin) continue;
        }
        out.push_back(std::move(p));
    }
    return out;
}

/// K J = F_*(I_N x J).  Grade-n input gives the exact (degenerate) zero chain.
inline DiracChain cone(const DiracChain& j, const HomotopyMap& f, int subdivisions) {
    if (j.dim() != f.source_dim()) throw DimensionError("cone: chain dimension differs from the homotopy source");
    for (const auto& t : j)
        if (!f.source().contains(t.point))
            throw DomainError("chain support " + point_to_string(t.point) + " escapes the homotopy source");
    return pushforward(f.as_map(), cartesian_wedge(interval_chain(subdivisions), j));
}

template <FormLike F>
double max_abs_pairing(const DiracChain& a, const std::vector<F>& battery, std::vector<double>* each = nullptr) {
    double m = 0.0;
    for (const auto& w : battery) {
        const double v = std::abs(pairing(a, w));
        if (each) each->push_back(v);
        m = std::max(m, v);
    }
    return m;
}

struct HomotopyResidual {
    int subdivisions = 0;
    double h = 0.0;
    std::vector<double> residuals;  // one per battery form
    double max = 0.0;
};

/// Battery pairings of dK J + K dJ - f1_* J + f0_* J with the discrete boundary.
inline HomotopyResidual homotopy_residual(const DiracChain& j, const HomotopyMap& f, int subdivisions, double h,
                                          const std::vector<FormField>& battery) {
    if (j.grade() == 0)
        throw GradeError("the chain-homotopy identity fails for 0-chains; grade must be at least 1");
    const std::optional<Domain> u1 = f.source().bounded() ? std::optional<Domain>(f.source()) : std::nullopt;
    const std::optional<Domain> u2 = f.target().bounded() ? std::optional<Domain>(f.target()) : std::nullopt;
    DiracChain total = boundary_h(cone(j, f, subdivisions), h, u2);
    total += cone(boundary_h(j, h, u1), f, subdivisions);
    total -= pushforward(f.end(), j);
    total += pushforward(f.start(), j);
    HomotopyResidual out;
    out.subdivisions = subdivisions;
    out.h = h;
    out.max = max_abs_pairing(total, battery, &out.residuals);
    return out;
}

struct PoincareChainOptions {
    double h = kDefaultStep;
    double cycle_tol = 1e-6;  // relative to the mass of J
    std::vector<FormField> cycle_battery;        // degree k-1; empty: standard battery
    std::vector<FormField> certificate_battery;  // degree k; empty: standard battery
};

struct PoincareChainResult {
    DiracChain filling;
    double cycle_residual = 0.0;
    std::vector<double> certificate;  // |pairing(d_h C - J, w)| per form
    double certificate_max = 0.0;
};

/// C = -K J for a pairing-tested cycle J, with the certificate d_h C ~ J.
inline PoincareChainResult poincare_cone(const DiracChain& j, const HomotopyMap& f, int subdivisions,
                                         const PoincareChainOptions& opt = {}) {
    const int n = j.dim(), k = j.grade();
    if (k < 1 || k > n - 1) throw GradeError("Poincare lemma for chains needs 1 <= grade <= n-1");
    const Domain& u1 = f.source();
    const Domain& u2 = f.target();
    const auto cycle_battery = opt.cycle_battery.empty() ? standard_battery(n, k - 1, u1, 10) : opt.cycle_battery;
    PoincareChainResult out;
    const double scale = std::max(mass_norm(j).upper, 1e-300);
    for (const auto& w : cycle_battery) {
        const double v = std::abs(pairing(j, w.d()));
        out.cycle_residual = std::max(out.cycle_residual, v);
        if (v > opt.cycle_tol * scale)
            throw NotACycleError("input is not a cycle: |<J, dw>| = " + std::to_string(v) + " for a form with coefficients " +
                                 w.coeff(0).to_prefix(default_var_names(n)));
    }
    out.filling = cone(j, f, subdivisions);
    out.filling *= -1.0;
    const auto cert_battery = opt.certificate_battery.empty() ? standard_battery(n, k, u2, 10) : opt.certificate_battery;
    const std::optional<Domain> bu = u2.bounded() ? std::optional<Domain>(u2) : std::nullopt;
    const DiracChain diff = boundary_h(out.filling, opt.h, bu) - j;
    out.certificate_max = max_abs_pairing(diff, cert_battery, &out.certificate);
    return out;
}

/// (A w)(p; alpha) = int_0^1 w(F(t,p); dF/dt ^ Lambda^k DF_t alpha) dt, midpoint rule with M nodes.
inline EvaluableForm form_homotopy(const FormField& w, const HomotopyMap& f, int nodes) {
    if (w.degree() < 1) throw GradeError("the form homotopy operator needs degree >= 1");
    if (nodes < 1) throw DomainError("form_homotopy needs at least one quadrature node");
    if (w.dim() != f.target_dim()) throw DimensionError("form dimension differs from the homotopy target");
    const int n = f.source_dim(), k = w.degree() - 1;
    return EvaluableForm(n, k, [w, f, nodes](std::span<const double> p, const MultiVector& alpha) {
        double s = 0.0;
        for (int i = 0; i < nodes; ++i) {
            const double t = (i + 0.5) / nodes;
            const auto pushed = push_multivector(f.spatial_jacobian(t, p), alpha);
            if (!pushed) continue;
            const MultiVector dt = MultiVector::vector(f.time_derivative(t, p));
            s += w.evaluate(f.apply(t, p), dt.wedge_with(*pushed));
        }
        return s / nodes;
    });
}

struct PoincareFormResult {
    EvaluableForm eta;
    double closedness = 0.0;
    double certificate_max = 0.0;  // max |d eta - w| over the samples
};

/// eta = -A w for closed w; certified by finite-difference d eta against w.
inline PoincareFormResult poincare_form(const FormField& w, const HomotopyMap& f, int nodes, int samples = 100,
                                        double fd_step = 1e-4, std::uint64_t seed = 23) {
    const int n = w.dim(), k = w.degree();
    if (k < 1) throw GradeError("Poincare lemma for forms needs degree >= 1");
    const FormField dw = w.d();
    const auto pts = sample_points(f.source(), samples, seed, 2.0 * fd_step);
    double closed = 0.0;
    bool symbolic_zero = true;
    for (const auto& c : dw.coeffs()) symbolic_zero = symbolic_zero && c.is_zero();
    if (!symbolic_zero) closed = w.closedness_residual(pts);
    if (closed > 1e-10) throw NotACycleError("form is not closed: |dw| reaches " + std::to_string(closed));

    EvaluableForm a = form_homotopy(w, f, nodes);
    EvaluableForm eta(n, k - 1, [a](std::span<const double> p, const MultiVector& alpha) { return -a.evaluate(p, alpha); });
    PoincareFormResult out{eta, closed, 0.0};
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (const auto& p : pts) {
        MultiVector alpha(n, k);
        for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = g(rng);
        const double lhs = fd_exterior_derivative(eta, p, alpha, fd_step);
        out.certificate_max = std::max(out.certificate_max, std::abs(lhs - w.evaluate(p, alpha)));
    }
    return out;
}

enum class Verdict { BothSmall, BothLarge, Mismatch, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::BothSmall: return "both-small";
        case Verdict::BothLarge: return "both-large";
        case Verdict::Mismatch: return "mismatch";
        default: return "indeterminate";
    }
}

struct BiconditionalReport {
    double lhs_residual = 0.0;
    double rhs_residual = 0.0;
    Verdict verdict = Verdict::Indeterminate;

    /// The biconditional is preserved unless one side is small and the other large.
    bool holds() const { return verdict == Verdict::BothSmall || verdict == Verdict::BothLarge; }
};

struct BiconditionalTolerances {
    double small = 1e-3;
    double large = 1e-1;
};

inline Verdict classify(double a, double b, const BiconditionalTolerances& tol) {
    const bool a_small = a <= tol.small, b_small = b <= tol.small;
    const bool a_large = a >= tol.large, b_large = b >= tol.large;
    if (a_small && b_small) return Verdict::BothSmall;
    if (a_large && b_large) return Verdict::BothLarge;
    if ((a_small && b_large) || (a_large && b_small)) return Verdict::Mismatch;
    return Verdict::Indeterminate;
}

/// G_*(dJ) = dK  <=>  G_*J = K for grade-n chains J in U1 subset R^n.
/// lower_battery holds degree n-1 forms, top_battery degree n forms, both on U2.
inline BiconditionalReport ivt_check(const MapField& g, const DiracChain& j, const DiracChain& k, double h,
                                     const std::vector<FormField>& lower_battery, const std::vector<FormField>& top_battery,
                                     const BiconditionalTolerances& tol = {}) {
    const int n = g.in_dim();
    if (j.dim() != n || j.grade() != n) throw GradeError("ivt_check: J must be an n-chain in the source");
    if (k.dim() != g.out_dim() || k.grade() != n) throw GradeError("ivt_check: K must be an n-chain in the target");
    if (n > g.out_dim()) throw DimensionError("ivt_check needs n <= m");
    const std::optional<Domain> u1 = g.domain().bounded() ? std::optional<Domain>(g.domain()) : std::nullopt;
    const std::optional<Domain> u2 = g.codomain().bounded() ? std::optional<Domain>(g.codomain()) : std::nullopt;
    BiconditionalReport out;
    out.lhs_residual = max_abs_pairing(pushforward(g, boundary_h(j, h, u1)) - boundary_h(k, h, u2), lower_battery);
    out.rhs_residual = max_abs_pairing(pushforward(g, j) - k, top_battery);
    out.verdict = classify(out.lhs_residual, out.rhs_residual, tol);
    return out;
}

/// -K J = L  <=>  J = dL for a cycle J (the sign follows C = -K J).
/// lhs pairs -K J - L with degree k+1 forms, rhs pairs J - d_h L with degree k forms.
inline BiconditionalReport jordan_check(const DiracChain& j, const DiracChain& l, const HomotopyMap& f, int subdivisions,
                                        double h, const std::vector<FormField>& top_battery,
                                        const std::vector<FormField>& grade_battery,
                                        const BiconditionalTolerances& tol = {}) {
    if (l.grade() != j.grade() + 1 || l.dim() != j.dim()) throw GradeError("jordan_check: L must have grade k+1");
    const std::optional<Domain> u2 = f.target().bounded() ? std::optional<Domain>(f.target()) : std::nullopt;
    DiracChain c = cone(j, f, subdivisions);
    c *= -1.0;
    BiconditionalReport out;
    out.lhs_residual = max_abs_pairing(c - l, top_battery);
    out.rhs_residual = max_abs_pairing(j - boundary_h(l, h, u2), grade_battery);
    out.verdict = classify(out.lhs_residual, out.rhs_residual, tol);
    return out;
}

}  // namespace dchain
