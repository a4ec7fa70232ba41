// dchain: command-line front end for the chain/form verification workflows.
//
// Exit status: 0 all checks pass (or warning), 2 parse/validation error,
// 3 a measured residual exceeds its tolerance.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <dchain/dchain.hpp>
#include <dchain/io.hpp>

using namespace dchain;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitTolerance = 3;
constexpr const char* kSchema = "dchain-report/1";

struct Tolerances {
    double stokes, homotopy, poincare_chains, poincare_forms, ivt_small, ivt_large, cycle;
};

Tolerances profile_tolerances(const std::string& name) {
    if (name == "default") return {1e-2, 1e-2, 1e-2, 1e-4, 1e-3, 1e-1, 1e-6};
    if (name == "strict") return {1e-3, 1e-3, 1e-3, 1e-6, 1e-4, 1e-1, 1e-8};
    if (name == "loose") return {1e-1, 1e-1, 1e-1, 1e-3, 1e-2, 5e-2, 1e-4};
    throw ParseError("unknown tolerance profile '" + name + "' (default, strict, loose)");
}

struct Row {
    int n;
    double h;
    double residual;
};

struct Report {
    json body = json::object();
    std::vector<Row> rows;
    std::string status = "pass";  // pass | fail | warning

    void check(bool ok) {
        if (!ok) status = "fail";
    }
    void warn(const std::string& message) {
        if (status == "pass") status = "warning";
        body["warnings"].push_back(message);
    }
};

struct Common {
    std::string out;
    std::string csv;
    std::string profile;
    std::uint64_t seed = 7;
};

// Every option of the subcommand with its effective value.
json run_config(const CLI::App& sub, const std::string& profile) {
    json cfg = json::object();
    cfg["subcommand"] = sub.get_name();
    cfg["profile"] = profile;
    json opts = json::object();
    for (const CLI::Option* o : sub.get_options()) {
        const std::string name = o->get_lnames().empty() ? o->get_name() : o->get_lnames().front();
        if (name == "help") continue;
        if (o->count() > 0) {
            const auto& r = o->results();
            opts[name] = r.size() == 1 ? json(r.front()) : json(r);
        } else {
            opts[name] = o->get_default_str();
        }
    }
    cfg["options"] = opts;
    return cfg;
}

std::string csv_field(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    return s;
}

void write_csv(const std::string& path, const json& cfg, const std::vector<Row>& rows) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write '" + path + "'");
    std::vector<std::pair<std::string, json>> keys{{"subcommand", cfg["subcommand"]}, {"profile", cfg["profile"]}};
    for (auto it = cfg["options"].begin(); it != cfg["options"].end(); ++it)
        if (it.key() != "csv" && it.key() != "out" && it.key() != "profile") keys.emplace_back("config." + it.key(), it.value());
    for (const auto& [k, v] : keys) f << k << ',';
    f << "N,h,residual\n";
    for (const auto& r : rows) {
        for (const auto& kv : keys) f << csv_field(kv.second) << ',';
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.n, r.h, r.residual);
        f << buf;
    }
}

// ---- input helpers --------------------------------------------------------

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw ParseError("expected a comma-separated number list, got '" + s + "'");
        }
    }
    return out;
}

Domain box_from_arg(const std::string& arg, int n) {
    const auto v = parse_numbers(arg);
    if (v.size() != 2 || !(v[0] < v[1])) throw ParseError("--box expects 'lo,hi' with lo < hi");
    return Domain::cube(n, v[0], v[1]);
}

// Named chains: circle<M> (polygonal unit circle), square (boundary of [-1,1]^2).
DiracChain chain_from_arg(const std::string& arg, int per_segment) {
    if (arg.rfind("circle", 0) == 0) {
        int m = 0;
        try {
            m = std::stoi(arg.substr(6));
        } catch (const std::exception&) {
            throw ParseError("expected circle<segments>, got '" + arg + "'");
        }
        if (m < 3) throw ParseError("a polygonal circle needs at least 3 segments");
        return polygon_chain(circle_vertices(m), per_segment);
    }
    if (arg == "square") return cell_boundary_chain(Cell{{-1.0, -1.0}, {{2.0, 0.0}, {0.0, 2.0}}}, per_segment);
    if (arg.rfind("interval:", 0) == 0) return interval_chain(std::stoi(arg.substr(9)));
    return io::chain_from_json(io::read_json_file(arg));
}

// The support's bounding box padded by `pad`, as a cube containing `center`.
Domain auto_box(const DiracChain& c, const Point& center, double pad) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    auto take = [&](std::span<const double> p) {
        for (double v : p) {
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
    };
    for (const auto& t : c) take(t.point);
    take(center);
    return Domain::cube(c.dim(), lo - pad, hi + pad);
}

std::vector<FormField> battery_from_arg(const std::string& path, int n, int k, const Domain& u, int size, std::uint64_t seed) {
    if (!path.empty()) {
        auto b = io::battery_from_json(io::read_json_file(path));
        for (const auto& w : b)
            if (w.dim() != n || w.degree() != k)
                throw ParseError("battery form has dimension " + std::to_string(w.dim()) + " and degree " +
                                 std::to_string(w.degree()) + ", expected " + std::to_string(n) + " and " + std::to_string(k));
        return b;
    }
    return standard_battery(n, k, u, size, seed);
}

HomotopyMap homotopy_from_arg(const std::string& arg, const Domain& u, int n) {
    if (arg == "radial") return HomotopyMap::contraction(Point(static_cast<std::size_t>(n), 0.0), u, u);
    return io::homotopy_from_json(io::read_json_file(arg));
}

json residual_list(const std::vector<double>& r) { return json(r); }

// ---- subcommands ----------------------------------------------------------

struct StokesArgs {
    std::string cell = "unit-square", form = "x dy", form_file;
    int n = 100;
    double h = 1e-3;
    std::string sweep_h, sweep_n;
    double tol = -1.0;
};

Report run_stokes(const StokesArgs& a, const Tolerances& t) {
    Report rep;
    const Cell cell = a.cell.find('{') != std::string::npos || a.cell.ends_with(".json")
                          ? io::cell_from_json(a.cell.ends_with(".json") ? io::read_json_file(a.cell) : json::parse(a.cell))
                          : io::cell_from_json(json(a.cell));
    const int n = static_cast<int>(cell.vertex.size()), k = static_cast<int>(cell.edges.size());
    const FormField w = a.form_file.empty() ? io::parse_form_shorthand(a.form, n, Domain::whole(n))
                                            : io::form_from_json(io::read_json_file(a.form_file));
    if (w.dim() != n || w.degree() != k - 1)
        throw ParseError("the form must have degree " + std::to_string(k - 1) + " in R^" + std::to_string(n));
    const FormField dw = w.d();
    auto measure = [&](int subdivisions, double h) {
        const auto c = cell_chain(cell, subdivisions);
        const double lhs = pairing(boundary_h(c, h), w);
        const double rhs = pairing(c, dw);
        return std::pair{lhs, rhs};
    };
    const auto [lhs, rhs] = measure(a.n, a.h);
    const double res = std::abs(lhs - rhs);
    const double tol = a.tol > 0 ? a.tol : t.stokes;
    rep.rows.push_back({a.n, a.h, res});
    for (double h : a.sweep_h.empty() ? std::vector<double>{} : parse_numbers(a.sweep_h))
        rep.rows.push_back({a.n, h, std::abs(measure(a.n, h).first - rhs)});
    for (double nn : a.sweep_n.empty() ? std::vector<double>{} : parse_numbers(a.sweep_n)) {
        const auto [l2, r2] = measure(static_cast<int>(nn), a.h);
        rep.rows.push_back({static_cast<int>(nn), a.h, std::abs(l2 - r2)});
    }
    rep.body["boundary_pairing"] = lhs;
    rep.body["interior_pairing"] = rhs;
    rep.body["residual"] = res;
    rep.body["tolerance"] = tol;
    rep.check(res <= tol);
    return rep;
}

struct ConeArgs {
    std::string chain = "square", homotopy = "radial", battery, box;
    int n = 200, refine = 0, per_segment = 50, battery_size = 10;
    double h = 1e-3, tol = -1.0;
};

Report run_cone(const ConeArgs& a, const Tolerances& t, std::uint64_t seed) {
    Report rep;
    const DiracChain j = chain_from_arg(a.chain, a.per_segment);
    const int n = j.dim();
    const Domain u = a.box.empty() ? auto_box(j, Point(static_cast<std::size_t>(n), 0.0), 0.0) : box_from_arg(a.box, n);
    const HomotopyMap f = homotopy_from_arg(a.homotopy, u, n);
    const Domain& target = f.target().bounded() ? f.target() : u;
    const auto battery = battery_from_arg(a.battery, n, j.grade(), target, a.battery_size, seed);
    if (battery.empty()) rep.warn("empty battery: residuals are vacuous");
    const double tol = a.tol > 0 ? a.tol : t.homotopy;
    json runs = json::array();
    for (int i = 0; i <= a.refine; ++i) {
        const int subdivisions = a.n << i;
        const double h = a.h / std::pow(2.0, i);
        const auto r = homotopy_residual(j, f, subdivisions, h, battery);
        runs.push_back({{"N", subdivisions}, {"h", h}, {"max", r.max}, {"residuals", residual_list(r.residuals)}});
        rep.rows.push_back({subdivisions, h, r.max});
        if (i == 0) rep.check(r.max <= tol);
    }
    if (a.refine > 0) {
        json ratios = json::array();
        for (std::size_t i = 1; i < rep.rows.size(); ++i) ratios.push_back(rep.rows[i - 1].residual / rep.rows[i].residual);
        rep.body["refinement_ratios"] = ratios;
    }
    const auto c = cone(j, f, a.n);
    rep.body["cone_terms"] = c.normalized().size();
    rep.body["cone_mass"] = mass_norm(c).upper;
    rep.body["runs"] = runs;
    rep.body["tolerance"] = tol;
    return rep;
}

struct PoincareChainArgs {
    std::string cycle = "circle256", contraction = "radial", battery, box = "-1.5,1.5";
    int n = 200, per_segment = 2, battery_size = 10;
    double h = 1e-3, tol = -1.0;
};

Report run_poincare_chains(const PoincareChainArgs& a, const Tolerances& t, std::uint64_t seed) {
    Report rep;
    const DiracChain j = chain_from_arg(a.cycle, a.per_segment);
    const int n = j.dim(), k = j.grade();
    const Domain u = box_from_arg(a.box, n);
    const HomotopyMap f = homotopy_from_arg(a.contraction, u, n);
    PoincareChainOptions opt;
    opt.h = a.h;
    opt.cycle_tol = t.cycle;
    opt.certificate_battery = battery_from_arg(a.battery, n, k, f.target().bounded() ? f.target() : u, a.battery_size, seed);
    opt.cycle_battery = standard_battery(n, k - 1, f.source().bounded() ? f.source() : u, a.battery_size, seed);
    if (opt.certificate_battery.empty()) {
        rep.warn("empty battery: certificate is vacuous");
        opt.certificate_battery = {FormField::zero(n, k, u)};
    }
    const auto res = poincare_cone(j, f, a.n, opt);
    const double tol = a.tol > 0 ? a.tol : t.poincare_chains;
    rep.body["cycle_residual"] = res.cycle_residual;
    rep.body["certificate"] = res.certificate;
    rep.body["certificate_max"] = res.certificate_max;
    rep.body["filling_terms"] = res.filling.normalized().size();
    if (n == 2 && k == 1) {
        const double area = pairing(res.filling, FormField::monomial(2, {0, 1}, Expr(1.0)));
        rep.body["enclosed_area"] = area;
        if (a.cycle.rfind("circle", 0) == 0) {
            rep.body["area_error_vs_pi"] = std::abs(area - std::numbers::pi);
            rep.check(std::abs(area - std::numbers::pi) <= tol);
        }
    }
    rep.rows.push_back({a.n, a.h, res.certificate_max});
    rep.body["tolerance"] = tol;
    rep.check(res.certificate_max <= tol);
    return rep;
}

struct PoincareFormArgs {
    std::string form = "dx^dy", expect, domain = "disk", contraction = "radial";
    int dim = 2, m = 100, samples = 100;
    double fd_step = 1e-4, tol = -1.0;
};

Report run_poincare_forms(const PoincareFormArgs& a, const Tolerances& t, std::uint64_t seed) {
    Report rep;
    const int n = a.dim;
    Domain u = Domain::ball(Point(static_cast<std::size_t>(n), 0.0), 1.0);
    if (a.domain == "cube")
        u = Domain::cube(n, -1.0, 1.0);
    else if (a.domain != "disk")
        u = io::domain_from_json(a.domain.ends_with(".json") ? io::read_json_file(a.domain) : json::parse(a.domain), n);
    const FormField w = io::parse_form_shorthand(a.form, n, u);
    const HomotopyMap f = homotopy_from_arg(a.contraction, u, n);
    const auto res = poincare_form(w, f, a.m, a.samples, a.fd_step, seed);
    const double tol = a.tol > 0 ? a.tol : t.poincare_forms;
    rep.body["closedness"] = res.closedness;
    rep.body["certificate_max"] = res.certificate_max;
    if (!a.expect.empty()) {
        const FormField e = io::parse_form_shorthand(a.expect, n, u);
        if (e.degree() != w.degree() - 1) throw ParseError("--expect must have degree one less than --form");
        std::mt19937_64 rng(seed + 2);
        std::normal_distribution<double> g;
        double worst = 0.0;
        for (const auto& p : sample_points(f.source(), a.samples, seed + 3)) {
            MultiVector alpha(n, e.degree());
            for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = g(rng);
            worst = std::max(worst, std::abs(res.eta.evaluate(p, alpha) - e.evaluate(p, alpha)));
        }
        rep.body["max_deviation_from_expected"] = worst;
    }
    rep.rows.push_back({a.m, a.fd_step, res.certificate_max});
    rep.body["tolerance"] = tol;
    rep.check(res.certificate_max <= tol);
    return rep;
}

struct IvtArgs {
    std::string map, j = "interval:10000", k = "interval:10000", lower_battery, top_battery;
    double h = 1e-4, small = -1.0, large = -1.0;
};

Report run_ivt(const IvtArgs& a, const Tolerances& t) {
    Report rep;
    if (a.map.empty()) throw ParseError("ivt needs --map FILE");
    const MapField g = io::map_from_json(io::read_json_file(a.map));
    const DiracChain j = chain_from_arg(a.j, 1), k = chain_from_arg(a.k, 1);
    const int n = g.in_dim(), m = g.out_dim();
    const Domain& u2 = g.codomain();
    if (!u2.bounded() && (a.lower_battery.empty() || a.top_battery.empty()))
        throw ParseError("an unbounded codomain needs explicit --lower-battery and --top-battery files");
    const auto lower = battery_from_arg(a.lower_battery, m, n - 1, u2, 10, 7);
    const auto top = battery_from_arg(a.top_battery, m, n, u2, 10, 7);
    if (lower.empty() || top.empty()) rep.warn("empty battery: residuals are vacuous");
    BiconditionalTolerances tol{a.small > 0 ? a.small : t.ivt_small, a.large > 0 ? a.large : t.ivt_large};
    const auto r = ivt_check(g, j, k, a.h, lower, top, tol);
    rep.body["lhs_residual"] = r.lhs_residual;
    rep.body["rhs_residual"] = r.rhs_residual;
    rep.body["verdict"] = to_string(r.verdict);
    rep.body["tolerances"] = {{"small", tol.small}, {"large", tol.large}};
    rep.rows.push_back({static_cast<int>(j.size()), a.h, r.lhs_residual});
    rep.rows.push_back({static_cast<int>(j.size()), a.h, r.rhs_residual});
    rep.check(r.holds());
    return rep;
}

// "h,extent": a cubical grid of spacing h covering [min, min + extent] per axis
// from the chain's support minimum; or a lattice JSON file.
LatticeSpec lattice_from_arg(const std::string& arg, int n, const DiracChain* anchor) {
    if (arg.ends_with(".json")) return io::lattice_from_json(io::read_json_file(arg));
    const auto v = parse_numbers(arg);
    if (v.size() != 2 || !(v[0] > 0) || !(v[1] >= 0)) throw ParseError("--lattice expects 'h,extent' with h > 0");
    Point origin(static_cast<std::size_t>(n), 0.0);
    if (anchor && !anchor->empty()) {
        origin = anchor->terms().front().point;
        for (const auto& t : *anchor)
            for (std::size_t i = 0; i < origin.size(); ++i) origin[i] = std::min(origin[i], t.point[i]);
    }
    const int count = static_cast<int>(std::floor(v[1] / v[0] + 1e-9)) + 1;
    return LatticeSpec::grid(origin, v[0], std::vector<int>(static_cast<std::size_t>(n), count));
}

Domain lattice_box(const LatticeSpec& l) {
    Point lo = l.origin, hi = l.origin;
    for (std::size_t i = 0; i < hi.size(); ++i) hi[i] += l.h * std::max(0, l.counts[i] - 1);
    return Domain::box(lo, hi);
}

json decomposition_json(const Decomposition& d) {
    json terms = json::array();
    for (const auto& t : d.terms)
        terms.push_back({{"p", t.point}, {"sigma", t.sigma}, {"alpha", io::coeffs_to_json(t.alpha)}, {"cost", t.cost()}});
    return {{"total_cost", d.total_cost}, {"terms", terms}};
}

struct NormArgs {
    std::string chain, lattice, battery;
    int r = 1;
};

Report run_norm(const NormArgs& a) {
    Report rep;
    if (a.chain.empty()) throw ParseError("norm needs --chain FILE");
    const DiracChain c = chain_from_arg(a.chain, 1).normalized();
    std::optional<LatticeSpec> l;
    Domain u = Domain::whole(c.dim());
    if (!a.lattice.empty()) {
        l = lattice_from_arg(a.lattice, c.dim(), &c);
        u = lattice_box(*l);
        rep.body["lattice"] = io::to_json(*l);
    } else {
        u = auto_box(c, c.empty() ? Point(static_cast<std::size_t>(c.dim()), 0.0) : c.terms().front().point, 0.0);
    }
    const auto battery = a.battery.empty() ? std::vector<FormField>{} : battery_from_arg(a.battery, c.dim(), c.grade(), u, 0, 0);
    const auto lower = br_lower(c, a.r, battery);
    if (lower.status == BoundStatus::Warning) rep.warn(lower.message);
    const auto upper = br_upper(c, a.r, u, l);
    rep.body["r"] = a.r;
    rep.body["lower"] = lower.value;
    if (lower.witness) rep.body["lower_witness"] = *lower.witness;
    rep.body["upper"] = upper.value;
    rep.body["upper_method"] = upper.method;
    rep.body["lp_value"] = upper.method == "lattice-lp" ? json(upper.value) : json(nullptr);
    rep.body["decomposition"] = decomposition_json(upper.decomposition);
    rep.check(lower.value <= upper.value * (1.0 + 1e-9) + 1e-12);
    return rep;
}

struct MatrixArgs {
    std::string lattice = "1,2", op = "boundary", basis = "cubical", beta, f, map, format = "csv", matrix_out;
    int dim = 2, k = 1;
};

std::string matrix_text(const Eigen::MatrixXd& m, const std::string& format) {
    std::ostringstream os;
    os.precision(17);
    if (format == "csv") {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << m(r, c);
            os << '\n';
        }
    } else if (format == "triplet") {
        os << m.rows() << ' ' << m.cols() << '\n';
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                if (m(r, c) != 0.0) os << r << ' ' << c << ' ' << m(r, c) << '\n';
    } else {
        throw ParseError("--format must be csv or triplet");
    }
    return os.str();
}

Report run_matrices(const MatrixArgs& a) {
    Report rep;
    const LatticeSpec l = lattice_from_arg(a.lattice, a.dim, nullptr);
    auto basis = [&](int k) { return a.basis == "full" ? ChainBasis::full(l, k) : ChainBasis::cubical(l, k); };
    if (a.basis != "full" && a.basis != "cubical") throw ParseError("--basis must be full or cubical");
    ChainOperator op;
    int k_out = a.k;
    if (a.op == "boundary") {
        op = ops::boundary(l.h);
        k_out = a.k - 1;
    } else if (a.op == "extrusion") {
        const auto idx = io::key_indices(a.beta, a.dim, static_cast<int>(parse_numbers(a.beta).size()));
        const MultiVector beta = MultiVector::basis(a.dim, idx);
        op = ops::extrusion(beta);
        k_out = a.k + beta.grade();
    } else if (a.op == "multiply") {
        op = ops::multiply(FormField::function(a.dim, parse_prefix(a.f, default_var_names(a.dim))));
    } else if (a.op == "pushforward") {
        op = ops::pushforward(io::map_from_json(io::read_json_file(a.map)));
    } else {
        throw ParseError("--op must be boundary, extrusion, multiply or pushforward");
    }
    if (k_out < 0 || a.k < 0) throw GradeError("operator output grade is negative");
    const auto in = basis(a.k), out = basis(k_out);
    const Eigen::MatrixXd m = matrix_of(op, in, out);
    const std::string text = matrix_text(m, a.format);
    if (a.matrix_out.empty()) {
        rep.body["matrix"] = text;
    } else {
        std::ofstream f(a.matrix_out);
        if (!f) throw ParseError("cannot write '" + a.matrix_out + "'");
        f << text;
        rep.body["matrix_file"] = a.matrix_out;
    }
    rep.body["rows"] = m.rows();
    rep.body["cols"] = m.cols();
    rep.body["lattice"] = io::to_json(l);
    return rep;
}

struct DiagnosticsArgs {
    std::string lattice = "1,2", basis = "cubical";
    int dim = 2;
    double rank_threshold = 1e-9;
};

Report run_diagnostics(const DiagnosticsArgs& a) {
    Report rep;
    const LatticeSpec l = lattice_from_arg(a.lattice, a.dim, nullptr);
    const auto c = lattice_complex(l, a.basis != "full");
    const auto d = complex_diagnostics(c.boundaries, c.dims(), a.rank_threshold);
    json table = json::array();
    for (const auto& g : d.grades)
        table.push_back({{"grade", g.grade}, {"dimension", g.dimension}, {"rank", g.rank}, {"kernel", g.kernel}, {"defect", g.defect}});
    rep.body["grades"] = table;
    rep.body["composition_max"] = d.composition_max;
    rep.body["rank_threshold"] = d.rank_threshold;
    rep.body["lattice"] = io::to_json(l);
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac chain and differential form verification tool"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_help_flag("--help", "Print this help message and exit");

    Common common;
    const char* env = std::getenv("DCHAIN_TOLERANCE_PROFILE");
    common.profile = env && *env ? env : "default";

    auto add_common = [&](CLI::App* s) {
        s->add_option("--out", common.out, "Report JSON path (stdout when empty)");
        s->add_option("--csv", common.csv, "Convergence table CSV path");
        s->add_option("--profile", common.profile, "Tolerance profile: default, strict, loose");
        s->add_option("--seed", common.seed, "Seed for generated batteries and samples");
    };

    StokesArgs stokes;
    auto* s_stokes = app.add_subcommand("stokes", "Pair the discrete boundary of a cell with a form against d of the form");
    s_stokes->add_option("--cell", stokes.cell, "unit-interval | unit-square | unit-cube | cell JSON");
    s_stokes->add_option("--form", stokes.form, "Form shorthand, e.g. \"x dy\"");
    s_stokes->add_option("--form-file", stokes.form_file, "Form JSON (overrides --form)");
    s_stokes->add_option("--N", stokes.n, "Subdivisions per edge");
    s_stokes->add_option("--h", stokes.h, "Boundary step");
    s_stokes->add_option("--sweep-h", stokes.sweep_h, "Extra h values for the convergence table");
    s_stokes->add_option("--sweep-N", stokes.sweep_n, "Extra N values for the convergence table");
    s_stokes->add_option("--tol", stokes.tol, "Residual tolerance (profile value when negative)");
    add_common(s_stokes);

    ConeArgs cone_args;
    auto* s_cone = app.add_subcommand("cone", "Chain-homotopy residual of the cone operator");
    s_cone->add_option("--chain", cone_args.chain, "square | circle<M> | chain JSON");
    s_cone->add_option("--homotopy", cone_args.homotopy, "radial | homotopy JSON");
    s_cone->add_option("--N", cone_args.n, "Interval subdivisions");
    s_cone->add_option("--h", cone_args.h, "Boundary step");
    s_cone->add_option("--refine", cone_args.refine, "Number of (N, h) -> (2N, h/2) refinements");
    s_cone->add_option("--per-segment", cone_args.per_segment, "Quadrature points per edge of named chains");
    s_cone->add_option("--box", cone_args.box, "Domain cube 'lo,hi' (support box when empty)");
    s_cone->add_option("--battery", cone_args.battery, "Battery JSON (generated when empty)");
    s_cone->add_option("--battery-size", cone_args.battery_size, "Generated battery size");
    s_cone->add_option("--tol", cone_args.tol, "Residual tolerance");
    add_common(s_cone);

    PoincareChainArgs pc;
    auto* s_pc = app.add_subcommand("poincare-chains", "Fill a cycle by the cone of a contraction");
    s_pc->add_option("--cycle", pc.cycle, "circle<M> | square | chain JSON");
    s_pc->add_option("--contraction", pc.contraction, "radial | homotopy JSON");
    s_pc->add_option("--N", pc.n, "Interval subdivisions");
    s_pc->add_option("--h", pc.h, "Boundary step for the certificate");
    s_pc->add_option("--per-segment", pc.per_segment, "Quadrature points per edge of named cycles");
    s_pc->add_option("--box", pc.box, "Domain cube 'lo,hi'");
    s_pc->add_option("--battery", pc.battery, "Certificate battery JSON");
    s_pc->add_option("--battery-size", pc.battery_size, "Generated battery size");
    s_pc->add_option("--tol", pc.tol, "Certificate tolerance");
    add_common(s_pc);

    PoincareFormArgs pf;
    auto* s_pf = app.add_subcommand("poincare-forms", "Primitive of a closed form via the homotopy operator");
    s_pf->add_option("--form", pf.form, "Closed form shorthand");
    s_pf->add_option("--expect", pf.expect, "Expected primitive shorthand to compare against");
    s_pf->add_option("--dim", pf.dim, "Ambient dimension");
    s_pf->add_option("--domain", pf.domain, "disk | cube | domain JSON");
    s_pf->add_option("--contraction", pf.contraction, "radial | homotopy JSON");
    s_pf->add_option("--M", pf.m, "Quadrature nodes in t");
    s_pf->add_option("--samples", pf.samples, "Sample points for the certificate");
    s_pf->add_option("--fd-step", pf.fd_step, "Finite-difference step for d eta");
    s_pf->add_option("--tol", pf.tol, "Certificate tolerance");
    add_common(s_pf);

    IvtArgs ivt;
    auto* s_ivt = app.add_subcommand("ivt", "Boundary/interior biconditional for a map and two top-grade chains");
    s_ivt->add_option("--map", ivt.map, "Map JSON");
    s_ivt->add_option("--J", ivt.j, "interval:N | chain JSON");
    s_ivt->add_option("--K", ivt.k, "interval:N | chain JSON");
    s_ivt->add_option("--h", ivt.h, "Boundary step");
    s_ivt->add_option("--lower-battery", ivt.lower_battery, "Degree n-1 battery JSON");
    s_ivt->add_option("--top-battery", ivt.top_battery, "Degree n battery JSON");
    s_ivt->add_option("--small", ivt.small, "Small-residual threshold");
    s_ivt->add_option("--large", ivt.large, "Large-residual threshold");
    add_common(s_ivt);

    NormArgs norm;
    auto* s_norm = app.add_subcommand("norm", "Lower and upper bounds on the B^r norm of a Dirac chain");
    s_norm->add_option("--chain", norm.chain, "Chain JSON");
    s_norm->add_option("--r", norm.r, "Norm order");
    s_norm->add_option("--lattice", norm.lattice, "'h,extent' or lattice JSON");
    s_norm->add_option("--battery", norm.battery, "Battery JSON for the lower bound");
    add_common(s_norm);

    MatrixArgs mat;
    auto* s_mat = app.add_subcommand("matrices", "Matrix of an operator over a lattice basis");
    s_mat->add_option("--lattice", mat.lattice, "'h,extent' or lattice JSON");
    s_mat->add_option("--dim", mat.dim, "Ambient dimension");
    s_mat->add_option("--k", mat.k, "Input grade");
    s_mat->add_option("--op", mat.op, "boundary | extrusion | multiply | pushforward");
    s_mat->add_option("--basis", mat.basis, "cubical | full");
    s_mat->add_option("--beta", mat.beta, "Extrusion blade key, e.g. \"1\" or \"1,2\"");
    s_mat->add_option("--f", mat.f, "Multiplier as a prefix expression");
    s_mat->add_option("--map", mat.map, "Map JSON for pushforward");
    s_mat->add_option("--format", mat.format, "csv | triplet");
    s_mat->add_option("--matrix-out", mat.matrix_out, "Write the matrix here instead of into the report");
    add_common(s_mat);

    DiagnosticsArgs diag;
    auto* s_diag = app.add_subcommand("diagnostics", "Rank, kernel and defect table of a lattice complex");
    s_diag->add_option("--lattice", diag.lattice, "'h,extent' or lattice JSON");
    s_diag->add_option("--dim", diag.dim, "Ambient dimension");
    s_diag->add_option("--basis", diag.basis, "cubical | full");
    s_diag->add_option("--rank-threshold", diag.rank_threshold, "Relative singular-value cutoff");
    add_common(s_diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    const CLI::App* sub = app.get_subcommands().front();
    json cfg;
    Report rep;
    try {
        const Tolerances tol = profile_tolerances(common.profile);
        cfg = run_config(*sub, common.profile);
        const std::string name = sub->get_name();
        if (name == "stokes") rep = run_stokes(stokes, tol);
        else if (name == "cone") rep = run_cone(cone_args, tol, common.seed);
        else if (name == "poincare-chains") rep = run_poincare_chains(pc, tol, common.seed);
        else if (name == "poincare-forms") rep = run_poincare_forms(pf, tol, common.seed);
        else if (name == "ivt") rep = run_ivt(ivt, tol);
        else if (name == "norm") rep = run_norm(norm);
        else if (name == "matrices") rep = run_matrices(mat);
        else rep = run_diagnostics(diag);
    } catch (const json::exception& e) {
        std::cerr << "dchain: invalid input: " << e.what() << '\n';
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "dchain: " << e.what() << '\n';
        return kExitInput;
    }

    json report = {{"schema", kSchema}, {"config", cfg}, {"status", rep.status}, {"result", rep.body}};
    if (!rep.rows.empty()) {
        json table = json::array();
        for (const auto& r : rep.rows) table.push_back({{"N", r.n}, {"h", r.h}, {"residual", r.residual}});
        report["table"] = table;
    }
    const std::string text = report.dump(2) + "\n";
    try {
        if (common.out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(common.out);
            if (!f) throw ParseError("cannot write '" + common.out + "'");
            f << text;
        }
        if (!common.csv.empty()) write_csv(common.csv, cfg, rep.rows);
    } catch (const Error& e) {
        std::cerr << "dchain: " << e.what() << '\n';
        return kExitInput;
    }
    if (rep.status == "fail") {
        std::cerr << "dchain: tolerance check failed\n";
        return kExitTolerance;
    }
    return kExitOk;
}
