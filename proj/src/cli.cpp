#include "capvar/cli.hpp"

#include "capvar/analysis.hpp"
#include "capvar/curvature.hpp"
#include "capvar/examples.hpp"
#include "capvar/fields.hpp"
#include "capvar/io.hpp"
#include "capvar/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace capvar::cli {

namespace {

using json = nlohmann::ordered_json;

struct Config {
    std::string command;
    std::string fixture = "plane-pair";
    FixtureParams params;
    std::vector<double> s_grid{1.0, 0.5, 0.25, 0.125};
    int threads = 1;
    std::string out = ".";
    std::string varifold_file;
    std::string boundary_file;
    std::string container = "halfspace";
    std::map<std::string, double> tol;
    std::map<std::string, std::string> tol_source;
};

std::map<std::string, double> default_tolerances(const std::string& cmd) {
    if (cmd == "verify")
        return {{"residual_exact", 1e-10}, {"residual_curved", 0.05}, {"bundle_gap", 1e-8}, {"decomposition", 1e-8}};
    if (cmd == "monotone")
        return {{"interior_relative", 0.05}, {"boundary_slack_factor", 5.0},
                {"cutoff_t", 0.1}, {"p_factor", 2.0}};
    if (cmd == "blowup")
        return {{"decay_factor", 1.7}, {"density_window", 0.05}, {"cone_tol", 0.05}, {"angle_tol", 0.05},
                {"barrier_margin", 0.1}, {"region_radius", 1.0}, {"orthogonality_stability", 1.5}};
    if (cmd == "compactness")
        return {{"degeneracy_ratio", 0.1}, {"control_ratio", 0.9}, {"c1_tol", 1e-10}, {"rho", 2.5},
                {"resolution", 1.5}};
    if (cmd == "curvature")
        return {{"identity_exact", 1e-10}, {"relations", 1e-9}, {"convergence_ratio", 1.8}, {"mass_change", 0.01},
                {"lsc_relative", 0.01}};
    return {};
}

void set_tolerance(Config& cfg, const std::string& key, const std::string& value, const std::string& source) {
    if (!cfg.tol.count(key)) throw ConfigError("unknown tolerance '" + key + "' for " + cfg.command);
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        cfg.tol[key] = v;
        cfg.tol_source[key] = source;
    } catch (const std::logic_error&) {
        throw ConfigError("tolerance '" + key + "' needs a number");
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::logic_error&) {
            throw ConfigError("bad number '" + item + "' in list");
        }
    }
    return out;
}

// key=value lines; '#' starts a comment. Keys given on the command line win.
void apply_config_file(Config& cfg, const std::string& path, const CLI::App& sc,
                       const std::map<std::string, bool>& tol_from_flags) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file " + path);
    std::string line;
    int lineno = 0;
    auto number = [](const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::logic_error&) {
            throw ConfigError("config key '" + key + "' needs a number");
        }
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + " lacks '='");
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        val.erase(0, val.find_first_not_of(" \t"));
        if (key.rfind("tol.", 0) == 0) {
            const std::string t = key.substr(4);
            if (!tol_from_flags.count(t)) set_tolerance(cfg, t, val, "config");
            else if (!cfg.tol.count(t)) throw ConfigError("unknown tolerance '" + t + "'");
            continue;
        }
        const bool flagged = sc.get_option_no_throw("--" + key) && sc.count("--" + key) > 0;
        if (key == "fixture") { if (!flagged) cfg.fixture = val; }
        else if (key == "beta") { if (!flagged) cfg.params.beta = number(key, val); }
        else if (key == "m") { if (!flagged) cfg.params.m = static_cast<int>(number(key, val)); }
        else if (key == "n") { if (!flagged) cfg.params.n = static_cast<int>(number(key, val)); }
        else if (key == "h") { if (!flagged) cfg.params.h = number(key, val); }
        else if (key == "extent") { if (!flagged) cfg.params.extent = number(key, val); }
        else if (key == "eps") { if (!flagged) cfg.params.eps = number(key, val); }
        else if (key == "s") { if (!flagged) cfg.params.s = number(key, val); }
        else if (key == "s-grid") { if (!flagged) cfg.s_grid = parse_list(val); }
        else if (key == "threads") { if (!flagged) cfg.threads = static_cast<int>(number(key, val)); }
        else if (key == "out") { if (!flagged) cfg.out = val; }
        else if (key == "one-sided") { if (!flagged) cfg.params.one_sided = val == "true" || val == "1"; }
        else if (key == "container") { if (!flagged) cfg.container = val; }
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

std::string prov(const Config& cfg, const std::string& key) {
    auto it = cfg.tol_source.find(key);
    return "tol." + key + " (" + (it == cfg.tol_source.end() ? "default" : it->second) + ")";
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ExampleFixture build(const Config& cfg) {
    return make_fixture(cfg.fixture, cfg.params);
}

double max_gap(const BoundaryVarifold& g) {
    double worst = 0.0;
    for (const auto& a : g.atoms) {
        const BundleGap gap = capillary_gap(a.x, a.P, g.beta->at(a.x), *g.container);
        worst = std::max({worst, gap.gap_i, gap.gap_ii});
    }
    return worst;
}

json residual_rows(const ResidualReport& r) {
    json rows = json::array();
    for (const auto& f : r.per_field)
        rows.push_back({{"field", f.field}, {"absolute", f.absolute}, {"relative", f.relative}, {"scale", f.scale}});
    return rows;
}

void run_example(const Config& cfg, Report& rep) {
    const ExampleFixture f = build(cfg);
    rep.flag("expected_record_matches", true, "construction check");
    const bool curved = !f.exact;
    const CurvatureData B = curved ? curvature_from_umbilic(f.V, f.shape) : zero_curvature(f.V);
    const std::string base = cfg.out + "/" + f.name;
    {
        std::ofstream os(base + ".varifold");
        write_varifold(os, f.V, curved ? &B : nullptr);
        std::ofstream bs(base + ".boundary");
        write_boundary(bs, f.gamma);
        std::ofstream es(cfg.out + "/expected.json");
        es << to_json(f.expected).dump(2) << "\n";
    }
    std::ifstream vin(base + ".varifold"), bin(base + ".boundary");
    const VarifoldFile back = read_varifold(vin);
    const BoundaryVarifold gback = read_boundary(bin, f.gamma.container, f.gamma.beta);
    bool same = back.V.atoms.size() == f.V.atoms.size() && gback.atoms.size() == f.gamma.atoms.size();
    for (std::size_t i = 0; same && i < f.V.atoms.size(); ++i)
        same = back.V.atoms[i].x == f.V.atoms[i].x && back.V.atoms[i].w == f.V.atoms[i].w &&
               back.V.atoms[i].P.proj() == f.V.atoms[i].P.proj();
    for (std::size_t i = 0; same && i < f.gamma.atoms.size(); ++i)
        same = gback.atoms[i].x == f.gamma.atoms[i].x && gback.atoms[i].sigma == f.gamma.atoms[i].sigma;
    rep.flag("file_round_trip_bit_exact", same, "format contract");
    rep.details()["fixture"] = f.name;
    rep.details()["atoms"] = f.V.atoms.size();
    rep.details()["boundary_atoms"] = f.gamma.atoms.size();
    rep.details()["expected"] = to_json(f.expected);
}

void run_verify(const Config& cfg, Report& rep) {
    ExampleFixture f;
    if (!cfg.varifold_file.empty()) {
        std::ifstream vin(cfg.varifold_file), bin(cfg.boundary_file);
        if (!vin || !bin) throw ConfigError("verify needs readable --varifold and --boundary files");
        VarifoldFile vf = read_varifold(vin);
        const int d = vf.V.ambient;
        auto cont = std::make_shared<const Container>(parse_container(cfg.container, d));
        auto beta = std::make_shared<const ContactAngleField>(constant_angle(cfg.params.beta));
        f.name = "file";
        f.V = std::move(vf.V);
        f.gamma = read_boundary(bin, cont, beta);
        f.dec = VariationDecomposition::zero(f.V);
        for (const auto& a : f.gamma.atoms) f.dec.sigma_perp.push_back({a.x, std::sin(cfg.params.beta) * a.sigma});
        f.exact = true;
        if (!f.gamma.atoms.empty()) {
            // Anchor at the boundary atom nearest the σ-weighted centroid, away from truncation edges.
            Vec centroid = Vec::Zero(d);
            double total = 0.0;
            for (const auto& a : f.gamma.atoms) {
                centroid += a.sigma * a.x;
                total += a.sigma;
            }
            if (total > 0.0) centroid /= total;
            Vec anchor = f.gamma.atoms.front().x;
            for (const auto& a : f.gamma.atoms)
                if ((a.x - centroid).norm() < (anchor - centroid).norm()) anchor = a.x;
            f.anchors = {anchor};
        }
    } else {
        f = build(cfg);
    }
    const Container& c = *f.gamma.container;
    const Battery tb = tangential_battery(c, f.anchors);
    const ResidualReport cr = capillary_residual(f.V, f.gamma, f.dec.H, tb);
    const Battery gb = general_battery(c, f.anchors);
    const ResidualReport dr = decomposition_residual(f.V, f.dec, f.gamma, gb);
    if (f.exact) {
        rep.at_most("capillary_residual_relative", cr.max_relative, cfg.tol.at("residual_exact"), prov(cfg, "residual_exact"));
        rep.at_most("decomposition_residual_relative", dr.max_relative, cfg.tol.at("residual_exact"),
                    prov(cfg, "residual_exact"));
    } else {
        rep.at_most("capillary_residual_absolute", cr.max_absolute, cfg.tol.at("residual_curved"),
                    prov(cfg, "residual_curved"));
        rep.at_most("decomposition_residual_absolute", dr.max_absolute, cfg.tol.at("residual_curved"),
                    prov(cfg, "residual_curved"));
    }
    rep.at_most("bundle_gap", max_gap(f.gamma), cfg.tol.at("bundle_gap"), prov(cfg, "bundle_gap"));
    bool valid = true;
    try {
        validate_decomposition(f.V, f.dec, c, cfg.tol.at("decomposition"));
    } catch (const Error&) {
        valid = false;
    }
    rep.flag("decomposition_invariants", valid, prov(cfg, "decomposition"));

    const auto cn = co_normals(disintegrate(f.gamma, kDefaultGroupingTol), *f.gamma.beta, c);
    std::size_t zero = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : cn) {
        zero += s.nW_zero ? 1 : 0;
        lo = std::min(lo, s.n_W().norm());
        hi = std::max(hi, s.n_W().norm());
    }
    auto& d = rep.details();
    d["fixture"] = f.name;
    d["atoms"] = f.V.atoms.size();
    d["boundary_sites"] = cn.size();
    d["degenerate_conormal_sites"] = zero;
    d["n_W_norm_range"] = {cn.empty() ? 0.0 : lo, hi};
    d["capillary_residual"] = residual_rows(cr);
    d["decomposition_residual"] = residual_rows(dr);
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return g;
}

void run_monotone(const Config& cfg, Report& rep) {
    const ExampleFixture f = build(cfg);
    const int d = f.V.ambient;
    const int m = f.V.m;
    const bool dyadic = f.name == "half-plane";
    const double t = cfg.tol.at("cutoff_t");
    const double p = cfg.tol.at("p_factor") * m;
    const std::vector<double> grid = dyadic ? std::vector<double>{1.0 / 32, 1.0 / 16, 1.0 / 8, 0.25, 0.5, 1.0}
                                            : log_grid(0.05, 1.0, 20);
    const double slack = f.exact ? 0.0 : cfg.tol.at("boundary_slack_factor") * f.h;
    auto& det = rep.details();
    det["fixture"] = f.name;
    det["x0"] = vec_json(f.x0);
    det["p"] = p;
    det["slack"] = slack;
    try {
        const LambdaCalibration cal = calibrate_lambda(f.V, f.x0, p, grid, slack, t);
        rep.flag("lambda_calibrated", true, "grid 2^-10..2^10");
        rep.at_most("boundary_monotone_violation", cal.violation, slack,
                    f.exact ? "exact fixture" : prov(cfg, "boundary_slack_factor") + " times h");
        det["Lambda"] = cal.Lambda;
        std::ofstream os(cfg.out + "/monotone_boundary.csv");
        write_curve_csv(os, density_curve(f.V, f.x0, grid, t), cal.transformed);
    } catch (const NoLambdaFound& e) {
        rep.flag("lambda_calibrated", false, e.what());
    }

    // Interior point: the atom nearest to x0 + 0.75 e, kept well inside Ω.
    Vec target = f.x0;
    target(d - 1) += 0.75;
    Vec xi = f.V.atoms.front().x;
    for (const auto& a : f.V.atoms)
        if (a.x(d - 1) > 0.0 && (a.x - target).norm() < (xi - target).norm()) xi = a.x;
    const double dist = f.gamma.container->sdf(xi);
    const double r1 = 0.5 * dist, r2 = 0.9 * dist;
    const InteriorMonotonicity im =
        interior_monotonicity_check(f.V, f.dec.H, xi, unit_weight(), r1, r2, f.gamma.container.get());
    rep.at_least("interior_monotonicity_relative_slack", im.slack / im.lhs, -cfg.tol.at("interior_relative"),
                 prov(cfg, "interior_relative"));
    det["interior"] = {{"xi", vec_json(xi)}, {"r1", r1}, {"r2", r2}, {"lhs", im.lhs}, {"rhs", im.rhs},
                       {"normal_term", im.normal_term}, {"curvature_term", im.curvature_term}};
    std::ofstream os(cfg.out + "/monotone_interior.csv");
    write_curve_csv(os, density_curve(f.V, xi, log_grid(r1, r2, 12)), {});
}

void run_blowup(const Config& cfg, Report& rep) {
    Config c = cfg;
    c.params.graded = true;
    const ExampleFixture f = build(c);
    const int d = f.V.ambient;
    BLOptions bl;
    bl.region_radius = cfg.tol.at("region_radius");
    std::vector<double> radii;
    for (int k = 1; k <= 6; ++k) radii.push_back(std::ldexp(1.0, -k));
    const BlowUpSequence seq = blow_up(f.V, f.gamma, f.x0, radii, bl);
    auto& det = rep.details();
    det["fixture"] = f.name;
    det["x0"] = vec_json(f.x0);
    det["radii"] = radii;
    det["consecutive_bl"] = seq.consecutive;

    double worst_decay = std::numeric_limits<double>::infinity();
    const double dmax = *std::max_element(seq.consecutive.begin(), seq.consecutive.end());
    for (std::size_t j = 0; j + 1 < seq.consecutive.size(); ++j)
        if (seq.consecutive[j] > 1e-12)
            worst_decay = std::min(worst_decay, seq.consecutive[j] / std::max(seq.consecutive[j + 1], 1e-300));
    if (std::isinf(worst_decay)) rep.at_most("blowup_consecutive_bl", dmax, 1e-12, "atom-identical cone");
    else rep.at_least("blowup_bl_decay_factor", worst_decay, cfg.tol.at("decay_factor"), prov(cfg, "decay_factor"));

    const double beta0 = f.gamma.beta->at(f.x0);
    ConeFitOptions co;
    co.density_window = cfg.tol.at("density_window");
    co.tol = cfg.tol.at("cone_tol");
    co.plane_tol = cfg.tol.at("cone_tol");
    co.bl = bl;
    try {
        const TangentConeFit fit = fit_tangent_cone(seq.terms.back().V, seq.terms.back().gamma, beta0, co);
        rep.at_most("cone_vertex_density_error", std::abs(fit.vertex_density - 0.5), co.density_window,
                    prov(cfg, "density_window"));
        rep.at_most("cone_angle_error", std::abs(fit.alpha - fit.expected_alpha), cfg.tol.at("angle_tol"),
                    prov(cfg, "angle_tol"));
        rep.at_most("cone_plane_spread", fit.plane_spread, co.plane_tol, prov(cfg, "cone_tol"));
        rep.at_most("cone_fit_residual", fit.fit_residual, co.tol, prov(cfg, "cone_tol"));
        det["cone"] = {{"vertex_density", fit.vertex_density}, {"alpha", fit.alpha},
                       {"expected_alpha", fit.expected_alpha}, {"n_P", vec_json(fit.n_P)},
                       {"boundary_offset", fit.boundary_offset}};

        // Barrier half-space tilted past the cone angle, checked on the part of the cone inside the region.
        const double theta = std::min(kPi, fit.alpha + cfg.tol.at("barrier_margin"));
        Vec u = fit.n_P;
        u(d - 1) = 0.0;
        const Vec e = unit_vector(d, d - 1);
        const Vec nu = u.norm() > 1e-12 ? (std::cos(theta) * e - std::sin(theta) * u.normalized()).eval() : e;
        DiscreteVarifold local;
        local.m = seq.terms.back().V.m;
        local.ambient = d;
        for (const auto& a : seq.terms.back().V.atoms)
            if (a.x.norm() <= bl.region_radius) local.atoms.push_back(a);
        try {
            const BarrierCheck b = barrier_angle_check(fit, local, nu, co.tol);
            rep.flag("barrier_angle", b.pass, prov(cfg, "barrier_margin"));
            det["barrier_theta"] = b.theta;
        } catch (const NotContained& e) {
            rep.flag("barrier_angle", false, e.what());
        }
    } catch (const NotConical& e) {
        rep.flag("cone_fit", false, e.what());
    } catch (const DegenerateProjection& e) {
        rep.flag("cone_fit", false, e.what());
    }

    // Orthogonality of rescaled boundary sites to n_W(x0).
    const auto cn = co_normals(disintegrate(f.gamma, kDefaultGroupingTol), *f.gamma.beta, *f.gamma.container);
    Vec nW = Vec::Zero(d);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : cn)
        if ((s.x - f.x0).norm() < best) best = (s.x - f.x0).norm(), nW = s.n_W();
    const std::vector<double> cs = orthogonality_constants(seq, nW, bl.region_radius);
    bool finite = true;
    for (double v : cs) finite = finite && std::isfinite(v);
    rep.flag("orthogonality_constants_finite", finite, "rescaled boundary sites");
    const double first = cs.front(), last = cs.back();
    rep.at_most("orthogonality_constant_growth", first > 0.0 ? last / first : 0.0,
                cfg.tol.at("orthogonality_stability"), prov(cfg, "orthogonality_stability"));
    det["orthogonality_constants"] = cs;
}

void run_compactness(const Config& cfg, Report& rep) {
    if (cfg.fixture != "separated-pair") throw ConfigError("compactness runs on the separated-pair family");
    const double h = cfg.params.h > 0.0 ? cfg.params.h : default_mesh_size(cfg.fixture);
    const FlatOptions flat{cfg.params.m, cfg.params.n, cfg.params.extent, h, 9};
    const auto family = separated_family(cfg.params.beta, flat, cfg.params.one_sided);
    CompactnessOptions o;
    o.x0 = Vec::Zero(cfg.params.n + 1);
    o.rho = cfg.tol.at("rho");
    o.resolution = cfg.tol.at("resolution");
    o.bl.region_radius = o.rho;
    const CompactnessReport r = compactness_experiment(family, cfg.s_grid, o);
    const double cb = std::abs(std::cos(cfg.params.beta));
    rep.flag("bl_distance_to_limit_decreasing", r.distances_decrease, "weak-* convergence");
    rep.flag("boundary_mass_lower_bound_propagates", r.lower_mass_propagates, "lower mass bound");
    rep.at_least("component_c1_margin", r.min_c1_margin, cb - cfg.tol.at("c1_tol"), prov(cfg, "c1_tol"));
    if (cfg.params.one_sided)
        rep.at_least("conormal_integral_ratio", r.integral_ratio, cfg.tol.at("control_ratio"), prov(cfg, "control_ratio"));
    else
        rep.at_most("conormal_integral_ratio", r.integral_ratio, cfg.tol.at("degeneracy_ratio"),
                    prov(cfg, "degeneracy_ratio"));
    auto& det = rep.details();
    det["family"] = cfg.params.one_sided ? "one-sided" : "two-sided";
    det["limit_degenerates"] = !cfg.params.one_sided && r.integral_ratio <= cfg.tol.at("degeneracy_ratio");
    json rows = json::array();
    auto row = [](const CompactnessMember& m) {
        return json{{"s", m.s}, {"bl_to_limit", m.bl_to_limit}, {"boundary_mass", m.boundary_mass},
                    {"conormal_integral", m.conormal_integral}, {"exact_integral", m.exact_integral},
                    {"c1_margin", m.c1_margin}};
    };
    for (const auto& m : r.members) rows.push_back(row(m));
    det["members"] = rows;
    det["limit"] = row(r.limit);
    det["limit_ratio"] = r.limit_ratio;
}

struct CurvedRun {
    ExampleFixture f;
    CurvatureData B;
    CurvatureReport identity;
};

CurvedRun curvature_run(const Config& cfg, double h) {
    Config c = cfg;
    c.params.h = h;
    CurvedRun r{build(c), {}, {}};
    r.B = r.f.exact ? zero_curvature(r.f.V) : curvature_from_umbilic(r.f.V, r.f.shape);
    PlaneBattery battery = plane_battery(r.f.V.ambient, r.f.anchors);
    for (const auto& psi : general_battery(*r.f.gamma.container, r.f.anchors)) battery.push_back(lift(psi));
    r.identity = curvature_identity_residual(r.f.V, r.B, r.f.gamma, battery);
    return r;
}

void run_curvature(const Config& cfg, Report& rep) {
    const double h = cfg.params.h > 0.0 ? cfg.params.h : default_mesh_size(cfg.fixture);
    const CurvedRun a = curvature_run(cfg, h);
    const CurvedRun b = curvature_run(cfg, 0.5 * h);
    auto& det = rep.details();
    det["fixture"] = a.f.name;
    det["h"] = h;
    rep.at_most("curvature_relations", relation_defects(a.f.V, a.B).max(), cfg.tol.at("relations"),
                prov(cfg, "relations"));
    if (a.f.exact) {
        rep.at_most("curvature_identity_relative", std::max(a.identity.max_relative, b.identity.max_relative),
                    cfg.tol.at("identity_exact"), prov(cfg, "identity_exact"));
    } else {
        const double ratio = a.identity.max_absolute / std::max(b.identity.max_absolute, 1e-300);
        rep.at_least("curvature_identity_convergence_ratio", ratio, cfg.tol.at("convergence_ratio"),
                     prov(cfg, "convergence_ratio"));
    }
    det["identity_absolute"] = {a.identity.max_absolute, b.identity.max_absolute};
    for (double p : {1.0, 2.0}) {
        const MassComparability ma = mass_comparability(a.f.V, a.B, a.f.gamma, p);
        const MassComparability mb = mass_comparability(b.f.V, b.B, b.f.gamma, p);
        const std::string tag = p == 1.0 ? "p1" : "p2";
        rep.flag("mass_comparability_finite_" + tag,
                 std::isfinite(ma.c1) && std::isfinite(ma.c2) && std::isfinite(mb.c1) && std::isfinite(mb.c2),
                 "finite constants");
        const double change = std::max(std::abs(ma.c1 - mb.c1) / std::max(std::abs(mb.c1), 1e-300),
                                       std::abs(ma.c2 - mb.c2) / std::max(std::abs(mb.c2), 1e-300));
        rep.at_most("mass_comparability_mesh_change_" + tag, change, cfg.tol.at("mass_change"), prov(cfg, "mass_change"));
        det["comparability_" + tag] = {{"c1", ma.c1}, {"c2", ma.c2}, {"c1_half", mb.c1}, {"c2_half", mb.c2}};
    }
    const CurvedVarifold limit{b.f.V, b.B};
    const double energy = curvature_energy(limit.V, limit.B, 2.0);
    const LscReport l = lsc_check({{a.f.V, a.B}, {b.f.V, b.B}}, limit, 2.0, cfg.tol.at("lsc_relative") * energy);
    rep.flag("lower_semicontinuity", l.pass, prov(cfg, "lsc_relative"));
    det["lsc"] = {{"limit_energy", l.limit_energy}, {"tail_min", l.tail_min}, {"margin", l.margin}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete capillary varifold checks", "capvar"};
    app.require_subcommand(1, 1);
    app.set_help_flag("--help", "print help");  // -h is the mesh size
    Config cfg;
    std::vector<std::string> tol_args;
    std::string config_file;
    std::string s_grid;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"example", "write fixture files and the expected record"},
        {"verify", "capillary and decomposition residuals, bundle gaps"},
        {"monotone", "interior and boundary monotonicity curves"},
        {"blowup", "blow-up sequence, tangent cone fit and barrier check"},
        {"compactness", "separated-pair family experiment"},
        {"curvature", "curvature identity, mass comparability, lower semicontinuity"}};
    for (const auto& [name, desc] : commands) {
        CLI::App* sc = app.add_subcommand(name, desc);
        sc->set_help_flag("--help", "print help");
        sc->add_option("--fixture", cfg.fixture, "fixture name");
        sc->add_option("--beta", cfg.params.beta, "contact angle (radians)");
        sc->add_option("--m", cfg.params.m, "varifold dimension");
        sc->add_option("--n", cfg.params.n, "boundary dimension (ambient n+1)");
        sc->add_option("--h", cfg.params.h, "mesh size (0: fixture default)");
        sc->add_option("--extent", cfg.params.extent, "half-width of flat fixtures");
        sc->add_option("--eps", cfg.params.eps, "weight perturbation");
        sc->add_option("--s", cfg.params.s, "separation");
        sc->add_option("--s-grid", s_grid, "comma-separated decreasing separations");
        sc->add_flag("--one-sided", cfg.params.one_sided, "keep one half-plane of the separated pair");
        sc->add_option("--threads", cfg.threads, "worker threads");
        sc->add_option("--out", cfg.out, "output directory");
        sc->add_option("--config", config_file, "key=value config file");
        sc->add_option("--tol", tol_args, "tolerance override key=value (repeatable)");
        if (name == "verify") {
            sc->add_option("--varifold", cfg.varifold_file, "varifold file");
            sc->add_option("--boundary", cfg.boundary_file, "boundary varifold file");
            sc->add_option("--container", cfg.container, "container: halfspace | ball r=R center=a,b,...");
        }
    }

    std::string report_path;
    Report rep("none");
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfigError;
    }
    const CLI::App* sc = app.get_subcommands().front();
    cfg.command = sc->get_name();
    rep = Report(cfg.command);

    try {
        cfg.tol = default_tolerances(cfg.command);
        std::map<std::string, bool> tol_from_flags;
        for (const auto& t : tol_args) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ConfigError("--tol expects key=value");
            set_tolerance(cfg, t.substr(0, eq), t.substr(eq + 1), "override");
            tol_from_flags[t.substr(0, eq)] = true;
        }
        if (!s_grid.empty()) cfg.s_grid = parse_list(s_grid);
        if (!config_file.empty()) apply_config_file(cfg, config_file, *sc, tol_from_flags);
        if (cfg.threads < 1) throw ConfigError("--threads must be at least 1");
        const auto names = fixture_names();
        if (std::find(names.begin(), names.end(), cfg.fixture) == names.end())
            throw ConfigError("unknown fixture '" + cfg.fixture + "'");
        std::filesystem::create_directories(cfg.out);
        report_path = cfg.out + "/" + cfg.command + "-report.json";
        for (const auto& [k, v] : cfg.tol) rep.tolerance(k, v);
        set_worker_threads(cfg.threads);

        auto& det = rep.details();
        det["config"] = {{"fixture", cfg.fixture},   {"beta", cfg.params.beta}, {"m", cfg.params.m},
                         {"n", cfg.params.n},        {"h", cfg.params.h},       {"extent", cfg.params.extent},
                         {"eps", cfg.params.eps},    {"s", cfg.params.s},       {"s_grid", cfg.s_grid},
                         {"one_sided", cfg.params.one_sided}};
        if (cfg.command == "example") run_example(cfg, rep);
        else if (cfg.command == "verify") run_verify(cfg, rep);
        else if (cfg.command == "monotone") run_monotone(cfg, rep);
        else if (cfg.command == "blowup") run_blowup(cfg, rep);
        else if (cfg.command == "compactness") run_compactness(cfg, rep);
        else run_curvature(cfg, rep);
    } catch (const Error& e) {
        // Bad input: configuration, parameters outside a fixture's domain, unreadable files.
        err << "capvar: " << e.what() << "\n";
        if (!report_path.empty()) {
            rep.flag("configuration", false, e.what());
            rep.details()["error"] = e.what();
            try {
                rep.write(report_path);
            } catch (const Error&) {
            }
        }
        return kExitConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "capvar: " << e.what() << "\n";
        return kExitConfigError;
    }
    rep.write(report_path);
    out << cfg.command << ": " << (rep.all_pass() ? "pass" : "FAIL") << " (" << report_path << ")\n";
    return rep.all_pass() ? kExitPass : kExitCheckFailed;
}

}  // namespace capvar::cli
