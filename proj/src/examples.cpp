#include "capvar/examples.hpp"
#include "capvar/parallel.hpp"
#include "capvar/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace capvar {

namespace {

// Tensor product of 1D rules: coordinates and weights.
struct Lattice {
    std::vector<Vec> coords;
    std::vector<double> weights;
};

Lattice tensor(const std::vector<Rule1D>& rules) {
    Lattice L;
    const auto k = static_cast<int>(rules.size());
    L.coords.push_back(Vec::Zero(k));
    L.weights.push_back(1.0);
    for (int dim = 0; dim < k; ++dim) {
        Lattice next;
        for (std::size_t p = 0; p < L.coords.size(); ++p) {
            for (std::size_t i = 0; i < rules[dim].nodes.size(); ++i) {
                Vec c = L.coords[p];
                c(dim) = rules[dim].nodes[i];
                next.coords.push_back(std::move(c));
                next.weights.push_back(L.weights[p] * rules[dim].weights[i]);
            }
        }
        L = std::move(next);
    }
    return L;
}

int panel_count(double len, double h) { return std::max(1, static_cast<int>(std::ceil(len / h - 1e-9))); }

int odd_panel_count(double len, double h) {
    int n = panel_count(len, h);
    return n % 2 == 0 ? n + 1 : n;
}

void check_flat(const FlatOptions& o) {
    if (o.m < 1 || o.n < 1 || o.m > o.n) throw InvalidArgument("flat fixtures need 1 <= m <= n");
    if (!(o.extent > 0.0) || !(o.h > 0.0) || o.q < 1) throw InvalidArgument("invalid lattice options");
}

void check_angle(double beta) {
    if (!(beta > 0.0 && beta < kPi)) throw InvalidArgument("contact angle must lie in (0, pi)");
}

Vec pos_from(const Vec& origin, const Mat& frame, const Vec& coords) { return origin + frame * coords; }

double sphere_area(int k) {
    // |S^k| = 2 π^{(k+1)/2} / Γ((k+1)/2)
    return 2.0 * std::pow(kPi, 0.5 * (k + 1)) / std::tgamma(0.5 * (k + 1));
}

std::shared_ptr<const Container> shared_halfspace(int d) {
    return std::make_shared<const Container>(halfspace(d));
}

// Pair of half-planes {L + s·sgn·n̄ + t n±} with weights w₊, w₋ (zero weight skips a side).
ExampleFixture pair_fixture(const std::string& name, double beta0, double s, double wp, double wm,
                            const FlatOptions& o) {
    check_flat(o);
    check_angle(beta0);
    const int d = o.n + 1;
    const int m = o.m;
    const Vec e = unit_vector(d, d - 1);
    const Vec u = unit_vector(d, m - 1);
    Mat Lb(d, m - 1);
    for (int i = 0; i < m - 1; ++i) Lb.col(i) = unit_vector(d, i);
    const double sb = std::sin(beta0);
    const double cb = std::cos(beta0);
    const Vec np = sb * e + cb * u;
    const Vec nm = sb * e - cb * u;
    const double sg = cb > 0 ? 1.0 : (cb < 0 ? -1.0 : 0.0);
    const Vec shift_p = (s * sg) * u;
    const Vec shift_m = (-s * sg) * u;

    Mat Fp(d, m), Fm(d, m);
    Fp << Lb, np;
    Fm << Lb, nm;
    const Plane Pp = plane_from_frame(Fp);
    const Plane Pm = plane_from_frame(Fm);

    const Rule1D line = composite_gauss(-o.extent, o.extent, odd_panel_count(2 * o.extent, o.h), o.q);
    const Rule1D normal = composite_gauss(0.0, o.extent, panel_count(o.extent, o.h), o.q);
    std::vector<Rule1D> sheet_rules(m - 1, line);
    sheet_rules.push_back(normal);
    const Lattice sheet = tensor(sheet_rules);
    const Lattice edge = tensor(std::vector<Rule1D>(m - 1, line));

    std::vector<Atom> atoms;
    auto add_sheet = [&](const Mat& F, const Vec& shift, const Plane& P, double w) {
        if (w <= 0.0) return;
        for (std::size_t i = 0; i < sheet.coords.size(); ++i)
            atoms.push_back({pos_from(shift, F, sheet.coords[i]), P, w * sheet.weights[i]});
    };
    add_sheet(Fp, shift_p, Pp, wp);
    add_sheet(Fm, shift_m, Pm, wm);

    std::vector<BoundaryAtom> batoms;
    std::vector<ScalarAtom> perp;
    for (std::size_t i = 0; i < edge.coords.size(); ++i) {
        const Vec y = Lb * edge.coords[i];
        if (wp > 0.0) {
            batoms.push_back({(y + shift_p).eval(), Pp, wp * edge.weights[i]});
            perp.push_back({(y + shift_p).eval(), sb * wp * edge.weights[i]});
        }
        if (wm > 0.0) {
            batoms.push_back({(y + shift_m).eval(), Pm, wm * edge.weights[i]});
            perp.push_back({(y + shift_m).eval(), sb * wm * edge.weights[i]});
        }
    }

    ExampleFixture f;
    f.name = name;
    f.h = o.h;
    f.exact = true;
    auto beta = std::make_shared<const ContactAngleField>(constant_angle(beta0));
    auto cont = shared_halfspace(d);
    f.V = DiscreteVarifold::make(m, d, std::move(atoms));
    f.gamma = BoundaryVarifold::make(m, d, std::move(batoms), cont, beta);
    f.dec = VariationDecomposition::zero(f.V);
    f.dec.sigma_perp = std::move(perp);
    f.shape.normal.assign(f.V.atoms.size(), Vec::Zero(d));
    f.shape.kappa.assign(f.V.atoms.size(), 0.0);
    f.anchors = {Vec::Zero(d)};
    f.x0 = Vec::Zero(d);
    if (wp <= 0.0) f.x0 = shift_m;
    else if (s > 0.0 || wm <= 0.0) f.x0 = shift_p;

    const double line_len = std::pow(2.0 * o.extent, m - 1);
    const double wsum = wp + wm;
    f.expected.beta0 = beta0;
    f.expected.sigma_gamma_total = wsum * line_len;
    f.expected.sigma_perp_total = sb * wsum * line_len;
    f.expected.mass_total = wsum * line_len * o.extent;
    const bool both = wp > 0.0 && wm > 0.0;
    if (s == 0.0 || !both) {
        const double bias = (wp - wm) / wsum;
        f.expected.n_V = (sb * e + bias * cb * u).eval();
        if (std::abs(bias) * std::abs(cb) <= kZeroConormalTol) f.expected.n_W_zero = true;
        else f.expected.n_W_norm = std::abs(bias);
        if (s == 0.0) f.expected.density_at_origin = 0.5 * wsum;
    } else {
        f.expected.n_W_norm = 1.0;
    }

    auto component = [&](const std::string& cname, const Plane& P, const Vec& shift, double sgn_tau) {
        BoundaryComponent c;
        c.name = cname;
        c.gamma = f.gamma;
        c.gamma.atoms.clear();
        for (const auto& a : f.gamma.atoms)
            if (same_plane(a.P, P)) c.gamma.atoms.push_back(a);
        c.tau = (sgn_tau * sg) * u;
        c.base_point = shift;
        return c;
    };
    if (s > 0.0 || !both) {
        if (wp > 0.0) f.components.push_back(component("plus", Pp, shift_p, 1.0));
        if (wm > 0.0) f.components.push_back(component("minus", Pm, shift_m, -1.0));
    }
    check_expected(f);
    return f;
}

}  // namespace

void check_expected(const ExampleFixture& f) {
    const ExpectedRecord& ex = f.expected;
    auto close = [&](double got, double want) {
        return std::abs(got - want) <= ex.tolerance * std::max(1.0, std::abs(want));
    };
    auto fail = [&](const std::string& what) {
        throw InvalidArgument("fixture '" + f.name + "' disagrees with its expected " + what);
    };
    if (ex.sigma_gamma_total && !close(f.gamma.total_mass(), *ex.sigma_gamma_total)) fail("boundary mass");
    if (ex.sigma_perp_total) {
        std::vector<double> p;
        for (const auto& a : f.dec.sigma_perp) p.push_back(a.mass);
        if (!close(pairwise_sum(p), *ex.sigma_perp_total)) fail("normal boundary mass");
    }
    if (ex.mass_total && !close(f.V.total_mass(), *ex.mass_total)) fail("total mass");
    if (ex.n_V || ex.n_W_zero || ex.n_W_norm) {
        const auto cn = co_normals(disintegrate(f.gamma, kDefaultGroupingTol), *f.gamma.beta, *f.gamma.container);
        for (const auto& s : cn) {
            if (ex.n_V && (s.n_V - *ex.n_V).norm() > 1e-10) fail("co-normal");
            if (ex.n_W_zero && *ex.n_W_zero && !s.nW_zero) fail("degenerate co-normal");
            if (ex.n_W_norm && std::abs(s.n_W().norm() - *ex.n_W_norm) > 1e-10) fail("co-normal length");
        }
    }
}

ExampleFixture make_plane_pair(double beta0, const FlatOptions& opts) {
    if (std::abs(beta0 - 0.5 * kPi) < 1e-4)
        throw AngleIsOrthogonal("plane pair is degenerate at beta = pi/2");
    return pair_fixture("plane-pair", beta0, 0.0, 0.5, 0.5, opts);
}

ExampleFixture make_separated_pair(double beta0, double s, const FlatOptions& opts, bool one_sided) {
    if (!(s >= 0.0)) throw InvalidArgument("separation must be non-negative");
    if (std::abs(beta0 - 0.5 * kPi) < 1e-4)
        throw AngleIsOrthogonal("plane pair is degenerate at beta = pi/2");
    if (one_sided) return pair_fixture("separated-pair-one-sided", beta0, s, 1.0, 0.0, opts);
    return pair_fixture(s == 0.0 ? "plane-pair" : "separated-pair", beta0, s, 0.5, 0.5, opts);
}

std::function<ExampleFixture(double)> separated_family(double beta0, const FlatOptions& opts, bool one_sided) {
    return [=](double s) { return make_separated_pair(beta0, s, opts, one_sided); };
}

ExampleFixture make_perturbed_pair(double beta0, double eps, const FlatOptions& opts) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("perturbation must lie in [0, 1]");
    if (std::abs(beta0 - 0.5 * kPi) < 1e-4)
        throw AngleIsOrthogonal("plane pair is degenerate at beta = pi/2");
    return pair_fixture("perturbed-pair", beta0, 0.0, 0.5 * (1.0 + eps), 0.5 * (1.0 - eps), opts);
}

ExampleFixture make_distinct_pair(double beta0, double psi, const FlatOptions& o) {
    check_flat(o);
    check_angle(beta0);
    if (o.m < 2) throw InvalidArgument("distinct boundaries need m >= 2");
    if (std::abs(std::sin(psi)) < 1e-6) throw InvalidArgument("boundaries must not coincide");
    const int d = o.n + 1;
    const int m = o.m;
    const Vec e = unit_vector(d, d - 1);
    const Vec a1 = unit_vector(d, m - 2);
    const Vec a2 = std::cos(psi) * unit_vector(d, m - 2) + std::sin(psi) * unit_vector(d, m - 1);
    const Vec u1 = unit_vector(d, m - 1);
    const Vec u2 = -std::sin(psi) * unit_vector(d, m - 2) + std::cos(psi) * unit_vector(d, m - 1);
    const double sb = std::sin(beta0), cb = std::cos(beta0);

    const Rule1D line = composite_gauss(-o.extent, o.extent, odd_panel_count(2 * o.extent, o.h), o.q);
    const Rule1D normal = composite_gauss(0.0, o.extent, panel_count(o.extent, o.h), o.q);
    std::vector<Rule1D> sheet_rules(m - 1, line);
    sheet_rules.push_back(normal);
    const Lattice sheet = tensor(sheet_rules);
    const Lattice edge = tensor(std::vector<Rule1D>(m - 1, line));

    auto basis = [&](const Vec& a) {
        Mat L(d, m - 1);
        for (int i = 0; i < m - 2; ++i) L.col(i) = unit_vector(d, i);
        L.col(m - 2) = a;
        return L;
    };
    const Mat L1 = basis(a1), L2 = basis(a2);
    Mat F1(d, m), F2(d, m);
    F1 << L1, (sb * e + cb * u1);
    F2 << L2, (sb * e + cb * u2);
    const Plane P1 = plane_from_frame(F1), P2 = plane_from_frame(F2);
    const Vec origin = Vec::Zero(d);

    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < sheet.coords.size(); ++i) atoms.push_back({pos_from(origin, F1, sheet.coords[i]), P1, sheet.weights[i]});
    for (std::size_t i = 0; i < sheet.coords.size(); ++i) atoms.push_back({pos_from(origin, F2, sheet.coords[i]), P2, sheet.weights[i]});
    std::vector<BoundaryAtom> batoms;
    std::vector<ScalarAtom> perp;
    for (const auto& [L, P] : {std::pair{L1, P1}, std::pair{L2, P2}}) {
        for (std::size_t i = 0; i < edge.coords.size(); ++i) {
            const Vec y = L * edge.coords[i];
            batoms.push_back({y, P, edge.weights[i]});
            perp.push_back({y, sb * edge.weights[i]});
        }
    }

    ExampleFixture f;
    f.name = "distinct-pair";
    f.h = o.h;
    f.exact = true;
    auto beta = std::make_shared<const ContactAngleField>(constant_angle(beta0));
    f.V = DiscreteVarifold::make(m, d, std::move(atoms));
    f.gamma = BoundaryVarifold::make(m, d, std::move(batoms), shared_halfspace(d), beta);
    f.dec = VariationDecomposition::zero(f.V);
    f.dec.sigma_perp = std::move(perp);
    f.shape.normal.assign(f.V.atoms.size(), Vec::Zero(d));
    f.shape.kappa.assign(f.V.atoms.size(), 0.0);
    f.anchors = {origin};
    f.x0 = origin;
    const double line_len = std::pow(2.0 * o.extent, m - 1);
    f.expected.beta0 = beta0;
    f.expected.sigma_gamma_total = 2.0 * line_len;
    f.expected.sigma_perp_total = 2.0 * sb * line_len;
    f.expected.mass_total = 2.0 * line_len * o.extent;
    f.expected.density_at_origin = 1.0;
    for (const auto& [nm, L, P, u] : {std::tuple{"first", L1, P1, u1}, std::tuple{"second", L2, P2, u2}}) {
        BoundaryComponent c;
        c.name = nm;
        c.gamma = f.gamma;
        c.gamma.atoms.clear();
        for (const auto& a : f.gamma.atoms)
            if (same_plane(a.P, P)) c.gamma.atoms.push_back(a);
        c.tau = (cb >= 0 ? 1.0 : -1.0) * u;
        c.base_point = origin;
        f.components.push_back(std::move(c));
    }
    check_expected(f);
    return f;
}

namespace {

// Unit-shell nodes (scale a = 1) of a dyadic box annulus in `dims` coordinates.
// The last coordinate is one-sided ([0, 2]) when `half` is set.
Lattice dyadic_unit_shell(int dims, bool half, int sub, int q) {
    Lattice out;
    if (dims == 0) return out;
    std::vector<int> lo(dims, -2), hi(dims, 1);
    if (half) lo[dims - 1] = 0;
    std::vector<int> idx = lo;
    while (true) {
        bool inner = true;
        for (int k = 0; k < dims; ++k) {
            const bool inner_k = (half && k == dims - 1) ? idx[k] == 0 : (idx[k] == -1 || idx[k] == 0);
            inner = inner && inner_k;
        }
        if (!inner) {
            std::vector<Rule1D> rules;
            for (int k = 0; k < dims; ++k) rules.push_back(composite_gauss(idx[k], idx[k] + 1.0, sub, q));
            Lattice cell = tensor(rules);
            out.coords.insert(out.coords.end(), cell.coords.begin(), cell.coords.end());
            out.weights.insert(out.weights.end(), cell.weights.begin(), cell.weights.end());
        }
        int k = 0;
        while (k < dims && ++idx[k] > hi[k]) {
            idx[k] = lo[k];
            ++k;
        }
        if (k == dims) break;
    }
    return out;
}

// Atoms of all shells k_min..k_max: position 2^(k−1)·(F u), weight 2^(dim·(k−1))·w.
template <class Emit>
void emit_dyadic(const Lattice& unit, const Mat& F, int dim, int k_min, int k_max, Emit&& emit) {
    std::vector<Vec> base;
    base.reserve(unit.coords.size());
    for (const auto& c : unit.coords) base.push_back(F * c);
    for (int k = k_min; k <= k_max; ++k) {
        for (std::size_t i = 0; i < base.size(); ++i) {
            Vec x(base[i].size());
            for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = std::ldexp(base[i](j), k - 1);
            emit(std::move(x), std::ldexp(unit.weights[i], dim * (k - 1)));
        }
    }
}

}  // namespace

ExampleFixture make_half_plane(double beta, const ConeOptions& o) {
    check_angle(beta);
    if (o.m < 1 || o.m > o.n || o.k_min > o.k_max || !(o.multiplicity > 0.0))
        throw InvalidArgument("invalid cone options");
    const int d = o.n + 1;
    const int m = o.m;
    const Vec e = unit_vector(d, d - 1);
    const Vec u = unit_vector(d, m - 1);
    const double sb = std::sin(beta), cb = std::cos(beta);
    const Vec nP = sb * e + cb * u;
    Mat F(d, m);
    for (int i = 0; i < m - 1; ++i) F.col(i) = unit_vector(d, i);
    F.col(m - 1) = nP;
    const Plane P = plane_from_frame(F);

    std::vector<Atom> atoms;
    emit_dyadic(dyadic_unit_shell(m, true, o.sub, o.q), F, m, o.k_min, o.k_max,
                [&](Vec x, double w) { atoms.push_back({std::move(x), P, o.multiplicity * w}); });
    std::vector<BoundaryAtom> batoms;
    std::vector<ScalarAtom> perp;
    if (m == 1) {
        batoms.push_back({Vec::Zero(d), P, o.multiplicity});
        perp.push_back({Vec::Zero(d), sb * o.multiplicity});
    } else {
        const Mat Lb = F.leftCols(m - 1);
        emit_dyadic(dyadic_unit_shell(m - 1, false, o.sub, o.q), Lb, m - 1, o.k_min, o.k_max, [&](Vec x, double w) {
            perp.push_back({x, sb * o.multiplicity * w});
            batoms.push_back({std::move(x), P, o.multiplicity * w});
        });
    }

    ExampleFixture f;
    f.name = "half-plane";
    f.h = 0.0;
    f.exact = true;
    auto angle = std::make_shared<const ContactAngleField>(constant_angle(beta));
    f.V = DiscreteVarifold::make(m, d, std::move(atoms));
    f.gamma = BoundaryVarifold::make(m, d, std::move(batoms), shared_halfspace(d), angle);
    f.dec = VariationDecomposition::zero(f.V);
    f.dec.sigma_perp = std::move(perp);
    f.shape.normal.assign(f.V.atoms.size(), Vec::Zero(d));
    f.shape.kappa.assign(f.V.atoms.size(), 0.0);
    f.anchors = {Vec::Zero(d)};
    // Nearest boundary atom to the vertex.
    f.x0 = f.gamma.atoms.front().x;
    for (const auto& a : f.gamma.atoms)
        if (a.x.norm() < f.x0.norm()) f.x0 = a.x;

    const double outer = std::ldexp(1.0, o.k_max + 1);
    const double inner = std::ldexp(1.0, o.k_min);
    const double line = m == 1 ? 1.0 : std::pow(outer, m - 1) - std::pow(inner, m - 1);
    f.expected.beta0 = beta;
    f.expected.sigma_gamma_total = o.multiplicity * line;
    f.expected.sigma_perp_total = sb * o.multiplicity * line;
    f.expected.mass_total = o.multiplicity * 0.5 * (std::pow(outer, m) - std::pow(inner, m));
    f.expected.density_at_origin = 0.5 * o.multiplicity;
    f.expected.n_V = nP;
    if (std::abs(cb) <= kZeroConormalTol) f.expected.n_W_zero = true;
    else f.expected.n_W_norm = 1.0;
    f.expected.tolerance = 1e-9;
    BoundaryComponent c;
    c.name = "edge";
    c.gamma = f.gamma;
    c.tau = (cb >= 0 ? 1.0 : -1.0) * u;
    c.base_point = f.x0;
    f.components.push_back(std::move(c));
    check_expected(f);
    return f;
}

DiscreteVarifold make_full_plane(const Vec& point, const ConeOptions& o) {
    const auto d = static_cast<int>(point.size());
    if (o.m < 1 || o.m > d) throw InvalidArgument("invalid plane dimension");
    Mat F(d, o.m);
    for (int i = 0; i < o.m; ++i) F.col(i) = unit_vector(d, i);
    const Plane P = plane_from_frame(F);
    std::vector<Atom> atoms;
    emit_dyadic(dyadic_unit_shell(o.m, false, o.sub, o.q), F, o.m, o.k_min, o.k_max,
                [&](Vec x, double w) { atoms.push_back({(point + x).eval(), P, o.multiplicity * w}); });
    return DiscreteVarifold::make(o.m, d, std::move(atoms));
}

std::vector<ParameterCell> uniform_cells(const Vec& lo, const Vec& hi, double h) {
    if (!(h > 0.0)) throw InvalidArgument("mesh size must be positive");
    const auto k = static_cast<int>(lo.size());
    std::vector<int> counts(k);
    for (int i = 0; i < k; ++i) {
        if (!(hi(i) > lo(i))) throw InvalidArgument("empty parameter box");
        counts[i] = panel_count(hi(i) - lo(i), h);
    }
    std::vector<ParameterCell> cells;
    std::vector<int> idx(k, 0);
    while (true) {
        ParameterCell c{Vec(k), Vec(k)};
        for (int i = 0; i < k; ++i) {
            const double w = (hi(i) - lo(i)) / counts[i];
            c.lo(i) = lo(i) + idx[i] * w;
            c.hi(i) = idx[i] + 1 == counts[i] ? hi(i) : lo(i) + (idx[i] + 1) * w;
        }
        cells.push_back(std::move(c));
        int i = 0;
        while (i < k && ++idx[i] == counts[i]) idx[i++] = 0;
        if (i == k) break;
    }
    return cells;
}

namespace {

void refine(const ParameterCell& c, const Vec& focus, double kappa, double floor,
            std::vector<ParameterCell>& out) {
    const Vec nearest = focus.cwiseMax(c.lo).cwiseMin(c.hi);
    const double dist = (nearest - focus).norm();
    const double edge = (c.hi - c.lo).maxCoeff();
    if (edge <= std::max(floor, kappa * dist)) {
        out.push_back(c);
        return;
    }
    const auto k = static_cast<int>(c.lo.size());
    const Vec mid = 0.5 * (c.lo + c.hi);
    for (int mask = 0; mask < (1 << k); ++mask) {
        ParameterCell child{Vec(k), Vec(k)};
        for (int i = 0; i < k; ++i) {
            const bool upper = (mask >> i) & 1;
            child.lo(i) = upper ? mid(i) : c.lo(i);
            child.hi(i) = upper ? c.hi(i) : mid(i);
        }
        refine(child, focus, kappa, floor, out);
    }
}

}  // namespace

std::vector<ParameterCell> graded_cells(const Vec& lo, const Vec& hi, double h, const Vec& focus,
                                        double kappa, double floor) {
    if (!(kappa > 0.0) || !(floor > 0.0)) throw InvalidArgument("grading parameters must be positive");
    std::vector<ParameterCell> out;
    for (const auto& c : uniform_cells(lo, hi, h)) refine(c, focus, kappa, floor, out);
    return out;
}

DiscreteVarifold sample_parametric(const Chart& chart, const std::vector<ParameterCell>& cells, WeightRule rule) {
    const int m = chart.m;
    const int q = rule == WeightRule::Midpoint ? 1 : (rule == WeightRule::Gauss2 ? 2 : 3);
    const Rule1D ref = gauss_legendre(q);
    const Lattice unit = tensor(std::vector<Rule1D>(m, ref));  // on [-1,1]^m, weights sum 2^m
    std::vector<Atom> atoms(cells.size() * unit.coords.size());
    std::vector<int> degenerate(atoms.size(), 0);
    parallel_for(cells.size(), [&](std::size_t c) {
        const Vec half = 0.5 * (cells[c].hi - cells[c].lo);
        const Vec mid = 0.5 * (cells[c].hi + cells[c].lo);
        const double jac_cell = half.prod();
        for (std::size_t k = 0; k < unit.coords.size(); ++k) {
            const Vec u = mid + half.cwiseProduct(unit.coords[k]);
            const Mat D = chart.differential(u);
            const Mat G = D.transpose() * D;
            Vec scale = G.diagonal().cwiseSqrt();
            const std::size_t slot = c * unit.coords.size() + k;
            if ((scale.array() <= 0.0).any()) {
                degenerate[slot] = 1;
                continue;
            }
            const Mat Dn = D * scale.cwiseInverse().asDiagonal();
            if ((Dn.transpose() * Dn).determinant() < 1e-12) {
                degenerate[slot] = 1;
                continue;
            }
            atoms[slot] = Atom{chart.map(u), plane_from_frame(Dn), std::sqrt(G.determinant()) * jac_cell * unit.weights[k]};
        }
    });
    for (int bad : degenerate)
        if (bad) throw DegenerateChart("chart differential loses rank at a quadrature node");
    return DiscreteVarifold::make(m, chart.ambient, std::move(atoms));
}

Chart hypersphere_chart(int k) {
    if (k < 1) throw InvalidArgument("sphere dimension must be positive");
    Chart c;
    c.m = k;
    c.ambient = k + 1;
    c.map = [k](const Vec& psi) {
        Vec w(k + 1);
        double s = 1.0;
        for (int i = 0; i < k; ++i) {
            w(i) = s * std::cos(psi(i));
            s *= std::sin(psi(i));
        }
        w(k) = s;
        return w;
    };
    c.differential = [k](const Vec& psi) {
        Mat D = Mat::Zero(k + 1, k);
        for (int l = 0; l < k; ++l) {
            for (int i = l; i <= k; ++i) {
                double p = 1.0;
                for (int j = 0; j < std::min(i, k); ++j) p *= (j == l) ? std::cos(psi(j)) : std::sin(psi(j));
                if (i < k) p *= (i == l) ? -std::sin(psi(i)) : std::cos(psi(i));
                D(i, l) = p;
            }
        }
        return D;
    };
    return c;
}

Vec hypersphere_lo(int k) {
    Vec lo = Vec::Zero(k);
    lo(k - 1) = -kPi;
    return lo;
}

Vec hypersphere_hi(int k) {
    Vec hi = Vec::Constant(k, kPi);
    return hi;
}

namespace {

struct CapPieces {
    DiscreteVarifold V;
    std::vector<Vec> H;
    std::vector<Vec> normal;
    std::vector<BoundaryAtom> boundary;  // with the cap's tangent planes
};

Vec focus_angles(int k) {
    Vec psi = Vec::Constant(k, 0.5 * kPi);
    psi(k - 1) = 0.0;
    return psi;
}

CapPieces sample_cap(double beta0, int n, double h, const Vec& o1, const CapOptions& opts) {
    const int d = n + 1;
    const Vec e = unit_vector(d, d - 1);
    const Vec c = o1 - std::cos(beta0) * e;
    const Chart sphere = hypersphere_chart(n - 1);
    const double sb = std::sin(beta0);

    Chart cap;
    cap.m = n;
    cap.ambient = d;
    cap.map = [=](const Vec& u) {
        Vec x(d);
        x.head(n) = std::sin(u(0)) * sphere.map(u.tail(n - 1));
        x(n) = std::cos(u(0));
        return (c + x).eval();
    };
    cap.differential = [=](const Vec& u) {
        Mat D = Mat::Zero(d, n);
        const Vec w = sphere.map(u.tail(n - 1));
        D.col(0).head(n) = std::cos(u(0)) * w;
        D(n, 0) = -std::sin(u(0));
        D.block(0, 1, n, n - 1) = std::sin(u(0)) * sphere.differential(u.tail(n - 1));
        return D;
    };
    Vec lo(n), hi(n), focus(n);
    lo << 0.0, hypersphere_lo(n - 1);
    hi << beta0, hypersphere_hi(n - 1);
    focus << beta0, focus_angles(n - 1);
    const auto cells = opts.refine_at_boundary_point ? graded_cells(lo, hi, h, focus, opts.kappa, opts.floor)
                                                     : uniform_cells(lo, hi, h);
    CapPieces out;
    out.V = sample_parametric(cap, cells, opts.rule);
    for (const auto& a : out.V.atoms) {
        const Vec N = (a.x - c).normalized();
        out.normal.push_back(N);
        out.H.push_back(-static_cast<double>(n) * N);
    }

    Chart rim;
    rim.m = n - 1;
    rim.ambient = d;
    rim.map = [=](const Vec& psi) {
        Vec x = o1;
        x.head(n) += sb * sphere.map(psi);
        x(n) = 0.0;
        return x;
    };
    rim.differential = [=](const Vec& psi) {
        Mat D = Mat::Zero(d, n - 1);
        D.topRows(n) = sb * sphere.differential(psi);
        return D;
    };
    const Vec rlo = hypersphere_lo(n - 1), rhi = hypersphere_hi(n - 1);
    const auto rcells = opts.refine_at_boundary_point
                            ? graded_cells(rlo, rhi, h, focus_angles(n - 1), opts.kappa, opts.floor)
                            : uniform_cells(rlo, rhi, h);
    const DiscreteVarifold ring = sample_parametric(rim, rcells, opts.rule);
    for (const auto& a : ring.atoms) {
        const Vec N = (a.x - c).normalized();
        const Mat P = Mat::Identity(d, d) - N * N.transpose();
        out.boundary.push_back({a.x, Plane::from_projector(P, n), a.w});
    }
    return out;
}

}  // namespace

ExampleFixture make_spherical_cap(double beta0, int n, double h, const CapOptions& opts) {
    check_angle(beta0);
    if (n < 2) throw InvalidArgument("caps need n >= 2");
    const int d = n + 1;
    const Vec o1 = opts.o1.value_or(Vec::Zero(d));
    if (o1.size() != d || o1(d - 1) != 0.0) throw InvalidArgument("cap base point must lie on S");
    CapPieces pc = sample_cap(beta0, n, h, o1, opts);

    ExampleFixture f;
    f.name = "spherical-cap";
    f.h = h;
    f.exact = false;
    const double sb = std::sin(beta0);
    std::vector<ScalarAtom> perp;
    for (const auto& b : pc.boundary) perp.push_back({b.x, sb * b.sigma});
    auto beta = std::make_shared<const ContactAngleField>(constant_angle(beta0));
    f.V = std::move(pc.V);
    f.gamma = BoundaryVarifold::make(n, d, std::move(pc.boundary), shared_halfspace(d), beta);
    f.dec = VariationDecomposition::zero(f.V);
    f.dec.H = std::move(pc.H);
    f.dec.sigma_perp = std::move(perp);
    f.shape.normal = std::move(pc.normal);
    f.shape.kappa.assign(f.V.atoms.size(), 1.0);
    f.anchors = {o1};

    Vec target = o1;
    target.head(n) += sb * hypersphere_chart(n - 1).map(focus_angles(n - 1));
    target(n) = 0.0;
    f.x0 = f.gamma.atoms.front().x;
    for (const auto& a : f.gamma.atoms)
        if ((a.x - target).norm() < (f.x0 - target).norm()) f.x0 = a.x;

    const double rim = sphere_area(n - 1) * std::pow(sb, n - 1);
    // Cap area |S^{n-1}| ∫_0^β₀ sin^{n-1}θ dθ by a fine Gauss rule.
    const Rule1D r = composite_gauss(0.0, beta0, 64, 8);
    double area = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) area += r.weights[i] * std::pow(std::sin(r.nodes[i]), n - 1);
    area *= sphere_area(n - 1);
    f.expected.beta0 = beta0;
    f.expected.sigma_gamma_total = rim;
    f.expected.sigma_perp_total = sb * rim;
    f.expected.mass_total = area;
    f.expected.boundary_radius = sb;
    if (std::abs(std::cos(beta0)) <= kZeroConormalTol) f.expected.n_W_zero = true;
    else f.expected.n_W_norm = 1.0;
    f.expected.tolerance = std::max(1e-9, h * h);
    check_expected(f);
    return f;
}

ExampleFixture make_cap_union(double beta0, const Vec& o1, const Vec& o2, double h) {
    check_angle(beta0);
    const int d = static_cast<int>(o1.size());
    const int n = d - 1;
    if (o2.size() != d || o1(n) != 0.0 || o2(n) != 0.0) throw InvalidArgument("cap base points must lie on S");
    CapOptions opts;
    CapPieces a = sample_cap(beta0, n, h, o1, opts);
    CapPieces b = sample_cap(0.5 * kPi, n, h, o2, opts);

    ExampleFixture f;
    f.name = "cap-union";
    f.h = h;
    f.exact = false;
    const double sb = std::sin(beta0);
    std::vector<ScalarAtom> perp;
    for (const auto& x : a.boundary) perp.push_back({x.x, sb * x.sigma});
    for (const auto& x : b.boundary) perp.push_back({x.x, x.sigma});
    f.V = std::move(a.V);
    f.V.append(b.V);
    auto beta = std::make_shared<const ContactAngleField>(constant_angle(beta0));
    f.gamma = BoundaryVarifold::make(n, d, std::move(a.boundary), shared_halfspace(d), beta);
    f.dec = VariationDecomposition::zero(f.V);
    f.dec.H = std::move(a.H);
    f.dec.H.insert(f.dec.H.end(), b.H.begin(), b.H.end());
    f.dec.sigma_perp = std::move(perp);
    f.shape.normal = std::move(a.normal);
    f.shape.normal.insert(f.shape.normal.end(), b.normal.begin(), b.normal.end());
    f.shape.kappa.assign(f.V.atoms.size(), 1.0);
    f.anchors = {o1, o2};
    f.x0 = f.gamma.atoms.front().x;

    const double rim = sphere_area(n - 1) * std::pow(sb, n - 1);
    f.expected.beta0 = beta0;
    f.expected.sigma_gamma_total = rim;
    f.expected.sigma_perp_total = sb * rim + sphere_area(n - 1);
    f.expected.tolerance = std::max(1e-9, h * h);
    check_expected(f);
    return f;
}

BoundaryVarifold wetting_disc_boundary(double beta, int n, const Vec& center, double radius, double h) {
    check_angle(beta);
    const int d = n + 1;
    if (n < 2 || center.size() != d || center(n) != 0.0 || !(radius > 0.0))
        throw InvalidArgument("invalid wetting disc");
    const Chart sphere = hypersphere_chart(n - 1);
    Chart rim;
    rim.m = n - 1;
    rim.ambient = d;
    rim.map = [=](const Vec& psi) {
        Vec x = center;
        x.head(n) += radius * sphere.map(psi);
        return x;
    };
    rim.differential = [=](const Vec& psi) {
        Mat D = Mat::Zero(d, n - 1);
        D.topRows(n) = radius * sphere.differential(psi);
        return D;
    };
    const DiscreteVarifold ring = sample_parametric(rim, uniform_cells(hypersphere_lo(n - 1), hypersphere_hi(n - 1), h));
    const Vec e = unit_vector(d, n);
    std::vector<BoundaryAtom> atoms;
    for (const auto& a : ring.atoms) {
        Vec nu_U = Vec::Zero(d);
        nu_U.head(n) = -(a.x - center).head(n) / radius;
        const Vec N = (std::cos(beta) * e - std::sin(beta) * nu_U).normalized();
        atoms.push_back({a.x, Plane::from_projector(Mat::Identity(d, d) - N * N.transpose(), n), a.w});
    }
    return BoundaryVarifold::make(n, d, std::move(atoms), shared_halfspace(d),
                                  std::make_shared<const ContactAngleField>(constant_angle(beta)));
}

std::vector<std::string> fixture_names() {
    return {"plane-pair", "separated-pair", "distinct-pair", "perturbed-pair", "spherical-cap", "cap-union", "half-plane"};
}

double default_mesh_size(const std::string& name) {
    if (name == "spherical-cap" || name == "cap-union") return 0.02;
    if (name == "half-plane") return 0.0;
    return 0.5;
}

ExampleFixture make_fixture(const std::string& name, const FixtureParams& p) {
    const double h = p.h > 0.0 ? p.h : default_mesh_size(name);
    const FlatOptions flat{p.m, p.n, p.extent, h > 0.0 ? h : 0.5, 9};
    if (name == "plane-pair") return make_plane_pair(p.beta, flat);
    if (name == "separated-pair") return make_separated_pair(p.beta, p.s, flat, p.one_sided);
    if (name == "distinct-pair") return make_distinct_pair(p.beta, kPi / 3.0, flat);
    if (name == "perturbed-pair") return make_perturbed_pair(p.beta, p.eps, flat);
    if (name == "spherical-cap") {
        CapOptions c;
        if (p.graded) {
            c.refine_at_boundary_point = true;
            c.rule = WeightRule::Gauss2;
        }
        return make_spherical_cap(p.beta, p.n, h, c);
    }
    if (name == "cap-union") {
        Vec o1 = Vec::Zero(p.n + 1), o2 = Vec::Zero(p.n + 1);
        o1(0) = -1.25;
        o2(0) = 1.25;
        return make_cap_union(p.beta, o1, o2, h);
    }
    if (name == "half-plane") {
        ConeOptions c;
        c.m = p.m;
        c.n = p.n;
        return make_half_plane(p.beta, c);
    }
    throw ConfigError("unknown fixture: " + name);
}

}  // namespace capvar
