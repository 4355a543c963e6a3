#include "capvar/analysis.hpp"
#include "capvar/parallel.hpp"
#include "capvar/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace capvar {

double cutoff(double r, double t) {
    if (t == 0.0) return r <= 1.0 ? 1.0 : 0.0;
    if (r <= 1.0 - t) return 1.0;
    if (r >= 1.0) return 0.0;
    const double u = (r - (1.0 - t)) / t;
    return 1.0 - u * u * (3.0 - 2.0 * u);
}

double cutoff_normalization(int m, double t) {
    if (!(t >= 0.0 && t < 1.0)) throw InvalidArgument("cutoff width must lie in [0, 1)");
    if (t == 0.0) return 1.0;
    // The ramp part is a polynomial of degree m + 2; eight nodes integrate it exactly for m ≤ 13.
    const Rule1D g = composite_gauss(1.0 - t, 1.0, 1, 8);
    double ramp = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        ramp += g.weights[i] * cutoff(g.nodes[i], t) * std::pow(g.nodes[i], m - 1);
    return std::pow(1.0 - t, m) + m * ramp;
}

namespace {

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("radius grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw InvalidArgument("radii must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("radii must increase strictly");
    }
}

}  // namespace

DensityCurve density_curve(const DiscreteVarifold& V, const Vec& x0, const std::vector<double>& rho_grid,
                           double cutoff_t) {
    check_grid(rho_grid);
    DensityCurve c;
    c.x0 = x0;
    c.m = V.m;
    c.cutoff_t = cutoff_t;
    c.radii = rho_grid;
    const double norm = cutoff_normalization(V.m, cutoff_t) * unit_ball_volume(V.m);
    for (double rho : rho_grid) {
        const double mass =
            cutoff_t == 0.0 ? ball_mass(V, x0, rho) : parallel_sum(V.atoms.size(), [&](std::size_t i) {
                const auto& a = V.atoms[i];
                return a.w * cutoff((a.x - x0).norm() / rho, cutoff_t);
            });
        c.masses.push_back(mass);
        c.ratios.push_back(mass / (norm * std::pow(rho, V.m)));
    }
    return c;
}

std::vector<double> boundary_monotone_quantity(const DensityCurve& curve, double p, int m, double Lambda) {
    if (!(p > m)) throw ExponentError("the exponent p must exceed m");
    if (!(Lambda > 0.0)) throw InvalidArgument("Lambda must be positive");
    std::vector<double> out;
    out.reserve(curve.radii.size());
    for (std::size_t i = 0; i < curve.radii.size(); ++i) {
        const double rho = curve.radii[i];
        const double base = std::pow(curve.masses[i] / std::pow(rho, m), 1.0 / p);
        out.push_back(std::exp(Lambda * rho) * (base + Lambda * std::pow(rho, (p - m) / p)));
    }
    return out;
}

double monotone_violation(const std::vector<double>& values) {
    double running = -std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        running = std::max(running, v);
        worst = std::max(worst, running - v);
    }
    return worst;
}

ScalarWeight unit_weight() {
    return {[](const Vec&) { return 1.0; }, [](const Vec& x) { return Vec::Zero(x.size()).eval(); }};
}

InteriorMonotonicity interior_monotonicity_check(const DiscreteVarifold& V, const std::vector<Vec>& H,
                                                 const Vec& xi, const ScalarWeight& h, double r1, double r2,
                                                 const Container* container, double tol) {
    if (!(r1 > 0.0 && r1 < r2)) throw RadiusOrder("need 0 < r1 < r2");
    if (H.size() != V.atoms.size()) throw InvalidArgument("one curvature vector per atom is required");
    if (container && !(r2 < container->sdf(xi))) throw InvalidArgument("r2 must stay below the boundary distance");
    const int m = V.m;
    const std::size_t n = V.atoms.size();
    // ∫_{max(r1,δ)}^{r2} ρ^{-m} dρ
    auto radial = [&](double delta) {
        const double a = std::max(r1, delta);
        if (a >= r2) return 0.0;
        if (m == 1) return std::log(r2 / a);
        return (std::pow(a, 1 - m) - std::pow(r2, 1 - m)) / (m - 1);
    };
    std::vector<double> inner(n), outer(n), curv(n), perp(n);
    parallel_for(n, [&](std::size_t i) {
        const auto& a = V.atoms[i];
        const Vec dx = a.x - xi;
        const double delta = dx.norm();
        const double hv = h.value(a.x);
        inner[i] = delta <= r1 ? a.w * hv : 0.0;
        outer[i] = delta <= r2 ? a.w * hv : 0.0;
        curv[i] = delta <= r2 ? a.w * (hv * H[i].norm() + a.P.project(h.grad(a.x)).norm()) * radial(delta) : 0.0;
        perp[i] = (delta > r1 && delta <= r2) ? a.w * hv * a.P.project_perp(dx).squaredNorm() / std::pow(delta, m + 2)
                                              : 0.0;
    });
    InteriorMonotonicity r;
    r.lhs = pairwise_sum(inner) / std::pow(r1, m);
    r.mass_term = pairwise_sum(outer) / std::pow(r2, m);
    r.curvature_term = pairwise_sum(curv);
    r.normal_term = pairwise_sum(perp);
    r.rhs = r.mass_term + r.curvature_term - r.normal_term;
    r.slack = r.rhs - r.lhs;
    r.pass = r.slack >= -tol;
    return r;
}

LambdaCalibration calibrate_lambda(const DiscreteVarifold& V, const Vec& x0, double p,
                                   const std::vector<double>& rho_grid, double slack, double cutoff_t) {
    const DensityCurve curve = density_curve(V, x0, rho_grid, cutoff_t);
    for (int k = -10; k <= 10; ++k) {
        const double L = std::ldexp(1.0, k);
        auto T = boundary_monotone_quantity(curve, p, V.m, L);
        const double v = monotone_violation(T);
        if (v <= slack) return {L, k, v, slack, std::move(T)};
    }
    throw NoLambdaFound("no Lambda in 2^-10 ... 2^10 makes the curve monotone");
}

namespace {

struct Dictionary {
    int d = 0;
    Vec origin;  ///< lowest corner
    double R = 0.0;
    std::vector<double> widths;
    std::vector<int> counts;           ///< centers per direction
    std::vector<std::size_t> offsets;  ///< first bump index of each scale
    std::size_t size = 0;

    Dictionary(int dim, const Vec& center, double radius, int scales) : d(dim), R(radius) {
        if (!(radius > 0.0) || scales < 1) throw InvalidArgument("invalid dictionary");
        origin = center - Vec::Constant(d, radius);
        for (int k = 0; k < scales; ++k) {
            const double s = std::ldexp(1.0, -k);
            const int K = static_cast<int>(std::floor(2.0 * radius / (0.5 * s) + 1e-9)) + 1;
            widths.push_back(s);
            counts.push_back(K);
            offsets.push_back(size);
            std::size_t total = 1;
            for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(K);
            size += total;
        }
    }

    // Calls emit(bump index, value) for every bump whose support contains x.
    template <class Emit>
    void evaluate(const Vec& x, Emit&& emit) const {
        const double norm = std::sqrt(static_cast<double>(d)) * kPi / 2.0;
        std::vector<int> lo(d), hi(d), idx(d);
        std::vector<std::vector<double>> factor(d);
        for (std::size_t k = 0; k < widths.size(); ++k) {
            const double s = widths[k];
            const double g = 0.5 * s;
            bool empty = false;
            for (int i = 0; i < d; ++i) {
                const double u = x(i) - origin(i);
                lo[i] = std::max(0, static_cast<int>(std::floor((u - s) / g)));
                hi[i] = std::min(counts[k] - 1, static_cast<int>(std::ceil((u + s) / g)));
                factor[i].clear();
                for (int j = lo[i]; j <= hi[i]; ++j) {
                    const double off = u - j * g;
                    const double c = std::abs(off) < s ? std::cos(kPi * off / (2.0 * s)) : 0.0;
                    factor[i].push_back(c * c);
                }
                if (lo[i] > hi[i]) empty = true;
            }
            if (empty) continue;
            idx = lo;
            while (true) {
                double v = s / norm;
                std::size_t flat = 0;
                for (int i = 0; i < d; ++i) {
                    v *= factor[i][idx[i] - lo[i]];
                    flat = flat * static_cast<std::size_t>(counts[k]) + static_cast<std::size_t>(idx[i]);
                }
                if (v != 0.0) emit(offsets[k] + flat, v);
                int i = 0;
                while (i < d && ++idx[i] > hi[i]) idx[i] = lo[i], ++i;
                if (i == d) break;
            }
        }
    }
};

// Generic scatter: features(atom, out) fills `nf` feature values for an atom.
template <class Item, class Feat>
std::vector<double> scatter(const Dictionary& D, const std::vector<Item>& items, int nf, Feat&& features) {
    std::vector<double> acc(D.size * static_cast<std::size_t>(nf), 0.0);
    std::vector<double> f(nf);
    for (const auto& it : items) {
        const auto& [x, w] = features(it, f);
        D.evaluate(x, [&](std::size_t b, double v) {
            for (int k = 0; k < nf; ++k) acc[b * nf + k] += w * v * f[k];
        });
    }
    return acc;
}

BLDistanceReport finish(const Dictionary& D, const std::vector<double>& a, const std::vector<double>& b) {
    BLDistanceReport r;
    r.dictionary_size = a.size();
    r.region_radius = D.R;
    for (std::size_t i = 0; i < a.size(); ++i) r.value = std::max(r.value, std::abs(a[i] - b[i]));
    return r;
}

int ambient_of(const std::vector<WeightedPoint>& a, const std::vector<WeightedPoint>& b) {
    if (!a.empty()) return static_cast<int>(a.front().x.size());
    if (!b.empty()) return static_cast<int>(b.front().x.size());
    return 0;
}

template <class A>
BLDistanceReport plane_bl(const std::vector<A>& va, const std::vector<A>& vb, int d, const BLOptions& opts,
                          double A::*weight) {
    const Dictionary D(d, opts.center.value_or(Vec::Zero(d)), opts.region_radius, opts.scales);
    const int nf = 1 + d * (d + 1) / 2;
    auto feat = [&](const A& a, std::vector<double>& f) {
        f[0] = 1.0;
        int k = 1;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) f[k++] = 0.5 * a.P.proj()(i, j);
        return std::pair<const Vec&, double>(a.x, a.*weight);
    };
    return finish(D, scatter(D, va, nf, feat), scatter(D, vb, nf, feat));
}

}  // namespace

BLDistanceReport bl_distance(const std::vector<WeightedPoint>& mu, const std::vector<WeightedPoint>& nu,
                             const BLOptions& opts) {
    const int d = ambient_of(mu, nu);
    if (d == 0) return {0.0, 0, opts.region_radius};
    const Dictionary D(d, opts.center.value_or(Vec::Zero(d)), opts.region_radius, opts.scales);
    auto feat = [](const WeightedPoint& p, std::vector<double>& f) {
        f[0] = 1.0;
        return std::pair<const Vec&, double>(p.x, p.w);
    };
    return finish(D, scatter(D, mu, 1, feat), scatter(D, nu, 1, feat));
}

BLDistanceReport bl_distance(const DiscreteVarifold& V, const DiscreteVarifold& W, const BLOptions& opts) {
    const int d = std::max(V.ambient, W.ambient);
    if (d == 0) return {0.0, 0, opts.region_radius};
    return plane_bl(V.atoms, W.atoms, d, opts, &Atom::w);
}

BLDistanceReport bl_distance(const BoundaryVarifold& G, const BoundaryVarifold& K, const BLOptions& opts) {
    const int d = std::max(G.ambient, K.ambient);
    if (d == 0) return {0.0, 0, opts.region_radius};
    return plane_bl(G.atoms, K.atoms, d, opts, &BoundaryAtom::sigma);
}

BlowUpSequence blow_up(const DiscreteVarifold& V, const BoundaryVarifold& gamma, const Vec& x0,
                       const std::vector<double>& radii, const BLOptions& opts) {
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw InvalidArgument("blow-up radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw InvalidArgument("blow-up radii must decrease");
    }
    BlowUpSequence seq;
    seq.radii = radii;
    for (double r : radii) seq.terms.push_back(pushforward_dilation(V, gamma, x0, r));
    for (std::size_t i = 1; i < seq.terms.size(); ++i)
        seq.consecutive.push_back(bl_distance(seq.terms[i - 1].V, seq.terms[i].V, opts).value);
    return seq;
}

std::vector<double> orthogonality_constants(const BlowUpSequence& seq, const Vec& n, double extent) {
    if (!(extent > 0.0)) throw InvalidArgument("extent must be positive");
    std::vector<double> c;
    for (std::size_t k = 0; k < seq.terms.size(); ++k) {
        double worst = 0.0;
        for (const auto& a : seq.terms[k].gamma.atoms)
            if (a.x.norm() <= extent) worst = std::max(worst, std::abs(a.x.dot(n)));
        c.push_back(worst / (seq.radii[k] * extent * extent));
    }
    return c;
}

TangentConeFit fit_tangent_cone(const DiscreteVarifold& C, const BoundaryVarifold& gamma_inf, double beta_x0,
                                const ConeFitOptions& opts) {
    if (C.atoms.empty()) throw InvalidArgument("empty cone");
    const int d = C.ambient;
    const int m = C.m;
    const Vec e = unit_vector(d, d - 1);
    const double reach = *std::max_element(opts.rho_grid.begin(), opts.rho_grid.end());

    TangentConeFit fit;
    const DensityCurve curve = density_curve(C, Vec::Zero(d), opts.rho_grid, opts.cutoff_t);
    const auto [lo, hi] = std::minmax_element(curve.ratios.begin(), curve.ratios.end());
    fit.density_spread = *hi - *lo;
    if (fit.density_spread > opts.tol) throw NotConical("density ratio varies across the radius grid");
    std::vector<double> r(curve.ratios);
    fit.vertex_density = pairwise_sum(r) / static_cast<double>(r.size());

    Mat M = Mat::Zero(d, d);
    for (const auto& a : C.atoms)
        if (a.x.norm() <= reach) M += a.w * a.x * a.x.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    fit.plane = plane_from_frame(es.eigenvectors().rightCols(m).eval());
    for (const auto& a : C.atoms)
        if (a.x.norm() <= reach) fit.plane_spread = std::max(fit.plane_spread, grassmann_distance(a.P, fit.plane));
    fit.planes_agree = fit.plane_spread <= opts.plane_tol;

    const Vec Pe = fit.plane.project(e);
    if (Pe.norm() < 1e-12) throw DegenerateProjection("fitted plane lies in the boundary hyperplane");
    fit.n_P = Pe / Pe.norm();
    fit.alpha = std::asin(std::min(1.0, Pe.norm()));
    fit.expected_alpha = std::min(beta_x0, kPi - beta_x0);
    fit.boundary_line = Plane::from_projector(fit.plane.proj() - fit.n_P * fit.n_P.transpose(), m - 1);
    for (const auto& a : gamma_inf.atoms)
        if (a.x.norm() <= reach)
            fit.boundary_offset = std::max(fit.boundary_offset, fit.boundary_line.project_perp(a.x).norm());

    // Projection of C onto the fitted half-plane; atoms already on it are kept bit-for-bit.
    DiscreteVarifold proj;
    proj.m = m;
    proj.ambient = d;
    proj.atoms.reserve(C.atoms.size());
    for (const auto& a : C.atoms) {
        Vec y = fit.plane.project(a.x);
        if ((y - a.x).norm() <= 1e-12 * (1.0 + a.x.norm())) y = a.x;
        const double t = y.dot(fit.n_P);
        if (t < 0.0) y -= t * fit.n_P;
        proj.atoms.push_back({y, same_plane(a.P, fit.plane) ? a.P : fit.plane, a.w});
    }
    fit.fit_residual = bl_distance(C, proj, opts.bl).value;
    fit.pass = fit.planes_agree && std::abs(fit.vertex_density - 0.5) <= opts.density_window &&
               fit.fit_residual <= opts.tol && std::abs(fit.alpha - fit.expected_alpha) <= opts.tol;
    return fit;
}

BarrierCheck barrier_angle_check(const TangentConeFit& fit, const DiscreteVarifold& C, const Vec& nu_H, double tol) {
    const int d = static_cast<int>(nu_H.size());
    if (std::abs(nu_H.norm() - 1.0) > 1e-12) throw InvalidArgument("nu_H must be a unit vector");
    double worst = 0.0;
    double defect = 0.0;
    for (const auto& a : C.atoms) {
        const double s = a.x.dot(nu_H);
        worst = std::max(worst, s);
        defect = std::max(defect, std::abs(s));
    }
    if (worst > tol) throw NotContained("cone leaves the half-space {<x, nu_H> <= 0}");
    BarrierCheck b;
    b.theta = std::acos(std::clamp(nu_H.dot(unit_vector(d, d - 1)), -1.0, 1.0));
    b.equality_branch = std::abs(b.theta - fit.alpha) <= tol;
    b.boundary_defect = defect;
    b.pass = b.theta >= fit.alpha - tol && (!b.equality_branch || defect <= tol);
    return b;
}

namespace {

CompactnessMember evaluate_member(double s, const ExampleFixture& f, const ExampleFixture* limit,
                                  const CompactnessOptions& o) {
    CompactnessMember mb;
    mb.s = s;
    if (limit) mb.bl_to_limit = bl_distance(f.V, limit->V, o.bl).value;
    std::vector<double> mass;
    for (const auto& a : f.gamma.atoms)
        if ((a.x - o.x0).norm() <= 0.5 * o.rho) mass.push_back(a.sigma);
    mb.boundary_mass = pairwise_sum(mass);
    mb.conormal_integral = resolved_conormal_integral(f.gamma, o.x0, o.rho, o.resolution);
    mb.exact_integral = conormal_integral(f.gamma, o.x0, o.rho);
    mb.c1_margin = f.components.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& c : f.components) {
        const CbpReport rep = cbp_check(c.gamma, c.base_point, c.tau, o.eps0,
                                        std::numeric_limits<double>::infinity(), 0.0);
        mb.c1_margin = std::min(mb.c1_margin, rep.c1_margin);
    }
    return mb;
}

}  // namespace

CompactnessReport compactness_experiment(const std::function<ExampleFixture(double)>& family,
                                         const std::vector<double>& s_grid, const CompactnessOptions& opts) {
    if (s_grid.empty()) throw InvalidArgument("empty parameter grid");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0.0)) throw InvalidArgument("family parameters must be positive");
        if (i > 0 && !(s_grid[i] < s_grid[i - 1])) throw InvalidArgument("family parameters must decrease");
    }
    const ExampleFixture lim = family(0.0);
    CompactnessReport rep;
    rep.limit = evaluate_member(0.0, lim, nullptr, opts);
    for (double s : s_grid) rep.members.push_back(evaluate_member(s, family(s), &lim, opts));

    rep.distances_decrease = true;
    double floor_mass = std::numeric_limits<double>::infinity();
    rep.min_c1_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rep.members.size(); ++i) {
        const auto& mb = rep.members[i];
        if (i > 0 && mb.bl_to_limit > rep.members[i - 1].bl_to_limit) rep.distances_decrease = false;
        floor_mass = std::min(floor_mass, mb.boundary_mass);
        rep.min_c1_margin = std::min(rep.min_c1_margin, mb.c1_margin);
    }
    rep.lower_mass_propagates = rep.limit.boundary_mass >= floor_mass * (1.0 - 1e-12);
    const double first = rep.members.front().conormal_integral;
    rep.integral_ratio = first > 0.0 ? rep.members.back().conormal_integral / first : 0.0;
    rep.limit_ratio = first > 0.0 ? rep.limit.conormal_integral / first : 0.0;
    return rep;
}

}  // namespace capvar
