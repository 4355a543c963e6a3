#include "capvar/capillary.hpp"
#include "capvar/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace capvar {

BoundaryVarifold BoundaryVarifold::make(int m, int ambient, std::vector<BoundaryAtom> atoms,
                                        std::shared_ptr<const Container> container,
                                        std::shared_ptr<const ContactAngleField> beta,
                                        double tol_bundle) {
    if (!container || !beta) throw InvalidArgument("boundary varifold needs a container and an angle field");
    BoundaryVarifold g;
    g.m = m;
    g.ambient = ambient;
    g.atoms = std::move(atoms);
    g.container = std::move(container);
    g.beta = std::move(beta);
    std::vector<int> bad(g.atoms.size(), 0);
    parallel_for(g.atoms.size(), [&](std::size_t i) {
        const auto& a = g.atoms[i];
        if (a.x.size() != ambient || a.P.ambient() != ambient || a.P.dim() != m) { bad[i] = 1; return; }
        if (!(a.sigma > 0.0) || !std::isfinite(a.sigma)) { bad[i] = 2; return; }
        if (std::abs(g.container->sdf(a.x)) > kSurfaceTol) { bad[i] = 3; return; }
        const BundleGap gap = capillary_gap(a.x, a.P, g.beta->at(a.x), *g.container);
        if (gap.gap_i > tol_bundle || gap.gap_ii > tol_bundle) bad[i] = 4;
    });
    for (int b : bad) {
        switch (b) {
            case 1: throw InvalidArgument("boundary atom has inconsistent dimensions");
            case 2: throw InvalidArgument("boundary atom weight must be positive and finite");
            case 3: throw NotOnSurface("boundary atom is not on the container boundary");
            case 4: throw InvalidArgument("boundary atom plane is outside the capillary bundle");
            default: break;
        }
    }
    return g;
}

double BoundaryVarifold::total_mass() const {
    return parallel_sum(atoms.size(), [&](std::size_t i) { return atoms[i].sigma; });
}

BoundaryVarifold BoundaryVarifold::scaled(double factor) const {
    if (!(factor > 0.0)) throw InvalidArgument("scale factor must be positive");
    BoundaryVarifold g = *this;
    for (auto& a : g.atoms) a.sigma *= factor;
    return g;
}

BundleGap capillary_gap(const Vec& x, const Plane& P, double beta, const Container& c) {
    const NormalTangent nt = normal_and_tangent(c, x);
    const Vec Pn = P.project(nt.normal);
    BundleGap g;
    g.gap_i = std::abs(Pn.norm() - bundle_sine(beta));
    const Mat M = P.proj() * nt.tangent * P.proj();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        if (es.eigenvalues()(k) < 1.0 - 1e-9) continue;
        g.gap_ii = std::max(g.gap_ii, std::abs(es.eigenvectors().col(k).dot(Pn)));
    }
    return g;
}

Vec conormal(const Vec& x, const Plane& P, const Container& c) {
    const NormalTangent nt = normal_and_tangent(c, x);
    const Vec Pn = P.project(nt.normal);
    const double len = Pn.norm();
    if (len < 1e-10) throw DegenerateProjection("plane is tangent to the boundary");
    return Pn / len;
}

double Disintegration::total_mass() const {
    std::vector<double> m;
    m.reserve(sites.size());
    for (const auto& s : sites) m.push_back(s.mass);
    return pairwise_sum(m);
}

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // Smaller index becomes the root so clusters are keyed by their first atom.
        if (b < a) std::swap(a, b);
        parent[b] = a;
    }
};

Vec sweep_direction(int d) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = 1.0 / std::sqrt(2.0 + i);
    return v / v.norm();
}

}  // namespace

Disintegration disintegrate(const BoundaryVarifold& gamma, double grouping_tol) {
    if (!(grouping_tol > 0.0)) throw InvalidArgument("grouping tolerance must be positive");
    const std::size_t n = gamma.atoms.size();
    Disintegration D;
    D.grouping_tol = grouping_tol;
    if (n == 0) return D;

    const Vec dir = sweep_direction(gamma.ambient);
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = dir.dot(gamma.atoms[i].x);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });

    UnionFind uf(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t i = order[s];
        for (std::size_t t = s + 1; t < n; ++t) {
            const std::size_t j = order[t];
            if (key[j] - key[i] > grouping_tol) break;
            if ((gamma.atoms[i].x - gamma.atoms[j].x).norm() <= grouping_tol) uf.unite(i, j);
        }
    }

    std::vector<std::size_t> site_of(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = uf.find(i);
        if (site_of[root] == std::numeric_limits<std::size_t>::max()) {
            site_of[root] = D.sites.size();
            Site s;
            s.x = gamma.atoms[root].x;
            D.sites.push_back(std::move(s));
        }
        D.sites[site_of[root]].atoms.push_back(i);
    }

    for (auto& site : D.sites) {
        std::vector<double> sig;
        for (std::size_t i : site.atoms) sig.push_back(gamma.atoms[i].sigma);
        site.mass = pairwise_sum(sig);
        std::vector<std::vector<double>> shares;
        for (std::size_t i : site.atoms) {
            const auto& a = gamma.atoms[i];
            std::size_t k = 0;
            while (k < site.fiber.size() && !same_plane(site.fiber[k].P, a.P)) ++k;
            if (k == site.fiber.size()) {
                site.fiber.push_back({a.P, 0.0});
                shares.emplace_back();
            }
            shares[k].push_back(a.sigma);
        }
        for (std::size_t k = 0; k < site.fiber.size(); ++k)
            site.fiber[k].probability = pairwise_sum(shares[k]) / site.mass;
    }
    return D;
}

Vec SiteCoNormal::n_W() const {
    if (nW_zero) return Vec::Zero(cos_beta_nW.size());
    return cos_beta_nW / cos_beta;
}

std::vector<SiteCoNormal> co_normals(const Disintegration& D, const ContactAngleField& beta,
                                     const Container& c) {
    std::vector<SiteCoNormal> out(D.sites.size());
    parallel_for(D.sites.size(), [&](std::size_t s) {
        const Site& site = D.sites[s];
        SiteCoNormal r;
        r.x = site.x;
        r.mass = site.mass;
        r.cos_beta = std::cos(beta.at(site.x));
        r.n_V = Vec::Zero(site.x.size());
        for (const auto& f : site.fiber) r.n_V += f.probability * conormal(site.x, f.P, c);
        const NormalTangent nt = normal_and_tangent(c, site.x);
        r.cos_beta_nW = nt.tangent * r.n_V;
        r.nW_zero = std::abs(r.cos_beta) < 1e-12 || r.cos_beta_nW.norm() <= kZeroConormalTol;
        out[s] = std::move(r);
    });
    return out;
}

namespace {

double nearest_site_distance(const Disintegration& D, const Vec& x0) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : D.sites) best = std::min(best, (s.x - x0).norm());
    return best;
}

}  // namespace

CbpReport cbp_check(const BoundaryVarifold& gamma, const Vec& x0, const Vec& tau, double eps0,
                    double rho0, double c0, const CbpOptions& opts) {
    const double cos0 = std::cos(gamma.beta->at(x0));
    if (std::abs(cos0) < 1e-12) throw AngleDegenerate("cos beta vanishes at the base point");
    const Disintegration D = disintegrate(gamma, opts.grouping_tol);
    if (nearest_site_distance(D, x0) > opts.grouping_tol)
        throw InvalidArgument("base point is not a boundary site");
    const auto cn = co_normals(D, *gamma.beta, *gamma.container);

    CbpReport rep;
    rep.c1_margin = std::numeric_limits<double>::infinity();
    rep.c2_margin = -std::numeric_limits<double>::infinity();
    const double reach = rho0 - opts.exclusion_radius;
    for (const auto& s : cn) {
        const Vec dx = s.x - x0;
        const double r = dx.norm();
        if (r > reach) continue;
        ++rep.sites_checked;
        rep.c1_margin = std::min(rep.c1_margin, s.cos_beta_nW.dot(tau) - eps0);
        rep.c2_margin = std::max(rep.c2_margin, std::abs(dx.dot(s.cos_beta_nW)) - c0 * std::abs(cos0) * r * r);
    }
    rep.pass = rep.c1_margin >= 0.0 && rep.c2_margin <= 0.0;
    return rep;
}

namespace {

std::vector<Vec> sphere_directions(int k, int resolution) {
    std::vector<Vec> dirs;
    if (k == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    // Hyperspherical angle grid: the last angle spans [0, 2π), the others [0, π].
    const int per = k == 2 ? resolution
                           : std::max(8, static_cast<int>(std::pow(resolution, 1.0 / (k - 1))));
    std::vector<int> idx(k - 1, 0);
    while (true) {
        Vec v(k);
        double s = 1.0;
        for (int a = 0; a < k - 1; ++a) {
            const bool last = a == k - 2;
            const double ang = last ? 2.0 * kPi * idx[a] / per : kPi * (idx[a] + 0.5) / per;
            v(a) = s * std::cos(ang);
            s *= std::sin(ang);
        }
        v(k - 1) = s;
        dirs.push_back(v);
        int a = 0;
        while (a < k - 1 && ++idx[a] == per) idx[a++] = 0;
        if (a == k - 1) break;
    }
    return dirs;
}

}  // namespace

TauScan scan_tau(const BoundaryVarifold& gamma, const Vec& x0, double rho0, int resolution,
                 const CbpOptions& opts) {
    const Disintegration D = disintegrate(gamma, opts.grouping_tol);
    const auto cn = co_normals(D, *gamma.beta, *gamma.container);
    const NormalTangent nt = normal_and_tangent(*gamma.container, x0);
    Eigen::SelfAdjointEigenSolver<Mat> es(nt.tangent);
    const int k = gamma.ambient - 1;
    const Mat basis = es.eigenvectors().rightCols(k);

    std::vector<const SiteCoNormal*> local;
    for (const auto& s : cn)
        if ((s.x - x0).norm() <= rho0 - opts.exclusion_radius) local.push_back(&s);

    TauScan best;
    best.best_min = -std::numeric_limits<double>::infinity();
    const auto dirs = sphere_directions(k, resolution);
    best.grid_points = static_cast<int>(dirs.size());
    for (const auto& d : dirs) {
        const Vec tau = basis * d;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto* s : local) worst = std::min(worst, s->cos_beta_nW.dot(tau));
        if (worst > best.best_min) {
            best.best_min = worst;
            best.tau = tau;
        }
    }
    return best;
}

LowerDensityResult lower_density_filter(const BoundaryVarifold& gamma, int k,
                                        const std::vector<double>& rho_grid, double density_floor,
                                        double grouping_tol) {
    LowerDensityResult res;
    res.restricted = gamma;
    res.restricted.atoms.clear();
    if (gamma.atoms.empty()) return res;
    if (rho_grid.empty()) throw InvalidArgument("empty radius grid");
    for (double r : rho_grid)
        if (!(r > 0.0)) throw InvalidArgument("radii must be positive");

    const Disintegration D = disintegrate(gamma, grouping_tol);
    const double wk = unit_ball_volume(k);
    res.sites.resize(D.sites.size());
    parallel_for(D.sites.size(), [&](std::size_t s) {
        const Vec& x = D.sites[s].x;
        std::vector<double> masses;
        for (double rho : rho_grid) {
            std::vector<double> in;
            for (const auto& a : gamma.atoms)
                if ((a.x - x).norm() <= rho) in.push_back(a.sigma);
            masses.push_back(pairwise_sum(in));
        }
        LowerDensitySite out;
        out.x = x;
        const auto [lo, hi] = std::minmax_element(masses.begin(), masses.end());
        out.unbounded = *lo > 0.0 && (*hi - *lo) <= 1e-12 * *hi && rho_grid.size() > 1;
        if (out.unbounded) {
            out.estimate = std::numeric_limits<double>::infinity();
        } else {
            out.estimate = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < rho_grid.size(); ++g)
                out.estimate = std::min(out.estimate, masses[g] / (wk * std::pow(rho_grid[g], k)));
        }
        res.sites[s] = std::move(out);
    });
    for (std::size_t s = 0; s < D.sites.size(); ++s) {
        if (!(res.sites[s].estimate > density_floor)) continue;
        for (std::size_t i : D.sites[s].atoms) res.restricted.atoms.push_back(gamma.atoms[i]);
    }
    return res;
}

double conormal_integral(const BoundaryVarifold& gamma, const Vec& x0, double rho, double grouping_tol) {
    const Disintegration D = disintegrate(gamma, grouping_tol);
    const auto cn = co_normals(D, *gamma.beta, *gamma.container);
    std::vector<double> terms;
    for (const auto& s : cn)
        if ((s.x - x0).norm() <= rho) terms.push_back(s.mass * s.cos_beta_nW.norm());
    return pairwise_sum(terms);
}

double resolved_conormal_integral(const BoundaryVarifold& gamma, const Vec& x0, double rho,
                                  double resolution) {
    if (!(resolution > 0.0)) throw InvalidArgument("resolution must be positive");
    const std::size_t n = gamma.atoms.size();
    std::vector<Vec> nrm(n);
    parallel_for(n, [&](std::size_t i) {
        nrm[i] = conormal(gamma.atoms[i].x, gamma.atoms[i].P, *gamma.container);
    });
    return parallel_sum(n, [&](std::size_t i) {
        const auto& a = gamma.atoms[i];
        if ((a.x - x0).norm() > rho) return 0.0;
        Vec acc = Vec::Zero(a.x.size());
        std::vector<double> w;
        for (std::size_t j = 0; j < n; ++j) {
            if ((gamma.atoms[j].x - a.x).norm() > resolution) continue;
            acc += gamma.atoms[j].sigma * nrm[j];
            w.push_back(gamma.atoms[j].sigma);
        }
        const Vec nbar = acc / pairwise_sum(w);
        const NormalTangent nt = normal_and_tangent(*gamma.container, a.x);
        return a.sigma * (nt.tangent * nbar).norm();
    });
}

}  // namespace capvar
