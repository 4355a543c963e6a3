#include "capvar/analysis.hpp"
#include "capvar/examples.hpp"
#include "capvar/fields.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace capvar;

namespace {

const double kBeta = oracle::kPi / 3.0;

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

double rim_radius(const ExampleFixture& f, const Vec& o) {
    double r = 0.0;
    for (const auto& a : f.gamma.atoms) r = std::max(r, (a.x - o).norm());
    return r;
}

// Σ w tr(P Jφ) + Σ w ⟨H, φ⟩ over atoms with x₁ > 0, evaluated directly.
double right_piece_variation(const ExampleFixture& f, const TestField& phi) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.V.atoms.size(); ++i) {
        const Atom& a = f.V.atoms[i];
        if (a.x(0) <= 0.0) continue;
        s += a.w * ((a.P.proj() * phi.jacobian(a.x)).trace() + f.dec.H[i].dot(phi.value(a.x)));
    }
    return s;
}

ExampleFixture without_right_piece(const ExampleFixture& f) {
    ExampleFixture g = f;
    g.V.atoms.clear();
    g.dec.H.clear();
    g.dec.H_tilde.clear();
    for (std::size_t i = 0; i < f.V.atoms.size(); ++i) {
        if (f.V.atoms[i].x(0) > 0.0) continue;
        g.V.atoms.push_back(f.V.atoms[i]);
        g.dec.H.push_back(f.dec.H[i]);
        g.dec.H_tilde.push_back(f.dec.H_tilde[i]);
    }
    return g;
}

}  // namespace

TEST(SphericalCap, HemisphereRim) {
    const double h = 0.02;
    const ExampleFixture f = make_spherical_cap(0.5 * oracle::kPi, 2, h);
    EXPECT_NEAR(rim_radius(f, Vec::Zero(3)), 1.0, 1e-12);
    EXPECT_NEAR(f.gamma.total_mass(), 2.0 * oracle::kPi, 2.0 * oracle::kPi * h);
    EXPECT_NEAR(f.V.total_mass(), oracle::cap_area(0.5 * oracle::kPi), 4.0 * oracle::kPi * h);
}

TEST(SphericalCap, CapillaryCapRim) {
    const double h = 0.02;
    const ExampleFixture f = make_spherical_cap(kBeta, 2, h);
    EXPECT_NEAR(rim_radius(f, Vec::Zero(3)), oracle::cap_rim_radius(kBeta), 1e-12);
    EXPECT_NEAR(oracle::cap_rim_radius(kBeta), 0.8660, 1e-4);
    EXPECT_NEAR(f.gamma.total_mass(), oracle::cap_rim_length(kBeta), oracle::cap_rim_length(kBeta) * h);
    EXPECT_NEAR(f.V.total_mass(), oracle::cap_area(kBeta), oracle::cap_area(kBeta) * h);
    for (const auto& a : f.gamma.atoms) {
        const BundleGap g = capillary_gap(a.x, a.P, kBeta, *f.gamma.container);
        EXPECT_LE(g.gap_i, 1e-10);
    }
    for (std::size_t i = 0; i < f.V.atoms.size(); ++i) EXPECT_NEAR(f.dec.H[i].norm(), 2.0, 1e-12);
}

TEST(SphericalCap, CapillaryResidualConvergesFirstOrder) {
    const double h = 0.02;
    const ExampleFixture a = make_spherical_cap(kBeta, 2, h);
    const ExampleFixture b = make_spherical_cap(kBeta, 2, 0.5 * h);
    const Battery battery = tangential_battery(*a.gamma.container, a.anchors);
    const double ra = capillary_residual(a.V, a.gamma, a.dec.H, battery).max_absolute;
    const double rb = capillary_residual(b.V, b.gamma, b.dec.H, battery).max_absolute;
    EXPECT_LE(ra, 0.05);
    EXPECT_GE(ra / rb, 1.8);
}

TEST(SphericalCap, DecompositionResidualIsSmall) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.02);
    const ResidualReport r = decomposition_residual(f.V, f.dec, f.gamma, general_battery(*f.gamma.container, f.anchors));
    EXPECT_LE(r.max_absolute, 0.05);
}

TEST(SphericalCap, RejectsBadInput) {
    EXPECT_THROW(make_spherical_cap(0.0, 2, 0.1), Error);
    EXPECT_THROW(make_spherical_cap(kBeta, 1, 0.1), InvalidArgument);
}

TEST(PlanePair, ExactCapillaryIdentity) {
    const ExampleFixture f = make_plane_pair(kBeta, 2, 2);
    EXPECT_TRUE(f.exact);
    const ResidualReport r = capillary_residual(f.V, f.gamma, f.dec.H, tangential_battery(*f.gamma.container, f.anchors));
    EXPECT_LE(r.max_relative, 1e-10);
}

TEST(PlanePair, ExpectedRecord) {
    const ExampleFixture f = make_plane_pair(kBeta);
    ASSERT_TRUE(f.expected.n_V.has_value());
    EXPECT_LE((*f.expected.n_V - std::sin(kBeta) * unit_vector(3, 2)).norm(), 1e-15);
    EXPECT_EQ(f.expected.n_W_zero, std::optional<bool>(true));
    ASSERT_TRUE(f.expected.density_at_origin.has_value());
    EXPECT_EQ(*f.expected.density_at_origin, oracle::half_plane_density(1.0));
    EXPECT_NEAR(*f.expected.sigma_perp_total, std::sin(kBeta) * *f.expected.sigma_gamma_total, 1e-12);
}

TEST(PlanePair, DensityAtOriginIsHalf) {
    const ExampleFixture f = make_plane_pair(kBeta);
    const DensityCurve c = density_curve(f.V, Vec::Zero(3), {0.5, 1.0, 1.5, 2.0}, 0.1);
    for (double r : c.ratios) EXPECT_NEAR(r, 0.5, 0.01);
}

TEST(PlanePair, RightAngleRejected) {
    EXPECT_THROW(make_plane_pair(0.5 * oracle::kPi), AngleIsOrthogonal);
    EXPECT_THROW(make_plane_pair(1.5708), AngleIsOrthogonal);
    EXPECT_NO_THROW(make_plane_pair(1.55));
}

TEST(PlanePair, HigherDimensions) {
    const ExampleFixture f = make_plane_pair(kBeta, 2, 3);
    EXPECT_EQ(f.V.ambient, 4);
    const ResidualReport r = capillary_residual(f.V, f.gamma, f.dec.H, tangential_battery(*f.gamma.container, f.anchors));
    EXPECT_LE(r.max_relative, 1e-10);
}

TEST(SeparatedPair, ZeroSeparationIsPlanePair) {
    const ExampleFixture a = make_separated_pair(kBeta, 0.0);
    const ExampleFixture b = make_plane_pair(kBeta);
    ASSERT_EQ(a.V.atoms.size(), b.V.atoms.size());
    ASSERT_EQ(a.gamma.atoms.size(), b.gamma.atoms.size());
    for (std::size_t i = 0; i < a.V.atoms.size(); ++i) {
        EXPECT_EQ(a.V.atoms[i].x, b.V.atoms[i].x);
        EXPECT_EQ(a.V.atoms[i].w, b.V.atoms[i].w);
        EXPECT_EQ(a.V.atoms[i].P.proj(), b.V.atoms[i].P.proj());
    }
    for (std::size_t i = 0; i < a.gamma.atoms.size(); ++i) {
        EXPECT_EQ(a.gamma.atoms[i].x, b.gamma.atoms[i].x);
        EXPECT_EQ(a.gamma.atoms[i].sigma, b.gamma.atoms[i].sigma);
    }
}

TEST(SeparatedPair, BoundaryLinesAreDisjoint) {
    const double s = 0.5;
    const ExampleFixture f = make_separated_pair(kBeta, s);
    const auto D = disintegrate(f.gamma, kDefaultGroupingTol);
    double closest = 1e9;
    for (const auto& a : f.components[0].gamma.atoms)
        for (const auto& b : f.components[1].gamma.atoms) closest = std::min(closest, (a.x - b.x).norm());
    EXPECT_NEAR(closest, oracle::separated_line_distance(s), 1e-12);
    for (const auto& site : D.sites) EXPECT_EQ(site.fiber.size(), 1u);
}

TEST(SeparatedPair, ComponentsAreCapillaryBoundaryPoints) {
    const ExampleFixture f = make_separated_pair(kBeta, 0.5);
    for (const auto& c : f.components)
        EXPECT_TRUE(cbp_check(c.gamma, c.base_point, c.tau, std::abs(std::cos(kBeta)) / 2.0, 1.0, 0.0).pass);
}

TEST(SeparatedPair, ContinuousInSeparation) {
    const auto family = separated_family(kBeta);
    const std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.4};
    std::vector<ExampleFixture> members;
    for (double s : grid) members.push_back(family(s));
    // Bumps are 1-Lipschitz, plane features ½-Lipschitz per entry, atoms move by |s − s′|.
    double window_mass = 0.0;
    for (const auto& a : members[0].V.atoms)
        if (a.x.cwiseAbs().maxCoeff() <= 2.5) window_mass += a.w;
    const double lipschitz = window_mass * (1.0 + 6.0 * 0.5);
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            const double d = bl_distance(members[i].V, members[j].V).value;
            EXPECT_LE(d, lipschitz * (grid[j] - grid[i]));
            EXPECT_GT(d, 0.0);
        }
}

TEST(SeparatedPair, OneSidedKeepsSinglePlane) {
    const ExampleFixture f = make_separated_pair(kBeta, 0.5, {}, true);
    EXPECT_EQ(f.components.size(), 1u);
    for (const auto& s : co_normals(disintegrate(f.gamma, 1e-9), *f.gamma.beta, *f.gamma.container))
        EXPECT_NEAR(s.n_V.norm(), 1.0, 1e-12);
}

TEST(DistinctPair, MassesAreAdditive) {
    const ExampleFixture f = make_distinct_pair(kBeta);
    const ExampleFixture one = make_perturbed_pair(kBeta, 1.0);
    EXPECT_NEAR(f.gamma.total_mass(), 2.0 * one.gamma.total_mass(), 1e-10 * f.gamma.total_mass());
    EXPECT_NEAR(f.V.total_mass(), 2.0 * one.V.total_mass(), 1e-10 * f.V.total_mass());
    EXPECT_EQ(*f.expected.density_at_origin, oracle::half_plane_density(2.0));
    const ResidualReport r = capillary_residual(f.V, f.gamma, f.dec.H, tangential_battery(*f.gamma.container, f.anchors));
    EXPECT_LE(r.max_relative, 1e-10);
}

TEST(PerturbedPair, ReducesToPlanePairAndSinglePlane) {
    const ExampleFixture z = make_perturbed_pair(kBeta, 0.0);
    const ExampleFixture p = make_plane_pair(kBeta);
    ASSERT_EQ(z.V.atoms.size(), p.V.atoms.size());
    for (std::size_t i = 0; i < z.V.atoms.size(); ++i) EXPECT_EQ(z.V.atoms[i].w, p.V.atoms[i].w);
    const ExampleFixture e = make_perturbed_pair(kBeta, 0.1);
    EXPECT_NEAR(*e.expected.n_W_norm, 0.1, 1e-15);
    const ExampleFixture one = make_perturbed_pair(kBeta, 1.0);
    EXPECT_NEAR(*one.expected.n_W_norm, 1.0, 1e-15);
    EXPECT_THROW(make_perturbed_pair(kBeta, 1.5), InvalidArgument);
}

TEST(CapUnion, ResidualsConverge) {
    const Vec o1 = v3(-1.25, 0, 0), o2 = v3(1.25, 0, 0);
    const ExampleFixture a = make_cap_union(kBeta, o1, o2, 0.04);
    const ExampleFixture b = make_cap_union(kBeta, o1, o2, 0.02);
    const Battery tb = tangential_battery(*a.gamma.container, a.anchors);
    const double ca = capillary_residual(a.V, a.gamma, a.dec.H, tb).max_absolute;
    const double cb = capillary_residual(b.V, b.gamma, b.dec.H, tb).max_absolute;
    EXPECT_LE(cb, 0.05);
    EXPECT_GE(ca / cb, 1.8);
    const Battery gb = general_battery(*a.gamma.container, a.anchors);
    const double da = decomposition_residual(a.V, a.dec, a.gamma, gb).max_absolute;
    const double db = decomposition_residual(b.V, b.dec, b.gamma, gb).max_absolute;
    EXPECT_LE(db, 0.05);
    EXPECT_GE(da / db, 1.8);
    EXPECT_NEAR(*b.expected.sigma_perp_total, std::sin(kBeta) * oracle::cap_rim_length(kBeta) + 2.0 * oracle::kPi,
                1e-12);
}

TEST(CapUnion, BoundaryOmitsFreeCap) {
    const ExampleFixture f = make_cap_union(kBeta, v3(-1.25, 0, 0), v3(1.25, 0, 0), 0.04);
    for (const auto& a : f.gamma.atoms) EXPECT_LT(a.x(0), 0.0);
}

TEST(CapUnion, MissingFreeCapIsDetected) {
    const ExampleFixture f = make_cap_union(kBeta, v3(-1.25, 0, 0), v3(1.25, 0, 0), 0.04);
    const ExampleFixture g = without_right_piece(f);
    const Battery gb = general_battery(*f.gamma.container, f.anchors);
    const ResidualReport full = decomposition_residual(f.V, f.dec, f.gamma, gb);
    const ResidualReport cut = decomposition_residual(g.V, g.dec, g.gamma, gb);
    double worst = 0.0;
    for (std::size_t k = 0; k < gb.size(); ++k) {
        const double oracle_k = std::abs(right_piece_variation(f, gb[k]));
        EXPECT_NEAR(cut.per_field[k].absolute, oracle_k, full.per_field[k].absolute + 1e-9);
        worst = std::max(worst, oracle_k);
    }
    EXPECT_GT(worst, 0.1);
    EXPECT_GT(cut.max_absolute, 10.0 * full.max_absolute);
}

TEST(SampleParametric, FlatChartGivesExactPlaneAtoms) {
    Chart c;
    c.m = 2;
    c.ambient = 3;
    c.map = [](const Vec& u) { return v3(u(0), u(1), 0.0); };
    c.differential = [](const Vec&) {
        Mat D = Mat::Zero(3, 2);
        D(0, 0) = D(1, 1) = 1.0;
        return D;
    };
    const DiscreteVarifold V = sample_parametric(c, uniform_cells(Vec::Zero(2), Vec::Ones(2), 0.25));
    EXPECT_EQ(V.atoms.size(), 16u);
    const Plane P = plane_from_frame({unit_vector(3, 0), unit_vector(3, 1)});
    for (const auto& a : V.atoms) {
        EXPECT_EQ(a.w, 0.0625);
        EXPECT_LE(grassmann_distance(a.P, P), 1e-15);
        EXPECT_EQ(a.x(2), 0.0);
    }
}

TEST(SampleParametric, SphereAreaSecondOrder) {
    const Chart s = hypersphere_chart(2);
    auto error = [&](double h) {
        return std::abs(sample_parametric(s, uniform_cells(hypersphere_lo(2), hypersphere_hi(2), h)).total_mass() -
                        4.0 * oracle::kPi);
    };
    const double e1 = error(0.1), e2 = error(0.05);
    EXPECT_LE(e1, 0.1);
    EXPECT_GE(e1 / e2, 3.5);
}

TEST(SampleParametric, RankDeficientChart) {
    Chart c;
    c.m = 2;
    c.ambient = 3;
    c.map = [](const Vec& u) { return v3(u(0), u(0), 0.0); };
    c.differential = [](const Vec&) {
        Mat D = Mat::Zero(3, 2);
        D(0, 0) = D(1, 0) = 1.0;
        return D;
    };
    EXPECT_THROW(sample_parametric(c, uniform_cells(Vec::Zero(2), Vec::Ones(2), 0.5)), DegenerateChart);
}

TEST(GradedCells, RefineTowardFocus) {
    const auto cells = graded_cells(Vec::Zero(2), Vec::Ones(2), 0.25, Vec::Zero(2), 0.1, 1e-4);
    double smallest = 1.0, largest = 0.0;
    for (const auto& c : cells) {
        const double e = (c.hi - c.lo).maxCoeff();
        smallest = std::min(smallest, e);
        largest = std::max(largest, e);
    }
    EXPECT_LE(largest, 0.25);
    EXPECT_LT(smallest, 1e-3);
    double area = 0.0;
    for (const auto& c : cells) area += (c.hi - c.lo).prod();
    EXPECT_NEAR(area, 1.0, 1e-12);
}

TEST(WettingDisc, BoundaryLiesInBundle) {
    const BoundaryVarifold g = wetting_disc_boundary(kBeta, 2, Vec::Zero(3), 0.8, 0.01);
    EXPECT_NEAR(g.total_mass(), 2.0 * oracle::kPi * 0.8, 2.0 * oracle::kPi * 0.8 * 0.01);
    for (const auto& a : g.atoms) {
        const BundleGap gap = capillary_gap(a.x, a.P, kBeta, *g.container);
        EXPECT_LE(gap.gap_i, 1e-12);
        EXPECT_LE(gap.gap_ii, 1e-12);
    }
}

TEST(Gallery, EveryFixtureMatchesItsRecord) {
    for (const auto& name : fixture_names()) {
        FixtureParams p;
        if (name == "spherical-cap" || name == "cap-union") p.h = 0.05;
        const ExampleFixture f = make_fixture(name, p);
        EXPECT_NO_THROW(check_expected(f)) << name;
        EXPECT_FALSE(f.V.atoms.empty()) << name;
        EXPECT_FALSE(f.gamma.atoms.empty()) << name;
    }
    EXPECT_THROW(make_fixture("torus", {}), Error);
}
