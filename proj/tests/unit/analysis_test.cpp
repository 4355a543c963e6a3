#include "capvar/analysis.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace capvar;

namespace {

const double kBeta = oracle::kPi / 3.0;
const std::vector<double> kDyadicGrid{0.125, 0.25, 0.5, 1.0};

Vec v3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

DiscreteVarifold unit_sphere(double h) {
    return sample_parametric(hypersphere_chart(2), uniform_cells(hypersphere_lo(2), hypersphere_hi(2), h));
}

// Barrier normal at angle theta from e₃, tilted away from the half-plane's co-normal.
Vec barrier_normal(double theta) { return v3(0.0, -std::sin(theta), std::cos(theta)); }

TangentConeFit half_plane_fit(double beta) {
    const ExampleFixture f = make_half_plane(beta);
    return fit_tangent_cone(f.V, f.gamma, beta);
}

}  // namespace

TEST(Cutoff, ProfileAndNormalization) {
    EXPECT_EQ(cutoff(0.5, 0.0), 1.0);
    EXPECT_EQ(cutoff(1.0, 0.0), 1.0);
    EXPECT_EQ(cutoff(1.01, 0.0), 0.0);
    EXPECT_EQ(cutoff(0.85, 0.1), 1.0);
    EXPECT_EQ(cutoff(1.0, 0.1), 0.0);
    EXPECT_NEAR(cutoff(0.95, 0.1), 0.5, 1e-12);
    EXPECT_EQ(cutoff_normalization(2, 0.0), 1.0);
    EXPECT_LT(cutoff_normalization(2, 0.1), 1.0);
}

TEST(DensityCurve, FullPlaneHasUnitDensity) {
    const Vec p = v3(0.3, -0.2, 0.0);
    const DensityCurve c = density_curve(make_full_plane(p), p, kDyadicGrid, 0.1);
    for (double r : c.ratios) EXPECT_NEAR(r, 1.0, 1e-3);
}

TEST(DensityCurve, HalfPlaneHasHalfDensity) {
    const ExampleFixture f = make_half_plane(kBeta);
    const DensityCurve c = density_curve(f.V, Vec::Zero(3), kDyadicGrid, 0.1);
    for (double r : c.ratios) EXPECT_NEAR(r, oracle::half_plane_density(1.0), 1e-3);
    for (double r : c.ratios) EXPECT_NEAR(r, c.ratios.front(), 1e-13);
}

TEST(DensityCurve, PlanePairHasHalfDensity) {
    const ExampleFixture f = make_plane_pair(kBeta);
    const DensityCurve c = density_curve(f.V, Vec::Zero(3), {0.5, 1.0, 2.0}, 0.2);
    for (double r : c.ratios) EXPECT_NEAR(r, 0.5, 1e-3);
}

TEST(DensityCurve, DilationRescalesRadii) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const double r = 0.25;
    const DiscreteVarifold W = pushforward_dilation(f.V, f.x0, r);
    const std::vector<double> grid{0.5, 1.0, 2.0};
    std::vector<double> scaled;
    for (double g : grid) scaled.push_back(r * g);
    const DensityCurve a = density_curve(W, Vec::Zero(3), grid, 0.1);
    const DensityCurve b = density_curve(f.V, f.x0, scaled, 0.1);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(a.ratios[i], b.ratios[i], 1e-12 * b.ratios[i]);
}

TEST(BoundaryMonotoneQuantity, HalfPlaneIsNonDecreasing) {
    const ExampleFixture f = make_half_plane(kBeta);
    const DensityCurve c = density_curve(f.V, Vec::Zero(3), kDyadicGrid, 0.1);
    for (double lambda : {1e-3, 0.5, 4.0}) {
        const auto q = boundary_monotone_quantity(c, 4.0, 2, lambda);
        EXPECT_EQ(monotone_violation(q), 0.0);
    }
}

TEST(BoundaryMonotoneQuantity, IncreasingInLambda) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const DensityCurve c = density_curve(f.V, f.x0, {0.1, 0.2, 0.4, 0.8});
    const auto lo = boundary_monotone_quantity(c, 4.0, 2, 0.5);
    const auto hi = boundary_monotone_quantity(c, 4.0, 2, 1.0);
    for (std::size_t i = 0; i < lo.size(); ++i) EXPECT_GT(hi[i], lo[i]);
}

TEST(BoundaryMonotoneQuantity, ExponentMustExceedDimension) {
    DensityCurve c;
    c.m = 2;
    c.radii = {1.0};
    c.masses = {1.0};
    c.ratios = {1.0};
    EXPECT_THROW(boundary_monotone_quantity(c, 2.0, 2, 1.0), ExponentError);
    EXPECT_THROW(boundary_monotone_quantity(c, 1.5, 2, 1.0), ExponentError);
}

TEST(MonotoneViolation, LargestDrop) {
    EXPECT_EQ(monotone_violation({1.0, 2.0, 2.0, 3.0}), 0.0);
    EXPECT_EQ(monotone_violation({1.0, 3.0, 2.0, 2.5, 1.5}), 1.5);
    EXPECT_TRUE(std::isinf(monotone_violation({1.0, std::nan("")})));
}

TEST(InteriorMonotonicity, PlaneIsEquality) {
    const Vec xi = v3(0.1, 0.2, 1.0);
    const DiscreteVarifold V = make_full_plane(xi);
    const std::vector<Vec> H(V.atoms.size(), Vec::Zero(3));
    const InteriorMonotonicity r = interior_monotonicity_check(V, H, xi, unit_weight(), 0.25, 0.5);
    EXPECT_NEAR(r.lhs, oracle::kPi, 0.01);
    EXPECT_EQ(r.curvature_term, 0.0);
    EXPECT_EQ(r.normal_term, 0.0);
    EXPECT_NEAR(r.slack, 0.0, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(InteriorMonotonicity, UnitSphereSatisfiesInequality) {
    const DiscreteVarifold V = unit_sphere(0.02);
    std::vector<Vec> H;
    for (const auto& a : V.atoms) H.push_back(-2.0 * a.x);
    Vec xi = V.atoms.front().x;
    for (const auto& a : V.atoms)
        if ((a.x - v3(0.6, 0.0, 0.8)).norm() < (xi - v3(0.6, 0.0, 0.8)).norm()) xi = a.x;
    const double r1 = 0.2, r2 = 0.6;
    const InteriorMonotonicity r = interior_monotonicity_check(V, H, xi, unit_weight(), r1, r2, nullptr, 0.02);
    EXPECT_NEAR(r.lhs, oracle::sphere_ball_mass(r1) / (r1 * r1), 0.05 * oracle::kPi);
    EXPECT_NEAR(r.mass_term, oracle::sphere_ball_mass(r2) / (r2 * r2), 0.02 * oracle::kPi);
    EXPECT_GT(r.curvature_term, 0.0);
    EXPECT_GE(r.slack, -0.02 * r.lhs);
    EXPECT_TRUE(r.pass);
}

TEST(InteriorMonotonicity, RadiusOrder) {
    const DiscreteVarifold V = make_full_plane(Vec::Zero(3));
    const std::vector<Vec> H(V.atoms.size(), Vec::Zero(3));
    EXPECT_THROW(interior_monotonicity_check(V, H, Vec::Zero(3), unit_weight(), 0.5, 0.25), RadiusOrder);
    EXPECT_THROW(interior_monotonicity_check(V, H, Vec::Zero(3), unit_weight(), 0.0, 0.25), RadiusOrder);
}

TEST(InteriorMonotonicity, RejectsBallsReachingTheBoundary) {
    const Vec xi = v3(0.0, 0.0, 0.3);
    const DiscreteVarifold V = make_full_plane(xi);
    const std::vector<Vec> H(V.atoms.size(), Vec::Zero(3));
    const Container c = halfspace(3);
    EXPECT_THROW(interior_monotonicity_check(V, H, xi, unit_weight(), 0.1, 0.5, &c), InvalidArgument);
}

TEST(CalibrateLambda, HalfPlaneTakesSmallest) {
    const ExampleFixture f = make_half_plane(kBeta);
    const LambdaCalibration c = calibrate_lambda(f.V, Vec::Zero(3), 4.0, kDyadicGrid, 0.0, 0.1);
    EXPECT_EQ(c.exponent, -10);
    EXPECT_EQ(c.Lambda, std::ldexp(1.0, -10));
    EXPECT_EQ(c.violation, 0.0);
}

TEST(CalibrateLambda, PlanePairTakesSmallest) {
    const ExampleFixture f = make_plane_pair(kBeta);
    const LambdaCalibration c = calibrate_lambda(f.V, Vec::Zero(3), 4.0, {0.5, 1.0, 2.0}, 1e-3, 0.2);
    EXPECT_EQ(c.exponent, -10);
}

TEST(CalibrateLambda, CapIsFinite) {
    const double h = 0.02;
    const ExampleFixture f = make_spherical_cap(kBeta, 2, h);
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(0.05 * std::pow(20.0, i / 19.0));
    const LambdaCalibration c = calibrate_lambda(f.V, f.x0, 4.0, grid, 5.0 * h);
    EXPECT_LE(c.exponent, 10);
    EXPECT_LE(c.violation, 5.0 * h);
}

TEST(CalibrateLambda, ReportsFailure) {
    // Mass concentrated near x0 makes the ratio fall too fast for any Λ on the grid.
    std::vector<Atom> atoms;
    const Plane P = plane_from_frame({unit_vector(3, 0), unit_vector(3, 1)});
    atoms.push_back({v3(1e-5, 0, 0), P, 100.0});
    atoms.push_back({v3(0.9, 0, 0), P, 1e-6});
    const DiscreteVarifold V = DiscreteVarifold::make(2, 3, atoms);
    EXPECT_THROW(calibrate_lambda(V, Vec::Zero(3), 4.0, {1e-4, 2e-4, 4e-4}, 0.0), NoLambdaFound);
}

TEST(BLDistance, IdenticalIsZero) {
    const ExampleFixture f = make_plane_pair(kBeta);
    EXPECT_EQ(bl_distance(f.V, f.V).value, 0.0);
    EXPECT_EQ(bl_distance(f.gamma, f.gamma).value, 0.0);
}

TEST(BLDistance, DiracsMatchHandEvaluation) {
    for (double dist : {0.01, 0.05, 0.2}) {
        const Vec a = Vec::Zero(3), b = dist * unit_vector(3, 0);
        const BLDistanceReport r = bl_distance(std::vector<WeightedPoint>{{a, 1.0}}, {{b, 1.0}});
        EXPECT_NEAR(r.value, oracle::dirac_dictionary_distance(a, b, 1.0, 3), 1e-14);
        EXPECT_GE(r.value, 0.25 * dist);
        EXPECT_LE(r.value, dist);
        EXPECT_GT(r.dictionary_size, 0u);
    }
}

TEST(BLDistance, SymmetricWithTriangleInequality) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto cloud = [&] {
        std::vector<WeightedPoint> pts;
        for (int i = 0; i < 12; ++i) pts.push_back({v3(u(rng), u(rng), u(rng)), 0.5 + 0.5 * u(rng)});
        return pts;
    };
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = cloud(), b = cloud(), c = cloud();
        const double ab = bl_distance(a, b).value, ba = bl_distance(b, a).value;
        EXPECT_EQ(ab, ba);
        EXPECT_LE(bl_distance(a, c).value, ab + bl_distance(b, c).value + 1e-14);
    }
}

TEST(BLDistance, InvariantUnderFrameShift) {
    std::vector<WeightedPoint> a{{v3(0.1, 0.2, 0.3), 1.0}, {v3(-0.4, 0.1, 0.0), 0.5}};
    std::vector<WeightedPoint> b{{v3(0.15, 0.2, 0.3), 1.0}, {v3(-0.4, 0.0, 0.1), 0.5}};
    const Vec shift = v3(2.0, -1.0, 0.5);
    auto moved = [&](std::vector<WeightedPoint> pts) {
        for (auto& p : pts) p.x += shift;
        return pts;
    };
    BLOptions o;
    o.center = shift;
    EXPECT_NEAR(bl_distance(moved(a), moved(b), o).value, bl_distance(a, b).value, 1e-15);
}

TEST(BLDistance, SeparatedFamilyConvergesMonotonically) {
    const auto family = separated_family(kBeta);
    const ExampleFixture limit = family(0.0);
    double prev = std::numeric_limits<double>::infinity();
    for (double s : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
        const double d = bl_distance(family(s).V, limit.V).value;
        EXPECT_LT(d, prev) << s;
        prev = d;
    }
    EXPECT_LE(prev, 0.1);
}

TEST(BlowUp, HalfPlaneTermsCoincide) {
    const ExampleFixture f = make_half_plane(kBeta);
    const BlowUpSequence seq = blow_up(f.V, f.gamma, Vec::Zero(3), {1.0, 0.5, 0.25, 0.125});
    ASSERT_EQ(seq.consecutive.size(), 3u);
    for (double c : seq.consecutive) EXPECT_LE(c, 1e-13);
    for (const auto& t : seq.terms) EXPECT_NEAR(ball_mass(t.V, Vec::Zero(3), 1.0), ball_mass(f.V, Vec::Zero(3), 1.0),
                                                1e-12);
}

TEST(BlowUp, CapBoundaryFlattens) {
    FixtureParams p;
    p.graded = true;
    const ExampleFixture f = make_fixture("spherical-cap", p);
    std::vector<double> radii;
    for (int k = 1; k <= 6; ++k) radii.push_back(std::ldexp(1.0, -k));
    const BlowUpSequence seq = blow_up(f.V, f.gamma, f.x0, radii);
    // Inward normal of the rim circle within S.
    Vec n = -f.x0;
    n(2) = 0.0;
    n.normalize();
    const std::vector<double> c = orthogonality_constants(seq, n, 1.0);
    ASSERT_EQ(c.size(), radii.size());
    for (double v : c) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GT(v, 0.0);
    }
    EXPECT_LE(*std::max_element(c.begin(), c.end()) / *std::min_element(c.begin(), c.end()), 1.5);
    for (std::size_t i = 1; i < seq.consecutive.size(); ++i) EXPECT_LT(seq.consecutive[i], seq.consecutive[i - 1]);
}

TEST(TangentCone, ExactHalfPlaneAtAcuteAngle) {
    const TangentConeFit fit = half_plane_fit(kBeta);
    EXPECT_TRUE(fit.pass);
    EXPECT_TRUE(fit.planes_agree);
    EXPECT_NEAR(fit.alpha, kBeta, 1e-12);
    EXPECT_NEAR(fit.vertex_density, 0.5, 1e-3);
    EXPECT_EQ(fit.fit_residual, 0.0);
    EXPECT_LE(fit.boundary_offset, 1e-14);
}

TEST(TangentCone, ObtuseAngleUsesSupplement) {
    const ExampleFixture f = make_half_plane(kBeta);
    const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, 2.0 * oracle::kPi / 3.0);
    EXPECT_TRUE(fit.pass);
    EXPECT_NEAR(fit.expected_alpha, kBeta, 1e-15);
    EXPECT_NEAR(fit.alpha, kBeta, 1e-12);
}

TEST(TangentCone, WrongAngleFails) {
    const ExampleFixture f = make_half_plane(kBeta);
    EXPECT_FALSE(fit_tangent_cone(f.V, f.gamma, oracle::kPi / 6.0).pass);
}

TEST(TangentCone, PlanePairIsMultiPlane) {
    const ExampleFixture f = make_plane_pair(kBeta);
    ConeFitOptions o;
    o.rho_grid = {0.5, 1.0, 2.0};
    o.cutoff_t = 0.2;
    const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, kBeta, o);
    EXPECT_NEAR(fit.vertex_density, 0.5, 1e-3);
    EXPECT_FALSE(fit.planes_agree);
    EXPECT_FALSE(fit.pass);
}

TEST(TangentCone, ReorderInvariant) {
    const ExampleFixture f = make_half_plane(kBeta);
    DiscreteVarifold V = f.V;
    std::mt19937 rng(5);
    std::shuffle(V.atoms.begin(), V.atoms.end(), rng);
    const TangentConeFit a = fit_tangent_cone(f.V, f.gamma, kBeta);
    const TangentConeFit b = fit_tangent_cone(V, f.gamma, kBeta);
    EXPECT_NEAR(a.alpha, b.alpha, 1e-12);
    EXPECT_NEAR(a.vertex_density, b.vertex_density, 1e-12);
    EXPECT_LE(grassmann_distance(a.plane, b.plane), 1e-12);
    EXPECT_EQ(b.fit_residual, 0.0);
    EXPECT_EQ(a.pass, b.pass);
}

TEST(TangentCone, NonConicalRejected) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const DiscreteVarifold W = pushforward_dilation(f.V, f.x0, 1.0);
    ConeFitOptions o;
    o.rho_grid = {0.1, 0.5, 1.5};
    EXPECT_THROW(fit_tangent_cone(W, f.gamma, kBeta, o), NotConical);
}

TEST(Barrier, SteeperBarrierPasses) {
    const double a = oracle::kPi / 4.0;
    const ExampleFixture f = make_half_plane(a);
    const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, a);
    const BarrierCheck b = barrier_angle_check(fit, f.V, barrier_normal(oracle::kPi / 3.0));
    EXPECT_NEAR(b.theta, oracle::kPi / 3.0, 1e-12);
    EXPECT_TRUE(b.pass);
    EXPECT_FALSE(b.equality_branch);
}

TEST(Barrier, EqualityBranch) {
    const double a = oracle::kPi / 4.0;
    const ExampleFixture f = make_half_plane(a);
    const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, a);
    const BarrierCheck b = barrier_angle_check(fit, f.V, barrier_normal(fit.alpha));
    EXPECT_TRUE(b.equality_branch);
    EXPECT_TRUE(b.pass);
    EXPECT_LE(b.boundary_defect, 1e-8);
}

TEST(Barrier, SweepOfContainedHalfPlanes) {
    for (double a : {0.2, 0.5, 0.8, 1.2}) {
        const ExampleFixture f = make_half_plane(a);
        const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, a);
        for (double theta : {a + 0.05, a + 0.3, 0.5 * oracle::kPi})
            EXPECT_TRUE(barrier_angle_check(fit, f.V, barrier_normal(theta)).pass) << a << " " << theta;
        EXPECT_THROW(barrier_angle_check(fit, f.V, barrier_normal(a - 0.05)), NotContained);
    }
}

TEST(Barrier, AtomOutsideHalfSpace) {
    const ExampleFixture f = make_half_plane(oracle::kPi / 4.0);
    const TangentConeFit fit = fit_tangent_cone(f.V, f.gamma, oracle::kPi / 4.0);
    DiscreteVarifold C = f.V;
    C.atoms.push_back({v3(0.0, 0.0, 0.5), C.atoms.front().P, 1.0});
    EXPECT_THROW(barrier_angle_check(fit, C, unit_vector(3, 2)), NotContained);
}

TEST(Compactness, SeparatedFamilyDegenerates) {
    CompactnessOptions o;
    o.x0 = Vec::Zero(3);
    o.rho = 1.0;
    const CompactnessReport r = compactness_experiment(separated_family(kBeta), {1.0, 0.5, 0.25, 0.125}, o);
    ASSERT_EQ(r.members.size(), 4u);
    EXPECT_LE(r.limit.exact_integral, 1e-12);
    EXPECT_LE(r.limit.conormal_integral, 1e-12);
    for (const auto& m : r.members) EXPECT_GE(m.c1_margin, std::abs(std::cos(kBeta)) - 1e-10) << m.s;
    EXPECT_GT(r.members[1].exact_integral, 0.0);
    EXPECT_TRUE(r.distances_decrease);
}

TEST(Compactness, OneSidedFamilyKeepsIntegral) {
    CompactnessOptions o;
    o.x0 = Vec::Zero(3);
    o.rho = 1.0;
    const CompactnessReport r = compactness_experiment(separated_family(kBeta, {}, true), {1.0, 0.5, 0.25, 0.125}, o);
    // |cos β| times the length of the boundary line inside B₁.
    EXPECT_NEAR(r.limit.exact_integral, std::abs(std::cos(kBeta)) * 2.0, 0.06);
    EXPECT_GE(r.limit_ratio, 0.9);
}

TEST(Compactness, ConstantFamilyIsTrivial) {
    CompactnessOptions o;
    o.x0 = Vec::Zero(3);
    const auto family = [](double) { return make_plane_pair(kBeta); };
    const CompactnessReport r = compactness_experiment(family, {1.0, 0.5, 0.25}, o);
    for (const auto& m : r.members) EXPECT_EQ(m.bl_to_limit, 0.0);
    EXPECT_TRUE(r.lower_mass_propagates);
}
