#include "capvar/curvature.hpp"
#include "capvar/fields.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace capvar;

namespace {

const double kBeta = oracle::kPi / 3.0;

PlaneBattery full_battery(const ExampleFixture& f) {
    PlaneBattery b = plane_battery(f.V.ambient, f.anchors);
    for (const auto& psi : general_battery(*f.gamma.container, f.anchors)) b.push_back(lift(psi));
    return b;
}

CurvedVarifold curved_cap(double h) {
    ExampleFixture f = make_spherical_cap(kBeta, 2, h);
    CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    return {std::move(f.V), std::move(B)};
}

}  // namespace

TEST(ExtendSecondFundamentalForm, FlatPlaneGivesZero) {
    const Mat frame = Mat::Identity(3, 2);
    const std::vector<std::vector<Vec>> A(2, std::vector<Vec>(2, Vec::Zero(3)));
    EXPECT_EQ(extend_second_fundamental_form(frame, A).norm(), 0.0);
    const ExampleFixture f = make_plane_pair(kBeta);
    const CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    for (std::size_t i = 0; i < B.size(); ++i) EXPECT_EQ(B.norm(i), 0.0);
}

TEST(ExtendSecondFundamentalForm, UnitSphereAtPole) {
    const Mat frame = Mat::Identity(3, 2);
    const Vec nu = unit_vector(3, 2);
    std::vector<std::vector<Vec>> A(2, std::vector<Vec>(2, Vec::Zero(3)));
    A[0][0] = -nu;
    A[1][1] = -nu;
    CurvatureData B;
    B.ambient = 3;
    B.B = {extend_second_fundamental_form(frame, A)};
    EXPECT_NEAR(B.trace(0).norm(), 2.0, 1e-15);
    EXPECT_LE((B.trace(0) + 2.0 * nu).norm(), 1e-15);
    // B(e₁, e₁) = −ν and B(e₁, ν) = τ-component ⟨A(e₁, e₁), ν⟩ e₁ = −e₁.
    EXPECT_EQ(B.at(0, 0, 0, 2), -1.0);
    EXPECT_EQ(B.at(0, 0, 2, 0), -1.0);
}

TEST(CurvatureFromUmbilic, CapTraceMatchesMeanCurvature) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    ASSERT_EQ(B.size(), f.V.atoms.size());
    for (std::size_t i = 0; i < B.size(); ++i) {
        EXPECT_LE((B.trace(i) - f.dec.H[i]).norm(), 1e-10);
        EXPECT_NEAR(B.trace(i).norm(), 2.0, 1e-12);
    }
    const RelationDefects r = relation_defects(f.V, B);
    EXPECT_LE(r.max(), 1e-9);
    EXPECT_LE(r.symmetry, 1e-9);
    EXPECT_LE(r.trace_free, 1e-9);
    EXPECT_LE(r.projection, 1e-9);
    EXPECT_LE(r.product_rule, 1e-9);
    EXPECT_LE(r.normal_trace, 1e-9);
}

TEST(RelationDefects, DetectsCorruptedData) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.1);
    CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    B.B[0](1) += 0.3;
    EXPECT_GT(relation_defects(f.V, B).max(), 0.1);
}

TEST(CurvatureIdentity, FlatFixturesAreExact) {
    for (const auto& f : {make_plane_pair(kBeta), make_distinct_pair(kBeta), make_perturbed_pair(kBeta, 0.3)}) {
        const CurvatureReport r = curvature_identity_residual(f.V, zero_curvature(f.V), f.gamma, full_battery(f));
        EXPECT_LE(r.max_relative, 1e-10) << f.name;
    }
}

TEST(CurvatureIdentity, CapConvergesFirstOrder) {
    const ExampleFixture a = make_spherical_cap(kBeta, 2, 0.04);
    const ExampleFixture b = make_spherical_cap(kBeta, 2, 0.02);
    const PlaneBattery battery = full_battery(a);
    const double ra =
        curvature_identity_residual(a.V, curvature_from_umbilic(a.V, a.shape), a.gamma, battery).max_absolute;
    const double rb =
        curvature_identity_residual(b.V, curvature_from_umbilic(b.V, b.shape), b.gamma, battery).max_absolute;
    EXPECT_LE(rb, 0.05);
    EXPECT_GE(ra / rb, 1.8);
}

TEST(CurvatureIdentity, ZeroedCurvatureLeavesMissingTerm) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.04);
    const PlaneBattery battery = full_battery(f);
    const CurvatureReport full = curvature_identity_residual(f.V, curvature_from_umbilic(f.V, f.shape), f.gamma, battery);
    const CurvatureReport zero = curvature_identity_residual(f.V, zero_curvature(f.V), f.gamma, battery);
    double worst = 0.0;
    for (std::size_t k = 0; k < battery.size(); ++k) {
        const double missing = std::abs(full.per_field[k].curvature_term);
        EXPECT_NEAR(zero.per_field[k].absolute, missing, full.per_field[k].absolute + 1e-12) << battery[k].name;
        worst = std::max(worst, missing);
    }
    EXPECT_GT(zero.max_absolute, 10.0 * full.max_absolute);
    EXPECT_GE(zero.max_absolute, worst - full.max_absolute);
}

TEST(CurvatureIdentity, LiftedFieldsMatchCapillaryResidual) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    const Battery tangential = tangential_battery(*f.gamma.container, f.anchors);
    PlaneBattery lifted;
    for (const auto& psi : tangential) lifted.push_back(lift(psi));
    std::vector<Vec> H;
    for (std::size_t i = 0; i < B.size(); ++i) H.push_back(B.trace(i));
    const CurvatureReport c = curvature_identity_residual(f.V, B, f.gamma, lifted);
    const ResidualReport r = capillary_residual(f.V, f.gamma, H, tangential);
    ASSERT_EQ(c.per_field.size(), r.per_field.size());
    for (std::size_t k = 0; k < tangential.size(); ++k)
        EXPECT_NEAR(c.per_field[k].absolute, r.per_field[k].absolute, 1e-12) << tangential[k].name;
}

TEST(MassComparability, CapIsFinite) {
    const ExampleFixture f = make_spherical_cap(kBeta, 2, 0.05);
    const CurvatureData B = curvature_from_umbilic(f.V, f.shape);
    for (double p : {1.0, 2.0}) {
        const MassComparability m = mass_comparability(f.V, B, f.gamma, p);
        EXPECT_TRUE(std::isfinite(m.c1) && m.c1 > 0.0);
        EXPECT_TRUE(std::isfinite(m.c2) && m.c2 > 0.0);
        EXPECT_NEAR(m.curvature_energy, curvature_energy(f.V, B, p), 1e-12 * m.curvature_energy);
    }
    // Umbilic |B|² = 4κ² per atom on a unit sphere.
    const MassComparability m2 = mass_comparability(f.V, B, f.gamma, 2.0);
    EXPECT_NEAR(m2.curvature_energy, 4.0 * m2.mass, 1e-10 * m2.mass);
}

TEST(MassComparability, PlanePairMatchesExplicitMasses) {
    const ExampleFixture f = make_plane_pair(kBeta);
    const MassComparability m = mass_comparability(f.V, zero_curvature(f.V), f.gamma, 2.0);
    const double mu = *f.expected.mass_total, sigma = *f.expected.sigma_gamma_total;
    EXPECT_NEAR(m.c1, mu / sigma, 1e-12 * mu / sigma);
    EXPECT_NEAR(m.c2, sigma / mu, 1e-12 * sigma / mu);
    EXPECT_EQ(m.curvature_energy, 0.0);
}

TEST(MassComparability, ZeroVarifold) {
    const ExampleFixture f = make_plane_pair(kBeta);
    const DiscreteVarifold V = DiscreteVarifold::make(2, 3, {});
    BoundaryVarifold G = f.gamma;
    G.atoms.clear();
    const MassComparability m = mass_comparability(V, zero_curvature(V), G, 2.0);
    EXPECT_EQ(m.c1, 0.0);
    EXPECT_EQ(m.c2, 0.0);
}

TEST(MassComparability, DegenerateDenominator) {
    const ExampleFixture f = make_plane_pair(kBeta);
    BoundaryVarifold G = f.gamma;
    G.atoms.clear();
    EXPECT_THROW(mass_comparability(f.V, zero_curvature(f.V), G, 2.0), DivisionDegenerate);
}

TEST(LowerSemicontinuity, RefiningCapMeshes) {
    std::vector<CurvedVarifold> family;
    for (double h : {0.08, 0.04, 0.02}) family.push_back(curved_cap(h));
    const CurvedVarifold limit = curved_cap(0.01);
    const double energy = curvature_energy(limit.V, limit.B, 2.0);
    const LscReport r = lsc_check(family, limit, 2.0, 0.01 * energy);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.tail_min, r.limit_energy, 0.01 * energy);
    EXPECT_NEAR(r.limit_energy, 4.0 * oracle::cap_area(kBeta), 0.01 * energy);
}

TEST(LowerSemicontinuity, OscillatingWeights) {
    std::vector<CurvedVarifold> family;
    for (int k = 1; k <= 4; ++k) {
        CurvedVarifold c = curved_cap(0.04);
        const double delta = 0.2 * std::ldexp(1.0, -k);
        for (std::size_t i = 0; i < c.V.atoms.size(); ++i) c.V.atoms[i].w *= 1.0 + (i % 2 == 0 ? delta : -delta);
        family.push_back(std::move(c));
    }
    const CurvedVarifold limit = curved_cap(0.04);
    const LscReport r = lsc_check(family, limit, 2.0, 0.01 * curvature_energy(limit.V, limit.B, 2.0));
    EXPECT_TRUE(r.pass);
    EXPECT_GE(r.margin, 0.0);
}

TEST(LowerSemicontinuity, ConstantFamilyIsEquality) {
    const CurvedVarifold c = curved_cap(0.05);
    const LscReport r = lsc_check({c, c, c}, c, 2.0, 0.0);
    EXPECT_EQ(r.tail_min, r.limit_energy);
    EXPECT_EQ(r.margin, 0.0);
    EXPECT_TRUE(r.pass);
}

TEST(LowerSemicontinuity, EnergyDropIsDetected) {
    CurvedVarifold low = curved_cap(0.05);
    for (auto& a : low.V.atoms) a.w *= 0.5;
    const CurvedVarifold limit = curved_cap(0.05);
    EXPECT_FALSE(lsc_check({low, low}, limit, 2.0, 1e-9).pass);
}
