#pragma once

#include "capvar/examples.hpp"
#include "capvar/varifold.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace capvar {

/// C¹ piecewise-cubic cutoff: 1 on [0, 1−t], 0 on [1, ∞), |γ'| ≤ 1.5/t.
/// t = 0 gives the indicator of [0, 1].
double cutoff(double r, double t);
/// c_γ = m ∫₀¹ γ(r) r^(m−1) dr, so that a unit-density plane has γ-ratio 1.
double cutoff_normalization(int m, double t);

struct DensityCurve {
    Vec x0;
    int m = 0;
    double cutoff_t = 0.0;
    std::vector<double> radii;
    std::vector<double> masses;  ///< Σ w γ(|x − x0|/ρ)
    std::vector<double> ratios;  ///< masses / (c_γ ω_m ρ^m)
};

/// Density ratios on an increasing grid; t = 0 uses closed balls.
DensityCurve density_curve(const DiscreteVarifold& V, const Vec& x0, const std::vector<double>& rho_grid,
                           double cutoff_t = 0.0);

/// e^{Λρ}[(mass/ρ^m)^{1/p} + Λρ^{(p−m)/p}] pointwise. Throws ExponentError if p ≤ m.
std::vector<double> boundary_monotone_quantity(const DensityCurve& curve, double p, int m, double Lambda);

/// Largest drop max_{i<j}(v_i − v_j), 0 for a non-decreasing sequence; +∞ on non-finite input.
double monotone_violation(const std::vector<double>& values);

struct ScalarWeight {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> grad;
};
ScalarWeight unit_weight();

struct InteriorMonotonicity {
    double lhs = 0.0;            ///< r1^{-m} ∫_{B_r1} h
    double rhs = 0.0;            ///< right side including the normal-displacement term
    double mass_term = 0.0;      ///< r2^{-m} ∫_{B_r2} h
    double curvature_term = 0.0; ///< ∫_{r1}^{r2} ρ^{-m} ∫_{B_ρ}(h|H| + |∇^V h|) dρ
    double normal_term = 0.0;    ///< ∫_{B_r2∖B_r1} h |(x−ξ)^⊥|²/|x−ξ|^{m+2}
    double slack = 0.0;          ///< rhs − lhs
    bool pass = false;
};

/// Interior monotonicity inequality at ξ. Throws RadiusOrder unless 0 < r1 < r2,
/// and InvalidArgument when r2 reaches the container boundary (pass nullptr to skip).
InteriorMonotonicity interior_monotonicity_check(const DiscreteVarifold& V, const std::vector<Vec>& H,
                                                 const Vec& xi, const ScalarWeight& h, double r1, double r2,
                                                 const Container* container = nullptr, double tol = 1e-12);

struct LambdaCalibration {
    double Lambda = 0.0;
    int exponent = 0;         ///< Λ = 2^exponent
    double violation = 0.0;   ///< monotone_violation at Λ
    double slack = 0.0;       ///< allowed violation
    std::vector<double> transformed;
};

/// Smallest Λ = 2^k, k = −10…10, whose transformed curve is non-decreasing up to `slack`.
/// Throws NoLambdaFound otherwise.
LambdaCalibration calibrate_lambda(const DiscreteVarifold& V, const Vec& x0, double p,
                                   const std::vector<double>& rho_grid, double slack, double cutoff_t = 0.0);

struct BLDistanceReport {
    double value = 0.0;
    std::size_t dictionary_size = 0;
    double region_radius = 0.0;
};

struct WeightedPoint {
    Vec x;
    double w = 0.0;
};

struct BLOptions {
    double region_radius = 1.0;
    int scales = 3;                ///< bump widths 1, ½, ¼, …
    std::optional<Vec> center;     ///< dictionary frame origin (default 0)
};

/// Supremum over a fixed dictionary of 1-Lipschitz tensor bumps of |∫f dμ − ∫f dν|.
BLDistanceReport bl_distance(const std::vector<WeightedPoint>& mu, const std::vector<WeightedPoint>& nu,
                             const BLOptions& opts = {});
/// Same with plane-entry features f(x)·P_ab/2 added.
BLDistanceReport bl_distance(const DiscreteVarifold& V, const DiscreteVarifold& W, const BLOptions& opts = {});
BLDistanceReport bl_distance(const BoundaryVarifold& G, const BoundaryVarifold& K, const BLOptions& opts = {});

struct BlowUpSequence {
    std::vector<double> radii;
    std::vector<Dilated> terms;
    std::vector<double> consecutive;  ///< bl_distance(V_j, V_{j+1})
};

/// Rescalings (x − x0)/r for each radius (strictly decreasing).
BlowUpSequence blow_up(const DiscreteVarifold& V, const BoundaryVarifold& gamma, const Vec& x0,
                       const std::vector<double>& radii, const BLOptions& opts = {});

/// c_k = max over sites of the k-th rescaled Γ inside B_extent of |⟨x, n⟩| / (r_k · extent²).
std::vector<double> orthogonality_constants(const BlowUpSequence& seq, const Vec& n, double extent);

struct ConeFitOptions {
    double density_window = 0.05;
    double tol = 0.05;
    double plane_tol = 0.05;     ///< allowed Grassmann distance between atom planes and the fit
    double cutoff_t = 0.1;
    std::vector<double> rho_grid{0.25, 0.5, 1.0};
    BLOptions bl{};
};

struct TangentConeFit {
    Plane plane;
    Plane boundary_line;          ///< P ∩ T S
    Vec n_P;                      ///< unit co-normal of the half-plane, ⟨n_P, e⟩ ≥ 0
    double vertex_density = 0.0;
    double density_spread = 0.0;
    double alpha = 0.0;
    double expected_alpha = 0.0;  ///< min(β, π − β)
    double fit_residual = 0.0;
    double plane_spread = 0.0;    ///< max Grassmann distance of atom planes to the fit
    double boundary_offset = 0.0; ///< max distance of Γ atoms from the boundary line
    bool planes_agree = false;
    bool pass = false;
};

/// Half-plane fit of a cone with vertex 0 in {x_{n+1} ≥ 0}. Throws NotConical when the
/// mollified density varies by more than tol over the grid.
TangentConeFit fit_tangent_cone(const DiscreteVarifold& C, const BoundaryVarifold& gamma_inf, double beta_x0,
                                const ConeFitOptions& opts = {});

struct BarrierCheck {
    double theta = 0.0;
    bool pass = false;
    bool equality_branch = false;
    double boundary_defect = 0.0;  ///< max |⟨x, ν_H⟩| on the equality branch
};

/// Throws NotContained if some atom has ⟨x, ν_H⟩ > tol.
BarrierCheck barrier_angle_check(const TangentConeFit& fit, const DiscreteVarifold& C, const Vec& nu_H,
                                 double tol = 1e-8);

struct CompactnessMember {
    double s = 0.0;
    double bl_to_limit = 0.0;
    double boundary_mass = 0.0;        ///< σ_Γ(B_{ρ/2}(x0))
    double conormal_integral = 0.0;    ///< with the resolved co-normal
    double exact_integral = 0.0;       ///< with the exact disintegration
    double c1_margin = 0.0;            ///< min over components
};

struct CompactnessOptions {
    Vec x0;
    double rho = 2.5;
    double resolution = 1.5;
    double eps0 = 0.0;
    BLOptions bl{};
};

struct CompactnessReport {
    std::vector<CompactnessMember> members;
    CompactnessMember limit;
    bool distances_decrease = false;
    bool lower_mass_propagates = false;
    double integral_ratio = 0.0;       ///< final member over first member
    double limit_ratio = 0.0;          ///< limit over first member
    double min_c1_margin = 0.0;
};

/// Runs the family on a decreasing grid and compares against its s = 0 member.
CompactnessReport compactness_experiment(const std::function<ExampleFixture(double)>& family,
                                         const std::vector<double>& s_grid, const CompactnessOptions& opts);

}  // namespace capvar
