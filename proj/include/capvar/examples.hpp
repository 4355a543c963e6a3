#pragma once

#include "capvar/capillary.hpp"
#include "capvar/varifold.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace capvar {

/// Analytic quantities a fixture is built to reproduce.
struct ExpectedRecord {
    double beta0 = 0.0;
    std::optional<Vec> n_V;                 ///< co-normal at every boundary site
    std::optional<bool> n_W_zero;           ///< degenerate co-normal at every site
    std::optional<double> n_W_norm;         ///< |n_W| at every site
    std::optional<double> sigma_gamma_total;
    std::optional<double> sigma_perp_total;
    std::optional<double> mass_total;
    std::optional<double> density_at_origin;
    std::optional<double> boundary_radius;
    double tolerance = 1e-10;               ///< relative tolerance of the construction check
};

/// Second fundamental form data for umbilic pieces: A(τ_α, τ_β) = −κ δ_αβ N.
struct UmbilicData {
    std::vector<Vec> normal;
    std::vector<double> kappa;
};

/// One connected piece of the boundary measure with its preferred (C1) direction.
struct BoundaryComponent {
    std::string name;
    BoundaryVarifold gamma;
    Vec tau;
    Vec base_point;
};

struct ExampleFixture {
    std::string name;
    DiscreteVarifold V;
    BoundaryVarifold gamma;
    VariationDecomposition dec;
    ExpectedRecord expected;
    UmbilicData shape;
    double h = 0.0;
    bool exact = false;             ///< flat pieces on exact lattices
    Vec x0;                         ///< reference boundary site
    std::vector<Vec> anchors;       ///< battery anchor points on S
    std::vector<BoundaryComponent> components;
};

/// Throws InvalidArgument when the fixture disagrees with its expected record.
void check_expected(const ExampleFixture& f);

struct FlatOptions {
    int m = 2;
    int n = 2;
    double extent = 4.0;
    double h = 0.5;   ///< panel width of the composite Gauss rule
    int q = 9;        ///< nodes per panel (odd, so 0 is a node of the line rule)
};

/// Two half-planes P± with weights ½ and common boundary L (throws AngleIsOrthogonal at π/2).
ExampleFixture make_plane_pair(double beta0, const FlatOptions& opts = {});
inline ExampleFixture make_plane_pair(double beta0, int m, int n, double extent = 4.0, double h = 0.5) {
    return make_plane_pair(beta0, FlatOptions{m, n, extent, h, 9});
}

/// P± and their boundaries pushed apart by s along ±n̄₊. `one_sided` keeps P₊ only, at weight 1.
ExampleFixture make_separated_pair(double beta0, double s, const FlatOptions& opts = {}, bool one_sided = false);
std::function<ExampleFixture(double)> separated_family(double beta0, const FlatOptions& opts = {},
                                                       bool one_sided = false);

/// Two full-weight half-planes whose boundaries cross at the origin at angle psi.
ExampleFixture make_distinct_pair(double beta0, double psi = kPi / 3.0, const FlatOptions& opts = {});

/// P± with weights (1 ± ε)/2.
ExampleFixture make_perturbed_pair(double beta0, double eps, const FlatOptions& opts = {});

struct ConeOptions {
    int m = 2;
    int n = 2;
    int k_min = -40;     ///< innermost dyadic shell
    int k_max = 2;       ///< outermost shell reaches 2^k_max
    int q = 10;          ///< Gauss nodes per cell and direction
    int sub = 2;         ///< sub-panels per cell and direction
    double multiplicity = 1.0;
};

/// Half-plane through 0 with co-normal sin β e + cos β u, sampled on dyadic
/// shells so that dilations by powers of two map atoms onto atoms.
ExampleFixture make_half_plane(double beta, const ConeOptions& opts = {});

/// Full m-plane through `point` spanned by the first m coordinate axes, on dyadic shells.
DiscreteVarifold make_full_plane(const Vec& point, const ConeOptions& opts = {});

enum class WeightRule { Midpoint, Gauss2, Gauss3 };

struct ParameterCell {
    Vec lo;
    Vec hi;
};

/// Uniform cells of edge at most h.
std::vector<ParameterCell> uniform_cells(const Vec& lo, const Vec& hi, double h);

/// Cells of edge at most h, refined so that each edge is ≤ max(floor, kappa · dist(focus, cell)).
std::vector<ParameterCell> graded_cells(const Vec& lo, const Vec& hi, double h, const Vec& focus,
                                        double kappa, double floor);

struct Chart {
    int m = 0;
    int ambient = 0;
    std::function<Vec(const Vec&)> map;
    std::function<Mat(const Vec&)> differential;  ///< ambient × m
};

/// Quadrature sampling of a parametrized m-dimensional piece.
/// Throws DegenerateChart if the differential loses rank at a node.
DiscreteVarifold sample_parametric(const Chart& chart, const std::vector<ParameterCell>& cells,
                                   WeightRule rule = WeightRule::Midpoint);

/// Unit sphere S^k ⊂ R^(k+1) in hyperspherical angles.
Chart hypersphere_chart(int k);
Vec hypersphere_lo(int k);
Vec hypersphere_hi(int k);

struct CapOptions {
    std::optional<Vec> o1;                     ///< base point on S (default: origin)
    bool refine_at_boundary_point = false;     ///< grade the mesh toward x0
    double kappa = 0.05;
    double floor = 1e-6;
    WeightRule rule = WeightRule::Midpoint;
};

/// C_β₀(o₁) = {x_{n+1} ≥ 0 : |x − (o₁ − cos β₀ e_{n+1})| = 1} with its boundary sphere.
ExampleFixture make_spherical_cap(double beta0, int n, double h, const CapOptions& opts = {});

/// β₀-cap at o1 (carrying Γ) together with a free-boundary hemisphere at o2.
ExampleFixture make_cap_union(double beta0, const Vec& o1, const Vec& o2, double h);

/// Boundary measure of a wetting disc U ⊂ S: H^(n−1)⌊∂U ⊗ δ_{P_U}, with
/// P_U = T∂U ⊕ span(sin β ν^S + cos β ν_U) and ν_U the inward normal of ∂U in S.
BoundaryVarifold wetting_disc_boundary(double beta, int n, const Vec& center, double radius, double h);

/// Names accepted by make_fixture.
std::vector<std::string> fixture_names();

struct FixtureParams {
    double beta = kPi / 3.0;
    int m = 2;
    int n = 2;
    double h = 0.0;        ///< 0 selects the fixture default
    double extent = 4.0;
    double eps = 0.1;
    double s = 0.5;
    bool graded = false;     ///< caps: grade the mesh toward x0 and use a 2-point Gauss rule
    bool one_sided = false;  ///< separated pair: keep P₊ only
};

ExampleFixture make_fixture(const std::string& name, const FixtureParams& p);
double default_mesh_size(const std::string& name);

}  // namespace capvar
