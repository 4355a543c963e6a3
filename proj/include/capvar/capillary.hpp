#pragma once

#include "capvar/geometry.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace capvar {

struct BoundaryAtom {
    Vec x;
    Plane P;
    double sigma = 0.0;
};

inline constexpr double kBundleTolExact = 1e-8;

/// Discrete measure on the capillary bundle G_{m,β}(S).
struct BoundaryVarifold {
    int m = 0;
    int ambient = 0;
    std::vector<BoundaryAtom> atoms;
    std::shared_ptr<const Container> container;
    std::shared_ptr<const ContactAngleField> beta;

    /// Builds and validates: every atom on S, every plane within tol_bundle of
    /// the bundle, positive weights, common plane dimension m.
    static BoundaryVarifold make(int m, int ambient, std::vector<BoundaryAtom> atoms,
                                 std::shared_ptr<const Container> container,
                                 std::shared_ptr<const ContactAngleField> beta,
                                 double tol_bundle = kBundleTolExact);

    double total_mass() const;
    /// Same measure with weights multiplied by `factor` (no revalidation needed).
    BoundaryVarifold scaled(double factor) const;
};

struct BundleGap {
    double gap_i = 0.0;   ///< | |P ν| − sin β |
    double gap_ii = 0.0;  ///< max |⟨u, P ν⟩| over an orthonormal basis u of P ∩ T_xS
};

BundleGap capillary_gap(const Vec& x, const Plane& P, double beta, const Container& c);

/// n(x,P) = P(ν)/|P(ν)|. Throws DegenerateProjection if |P(ν)| < 1e-10.
Vec conormal(const Vec& x, const Plane& P, const Container& c);

struct FiberEntry {
    Plane P;
    double probability = 0.0;
};

struct Site {
    Vec x;                            ///< location of the cluster's first atom
    double mass = 0.0;                ///< Σ σ over the cluster
    std::vector<FiberEntry> fiber;    ///< distinct planes with σ shares
    std::vector<std::size_t> atoms;   ///< indices into the boundary varifold
};

struct Disintegration {
    double grouping_tol = 0.0;
    std::vector<Site> sites;
    double total_mass() const;
};

/// Single-linkage clustering of atom locations at grouping_tol.
Disintegration disintegrate(const BoundaryVarifold& gamma, double grouping_tol);

inline constexpr double kDefaultGroupingTol = 1e-9;
inline constexpr double kZeroConormalTol = 1e-10;

struct SiteCoNormal {
    Vec x;
    double mass = 0.0;
    double cos_beta = 0.0;
    Vec n_V;
    Vec cos_beta_nW;   ///< T_xS(n_V)
    bool nW_zero = false;
    /// n_W itself; the zero vector when nW_zero.
    Vec n_W() const;
};

/// Zero flag is raised when cos β(x) = 0 or |T_xS(n_V)| ≤ 1e-10.
std::vector<SiteCoNormal> co_normals(const Disintegration& D, const ContactAngleField& beta,
                                     const Container& c);

struct CbpReport {
    double c1_margin = 0.0;
    double c2_margin = 0.0;
    bool pass = false;
    std::size_t sites_checked = 0;
};

struct CbpOptions {
    double grouping_tol = kDefaultGroupingTol;
    /// Sites farther than rho0 − exclusion_radius from x0 are ignored.
    double exclusion_radius = 0.0;
};

/// Checks the local non-degeneracy (C1) and quadratic (C2) conditions at x0.
CbpReport cbp_check(const BoundaryVarifold& gamma, const Vec& x0, const Vec& tau, double eps0,
                    double rho0, double c0, const CbpOptions& opts = {});

struct TauScan {
    Vec tau;
    double best_min = 0.0;   ///< max over the grid of min over sites of ⟨cos β n_W, τ⟩
    int grid_points = 0;
};

/// Scans unit directions of T_{x0}S for the best (C1) direction.
TauScan scan_tau(const BoundaryVarifold& gamma, const Vec& x0, double rho0, int resolution = 720,
                 const CbpOptions& opts = {});

struct LowerDensitySite {
    Vec x;
    double estimate = 0.0;
    bool unbounded = false;  ///< constant mass across the grid: an isolated point mass
};

struct LowerDensityResult {
    std::vector<LowerDensitySite> sites;
    BoundaryVarifold restricted;
};

LowerDensityResult lower_density_filter(const BoundaryVarifold& gamma, int k,
                                        const std::vector<double>& rho_grid,
                                        double density_floor = 0.0,
                                        double grouping_tol = kDefaultGroupingTol);

/// ∫_{B_ρ(x0)} |T_xS(n_V)| dσ_Γ with n_V from the exact disintegration.
double conormal_integral(const BoundaryVarifold& gamma, const Vec& x0, double rho,
                         double grouping_tol = kDefaultGroupingTol);

/// Same integral with n_V averaged over all atoms within `resolution` of each
/// atom, i.e. the co-normal seen at a fixed spatial resolution.
double resolved_conormal_integral(const BoundaryVarifold& gamma, const Vec& x0, double rho,
                                  double resolution);

}  // namespace capvar
