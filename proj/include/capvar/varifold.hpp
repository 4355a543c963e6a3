#pragma once

#include "capvar/capillary.hpp"
#include "capvar/geometry.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace capvar {

struct Atom {
    Vec x;
    Plane P;
    double w = 0.0;
};

/// Finite sum of weighted Dirac masses on the Grassmann bundle.
struct DiscreteVarifold {
    int m = 0;
    int ambient = 0;
    std::vector<Atom> atoms;

    /// Validates positive finite weights and a common plane dimension.
    static DiscreteVarifold make(int m, int ambient, std::vector<Atom> atoms);

    double total_mass() const;
    void append(const DiscreteVarifold& other);
};

enum class FieldClass { Tangential, Interior, General };

const char* to_string(FieldClass c);

/// C¹ vector field with an analytic Jacobian J_ij = ∂_j φ^i.
struct TestField {
    std::string name;
    std::function<Vec(const Vec&)> value;
    std::function<Mat(const Vec&)> jacobian;
    FieldClass cls = FieldClass::General;
    std::optional<double> support_radius;
    std::optional<Vec> support_center;
};

using Battery = std::vector<TestField>;

struct ScalarAtom {
    Vec x;
    double mass = 0.0;
};

/// Data of the first-variation decomposition: per-atom 𝐇 and H̃, and σ_V^⊥.
struct VariationDecomposition {
    std::vector<Vec> H;
    std::vector<Vec> H_tilde;
    std::vector<ScalarAtom> sigma_perp;

    static VariationDecomposition zero(const DiscreteVarifold& V);
};

/// Checks the tangency/normality/sign invariants of a decomposition.
void validate_decomposition(const DiscreteVarifold& V, const VariationDecomposition& dec,
                            const Container& c, double tol);

/// Σ w over atoms in the closed ball B̄_ρ(x0).
double ball_mass(const DiscreteVarifold& V, const Vec& x0, double rho);

/// Σ w · tr(P · Jφ(x)).
double first_variation(const DiscreteVarifold& V, const TestField& phi);

struct Dilated {
    DiscreteVarifold V;
    BoundaryVarifold gamma;
};

/// Pushforward under x ↦ (x − x0)/r with weights w/r^m and σ/r^(m−1).
Dilated pushforward_dilation(const DiscreteVarifold& V, const BoundaryVarifold& gamma, const Vec& x0,
                             double r);
DiscreteVarifold pushforward_dilation(const DiscreteVarifold& V, const Vec& x0, double r);

struct FieldResidual {
    std::string field;
    double absolute = 0.0;
    double relative = 0.0;
    double scale = 0.0;  ///< Σ w ‖Jφ‖_F
};

struct ResidualReport {
    double max_absolute = 0.0;
    double max_relative = 0.0;
    std::vector<FieldResidual> per_field;
};

/// Residual of δV(φ) + Σ w⟨H, φ⟩ + Σ_Γ σ⟨n(x,P), φ⟩ over a tangential battery.
/// Throws FieldClassError on a general field.
ResidualReport capillary_residual(const DiscreteVarifold& V, const BoundaryVarifold& gamma,
                                  const std::vector<Vec>& H, const Battery& battery);

/// Residual of δV(φ) + ∫⟨𝐇,φ⟩ + ∫⟨H̃,φ⟩ + ∫⟨ν^S,φ⟩dσ_V^⊥ + ∫⟨cos β n_W,φ⟩dσ_Γ.
ResidualReport decomposition_residual(const DiscreteVarifold& V, const VariationDecomposition& dec,
                                      const BoundaryVarifold& gamma, const Battery& battery);

/// Smallest constants making the local boundary estimates hold at (x0, ρ):
///   σ_V^⊥(B_{ρ/2}) ≤ (c_perp/ρ) μ(B_ρ) + ∫_{B_ρ}|𝐇|,
///   ∫_{B_{ρ/2}}⟨cos β n_W, τ⟩dσ_Γ ≤ (c_tan/ρ) μ(B_{2ρ}) + ∫_{B_{2ρ}}|𝐇|.
struct LocalEstimateConstants {
    double c_perp = 0.0;
    double c_tan = 0.0;
};
LocalEstimateConstants local_estimate_constants(const DiscreteVarifold& V, const VariationDecomposition& dec,
                                                const BoundaryVarifold& gamma, const Vec& x0,
                                                const Vec& tau, double rho);

}  // namespace capvar
