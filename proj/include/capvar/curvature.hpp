#pragma once

#include "capvar/examples.hpp"
#include "capvar/varifold.hpp"

#include <functional>
#include <string>
#include <vector>

namespace capvar {

/// Per-atom weak second fundamental form, B_ijk = ∇_{e_i^T} P_jk, stored densely
/// at index (i·d + j)·d + k.
struct CurvatureData {
    int ambient = 0;
    std::vector<Vec> B;

    double at(std::size_t atom, int i, int j, int k) const {
        return B[atom](static_cast<Eigen::Index>((i * ambient + j) * ambient + k));
    }
    /// (tr B)_l = Σ_j B_jjl
    Vec trace(std::size_t atom) const;
    double norm(std::size_t atom) const { return B[atom].norm(); }
    std::size_t size() const { return B.size(); }
};

CurvatureData zero_curvature(const DiscreteVarifold& V);

/// B from the intrinsic form A_αβ = A(τ_α, τ_β) (normal vectors) on an orthonormal
/// frame τ (d × m): B(v, w) = A(v^T, w^T) + Σ_α ⟨A(v^T, τ_α), w^⊥⟩ τ_α, written in
/// components as B_ijk = Σ_αβ τ_α,i (A_αβ,j τ_β,k + τ_β,j A_αβ,k).
Vec extend_second_fundamental_form(const Mat& frame, const std::vector<std::vector<Vec>>& A);

/// Umbilic pieces: A_αβ = −κ δ_αβ N on each atom's own plane.
CurvatureData curvature_from_umbilic(const DiscreteVarifold& V, const UmbilicData& shape);

struct RelationDefects {
    double symmetry = 0.0;        ///< |B_ijk − B_ikj|
    double trace_free = 0.0;      ///< |Σ_i B_lii|
    double projection = 0.0;      ///< |Σ_l P_il B_ljk − B_ijk|
    double product_rule = 0.0;    ///< |B_ijk − Σ_l (P_jl B_ilk + P_lk B_ijl)|
    double normal_trace = 0.0;    ///< |P tr B|
    double max() const;
};

/// Worst per-atom violation of the pointwise relations of a weak second fundamental form.
RelationDefects relation_defects(const DiscreteVarifold& V, const CurvatureData& B);

/// Test field φ(x, P) with analytic derivatives. jac_P(x, P)[i](j, k) = ∂φ^i/∂P_jk.
struct PlaneTestField {
    std::string name;
    std::function<Vec(const Vec&, const Mat&)> value;
    std::function<Mat(const Vec&, const Mat&)> jac_x;
    std::function<std::vector<Mat>(const Vec&, const Mat&)> jac_P;
};
using PlaneBattery = std::vector<PlaneTestField>;

/// φ(x, P) = ψ(x).
PlaneTestField lift(const TestField& psi);
/// Gaussian bumps times plane entries g·P_ab e_c and g·P v, around each anchor.
PlaneBattery plane_battery(int ambient, const std::vector<Vec>& anchors, double width = 0.45);

struct CurvatureResidual {
    std::string field;
    double absolute = 0.0;
    double relative = 0.0;
    double scale = 0.0;            ///< Σ w (‖∇_xφ‖ + ‖D_Pφ‖ ‖B‖)
    double curvature_term = 0.0;   ///< Σ w (D_Pφ·B + ⟨tr B, φ⟩)
};

struct CurvatureReport {
    double max_absolute = 0.0;
    double max_relative = 0.0;
    std::vector<CurvatureResidual> per_field;
};

/// Residual of ∫(D_Pφ·B + ⟨tr B, φ⟩ + ⟨∇_xφ, P⟩)dV + ∫⟨n(x,P), φ(x,P)⟩dΓ.
CurvatureReport curvature_identity_residual(const DiscreteVarifold& V, const CurvatureData& B,
                                            const BoundaryVarifold& gamma, const PlaneBattery& battery);

struct MassComparability {
    double c1 = 0.0;  ///< μ_V / (σ_Γ + ‖B‖_p^p)
    double c2 = 0.0;  ///< σ_Γ / (μ_V + ‖B‖_p^p)
    double mass = 0.0;
    double boundary_mass = 0.0;
    double curvature_energy = 0.0;
};

/// ‖B‖_{L^p(V)}^p = Σ w |B|^p.
double curvature_energy(const DiscreteVarifold& V, const CurvatureData& B, double p);

/// Throws DivisionDegenerate when a denominator vanishes under a nonzero numerator.
MassComparability mass_comparability(const DiscreteVarifold& V, const CurvatureData& B,
                                     const BoundaryVarifold& gamma, double p);

struct CurvedVarifold {
    DiscreteVarifold V;
    CurvatureData B;
};

struct LscReport {
    double limit_energy = 0.0;
    double tail_min = 0.0;
    double margin = 0.0;   ///< tail_min + tol − limit_energy
    bool pass = false;
};

/// ‖B‖^p on the limit against the minimum over the second half of the family.
LscReport lsc_check(const std::vector<CurvedVarifold>& family, const CurvedVarifold& limit, double p,
                    double tol = 1e-9);

}  // namespace capvar
