#pragma once

#include "capvar/varifold.hpp"

#include <vector>

namespace capvar {

/// φ(x) = exp(−|x − c|²/s²) · (a + B x).
TestField gaussian_affine_field(std::string name, const Vec& center, double width, const Vec& a,
                                const Mat& B, FieldClass cls);

/// φ(x) = (1 − |x − c|²/R²)⁴₊ · (v − ⟨v, ∇d⟩∇d), tangent to every level set of d.
TestField projected_bump_field(std::string name, const Container& c, const Vec& center, double radius,
                               const Vec& v);

/// The 20-field tangential battery used by the capillary identity checks.
/// Halfspace containers get Gaussian × affine fields; other containers get
/// projected polynomial bumps centred on `anchors` (points of S).
Battery tangential_battery(const Container& c, const std::vector<Vec>& anchors = {});

/// Tangential battery plus fields with a normal component on S.
Battery general_battery(const Container& c, const std::vector<Vec>& anchors = {});

/// Largest violation of the central-difference Jacobian check
/// |Δφ/Δx − J| ≤ 1e-6 (1 + ‖J‖) at the given probes, as a ratio (≤ 1 passes).
double jacobian_check(const TestField& phi, const std::vector<Vec>& probes, double step = 1e-6);

/// max |⟨φ(x), ν^S(x)⟩| over boundary samples.
double tangency_defect(const TestField& phi, const Container& c, const std::vector<Vec>& surface_points);

}  // namespace capvar
