#pragma once

#include "capvar/common.hpp"

#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace capvar {

/// Unoriented m-plane in R^d stored as its orthogonal projector.
class Plane {
public:
    Plane() = default;

    /// Validates the projector invariants; throws InvalidPlane on failure.
    static Plane from_projector(const Mat& proj, int m);

    const Mat& proj() const { return proj_; }
    int dim() const { return m_; }
    int ambient() const { return static_cast<int>(proj_.rows()); }

    Vec project(const Vec& v) const { return proj_ * v; }
    Vec project_perp(const Vec& v) const { return v - proj_ * v; }

    /// Orthonormal frame (d × m), recovered by eigendecomposition.
    Mat frame() const;

private:
    Mat proj_;
    int m_ = 0;
};

/// Projector onto the span of the given vectors.
/// Throws RankDeficient when the Gram determinant is below 1e-12.
Plane plane_from_frame(const std::vector<Vec>& vectors);
Plane plane_from_frame(const Mat& columns);
inline Plane plane_from_frame(std::initializer_list<Vec> vectors) {
    return plane_from_frame(std::vector<Vec>(vectors));
}

inline Vec project(const Plane& P, const Vec& v) { return P.project(v); }
inline Vec project_perp(const Plane& P, const Vec& v) { return P.project_perp(v); }

/// Operator-norm distance between projectors.
double grassmann_distance(const Plane& a, const Plane& b);

inline constexpr double kPlaneEqualTol = 1e-8;
inline bool same_plane(const Plane& a, const Plane& b) {
    return grassmann_distance(a, b) < kPlaneEqualTol;
}

enum class ContainerKind { Halfspace, Ball, Custom };

/// Closed region Ω with C² boundary S, described by its signed distance
/// (positive inside) and analytic derivatives.
struct Container {
    ContainerKind kind = ContainerKind::Custom;
    int ambient = 0;
    std::function<double(const Vec&)> sdf;
    std::function<Vec(const Vec&)> grad_sdf;
    std::function<Mat(const Vec&)> hess_sdf;
    double tubular_radius = 0.0;
    std::string description;

    /// Image of the container under y = (x − x0)/r.
    Container dilated(const Vec& x0, double r) const;
};

/// {x_d ≥ 0} in R^d.
Container halfspace(int ambient);
/// Closed ball of radius R; the inward normal at a boundary point x is −(x−c)/R.
Container ball(const Vec& center, double radius);
/// Parses "halfspace" or "ball r=<R> center=<c1,c2,...>".
Container parse_container(const std::string& text, int ambient);

inline constexpr double kSurfaceTol = 1e-8;

struct NormalTangent {
    Vec normal;   ///< inward unit normal ν^S
    Mat tangent;  ///< projector onto T_xS
};

/// Throws NotOnSurface if |sdf(x)| > 1e-8.
NormalTangent normal_and_tangent(const Container& c, const Vec& x);

/// Prescribed contact angle β: S → (0, π).
struct ContactAngleField {
    std::function<double(const Vec&)> beta;
    std::function<Vec(const Vec&)> grad_beta;
    std::string description;

    /// β evaluated with range validation.
    double at(const Vec& x) const;
    ContactAngleField dilated(const Vec& x0, double r) const;
};

ContactAngleField constant_angle(double beta);

/// sin β computed on the reflected angle min(β, π − β).
double bundle_sine(double beta);

}  // namespace capvar
