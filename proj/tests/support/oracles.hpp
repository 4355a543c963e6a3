#pragma once

// Hand-derived reference values. Nothing here calls into the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// v vᵀ for a unit vector v.
inline Eigen::MatrixXd outer(const Eigen::VectorXd& v) { return v * v.transpose(); }

/// Rank-1 projector onto cos α e₁ + sin α e₃ in R³, written out entrywise.
inline Eigen::Matrix3d tilted_line_projector(double a) {
    const double c = std::cos(a), s = std::sin(a);
    Eigen::Matrix3d P;
    P << c * c, 0, c * s, 0, 0, 0, c * s, 0, s * s;
    return P;
}

/// | sin β − sin β' |
inline double sine_gap(double beta, double beta_prime) { return std::abs(std::sin(beta) - std::sin(beta_prime)); }

/// Unit sphere in R³ cut at height cos β above its centre: rim radius and length.
inline double cap_rim_radius(double beta) { return std::sin(beta); }
inline double cap_rim_length(double beta) { return 2.0 * kPi * std::sin(beta); }
/// Area of the spherical cap of polar angle β on the unit sphere in R³.
inline double cap_area(double beta) { return 2.0 * kPi * (1.0 - std::cos(beta)); }

/// Area of the unit sphere S² inside the closed ball B_ρ(p) around a point p of S²
/// (Archimedes: a zone of height ρ²/2 has area πρ²).
inline double sphere_ball_mass(double rho) { return rho >= 2.0 ? 4.0 * kPi : kPi * rho * rho; }

/// Distance between the boundary lines of the separated pair: |s n̄₊ − s n̄₋| with n̄₋ = −n̄₊.
inline double separated_line_distance(double s) { return 2.0 * s; }

/// Density of a union of half-planes through the point with total weight w.
inline double half_plane_density(double w) { return 0.5 * w; }

/// Value of the dictionary bump with width s centred at c, evaluated at x:
///   s / (√d π/2) · Π_i cos²(π (x_i − c_i) / (2s)) on |x_i − c_i| < s.
inline double bump(const Eigen::VectorXd& x, const Eigen::VectorXd& c, double s) {
    const int d = static_cast<int>(x.size());
    double v = s / (std::sqrt(static_cast<double>(d)) * kPi / 2.0);
    for (int i = 0; i < d; ++i) {
        const double off = x(i) - c(i);
        if (std::abs(off) >= s) return 0.0;
        const double cc = std::cos(kPi * off / (2.0 * s));
        v *= cc * cc;
    }
    return v;
}

/// Brute-force sup over every bump of the dictionary of |f(a) − f(b)| for two unit Diracs.
/// Centres: lattice of spacing s/2 on [−R, R]^d, widths 1, ½, … (scales of them).
inline double dirac_dictionary_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double R, int scales) {
    const int d = static_cast<int>(a.size());
    double best = 0.0;
    for (int k = 0; k < scales; ++k) {
        const double s = std::ldexp(1.0, -k);
        const int K = static_cast<int>(std::floor(2.0 * R / (0.5 * s) + 1e-9)) + 1;
        std::vector<int> idx(d, 0);
        while (true) {
            Eigen::VectorXd c(d);
            for (int i = 0; i < d; ++i) c(i) = -R + idx[i] * 0.5 * s;
            best = std::max(best, std::abs(bump(a, c, s) - bump(b, c, s)));
            int i = 0;
            while (i < d && ++idx[i] == K) idx[i] = 0, ++i;
            if (i == d) break;
        }
    }
    return best;
}

}  // namespace oracle
