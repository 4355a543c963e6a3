#include "capvar/quadrature.hpp"
#include "capvar/common.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace capvar {

Rule1D gauss_legendre(int q) {
    if (q < 1) throw InvalidArgument("gauss_legendre: q must be positive");
    // Golub–Welsch: eigen-decomposition of the Jacobi matrix.
    Mat J = Mat::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(J);
    Rule1D r;
    r.nodes.resize(q);
    r.weights.resize(q);
    for (int k = 0; k < q; ++k) {
        r.nodes[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        r.weights[k] = 2.0 * v * v;
    }
    // Enforce exact symmetry.
    for (int k = 0; k < q / 2; ++k) {
        const int j = q - 1 - k;
        const double x = 0.5 * (r.nodes[j] - r.nodes[k]);
        const double w = 0.5 * (r.weights[j] + r.weights[k]);
        r.nodes[k] = -x;
        r.nodes[j] = x;
        r.weights[k] = w;
        r.weights[j] = w;
    }
    if (q % 2 == 1) r.nodes[q / 2] = 0.0;
    return r;
}

Rule1D composite_gauss(double a, double b, int panels, int q) {
    if (panels < 1 || !(b > a)) throw InvalidArgument("composite_gauss: empty interval");
    const Rule1D ref = gauss_legendre(q);
    const double width = (b - a) / panels;
    Rule1D r;
    r.nodes.reserve(static_cast<std::size_t>(panels) * q);
    r.weights.reserve(r.nodes.capacity());
    for (int p = 0; p < panels; ++p) {
        // Centered form keeps a symmetric rule exactly symmetric about (a+b)/2.
        const double mid = 0.5 * (a + b) + 0.5 * (2 * p + 1 - panels) * width;
        for (int k = 0; k < q; ++k) {
            r.nodes.push_back(mid + 0.5 * width * ref.nodes[k]);
            r.weights.push_back(0.5 * width * ref.weights[k]);
        }
    }
    return r;
}

Rule1D composite_midpoint(double a, double b, int cells) {
    if (cells < 1 || !(b > a)) throw InvalidArgument("composite_midpoint: empty interval");
    const double width = (b - a) / cells;
    Rule1D r;
    for (int c = 0; c < cells; ++c) {
        r.nodes.push_back(a + (c + 0.5) * width);
        r.weights.push_back(width);
    }
    return r;
}

}  // namespace capvar
