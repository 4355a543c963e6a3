#pragma once

#include <vector>

namespace capvar {

/// One-dimensional quadrature rule.
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// q-point Gauss–Legendre rule on [-1, 1]. Nodes are symmetric; an odd rule
/// contains the node 0 exactly.
Rule1D gauss_legendre(int q);

/// Composite Gauss–Legendre rule on [a, b] with `panels` equal panels.
Rule1D composite_gauss(double a, double b, int panels, int q);

/// Composite midpoint rule on [a, b] with `cells` equal cells.
Rule1D composite_midpoint(double a, double b, int cells);

}  // namespace capvar
