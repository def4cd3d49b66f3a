#pragma once

#include <vector>

#include "types.hpp"

namespace pointdyn {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n nodes mapped onto [a, b]. Nodes are returned in
/// increasing order of the reference variable, so they run from a towards b
/// (also when b < a, in which case the weights are negative).
QuadratureRule gauss_legendre(int n, double a, double b);

/// Matrix S with S(k, j) = integral from a to nodes[k] of the j-th Lagrange
/// basis polynomial over `nodes`. Applying S to samples f(nodes[j]) gives the
/// running integrals of the interpolant, exact for polynomials of degree
/// below nodes.size().
RealMatrix cumulative_integration_matrix(const std::vector<double>& nodes,
                                         double a);

}  // namespace pointdyn
