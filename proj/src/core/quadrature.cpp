#include "quadrature.hpp"

#include <cmath>

namespace pointdyn {

namespace {

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  require(n >= 1, "gauss_legendre: need at least one node");
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, z);
    (void)p;
    const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * x[i];
    rule.weights[i] = half * w[i];
  }
  return rule;
}

RealMatrix cumulative_integration_matrix(const std::vector<double>& nodes,
                                         double a) {
  const int m = static_cast<int>(nodes.size());
  require(m >= 1, "cumulative_integration_matrix: empty node set");

  // Barycentric weights of the interpolation nodes.
  std::vector<double> bary(m, 1.0);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      if (k != j) bary[j] /= (nodes[j] - nodes[k]);

  auto basis = [&](double s, std::vector<double>& out) {
    for (int j = 0; j < m; ++j) {
      if (s == nodes[j]) {
        std::fill(out.begin(), out.end(), 0.0);
        out[j] = 1.0;
        return;
      }
    }
    double denom = 0.0;
    for (int j = 0; j < m; ++j) {
      out[j] = bary[j] / (s - nodes[j]);
      denom += out[j];
    }
    for (double& v : out) v /= denom;
  };

  RealMatrix S = RealMatrix::Zero(m, m);
  std::vector<double> ell(m);
  for (int k = 0; k < m; ++k) {
    // m-point Gauss rule is exact for the degree m-1 basis polynomials.
    const QuadratureRule sub = gauss_legendre(m, a, nodes[k]);
    for (int q = 0; q < m; ++q) {
      basis(sub.nodes[q], ell);
      for (int j = 0; j < m; ++j) S(k, j) += sub.weights[q] * ell[j];
    }
  }
  return S;
}

}  // namespace pointdyn
