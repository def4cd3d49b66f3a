#pragma once
// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "core/dyson.hpp"
#include "core/propagator.hpp"

namespace oracle {

using namespace pointdyn;


// (e^{ix} - 1) / (i theta) written as ((cos x - 1) + i sin x) / (i theta) with
// cos x - 1 = -2 sin^2(x/2), so no cancellation for small x.
inline cplx phase_oracle(double t, double theta) {
  if (theta == 0.0) return t;
  const double x = t * theta;
  const double s = std::sin(0.5 * x);
  return cplx(-2.0 * s * s, std::sin(x)) / cplx(0.0, theta);
}

inline cplx first_kernel_oracle(double alpha, double x0, double t, double p, double q) {
  return alpha / (2.0 * M_PI) * phase_oracle(t, (p - q) * (p + q)) *
         std::exp(cplx(0.0, -(p - q) * x0));
}

// Brute-force nested time integrals on a uniform lattice of m intervals:
//   K_1(s) = int_0^s M(r) dr,  K_n(s) = int_0^s K_{n-1}(r) W M(r) dr,
//   M(r)_{pq} = e^{i r (p^2 - q^2)} V~(p - q) / sqrt(2 pi),
// every integral by the cumulative trapezoid rule. The nested scheme has an
// even error expansion in the step, so one Richardson step removes h^2.
inline Matrix nested_trapezoid(int order, double t, const PotentialTransform& v,
                        const MomentumGrid& g, int m) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const RealVector p = g.nodes();
  const double h = t / m;
  auto M = [&](double r) {
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < n; ++k)
        out(j, k) = std::exp(cplx(0.0, r * (p(j) * p(j) - p(k) * p(k)))) * v(p(j) - p(k)) /
                    std::sqrt(2.0 * M_PI);
    return out;
  };
  std::vector<Matrix> ms;
  for (int i = 0; i <= m; ++i) ms.push_back(M(i * h));
  std::vector<Matrix> cur(m + 1, Matrix::Zero(n, n));
  for (int i = 1; i <= m; ++i) cur[i] = cur[i - 1] + 0.5 * h * (ms[i - 1] + ms[i]);
  const double w = g.spacing();
  for (int level = 2; level <= order; ++level) {
    std::vector<Matrix> next(m + 1, Matrix::Zero(n, n));
    for (int i = 1; i <= m; ++i)
      next[i] = next[i - 1] + 0.5 * h * w * (cur[i - 1] * ms[i - 1] + cur[i] * ms[i]);
    cur = std::move(next);
  }
  return cur[m];
}

inline KernelMatrix recursive_kernel(int order, double t, const PotentialTransform& v,
                              const MomentumGrid& g, int nodes) {
  if (order == 1) return kernel_first(t, v, g);
  const TimeQuadrature tq = make_time_quadrature(t, nodes);
  std::vector<KernelMatrix> prev;
  for (double s : tq.nodes) prev.push_back(recursive_kernel(order - 1, s, v, g, nodes));
  return kernel_next(prev, tq, v, g);
}


// e^{-itH} by Hermitian eigendecomposition of the grid Hamiltonian.
inline Matrix exact_propagator(double t, const PotentialTransform& v, const MomentumGrid& g) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian_matrix(v, g));
  Vector ph(es.eigenvalues().size());
  for (Eigen::Index j = 0; j < ph.size(); ++j)
    ph(j) = std::exp(cplx(0.0, -t * es.eigenvalues()(j)));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

// Relative Frobenius error of the order-n recursion (Gauss-Legendre, `nodes`
// per level) against Richardson-extrapolated nested trapezoids.
inline double kernel_recursion_error(int order, double t, const PotentialTransform& v,
                                     const MomentumGrid& g, int nodes = 24) {
  const Matrix got = recursive_kernel(order, t, v, g, nodes).entries;
  const int m = 4 * 64;
  const Matrix coarse = nested_trapezoid(order, t, v, g, m);
  const Matrix fine = nested_trapezoid(order, t, v, g, 2 * m);
  const Matrix ref = (4.0 * fine - coarse) / 3.0;
  return (got - ref).norm() / ref.norm();
}

}  // namespace oracle
