#pragma once

#include <cstddef>

#include "types.hpp"

namespace pointdyn {

/// Uniform symmetric momentum lattice p_j = -p_max + j * spacing with
/// trapezoid (periodic) weights. The dual position lattice has spacing
/// pi / p_max and the same number of points.
class MomentumGrid {
 public:
  std::size_t size() const { return nodes_.size(); }
  double p_max() const { return p_max_; }
  double spacing() const { return spacing_; }
  const RealVector& nodes() const { return nodes_; }
  const RealVector& weights() const { return weights_; }

  double position_spacing() const { return kPi / p_max_; }
  RealVector positions() const;
  RealVector position_weights() const;
  /// Largest kinetic frequency max_j p_j^2 on the lattice.
  double max_frequency() const { return p_max_ * p_max_; }

  bool operator==(const MomentumGrid& other) const {
    return size() == other.size() && p_max_ == other.p_max_;
  }

 private:
  friend MomentumGrid make_grid(std::size_t n_points, double p_max);
  double p_max_ = 0.0;
  double spacing_ = 0.0;
  RealVector nodes_;
  RealVector weights_;
};

MomentumGrid make_grid(std::size_t n_points, double p_max);

void require_same_grid(const MomentumGrid& a, const MomentumGrid& b,
                       const char* where);

enum class Representation { position, momentum };

struct StateVector {
  MomentumGrid grid;
  Vector amplitudes;
  Representation representation = Representation::momentum;

  /// L2 norm with the quadrature weights of the current representation.
  double norm() const;
  StateVector& normalize();
  /// Coordinates in the orthonormal basis sqrt(w_j) * amplitude_j.
  Vector weighted() const;
  static StateVector from_weighted(const MomentumGrid& grid, const Vector& v,
                                   Representation rep);
};

StateVector fourier_forward(const StateVector& psi);
StateVector fourier_inverse(const StateVector& psi);

/// Unitary matrix of the discrete Fourier-Plancherel map in orthonormal
/// coordinates: momentum <- position.
Matrix fourier_matrix(const MomentumGrid& grid);

/// Integral operator on the momentum lattice, entries K(p_j, p_k).
struct KernelMatrix {
  MomentumGrid grid;
  Matrix entries;

  /// A_jk = sqrt(w_j w_k) K(p_j, p_k); composition of kernels is the
  /// product of weighted matrices.
  Matrix weighted() const;
  static KernelMatrix from_weighted(const MomentumGrid& grid, const Matrix& a);
  static KernelMatrix identity(const MomentumGrid& grid);
  static KernelMatrix zero(const MomentumGrid& grid);
};

void require_finite(const Matrix& m, const char* where);

/// Largest singular value of the weighted matrix.
double operator_norm(const KernelMatrix& k);
/// Spectral norm of an operator already in orthonormal coordinates. Uses a
/// full SVD up to 512 rows and power iteration on A*A above that.
double spectral_norm(const Matrix& a);
/// Power iteration on A*A, stopped when the Rayleigh quotient settles to rtol.
double power_norm_estimate(const Matrix& a, double rtol = 1e-12,
                           int max_iterations = 5000);
/// sqrt( max_j sum_k w_k |K_jk| * max_k sum_j w_j |K_jk| ).
double schur_bound(const KernelMatrix& k);

}  // namespace pointdyn
