#include "grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

namespace pointdyn {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalized DFT with FFTW's sign convention.
void dft(Vector& v, int sign) {
  const int n = static_cast<int>(v.size());
  auto* data = reinterpret_cast<fftw_complex*>(v.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, data, data, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

MomentumGrid make_grid(std::size_t n_points, double p_max) {
  if (n_points < 8 || !is_power_of_two(n_points))
    fail(ErrorCode::invalid_argument,
         "make_grid: n_points must be a power of two >= 8, got " +
             std::to_string(n_points));
  if (!(p_max > 0.0) || !std::isfinite(p_max))
    fail(ErrorCode::invalid_argument, "make_grid: p_max must be positive");

  MomentumGrid g;
  g.p_max_ = p_max;
  g.spacing_ = 2.0 * p_max / static_cast<double>(n_points);
  g.nodes_.resize(static_cast<Eigen::Index>(n_points));
  for (std::size_t j = 0; j < n_points; ++j)
    g.nodes_(static_cast<Eigen::Index>(j)) =
        -p_max + g.spacing_ * static_cast<double>(j);
  g.weights_ = RealVector::Constant(static_cast<Eigen::Index>(n_points),
                                    g.spacing_);
  return g;
}

RealVector MomentumGrid::positions() const {
  const auto n = static_cast<Eigen::Index>(size());
  const double dx = position_spacing();
  RealVector x(n);
  for (Eigen::Index j = 0; j < n; ++j)
    x(j) = -0.5 * static_cast<double>(n) * dx + dx * static_cast<double>(j);
  return x;
}

RealVector MomentumGrid::position_weights() const {
  return RealVector::Constant(static_cast<Eigen::Index>(size()),
                              position_spacing());
}

void require_same_grid(const MomentumGrid& a, const MomentumGrid& b,
                       const char* where) {
  if (!(a == b))
    fail(ErrorCode::grid_mismatch, std::string(where) + ": grid mismatch");
}

// --- StateVector -----------------------------------------------------------

namespace {
const RealVector& rep_weights(const StateVector& s, RealVector& scratch) {
  if (s.representation == Representation::momentum) return s.grid.weights();
  scratch = s.grid.position_weights();
  return scratch;
}
}  // namespace

double StateVector::norm() const {
  RealVector scratch;
  const RealVector& w = rep_weights(*this, scratch);
  return std::sqrt((w.array() * amplitudes.array().abs2()).sum());
}

StateVector& StateVector::normalize() {
  const double n = norm();
  if (!(n > 0.0)) fail(ErrorCode::numerical, "normalize: zero state");
  amplitudes /= n;
  return *this;
}

Vector StateVector::weighted() const {
  RealVector scratch;
  const RealVector& w = rep_weights(*this, scratch);
  return (w.array().sqrt().cast<cplx>() * amplitudes.array()).matrix();
}

StateVector StateVector::from_weighted(const MomentumGrid& grid,
                                       const Vector& v, Representation rep) {
  StateVector s{grid, Vector(), rep};
  RealVector scratch;
  const RealVector& w = rep_weights(s, scratch);
  s.amplitudes = (v.array() / w.array().sqrt().cast<cplx>()).matrix();
  return s;
}

// --- Fourier-Plancherel ----------------------------------------------------
//
// With p_k = -p_max + k dp and x_j = -L/2 + j dx, dp dx = 2 pi / N:
//   exp(-i p_k x_j) = exp(-i N pi / 2) (-1)^(j+k) exp(-2 pi i j k / N).

StateVector fourier_forward(const StateVector& psi) {
  if (psi.representation != Representation::position)
    fail(ErrorCode::invalid_argument,
         "fourier_forward: state is not in position representation");
  const auto n = static_cast<Eigen::Index>(psi.grid.size());
  Vector v = psi.amplitudes;
  for (Eigen::Index j = 1; j < n; j += 2) v(j) = -v(j);
  dft(v, FFTW_FORWARD);
  const cplx global = std::polar(psi.grid.position_spacing() * kInvSqrt2Pi,
                                 -0.5 * kPi * static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    v(k) *= (k % 2 == 0 ? global : -global);
  return StateVector{psi.grid, std::move(v), Representation::momentum};
}

StateVector fourier_inverse(const StateVector& psi) {
  if (psi.representation != Representation::momentum)
    fail(ErrorCode::invalid_argument,
         "fourier_inverse: state is not in momentum representation");
  const auto n = static_cast<Eigen::Index>(psi.grid.size());
  Vector v = psi.amplitudes;
  for (Eigen::Index k = 1; k < n; k += 2) v(k) = -v(k);
  dft(v, FFTW_BACKWARD);
  const cplx global = std::polar(psi.grid.spacing() * kInvSqrt2Pi,
                                 0.5 * kPi * static_cast<double>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    v(j) *= (j % 2 == 0 ? global : -global);
  return StateVector{psi.grid, std::move(v), Representation::position};
}

Matrix fourier_matrix(const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const RealVector& p = grid.nodes();
  const RealVector x = grid.positions();
  const double scale =
      std::sqrt(grid.spacing() * grid.position_spacing()) * kInvSqrt2Pi;
  Matrix f(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k)
      f(k, j) = std::polar(scale, -p(k) * x(j));
  return f;
}

// --- KernelMatrix ----------------------------------------------------------

Matrix KernelMatrix::weighted() const {
  const Eigen::ArrayXd s = grid.weights().array().sqrt();
  return (s.matrix().asDiagonal() * entries * s.matrix().asDiagonal());
}

KernelMatrix KernelMatrix::from_weighted(const MomentumGrid& grid,
                                         const Matrix& a) {
  const Eigen::VectorXd inv = grid.weights().array().sqrt().inverse().matrix();
  return KernelMatrix{grid, inv.asDiagonal() * a * inv.asDiagonal()};
}

KernelMatrix KernelMatrix::identity(const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Matrix e = Matrix::Zero(n, n);
  e.diagonal() = grid.weights().cwiseInverse().cast<cplx>();
  return KernelMatrix{grid, std::move(e)};
}

KernelMatrix KernelMatrix::zero(const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  return KernelMatrix{grid, Matrix::Zero(n, n)};
}

void require_finite(const Matrix& m, const char* where) {
  if (!m.allFinite())
    fail(ErrorCode::numerical, std::string(where) + ": non-finite entries");
}

// --- norms -----------------------------------------------------------------

double power_norm_estimate(const Matrix& a, double rtol, int max_iterations) {
  const auto n = a.cols();
  if (n == 0) return 0.0;
  // Deterministic, generic start vector.
  Vector v(n);
  for (Eigen::Index j = 0; j < n; ++j)
    v(j) = cplx(1.0 + 0.37 * std::sin(1.3 * static_cast<double>(j)),
                0.21 * std::cos(0.7 * static_cast<double>(j)));
  v.normalize();
  double previous = -1.0;
  for (int it = 0; it < max_iterations; ++it) {
    Vector w = a.adjoint() * (a * v);
    const double rayleigh = std::real(v.dot(w));
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    if (previous > 0.0 && std::abs(rayleigh - previous) <= rtol * rayleigh)
      return std::sqrt(rayleigh);
    previous = rayleigh;
  }
  return std::sqrt(std::max(previous, 0.0));
}

double spectral_norm(const Matrix& a) {
  require_finite(a, "operator_norm");
  if (a.size() == 0) return 0.0;
  if (a.rows() <= 512 && a.cols() <= 512) {
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  }
  return power_norm_estimate(a);
}

double operator_norm(const KernelMatrix& k) {
  require_finite(k.entries, "operator_norm");
  return spectral_norm(k.weighted());
}

double schur_bound(const KernelMatrix& k) {
  require_finite(k.entries, "schur_bound");
  const RealVector& w = k.grid.weights();
  const RealMatrix abs = k.entries.cwiseAbs();
  const double rows = (abs * w).maxCoeff();
  const double cols = (w.transpose() * abs).maxCoeff();
  return std::sqrt(rows * cols);
}

}  // namespace pointdyn
