#include "algebra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <random>

#include "resolvent.hpp"

namespace pointdyn {

double sigma(PhaseVector f, PhaseVector g) { return f.f1 * g.f2 - f.f2 * g.f1; }

Matrix position_operator(const MomentumGrid& grid) {
  return grid.positions().cast<cplx>().asDiagonal();
}

Matrix momentum_operator(const MomentumGrid& grid) {
  const Matrix f = fourier_matrix(grid);
  return f.adjoint() * grid.nodes().cast<cplx>().asDiagonal() * f;
}

Matrix build_phase_operator(PhaseVector f, const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Matrix phi = Matrix::Zero(n, n);
  if (f.f1 != 0.0) phi.diagonal() += f.f1 * grid.positions().cast<cplx>();
  if (f.f2 != 0.0) phi += f.f2 * momentum_operator(grid);
  // exact Hermitian part; removes rounding asymmetry of the product
  return 0.5 * (phi + phi.adjoint());
}

RepResolvent build_resolvent(double lambda, PhaseVector f, const MomentumGrid& grid) {
  if (lambda == 0.0 || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "build_resolvent: lambda must be nonzero");
  Matrix a = -build_phase_operator(f, grid);
  a.diagonal().array() += cplx(0.0, lambda);
  RepResolvent r;
  r.lambda = lambda;
  r.f = f;
  r.grid = grid;
  r.matrix = a.partialPivLu().inverse();
  if (!r.matrix.allFinite())
    fail(ErrorCode::internal, "build_resolvent: singular solve");
  const Eigen::BDCSVD<Matrix> svd(r.matrix);
  r.norm = svd.singularValues()(0);
  r.min_singular = svd.singularValues()(svd.singularValues().size() - 1);
  if (r.norm > 1.0 / std::abs(lambda) + 1e-2)
    fail(ErrorCode::internal, "build_resolvent: norm bound violated");
  return r;
}

namespace {

constexpr double kStrongThreshold = 1e-10;
constexpr double kWeakThreshold = 1e-3;

double weak_residual(const Matrix& diff, std::span<const StateVector> probes) {
  double worst = 0.0;
  for (const auto& p : probes) {
    const Vector v = p.representation == Representation::position
                         ? p.weighted()
                         : fourier_inverse(p).weighted();
    worst = std::max(worst, (diff * v).norm() / v.norm());
  }
  return worst;
}

}  // namespace

RelationResult check_relation(int k, const RelationParams& prm,
                              const MomentumGrid& grid,
                              std::span<const StateVector> probes) {
  RelationResult out;
  out.relation = k;
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Matrix id = Matrix::Identity(n, n);
  auto R = [&](double l, PhaseVector f) { return build_resolvent(l, f, grid).matrix; };
  const cplx i(0.0, 1.0);

  switch (k) {
    case 1:
      out.residual = spectral_norm(R(prm.lambda, {}) + (i / prm.lambda) * id);
      break;
    case 2:
      out.residual = spectral_norm(R(prm.lambda, prm.f).adjoint() - R(-prm.lambda, prm.f));
      break;
    case 3:
      out.residual = spectral_norm(prm.nu * R(prm.nu * prm.lambda, prm.nu * prm.f) -
                                   R(prm.lambda, prm.f));
      break;
    case 4: {
      const Matrix a = R(prm.lambda, prm.f);
      const Matrix b = R(prm.mu, prm.f);
      out.residual = spectral_norm(a - b - (i * (prm.mu - prm.lambda)) * (a * b));
      break;
    }
    case 5: {
      const Matrix a = R(prm.lambda, prm.f);
      const Matrix b = R(prm.mu, prm.g);
      const Matrix lhs = a * b - b * a;
      const Matrix rhs = (i * sigma(prm.f, prm.g)) * (a * b * b * a);
      out.weak = true;
      out.residual = weak_residual(lhs - rhs, probes);
      break;
    }
    case 6: {
      if (prm.lambda + prm.mu == 0.0)
        fail(ErrorCode::invalid_argument, "relation 6 needs lambda + mu != 0");
      const Matrix a = R(prm.lambda, prm.f);
      const Matrix b = R(prm.mu, prm.g);
      const Matrix c = R(prm.lambda + prm.mu, prm.f + prm.g);
      const Matrix rhs = c * (a + b + (i * sigma(prm.f, prm.g)) * (a * a * b));
      out.weak = true;
      out.residual = weak_residual(a * b - rhs, probes);
      break;
    }
    default:
      fail(ErrorCode::invalid_argument, "check_relation: k must be 1..6");
  }
  out.threshold = out.weak ? kWeakThreshold : kStrongThreshold;
  out.passed = out.residual <= out.threshold;
  return out;
}

std::vector<StateVector> gaussian_probes(const MomentumGrid& grid, int count,
                                         std::uint64_t seed) {
  require(count >= 1, "gaussian_probes: count >= 1");
  std::mt19937_64 gen(seed);
  auto uniform = [&](double lo, double hi) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  };
  const RealVector x = grid.positions();
  const double half_box = 0.5 * static_cast<double>(grid.size()) * grid.position_spacing();
  std::vector<StateVector> out;
  for (int c = 0; c < count; ++c) {
    const double centre = uniform(-0.1 * half_box, 0.1 * half_box);
    const double k0 = uniform(-1.0, 1.0);
    StateVector s{grid, Vector(x.size()), Representation::position};
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double d = x(j) - centre;
      s.amplitudes(j) = std::exp(-0.25 * d * d) * std::polar(1.0, k0 * x(j));
    }
    s.normalize();
    out.push_back(std::move(s));
  }
  return out;
}

RefinementResult relation_refinement(int k, const RelationParams& params,
                                     const MomentumGrid& grid, int probe_count,
                                     std::uint64_t seed) {
  const MomentumGrid fine = make_grid(2 * grid.size(), grid.p_max());
  RefinementResult r;
  const auto coarse_probes = gaussian_probes(grid, probe_count, seed);
  const auto fine_probes = gaussian_probes(fine, probe_count, seed);
  r.coarse = check_relation(k, params, grid, coarse_probes);
  r.fine = check_relation(k, params, fine, fine_probes);
  r.ratio = r.fine.residual > 0.0 ? r.coarse.residual / r.fine.residual
                                  : std::numeric_limits<double>::infinity();
  r.halved = r.fine.residual <= 0.5 * r.coarse.residual || r.fine.residual <= 1e-8;
  return r;
}

Matrix reconstruct_phi_at(const RepResolvent& r) {
  Matrix phi = -r.matrix.partialPivLu().inverse();
  phi.diagonal().array() += cplx(0.0, r.lambda);
  return phi;
}

Matrix reconstruct_phi(const RepResolvent& r) {
  if (r.lambda != 1.0)
    fail(ErrorCode::invalid_argument, "reconstruct_phi: needs lambda = 1");
  return reconstruct_phi_at(r);
}

namespace {
Eigen::SelfAdjointEigenSolver<Matrix> phase_spectrum(PhaseVector f,
                                                     const MomentumGrid& grid) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(build_phase_operator(f, grid));
}

Matrix exp_i(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double s) {
  const RealVector& mu = es.eigenvalues();
  Vector ph(mu.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j) ph(j) = std::polar(1.0, s * mu(j));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}
}  // namespace

Matrix weyl_bridge(PhaseVector f, const MomentumGrid& grid) {
  return exp_i(phase_spectrum(f, grid), 1.0);
}

double weyl_laplace_deviation(PhaseVector f, const MomentumGrid& grid,
                              double t_max, int nodes) {
  const auto es = phase_spectrum(f, grid);
  const double spread = es.eigenvalues().cwiseAbs().maxCoeff();
  const double panel = spread > 0.0 ? 2.0 / spread : 1.0;
  // e^{i phi(-t f)} = e^{-i t phi(f)}
  const Matrix integral = laplace_integral(
      1.0, [&](double t) { return exp_i(es, -t); }, t_max, nodes, panel);
  const Matrix laplace = cplx(0.0, -1.0) * integral;
  return spectral_norm(laplace - build_resolvent(1.0, f, grid).matrix);
}

}  // namespace pointdyn
