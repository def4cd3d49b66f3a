#include "propagator.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace pointdyn {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::free: return "free";
    case Provenance::dyson_delta: return "dyson_delta";
    case Provenance::dyson_mollified: return "dyson_mollified";
    case Provenance::reference_split_step: return "reference_split_step";
  }
  return "unknown";
}

StateVector Propagator::apply(const StateVector& psi) const {
  require_same_grid(psi.grid, grid, "Propagator::apply");
  const StateVector in = psi.representation == Representation::momentum
                             ? psi
                             : fourier_forward(psi);
  StateVector out = StateVector::from_weighted(grid, matrix * in.weighted(),
                                               Representation::momentum);
  return psi.representation == Representation::momentum ? out
                                                        : fourier_inverse(out);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string delta_digest(const DeltaConfig& cfg) {
  return fnv1a_hex("delta\n" + cfg.serialize());
}

std::string mollified_digest(const DeltaConfig& cfg,
                             const MollifierProfile& profile, double epsilon) {
  char eps[40];
  std::snprintf(eps, sizeof eps, "%.17g", epsilon);
  return fnv1a_hex("mollified " + profile.name + " " + eps + "\n" +
                   cfg.serialize());
}

KernelMatrix free_phase(double t, const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  KernelMatrix k{grid, Matrix::Zero(n, n)};
  const RealVector& p = grid.nodes();
  const RealVector& w = grid.weights();
  for (Eigen::Index j = 0; j < n; ++j)
    k.entries(j, j) = std::polar(1.0, -t * p(j) * p(j)) / w(j);
  return k;
}

Matrix hamiltonian_matrix(const PotentialTransform& v, const MomentumGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const Vector table = potential_on_differences(v, grid);
  const double w = grid.spacing();
  Matrix h(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) h(j, k) = w * table(j - k + n - 1);
  h.diagonal() += grid.nodes().array().square().matrix().cast<cplx>();
  return h;
}

int composition_steps(double t, double sup_bound) {
  const double x = std::abs(t) * sup_bound / 0.25;
  return x <= 1.0 ? 1 : static_cast<int>(std::ceil(x - 1e-12));
}

Matrix matrix_power(const Matrix& m, long long k) {
  require(k >= 0, "matrix_power: negative exponent");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  bool first = true;
  while (k > 0) {
    if (k & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = result * base;
      }
    }
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

namespace {

double unitarity_defect(const Matrix& u) {
  return spectral_norm(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

Vector free_diagonal(double t, const MomentumGrid& grid) {
  const RealVector& p = grid.nodes();
  Vector e(p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j)
    e(j) = std::polar(1.0, -t * p(j) * p(j));
  return e;
}

}  // namespace

Propagator build_propagator(double t, const PotentialTransform& v,
                            const MomentumGrid& grid, const DysonOptions& opts,
                            Provenance provenance, std::string digest) {
  if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "propagator: t");
  Propagator u;
  u.grid = grid;
  u.t = t;
  u.provenance = provenance;
  u.config_digest = std::move(digest);
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (t == 0.0) {
    u.matrix = Matrix::Identity(n, n);
    return u;
  }
  if (v.is_zero()) {
    u.matrix = free_diagonal(t, grid).asDiagonal();
    u.provenance = Provenance::free;
    return u;
  }
  u.steps = composition_steps(t, v.sup_bound());
  const double step = t / u.steps;
  const DysonSeries s =
      dyson_sum(step, v, grid, opts.tol, opts.n_max, opts.time_nodes);
  const Matrix piece = free_diagonal(step, grid).asDiagonal() *
                       assemble_interaction_operator(s).weighted();
  u.matrix = matrix_power(piece, u.steps);
  u.orders_used = static_cast<int>(s.orders.size());
  u.tail_estimate = u.steps * s.tail_estimate;
  u.declared_tolerance = u.steps * 10.0 * (s.tail_estimate + opts.tol);
  u.unitarity_defect = unitarity_defect(u.matrix);
  if (!(u.unitarity_defect <= u.declared_tolerance)) {
    std::ostringstream os;
    os << "propagator: unitarity defect " << u.unitarity_defect
       << " exceeds declared tolerance " << u.declared_tolerance;
    fail(ErrorCode::numerical, os.str());
  }
  return u;
}

Propagator build_delta_propagator(double t, const DeltaConfig& cfg,
                                  const MomentumGrid& grid,
                                  const DysonOptions& opts) {
  return build_propagator(t, delta_transform(cfg), grid, opts,
                          Provenance::dyson_delta, delta_digest(cfg));
}

Propagator build_mollified_propagator(double t, const DeltaConfig& cfg,
                                      const MollifierProfile& profile,
                                      double epsilon, const MomentumGrid& grid,
                                      const DysonOptions& opts) {
  return build_propagator(t, mollified_transform(cfg, profile, epsilon), grid,
                          opts, Provenance::dyson_mollified,
                          mollified_digest(cfg, profile, epsilon));
}

Propagator reference_propagator(double t, const DeltaConfig& cfg,
                                const MollifierProfile& profile,
                                double epsilon, const MomentumGrid& grid,
                                int steps) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::invalid_argument, "reference_propagator: epsilon <= 0");
  if (steps < 1) fail(ErrorCode::invalid_argument, "reference_propagator: steps < 1");
  Propagator u;
  u.grid = grid;
  u.t = t;
  u.provenance = Provenance::reference_split_step;
  u.config_digest = mollified_digest(cfg, profile, epsilon);
  u.steps = steps;
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (cfg.empty() || t == 0.0) {
    u.matrix = free_diagonal(t, grid).asDiagonal();
    return u;
  }

  const MomentumGrid fine = make_grid(4 * grid.size(), 4.0 * grid.p_max());
  const RealVector x = fine.positions();
  RealVector potential = RealVector::Zero(x.size());
  for (const auto& c : cfg.centers()) {
    const Mollifier m(profile, c.x, epsilon);
    for (Eigen::Index j = 0; j < x.size(); ++j) potential(j) += c.alpha * m(x(j));
  }
  const double tau = t / steps;
  Vector half_phase(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    half_phase(j) = std::polar(1.0, -0.5 * tau * potential(j));

  // Columns of the half-step potential map, restricted to the grid window.
  const Eigen::Index offset = 3 * n / 2;
  Matrix half(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    StateVector e{fine, Vector::Zero(4 * n), Representation::momentum};
    e.amplitudes(offset + k) = 1.0;
    StateVector pos = fourier_inverse(e);
    pos.amplitudes.array() *= half_phase.array();
    const StateVector back = fourier_forward(pos);
    half.col(k) = back.amplitudes.segment(offset, n);
  }
  const Matrix one_step = half * free_diagonal(tau, grid).asDiagonal() * half;
  u.matrix = matrix_power(one_step, steps);
  u.unitarity_defect = unitarity_defect(u.matrix);
  u.declared_tolerance = u.unitarity_defect;
  return u;
}

GeneratorCheck generator_check(double h) {
  const MomentumGrid grid = make_grid(128, 16.0);
  const DeltaConfig cfg({{2.0, 0.0}});
  const PotentialTransform v = mollified_transform(cfg, standard_bump(), 0.5);
  const DysonSeries s = dyson_sum(h, v, grid, 1e-12, 40, 16);

  const RealVector& p = grid.nodes();
  StateVector psi{grid, Vector(p.size()), Representation::momentum};
  for (Eigen::Index j = 0; j < p.size(); ++j)
    psi.amplitudes(j) = std::exp(-0.5 * p(j) * p(j)) * std::polar(1.0, -0.3 * p(j));
  psi.normalize();
  const Vector x = psi.weighted();
  const Vector hx = hamiltonian_matrix(v, grid) * x;
  const Vector free = free_diagonal(h, grid);

  auto residual = [&](SignConvention c) {
    const Matrix u = free.asDiagonal() * assemble_weighted(s, c);
    const Vector d = (u * x - x) / h + kI * hx;
    return d.norm() / hx.norm();
  };
  GeneratorCheck g;
  g.h = h;
  g.residual_minus_i = residual(SignConvention::minus_i);
  g.residual_plus_i = residual(SignConvention::plus_i);
  const bool minus = g.residual_minus_i < g.residual_plus_i;
  g.selected = minus ? SignConvention::minus_i : SignConvention::plus_i;
  g.separation = minus ? g.residual_plus_i / g.residual_minus_i
                       : g.residual_minus_i / g.residual_plus_i;
  return g;
}

KernelMatrix conjugate(const Propagator& u, const KernelMatrix& a) {
  require_same_grid(u.grid, a.grid, "conjugate");
  return KernelMatrix::from_weighted(a.grid,
                                     u.matrix.adjoint() * a.weighted() * u.matrix);
}

double distance(const Propagator& a, const Propagator& b) {
  require_same_grid(a.grid, b.grid, "distance");
  return spectral_norm(a.matrix - b.matrix);
}

ConvergenceReport convergence_study(double t, const DeltaConfig& cfg,
                                    const MollifierProfile& profile,
                                    const std::vector<double>& eps_list,
                                    const MomentumGrid& grid,
                                    const DysonOptions& opts) {
  if (eps_list.size() < 3)
    fail(ErrorCode::invalid_argument, "convergence_study: need >= 3 epsilons");
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1]))
      fail(ErrorCode::invalid_argument,
           "convergence_study: epsilons must strictly decrease");

  ConvergenceReport r;
  r.parameter_name = "epsilon";
  r.grid_n = grid.size();
  r.p_max = grid.p_max();
  r.t = t;
  r.config = delta_digest(cfg);

  const Propagator ud = build_delta_propagator(t, cfg, grid, opts);
  r.checks.push_back({"delta_unitarity_defect", ud.unitarity_defect,
                      ud.declared_tolerance, true, false});
  for (double eps : eps_list) {
    const Propagator ue =
        build_mollified_propagator(t, cfg, profile, eps, grid, opts);
    r.values.push_back(eps);
    r.norms.push_back(distance(ud, ue));
    r.orders_used.push_back(ue.orders_used);
    r.tail_estimates.push_back(ue.tail_estimate);
  }

  const double eps_min = eps_list.back();
  auto norm_on = [&](const MomentumGrid& g) {
    const Propagator a = build_delta_propagator(t, cfg, g, opts);
    const Propagator b = build_mollified_propagator(t, cfg, profile, eps_min, g, opts);
    return distance(a, b);
  };
  const double refined = norm_on(make_grid(2 * grid.size(), grid.p_max()));
  r.floor = std::abs(refined - r.norms.back());
  r.checks.push_back({"n_doubling_norm_at_eps_min", refined, r.norms.back(),
                      true, true});
  const double widened = norm_on(make_grid(grid.size(), 2.0 * grid.p_max()));
  r.checks.push_back({"pmax_doubling_norm_at_eps_min", widened, r.norms.back(),
                      true, true});
  r.decide();
  return r;
}

SummableSequence geometric_sequence() {
  SummableSequence s;
  s.term = [](std::size_t i) {
    return DeltaCenter{std::ldexp(1.0, -static_cast<int>(i)), 0.25 * static_cast<double>(i)};
  };
  s.tail_after = [](std::size_t n) { return std::ldexp(1.0, -static_cast<int>(n)); };
  return s;
}

L1Stability l1_stability(double t, const SummableSequence& seq, double tail_a,
                         double tail_b, const MomentumGrid& grid,
                         const DysonOptions& opts) {
  if (!(tail_a > tail_b))
    fail(ErrorCode::invalid_argument, "l1_stability: need tail_a > tail_b");
  L1Stability out;
  out.coarse = truncate_l1(seq, tail_a);
  out.fine = truncate_l1(seq, tail_b);
  const Propagator a = build_delta_propagator(t, out.coarse, grid, opts);
  const Propagator b = build_delta_propagator(t, out.fine, grid, opts);
  out.difference = distance(a, b);
  out.tail_gap = out.coarse.tail_bound() - out.fine.tail_bound();
  out.constant = out.difference / (out.tail_gap * std::abs(t));
  out.passed = out.constant <= 10.0;
  return out;
}

}  // namespace pointdyn
