#include "resolvent.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pointdyn {

Propagator PropagatorFamily::at(double t) const {
  return build_propagator(t, v, grid, opts, provenance, digest);
}

PropagatorFamily delta_family(const DeltaConfig& cfg, const MomentumGrid& grid,
                              const DysonOptions& opts) {
  return {grid, delta_transform(cfg), opts, Provenance::dyson_delta,
          delta_digest(cfg)};
}

PropagatorFamily mollified_family(const DeltaConfig& cfg,
                                  const MollifierProfile& profile,
                                  double epsilon, const MomentumGrid& grid,
                                  const DysonOptions& opts) {
  return {grid, mollified_transform(cfg, profile, epsilon), opts,
          Provenance::dyson_mollified, mollified_digest(cfg, profile, epsilon)};
}

const char* to_string(ResolventSource s) {
  return s == ResolventSource::laplace_of_propagator ? "laplace_of_propagator"
                                                     : "direct_inverse";
}

DysonOptions laplace_options() {
  DysonOptions o;
  o.tol = 1e-13;
  o.n_max = 40;
  o.time_nodes = 16;
  return o;
}

double default_t_max(double lambda) {
  require(lambda != 0.0, "default_t_max: lambda = 0");
  return 20.0 / std::abs(lambda);
}

namespace {

double resolvent_defect(const Matrix& r, double lambda,
                        const PotentialTransform& v, const MomentumGrid& grid) {
  Matrix h = hamiltonian_matrix(v, grid);
  h.diagonal().array() -= cplx(0.0, lambda);
  return spectral_norm(h * r - Matrix::Identity(r.rows(), r.cols()));
}

void enforce_norm_bound(const ResolventOperator& r) {
  if (r.norm > 1.0 / std::abs(r.lambda) + 1e-2) {
    std::ostringstream os;
    os << "resolvent norm " << r.norm << " exceeds 1/|lambda| + 1e-2";
    fail(ErrorCode::numerical, os.str());
  }
}

}  // namespace

ResolventOperator resolvent_from_propagator(double lambda,
                                            const PropagatorFamily& family,
                                            double t_max, int nodes,
                                            bool keep_dyadic) {
  if (lambda == 0.0 || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "resolvent: lambda must be nonzero");
  if (!(std::abs(lambda) * t_max >= 20.0 * (1.0 - 1e-12)))
    fail(ErrorCode::invalid_argument,
         "resolvent: |lambda| t_max must be >= 20 (tail e^{-20})");
  if (nodes < 2) fail(ErrorCode::invalid_argument, "resolvent: nodes < 2");

  const MomentumGrid& grid = family.grid;
  const double a = std::abs(lambda);
  const double eta = lambda > 0.0 ? 1.0 : -1.0;
  double hmax = std::min(max_panel_length(grid), 1.0 / a);
  if (family.v.sup_bound() > 0.0) hmax = std::min(hmax, 0.25 / family.v.sup_bound());
  int k = 0;
  while (t_max / std::ldexp(1.0, k) > hmax) ++k;
  const double h = std::ldexp(t_max, -k);

  ResolventOperator r;
  r.lambda = lambda;
  r.source = ResolventSource::laplace_of_propagator;
  r.t_max = t_max;
  r.nodes = nodes;
  r.panels_log2 = k;

  const auto n = static_cast<Eigen::Index>(grid.size());
  const RealVector d = grid.nodes().array().square();
  auto free_diag = [&](double s) {
    Vector e(n);
    for (Eigen::Index j = 0; j < n; ++j) e(j) = std::polar(1.0, -s * d(j));
    return e;
  };

  Matrix integral = Matrix::Zero(n, n);
  Matrix u;
  if (family.v.is_zero()) {
    const TimeQuadrature rule = make_time_quadrature(eta * h, nodes);
    Vector diag = Vector::Zero(n);
    for (int q = 0; q < nodes; ++q)
      diag += std::abs(rule.weights[q]) * std::exp(-a * std::abs(rule.nodes[q])) *
              free_diag(rule.nodes[q]);
    integral.diagonal() = diag;
    u = free_diag(eta * h).asDiagonal();
  } else {
    const PanelSamples panel =
        dyson_panel(eta * h, family.v, grid, family.opts.tol,
                    family.opts.n_max, nodes);
    for (int q = 0; q < nodes; ++q) {
      const double s = panel.rule.nodes[q];
      integral.noalias() += (std::abs(panel.rule.weights[q]) * std::exp(-a * std::abs(s))) *
                            (free_diag(s).asDiagonal() * panel.gamma[q]);
    }
    u = free_diag(eta * h).asDiagonal() * panel.gamma_end;
  }

  for (int l = 0; l < k; ++l) {
    const double tau = std::ldexp(h, l);
    if (keep_dyadic) {
      r.dyadic_propagators.push_back(u);
      r.dyadic_times.push_back(eta * tau);
    }
    integral += std::exp(-a * tau) * (u * integral);
    u = u * u;
  }
  if (keep_dyadic) {
    r.dyadic_propagators.push_back(u);
    r.dyadic_times.push_back(eta * t_max);
  }
  r.matrix = cplx(0.0, eta) * integral;
  require_finite(r.matrix, "resolvent_from_propagator");

  std::ostringstream meta;
  meta << "gauss_legendre panel h=" << h << " nodes=" << nodes << " panels=2^"
       << k << " t_max=" << t_max;
  r.quadrature_meta = meta.str();
  r.norm = spectral_norm(r.matrix);
  r.defect = resolvent_defect(r.matrix, lambda, family.v, grid);
  enforce_norm_bound(r);
  return r;
}

Matrix laplace_integral(double lambda,
                        const std::function<Matrix(double)>& u_at,
                        double t_max, int nodes, double panel_max) {
  if (lambda == 0.0 || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "laplace_integral: lambda must be nonzero");
  if (!(std::abs(lambda) * t_max >= 20.0 * (1.0 - 1e-12)))
    fail(ErrorCode::invalid_argument, "laplace_integral: |lambda| t_max < 20");
  require(panel_max > 0.0, "laplace_integral: panel_max must be positive");
  const double a = std::abs(lambda);
  const double eta = lambda > 0.0 ? 1.0 : -1.0;
  const double hmax = std::min(panel_max, 1.0 / a);
  int k = 0;
  while (t_max / std::ldexp(1.0, k) > hmax) ++k;
  const double h = std::ldexp(t_max, -k);
  const TimeQuadrature rule = make_time_quadrature(eta * h, nodes);
  Matrix integral;
  for (int q = 0; q < nodes; ++q) {
    const double s = rule.nodes[q];
    const Matrix term = (std::abs(rule.weights[q]) * std::exp(-a * std::abs(s))) * u_at(s);
    if (q == 0) integral = term; else integral += term;
  }
  Matrix u = u_at(eta * h);
  for (int l = 0; l < k; ++l) {
    integral += std::exp(-a * std::ldexp(h, l)) * (u * integral);
    u = u * u;
  }
  return integral;
}

ResolventOperator resolvent_direct(double lambda, const PotentialTransform& v,
                                   const MomentumGrid& grid) {
  if (lambda == 0.0 || !std::isfinite(lambda))
    fail(ErrorCode::invalid_argument, "resolvent: lambda must be nonzero");
  Matrix h = hamiltonian_matrix(v, grid);
  h.diagonal().array() -= cplx(0.0, lambda);
  ResolventOperator r;
  r.lambda = lambda;
  r.source = ResolventSource::direct_inverse;
  r.quadrature_meta = "lu";
  r.matrix = h.partialPivLu().inverse();
  r.norm = spectral_norm(r.matrix);
  r.defect = resolvent_defect(r.matrix, lambda, v, grid);
  enforce_norm_bound(r);
  return r;
}

ConvergenceReport norm_resolvent_convergence(double lambda,
                                             const DeltaConfig& cfg,
                                             const MollifierProfile& profile,
                                             const std::vector<double>& eps_list,
                                             const MomentumGrid& grid,
                                             double t_max, int nodes,
                                             const DysonOptions& opts) {
  if (eps_list.size() < 3)
    fail(ErrorCode::invalid_argument, "resolvent study: need >= 3 epsilons");
  for (std::size_t k = 1; k < eps_list.size(); ++k)
    if (!(eps_list[k] < eps_list[k - 1]))
      fail(ErrorCode::invalid_argument,
           "resolvent study: epsilons must strictly decrease");

  ConvergenceReport r;
  r.parameter_name = "epsilon";
  r.grid_n = grid.size();
  r.p_max = grid.p_max();
  r.lambda = lambda;
  r.t_max = t_max;
  r.laplace_nodes = nodes;
  r.config = delta_digest(cfg);

  const ResolventOperator rd = resolvent_from_propagator(
      lambda, delta_family(cfg, grid, opts), t_max, nodes, true);
  r.checks.push_back({"delta_resolvent_defect", rd.defect, 1e-4, rd.defect <= 1e-4, false});

  // Consistency: ||U_d(t) - U_e(t)|| <= (t / t0 + 1) d0 integrates against
  // e^{-|lambda| t} to d0 (1 / (lambda^2 t0) + 1 / |lambda|). d0 is the
  // largest sampled dyadic difference up to t0.
  double t0 = 0.0;
  std::size_t last = 0;
  for (std::size_t l = 0; l < rd.dyadic_times.size(); ++l)
    if (std::abs(rd.dyadic_times[l]) <= 0.25 * (1.0 + 1e-12)) {
      t0 = std::abs(rd.dyadic_times[l]);
      last = l;
    }

  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    const double eps = eps_list[k];
    const ResolventOperator re = resolvent_from_propagator(
        lambda, mollified_family(cfg, profile, eps, grid, opts), t_max, nodes, true);
    const double norm = spectral_norm(rd.matrix - re.matrix);
    r.values.push_back(eps);
    r.norms.push_back(norm);
    r.orders_used.push_back(0);
    r.tail_estimates.push_back(0.0);
    double d0 = 0.0;
    for (std::size_t l = 0; l <= last; ++l)
      d0 = std::max(d0, spectral_norm(rd.dyadic_propagators[l] - re.dyadic_propagators[l]));
    const double bound = d0 * (1.0 / (lambda * lambda * t0) + 1.0 / std::abs(lambda));
    std::ostringstream name;
    name << "laplace_consistency_eps_" << eps;
    r.checks.push_back({name.str(), norm, bound, norm <= bound, false});
  }

  const double eps_min = eps_list.back();
  {
    const MomentumGrid g2 = make_grid(2 * grid.size(), grid.p_max());
    const ResolventOperator a = resolvent_from_propagator(
        lambda, delta_family(cfg, g2, opts), t_max, nodes);
    const ResolventOperator b = resolvent_from_propagator(
        lambda, mollified_family(cfg, profile, eps_min, g2, opts), t_max, nodes);
    const double refined = spectral_norm(a.matrix - b.matrix);
    r.floor = std::abs(refined - r.norms.back());
    r.checks.push_back({"n_doubling_norm_at_eps_min", refined, r.norms.back(), true, true});
  }
  {
    // heavier damping: differences should not grow when lambda doubles
    const double l2 = 2.0 * lambda;
    const double tm2 = std::max(t_max / 2.0, default_t_max(l2));
    const ResolventOperator a = resolvent_from_propagator(
        l2, delta_family(cfg, grid, opts), tm2, nodes);
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
      const ResolventOperator b = resolvent_from_propagator(
          l2, mollified_family(cfg, profile, eps_list[k], grid, opts), tm2, nodes);
      const double v = spectral_norm(a.matrix - b.matrix);
      std::ostringstream name;
      name << "lambda_doubled_eps_" << eps_list[k];
      r.checks.push_back({name.str(), v, r.norms[k], v <= r.norms[k], true});
    }
  }
  r.decide();
  return r;
}

ConvergenceReport finite_rank_continuity(const PropagatorFamily& family,
                                         const StateVector& psi_in,
                                         const StateVector& phi_in, double t0,
                                         const std::vector<double>& dt_list) {
  for (const StateVector* s : {&psi_in, &phi_in})
    if (std::abs(s->norm() - 1.0) > 1e-10)
      fail(ErrorCode::invalid_argument, "finite_rank_continuity: states must be normalized");
  for (std::size_t k = 0; k < dt_list.size(); ++k)
    if (!(dt_list[k] > 0.0) || (k > 0 && !(dt_list[k] < dt_list[k - 1])))
      fail(ErrorCode::invalid_argument,
           "finite_rank_continuity: dt list must be positive and decreasing");

  auto momentum = [](const StateVector& s) {
    return s.representation == Representation::momentum ? s : fourier_forward(s);
  };
  const Vector psi = momentum(psi_in).weighted();
  const Vector phi = momentum(phi_in).weighted();

  ConvergenceReport r;
  r.parameter_name = "dt";
  r.grid_n = family.grid.size();
  r.p_max = family.grid.p_max();
  r.t = t0;
  r.config = family.digest;

  const Propagator u0 = family.at(t0);
  const Vector a0 = u0.matrix.adjoint() * phi;
  const Vector b0 = u0.matrix.adjoint() * psi;
  const Matrix m0 = a0 * b0.adjoint();
  double tolerance = u0.declared_tolerance;

  for (double dt : dt_list) {
    const Propagator u = family.at(t0 + dt);
    const Vector a = u.matrix.adjoint() * phi;
    const Vector b = u.matrix.adjoint() * psi;
    r.values.push_back(dt);
    r.norms.push_back(spectral_norm(a * b.adjoint() - m0));
    r.orders_used.push_back(u.orders_used);
    r.tail_estimates.push_back(u.tail_estimate);
    tolerance = std::max(tolerance, u.declared_tolerance);

    const double lhs = spectral_norm((a - a0) * psi.adjoint());
    const double rhs = psi.norm() * (a - a0).norm();
    std::ostringstream name;
    name << "triangle_bound_dt_" << dt;
    r.checks.push_back({name.str(), lhs, rhs, lhs <= rhs + 1e-10, false});
  }
  r.floor = tolerance;
  {
    const Propagator same = family.at(t0);
    const Vector a = same.matrix.adjoint() * phi;
    const Vector b = same.matrix.adjoint() * psi;
    const double zero = spectral_norm(a * b.adjoint() - m0);
    r.checks.push_back({"dt_zero", zero, 1e-12, zero <= 1e-12, false});
  }
  if (r.norms.size() >= 2 && r.norms.back() > 0.0) {
    const double slope = std::log(r.norms.front() / r.norms.back()) /
                         std::log(r.values.front() / r.values.back());
    r.checks.push_back({"loglog_slope", slope, 1.0, true, true});
  }
  r.decide();
  return r;
}

StateVector gaussian_state(const MomentumGrid& grid, double x0, double k0,
                           double sigma) {
  require(sigma > 0.0, "gaussian_state: sigma must be positive");
  const RealVector& p = grid.nodes();
  StateVector s{grid, Vector(p.size()), Representation::momentum};
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double q = p(j) - k0;
    s.amplitudes(j) = std::exp(-sigma * sigma * q * q) * std::polar(1.0, -p(j) * x0);
  }
  s.normalize();
  return s;
}

}  // namespace pointdyn
