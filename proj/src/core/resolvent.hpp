#pragma once

#include <functional>
#include <string>
#include <vector>

#include "propagator.hpp"

namespace pointdyn {

/// t -> U(t) for one interaction on one grid.
struct PropagatorFamily {
  MomentumGrid grid;
  PotentialTransform v;
  DysonOptions opts;
  Provenance provenance = Provenance::free;
  std::string digest;

  Propagator at(double t) const;
};

PropagatorFamily delta_family(const DeltaConfig& cfg, const MomentumGrid& grid,
                              const DysonOptions& opts = {});
PropagatorFamily mollified_family(const DeltaConfig& cfg,
                                  const MollifierProfile& profile,
                                  double epsilon, const MomentumGrid& grid,
                                  const DysonOptions& opts = {});

enum class ResolventSource { laplace_of_propagator, direct_inverse };
const char* to_string(ResolventSource s);

/// (H - i lambda)^{-1} in weighted momentum coordinates.
struct ResolventOperator {
  double lambda = 0.0;
  Matrix matrix;
  ResolventSource source = ResolventSource::direct_inverse;
  std::string quadrature_meta;
  double t_max = 0.0;
  int nodes = 0;       // Gauss-Legendre nodes per panel
  int panels_log2 = 0; // t_max = h 2^panels_log2
  double norm = 0.0;
  double defect = 0.0; // ||(H - i lambda) R - I|| with the grid Hamiltonian
  // U at the dyadic times h 2^l, l = 0..panels_log2 (kept on request)
  std::vector<Matrix> dyadic_propagators;
  std::vector<double> dyadic_times;
};

/// R = i eta int_0^t_max e^{-|lambda| s} U(eta s) ds, eta = sign(lambda).
/// The integral runs on one Gauss-Legendre panel [0, h] and is carried to
/// t_max = h 2^k by
///   I(2 tau) = I(tau) + e^{-|lambda| tau} U(eta tau) I(tau),
///   U(2 eta tau) = U(eta tau)^2.
/// The panel obeys p_max^2 h <= 2 and sup_bound h <= 0.25.
ResolventOperator resolvent_from_propagator(double lambda,
                                            const PropagatorFamily& family,
                                            double t_max, int nodes,
                                            bool keep_dyadic = false);

/// int_0^t_max e^{-|lambda| s} u(eta s) ds for any strongly continuous
/// unitary family u: one Gauss-Legendre panel [0, eta h], h <= panel_max,
/// then dyadic doubling as above. u is only sampled inside the panel.
Matrix laplace_integral(double lambda,
                        const std::function<Matrix(double)>& u_at,
                        double t_max, int nodes, double panel_max);

/// Direct LU inverse of the grid Hamiltonian shifted by -i lambda.
ResolventOperator resolvent_direct(double lambda, const PotentialTransform& v,
                                   const MomentumGrid& grid);

/// Smallest admissible t_max for |lambda| t_max >= 20.
double default_t_max(double lambda);

/// Tight series tolerance for Laplace panels: errors of U(h) are amplified
/// by the number of composed panels.
DysonOptions laplace_options();

ConvergenceReport norm_resolvent_convergence(double lambda,
                                             const DeltaConfig& cfg,
                                             const MollifierProfile& profile,
                                             const std::vector<double>& eps_list,
                                             const MomentumGrid& grid,
                                             double t_max, int nodes,
                                             const DysonOptions& opts = laplace_options());

/// Rank-one T = <psi, .> phi; norms[k] = ||U(t)* T U(t) - U(t0)* T U(t0)||
/// at t = t0 + dt_k. Adds the triangle-bound rows
///   ||U(t)* T - U(t0)* T|| <= ||psi|| ||U(t)* phi - U(t0)* phi||.
ConvergenceReport finite_rank_continuity(const PropagatorFamily& family,
                                         const StateVector& psi,
                                         const StateVector& phi, double t0,
                                         const std::vector<double>& dt_list);

/// Normalized Gaussian in momentum representation: centre x0 in position,
/// mean momentum k0, position width sigma.
StateVector gaussian_state(const MomentumGrid& grid, double x0, double k0,
                           double sigma);

}  // namespace pointdyn
