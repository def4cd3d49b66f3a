#pragma once

#include <string>
#include <vector>

#include "dyson.hpp"
#include "report.hpp"

namespace pointdyn {

struct DysonOptions {
  double tol = 1e-6;
  int n_max = 40;
  int time_nodes = 16;
};

enum class Provenance { free, dyson_delta, dyson_mollified, reference_split_step };
const char* to_string(Provenance p);

/// U(t) in weighted momentum coordinates.
struct Propagator {
  MomentumGrid grid;
  double t = 0.0;
  Matrix matrix;
  Provenance provenance = Provenance::free;
  std::string config_digest;
  double unitarity_defect = 0.0;
  double declared_tolerance = 0.0;
  int orders_used = 0;
  double tail_estimate = 0.0;
  int steps = 1;  // short-time pieces composed to reach t

  StateVector apply(const StateVector& psi) const;
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);
std::string delta_digest(const DeltaConfig& cfg);
std::string mollified_digest(const DeltaConfig& cfg,
                             const MollifierProfile& profile, double epsilon);

/// Diagonal kernel whose weighted form is diag(e^{-i t p_j^2}).
KernelMatrix free_phase(double t, const MomentumGrid& grid);
/// Weighted H_0 + V on the grid: diag(p^2) + w V~(p_j - p_k) / sqrt(2 pi).
Matrix hamiltonian_matrix(const PotentialTransform& v, const MomentumGrid& grid);

/// Number of short-time pieces used for |t|: each piece keeps
/// |t / steps| * sup_bound <= 0.25.
int composition_steps(double t, double sup_bound);

/// e^{-i t D} Gamma(t), composed from certified pieces when |t| is long.
Propagator build_propagator(double t, const PotentialTransform& v,
                            const MomentumGrid& grid, const DysonOptions& opts,
                            Provenance provenance, std::string digest);
Propagator build_delta_propagator(double t, const DeltaConfig& cfg,
                                  const MomentumGrid& grid,
                                  const DysonOptions& opts = {});
Propagator build_mollified_propagator(double t, const DeltaConfig& cfg,
                                      const MollifierProfile& profile,
                                      double epsilon, const MomentumGrid& grid,
                                      const DysonOptions& opts = {});

/// Strang splitting with exact sub-flows. The potential phase is applied on
/// a position lattice with 4x finer spacing (momentum range 4 p_max) so the
/// convolution is not wrapped around the momentum window; the result is
/// projected back onto the grid.
Propagator reference_propagator(double t, const DeltaConfig& cfg,
                                const MollifierProfile& profile,
                                double epsilon, const MomentumGrid& grid,
                                int steps);

/// Finite-difference derivative of U(h) on a smooth state against
/// -i (H_0 + V) psi, for both phase conventions.
struct GeneratorCheck {
  double h = 0.0;
  double residual_minus_i = 0.0;
  double residual_plus_i = 0.0;
  SignConvention selected = SignConvention::minus_i;
  double separation = 0.0;  // rejected residual / selected residual
};
GeneratorCheck generator_check(double h = 1e-3);

/// norms[k] = ||U_delta(t) - U_eps_k(t)||. The floor is the change of the
/// smallest-eps norm when n_points doubles; one p_max-doubling row is
/// attached as report-only.
ConvergenceReport convergence_study(double t, const DeltaConfig& cfg,
                                    const MollifierProfile& profile,
                                    const std::vector<double>& eps_list,
                                    const MomentumGrid& grid,
                                    const DysonOptions& opts = {});

struct L1Stability {
  DeltaConfig coarse;  // truncated at the larger tail
  DeltaConfig fine;
  double difference = 0.0;  // ||U_coarse(t) - U_fine(t)||
  double tail_gap = 0.0;
  double constant = 0.0;  // difference / (tail_gap |t|)
  bool passed = false;    // constant <= 10
};
L1Stability l1_stability(double t, const SummableSequence& seq, double tail_a,
                         double tail_b, const MomentumGrid& grid,
                         const DysonOptions& opts = {});

/// alpha_i = 2^-i at x_i = i / 4.
SummableSequence geometric_sequence();

/// U* A U.
KernelMatrix conjugate(const Propagator& u, const KernelMatrix& a);
double distance(const Propagator& a, const Propagator& b);

Matrix matrix_power(const Matrix& m, long long k);

}  // namespace pointdyn
