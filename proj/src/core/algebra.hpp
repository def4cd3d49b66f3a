#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "grid.hpp"

namespace pointdyn {

struct PhaseVector {
  double f1 = 0.0;  // position coefficient
  double f2 = 0.0;  // momentum coefficient
};

inline PhaseVector operator+(PhaseVector a, PhaseVector b) { return {a.f1 + b.f1, a.f2 + b.f2}; }
inline PhaseVector operator*(double c, PhaseVector a) { return {c * a.f1, c * a.f2}; }

/// sigma(f, g) = f1 g2 - f2 g1, so that [phi(f), phi(g)] = i sigma(f, g)
/// with [Q, P] = i.
double sigma(PhaseVector f, PhaseVector g);

/// Q = diag(x_j), P = F* diag(p_k) F, both in weighted position coordinates.
Matrix position_operator(const MomentumGrid& grid);
Matrix momentum_operator(const MomentumGrid& grid);
/// phi(f) = f1 Q + f2 P.
Matrix build_phase_operator(PhaseVector f, const MomentumGrid& grid);

struct RepResolvent {
  double lambda = 0.0;
  PhaseVector f;
  MomentumGrid grid;
  Matrix matrix;
  double norm = 0.0;
  double min_singular = 0.0;
};

/// R(lambda, f) = (i lambda - phi(f))^{-1} by LU solve. With this sign
/// R(lambda, 0) = -(i / lambda) I.
RepResolvent build_resolvent(double lambda, PhaseVector f, const MomentumGrid& grid);

struct RelationParams {
  double lambda = 1.0;
  double mu = 1.0;
  double nu = 3.0;
  PhaseVector f{1.0, 0.0};
  PhaseVector g{0.0, 1.0};
};

struct RelationResult {
  int relation = 0;
  double residual = 0.0;
  double threshold = 0.0;
  bool weak = false;  // measured on probe states rather than in norm
  bool passed = false;
};

/// Relations 1-4 in operator norm (threshold 1e-10); 5 and 6 as
/// max_psi ||(LHS - RHS) psi|| / ||psi|| over the probes (threshold 1e-3).
RelationResult check_relation(int k, const RelationParams& params,
                              const MomentumGrid& grid,
                              std::span<const StateVector> probes);

/// Smooth Gaussians well inside the position window, in position
/// representation; centres and momenta drawn from a seeded generator.
std::vector<StateVector> gaussian_probes(const MomentumGrid& grid, int count,
                                         std::uint64_t seed);

/// Relation k at n and 2n points; passes when the residual halves or is
/// already below 1e-8.
struct RefinementResult {
  RelationResult coarse;
  RelationResult fine;
  double ratio = 0.0;  // coarse / fine
  bool halved = false;
};
RefinementResult relation_refinement(int k, const RelationParams& params,
                                     const MomentumGrid& grid, int probe_count,
                                     std::uint64_t seed);

/// phi = i I - R(1, f)^{-1}.
Matrix reconstruct_phi(const RepResolvent& r);
/// phi = i lambda I - R(lambda, f)^{-1}, any lambda.
Matrix reconstruct_phi_at(const RepResolvent& r);

/// e^{i phi(f)} by Hermitian eigendecomposition.
Matrix weyl_bridge(PhaseVector f, const MomentumGrid& grid);

/// -i int_0^inf e^{-t} e^{i phi(-t f)} dt on the dyadic Laplace scheme,
/// compared with R(1, f). Returns the deviation in operator norm.
double weyl_laplace_deviation(PhaseVector f, const MomentumGrid& grid,
                              double t_max = 20.0, int nodes = 16);

}  // namespace pointdyn
