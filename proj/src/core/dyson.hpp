#pragma once

#include <span>
#include <vector>

#include "grid.hpp"
#include "potentials.hpp"

namespace pointdyn {

/// Phase multiplying order n when the series is summed: (-i)^n or i^n.
enum class SignConvention { minus_i, plus_i };

/// Fixed by the generator finite-difference check (see generator_check in
/// propagator.hpp, which re-derives it on every test run).
inline constexpr SignConvention kResolvedConvention = SignConvention::minus_i;

cplx convention_phase(SignConvention c);
const char* to_string(SignConvention c);

enum class TimeScheme { gauss_legendre, uniform_simpson };

struct TimeQuadrature {
  double t = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  TimeScheme scheme = TimeScheme::gauss_legendre;
  /// Running-integral matrix over the nodes (Gauss-Legendre only).
  RealMatrix cumulative;
};

/// Gauss-Legendre: any n >= 1. Simpson: odd n >= 3, nodes include 0 and t.
TimeQuadrature make_time_quadrature(double t, int n,
                                    TimeScheme scheme = TimeScheme::gauss_legendre);

/// (e^{i t theta} - 1) / (i theta), with the series below |t theta| < 1e-6.
cplx phase_integral(double t, double theta);

/// K_{t,(1)}(p, q) = phase_integral(t, p^2 - q^2) V~(p - q) / sqrt(2 pi).
KernelMatrix kernel_first(double t, const PotentialTransform& v,
                          const MomentumGrid& grid);

/// One step of the order recursion by direct quadrature:
///   K_n(p, q) = sum_k w_k sum_z w_z K_{n-1}(s_k)(p, z) e^{i s_k (z^2 - q^2)}
///               V~(z - q) / sqrt(2 pi)
KernelMatrix kernel_next(std::span<const KernelMatrix> prev_at_nodes,
                         const TimeQuadrature& tq, const PotentialTransform& v,
                         const MomentumGrid& grid);

struct DysonSeries {
  MomentumGrid grid;
  double t = 0.0;
  std::vector<KernelMatrix> orders;  // orders[0] is K_{t,(1)}
  SignConvention sign_convention = kResolvedConvention;
  double tail_estimate = 0.0;
  std::vector<double> schur_bounds;
  bool certified = false;
  int doubling_levels = 0;
  int time_nodes = 0;
};

class TailNotCertified : public Error {
 public:
  TailNotCertified(const std::string& what, DysonSeries partial)
      : Error(ErrorCode::tail_not_certified, what),
        partial_(std::move(partial)) {}
  const DysonSeries& partial() const { return partial_; }

 private:
  DysonSeries partial_;
};

/// Sums orders until the Schur bound of the last order is below tol and the
/// ratio of the last two bounds is at most 0.75. The time integrals run on
/// a short Gauss-Legendre panel [0, h], h = t / 2^L with p_max^2 |h| <= 2,
/// and the orders are carried from h to t by the composition law
///   K(2 tau) = K(tau) e^{i tau D} K(tau) e^{-i tau D}   (D = p^2),
/// applied order by order.
DysonSeries dyson_sum(double t, const PotentialTransform& v,
                      const MomentumGrid& grid, double tol, int n_max,
                      int time_nodes = 16);

/// Interaction-picture operator Gamma(t) in weighted form:
///   I + sum_n phase^n (A_n)^*,
/// A_n the weighted order-n kernel. The adjoint puts later times on the
/// left; the recursion integrates the newest time on the right.
Matrix assemble_weighted(const DysonSeries& s, SignConvention c);
KernelMatrix assemble_interaction_operator(const DysonSeries& s);

/// Gamma(s_k) at the Gauss-Legendre nodes of [0, h] plus the rule itself.
/// Requires p_max^2 |h| <= 2; used by the Laplace-transform resolvent.
struct PanelSamples {
  TimeQuadrature rule;
  std::vector<Matrix> gamma;  // weighted, one per node
  Matrix gamma_end;           // at h
  int orders_used = 0;
  double tail_estimate = 0.0;
};
PanelSamples dyson_panel(double h, const PotentialTransform& v,
                         const MomentumGrid& grid, double tol, int n_max,
                         int time_nodes = 16);

/// Largest |h| for which one panel resolves the kinetic phases.
double max_panel_length(const MomentumGrid& grid);

}  // namespace pointdyn
