#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grid.hpp"

namespace pointdyn {

struct DeltaCenter {
  double alpha = 0.0;
  double x = 0.0;
};

/// Point-interaction data {(alpha_i, x_i)} plus the l1 mass of any dropped
/// tail. Centers are pairwise distinct and every alpha_i is nonzero.
class DeltaConfig {
 public:
  DeltaConfig() = default;
  explicit DeltaConfig(std::vector<DeltaCenter> centers,
                       double tail_bound = 0.0);

  const std::vector<DeltaCenter>& centers() const { return centers_; }
  double tail_bound() const { return tail_bound_; }
  double l1_mass() const { return l1_mass_; }
  bool empty() const { return centers_.empty(); }
  std::size_t size() const { return centers_.size(); }

  /// Text form: header "tail_bound t", then one "alpha x" line per center.
  /// Blank lines and '#' comments are ignored when parsing.
  std::string serialize() const;
  static DeltaConfig parse(std::string_view text);
  static DeltaConfig load(const std::string& path);

  /// True when the centers are invariant under x -> -x with equal strengths.
  bool is_parity_symmetric(double tol = 1e-12) const;

 private:
  std::vector<DeltaCenter> centers_;
  double tail_bound_ = 0.0;
  double l1_mass_ = 0.0;
};

/// Named nonnegative bump shape on [-1, 1]. Normalisation to unit mass is done
/// by the Mollifier.
struct MollifierProfile {
  std::string name;
  std::function<double(double)> shape;
};

/// exp(-1 / (1 - x^2)) on |x| < 1.
MollifierProfile standard_bump();
/// Known profiles: "bump", "bump2" (exp(-2 / (1 - x^2))).
MollifierProfile profile_by_name(std::string_view name);

/// W_eps(x) = W((x - center) / eps) / eps with W of unit mass.
class Mollifier {
 public:
  Mollifier(MollifierProfile profile, double center, double epsilon);

  double operator()(double x) const;
  /// Unit-scale transform w(u) = integral of W(x) exp(-i u x) dx, by the
  /// cached 64-node Gauss-Legendre rule.
  cplx unit_transform(double u) const;
  /// Integral of W by the cached rule (1 after normalisation).
  double mass() const;

  const MollifierProfile& profile() const { return *profile_; }
  double center() const { return center_; }
  double epsilon() const { return epsilon_; }

 private:
  std::shared_ptr<const MollifierProfile> profile_;
  double center_;
  double epsilon_;
  double normalisation_;
  std::vector<double> nodes_;
  std::vector<double> weighted_shape_;  // w_q * W(x_q), unit mass
};

/// Fourier transform V~(p) of an interaction, with a uniform bound on |V~|.
class PotentialTransform {
 public:
  PotentialTransform() = default;
  PotentialTransform(std::function<cplx(double)> evaluator, double sup_bound,
                     std::string label);

  cplx operator()(double p) const { return evaluator_ ? evaluator_(p) : 0.0; }
  double sup_bound() const { return sup_bound_; }
  bool is_zero() const { return !evaluator_; }
  const std::string& label() const { return label_; }

  PotentialTransform scaled(double c) const;
  friend PotentialTransform operator+(const PotentialTransform& a,
                                      const PotentialTransform& b);

 private:
  std::function<cplx(double)> evaluator_;
  double sup_bound_ = 0.0;
  std::string label_ = "zero";
};

PotentialTransform zero_transform();

/// V~(p) = (2 pi)^(-1/2) sum_m alpha_m exp(-i p x_m).
PotentialTransform delta_transform(const DeltaConfig& cfg);

/// W~_eps(p) = (2 pi)^(-1/2) exp(-i p x0) w(eps p).
PotentialTransform mollifier_transform(const Mollifier& m);

/// sum_i alpha_i W~_{eps,i}: every center smeared with the same eps.
PotentialTransform mollified_transform(const DeltaConfig& cfg,
                                       const MollifierProfile& profile,
                                       double epsilon);

/// Samples V~(p_j - p_k) / sqrt(2 pi) on the difference lattice of the grid;
/// entry (j - k + n - 1) holds the value for p_j - p_k.
Vector potential_on_differences(const PotentialTransform& v,
                                const MomentumGrid& grid);

/// Summable coupling sequence with an exact tail formula:
/// tail_after(n) = sum_{i > n} |alpha_i| (1-based term index).
struct SummableSequence {
  std::function<DeltaCenter(std::size_t)> term;
  std::function<double(std::size_t)> tail_after;
};

/// Keeps the shortest prefix whose dropped l1 mass is at most delta.
DeltaConfig truncate_l1(const SummableSequence& seq, double delta);
/// Finite input: returned unchanged with tail_bound 0.
DeltaConfig truncate_l1(std::span<const DeltaCenter> finite, double delta);

}  // namespace pointdyn
