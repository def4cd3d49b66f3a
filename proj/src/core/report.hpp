#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pointdyn {

/// Extra result line attached to a report: a named measured quantity, the
/// bound it is compared against, and whether it counts toward the verdict.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool passed = true;
  bool report_only = false;
};

struct ConvergenceReport {
  std::string parameter_name = "epsilon";
  std::vector<double> values;
  std::vector<double> norms;
  double floor = 0.0;
  bool verdict = false;
  bool strictly_decreasing = false;

  // metadata
  std::size_t grid_n = 0;
  double p_max = 0.0;
  double t = 0.0;
  double lambda = 0.0;  // resolvent studies only
  double t_max = 0.0;
  int laplace_nodes = 0;
  std::string config;
  std::vector<int> orders_used;
  std::vector<double> tail_estimates;

  std::vector<CheckRow> checks;

  /// Recomputes verdict and strictly_decreasing from values/norms/floor and
  /// the non-report-only checks.
  void decide();
  bool checks_pass() const;
};

/// Monotone-decrease rule: norms[k] <= 1.05 norms[k-1] for every k whose
/// predecessor is still above 3 * floor; values must strictly decrease.
bool monotone_within_slack(const std::vector<double>& values,
                           const std::vector<double>& norms, double floor);
/// Same walk without slack: norms[k] < norms[k-1] above the floor zone.
bool strictly_decreasing_until_floor(const std::vector<double>& norms,
                                     double floor);

std::string report_csv(const ConvergenceReport& r);
std::string checks_csv(const ConvergenceReport& r);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
/// Standalone SVG line plot, log-log by default.
std::string plot_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<PlotSeries>& series,
                       double floor_line = 0.0, bool log_axes = true);

}  // namespace pointdyn
