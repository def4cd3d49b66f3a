#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "potentials.hpp"

namespace pointdyn {

enum class ExperimentType {
  propagator_convergence,
  resolvent_convergence,
  relations,
  continuity,
  validation_scattering,
  validation_bound_state,
};
const char* to_string(ExperimentType t);

/// One [experiment] section of a flat key = value file.
struct ExperimentConfig {
  ExperimentType type = ExperimentType::propagator_convergence;
  std::size_t grid_n = 256;
  double p_max = 32.0;
  double time = 0.25;
  DeltaConfig delta;
  std::string profile = "bump";
  std::vector<double> eps_list;
  double tol = 1e-6;
  int n_max = 40;
  int time_nodes = 16;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;

  // resolvent_convergence
  double lambda = 1.0;
  double t_max = 0.0;  // 0: 20 / |lambda|
  int laplace_nodes = 16;
  // continuity
  double t0 = 0.1;
  std::vector<double> dt_list;
  std::array<double, 3> psi{0.0, 0.0, 1.0};  // x0 k0 sigma
  std::array<double, 3> phi{0.0, 0.0, 1.0};
  // propagator_convergence extras
  std::vector<double> l1_tails;  // two tails: geometric l1 stability row
  int reference_steps = 0;       // > 0: split-step cross-check at eps_list[1]
  // relations
  double mu = 1.0;
  double nu = 3.0;
  std::array<double, 2> f{1.0, 0.0};
  std::array<double, 2> g{0.0, 1.0};
  int probes = 8;
  std::size_t weak_grid_n = 512;
  std::size_t coarse_grid_n = 0;  // optional extra refinement row
  double coarse_p_max = 4.0;
  // validation_scattering
  double k0 = 2.0;
  double sigma = 5.0;
  double x0 = -25.0;
  double t_final = 12.5;

  std::string source_text;
  /// FNV-1a of the canonicalised key/value set.
  std::string digest() const;
};

/// Parses config text. `origin` names the source in diagnostics and
/// `base_dir` resolves relative file references.
ExperimentConfig parse_config(std::string_view text, const std::string& origin,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentResult {
  std::string experiment;
  bool verdict = false;
  std::map<std::string, std::string> files;  // file name -> contents
  std::string summary;                       // same text as summary.json
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
/// Bound state for alpha < 0, transmission for alpha > 0; single center.
ExperimentResult validate_physics(const ExperimentConfig& cfg);

/// Writes every file through a temporary name and a rename.
void write_outputs(const ExperimentResult& r, const std::filesystem::path& dir);

struct GoldenOutcome {
  int checked = 0;
  int failed = 0;
  std::vector<std::string> messages;
};
/// Runs every *.ini in dir and compares the produced report.csv with
/// <stem>.report.csv next to it (relative 1e-6, absolute 1e-9). With
/// update, rewrites the expected files instead.
GoldenOutcome golden_check(const std::filesystem::path& dir, bool update = false);

/// Compares two CSV texts cell by cell; numeric cells with tolerance.
bool csv_equivalent(const std::string& expected, const std::string& actual,
                    double rel_tol, double abs_tol, std::string* why = nullptr);

/// |t(k)|^2 for a single point interaction of strength alpha (H0 = -d^2/dx^2).
double transmission_probability(double alpha, double k);
/// Bound-state energy -alpha^2 / 4 for alpha < 0.
double bound_state_energy(double alpha);

}  // namespace pointdyn
