// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//   acceptance <config dir> <output dir>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "core/experiment.hpp"
#include "core/propagator.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

using namespace pointdyn;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Run {
  ExperimentResult result;
  json summary;
};

Run run_config(const fs::path& cfg_dir, const fs::path& out_dir, const std::string& name) {
  const ExperimentConfig c = load_config(cfg_dir / (name + ".ini"));
  Run r{run_experiment(c), {}};
  write_outputs(r.result, out_dir / name);
  r.summary = json::parse(r.result.summary);
  return r;
}

int csv_rows(const std::string& csv) {
  int n = -1;  // header
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++n;
  return n;
}

bool check_passes(const json& s, const std::string& name) {
  for (const auto& c : s["checks"])
    if (c["name"] == name) return c["passed"].get<bool>();
  return false;
}

Outcome kernel_recursion() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = make_grid(16, 4.0);
  const auto v = delta_transform(DeltaConfig({{1.0, 0.0}}));
  const double e2 = oracle::kernel_recursion_error(2, 0.3, v, g);
  const double e3 = oracle::kernel_recursion_error(3, 0.3, v, g);
  const double secs = seconds_since(t0);
  return {e2 <= 1e-4 && e3 <= 1e-4 && secs <= 60.0,
          fmt("n=2 rel %.2e, n=3 rel %.2e (<= 1e-4), %.1f s", e2, e3, secs)};
}

Outcome first_order_formula() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int limit = 0;
  for (int sample = 0; sample < 100; ++sample) {
    const std::size_t n = std::size_t{8} << static_cast<int>(u(gen) * 4);
    const auto g = make_grid(n, 0.5 + 9.5 * u(gen));
    const double t = -1.0 + 2.0 * u(gen), alpha = -3.0 + 6.0 * u(gen), x0 = -2.0 + 4.0 * u(gen);
    const auto j = static_cast<Eigen::Index>(u(gen) * n);
    auto k = static_cast<Eigen::Index>(u(gen) * n);
    if (sample % 4 == 0) k = (sample % 8 == 0 || j == 0) ? j : static_cast<Eigen::Index>(n) - j;
    const double p = g.nodes()(j), q = g.nodes()(k);
    if (std::abs(p * p - q * q) < 1e-8) ++limit;
    const cplx got = kernel_first(t, delta_transform(DeltaConfig({{alpha, x0}})), g).entries(j, k);
    const cplx want = oracle::first_kernel_oracle(alpha, x0, t, p, q);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return {worst <= 1e-12 && limit > 0,
          fmt("max error %.2e over 100 points (%g on the limit branch)", worst, limit)};
}

Outcome unitarity_group_law() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = make_grid(256, 32.0);
  const DeltaConfig c({{1.0, 0.0}});
  const DysonOptions opts{1e-6, 40, 16};
  const Propagator u = build_delta_propagator(0.25, c, g, opts);
  const Propagator h = build_delta_propagator(0.125, c, g, opts);
  const Matrix id = Matrix::Identity(256, 256);
  const double defect = spectral_norm(u.matrix.adjoint() * u.matrix - id);
  const double group = spectral_norm(u.matrix - h.matrix * h.matrix);
  const double secs = seconds_since(t0);
  return {defect <= 1e-3 && group <= 5e-3 && secs <= 300.0,
          fmt("defect %.2e (<= 1e-3), group law %.2e (<= 5e-3), %.1f s", defect, group, secs)};
}

Outcome propagator_convergence(const fs::path& cfg, const fs::path& out) {
  const Run one = run_config(cfg, out, "single_delta");
  const Run three = run_config(cfg, out, "three_centers");
  const int rows = csv_rows(one.result.files.at("report.csv"));
  const bool l1 = check_passes(one.summary, "l1_truncation_difference");
  const bool pass = one.result.verdict && three.result.verdict && rows >= 4 && l1;
  const auto& n1 = one.summary["norms"];
  const auto& n3 = three.summary["norms"];
  return {pass, fmt("single %.3g -> %.3g, three centers %.3g -> %.3g", n1.front().get<double>(),
                    n1.back().get<double>(), n3.front().get<double>(), n3.back().get<double>()) +
                    ", rows " + std::to_string(rows) + ", l1 stability " + (l1 ? "ok" : "violated")};
}

Outcome resolvent_convergence(const fs::path& cfg, const fs::path& out) {
  const Run r = run_config(cfg, out, "resolvent");
  const bool strict = r.summary["strictly_decreasing"].get<bool>();
  const bool free_ok = check_passes(r.summary, "free_laplace_vs_diagonal");
  const auto& n = r.summary["norms"];
  return {r.result.verdict && strict && free_ok,
          fmt("norms %.3g -> %.3g", n.front().get<double>(), n.back().get<double>()) +
              (strict ? ", strictly decreasing" : ", not strictly decreasing") +
              (free_ok ? ", free resolvent matches" : ", free resolvent off")};
}

Outcome relations(const fs::path& cfg, const fs::path& out) {
  const Run r = run_config(cfg, out, "relations");
  std::string worst;
  for (const auto& row : r.summary["rows"])
    if (!row["passed"].get<bool>()) worst += " " + row["relation_id"].get<std::string>();
  double strong = 0.0, weak = 0.0;
  for (const auto& row : r.summary["rows"]) {
    const std::string id = row["relation_id"];
    if (id.size() != 1) continue;
    double& m = id < "5" ? strong : weak;
    m = std::max(m, row["residual"].get<double>());
  }
  return {r.result.verdict, fmt("relations 1-4 max %.2e, 5-6 max %.2e", strong, weak) +
                                (worst.empty() ? ", all rows pass" : ", failing:" + worst)};
}

Outcome continuity(const fs::path& cfg, const fs::path& out) {
  const Run r = run_config(cfg, out, "continuity");
  const auto& n = r.summary["norms"];
  return {r.result.verdict, fmt("norms %.3g, %.3g, %.3g", n[0].get<double>(), n[1].get<double>(),
                                n[2].get<double>()) +
                                (r.summary["checks_pass"].get<bool>() ? ", bounds hold"
                                                                       : ", bound violated")};
}

Outcome physics(const fs::path& cfg, const fs::path& out) {
  const Run b = run_config(cfg, out, "bound_state");
  const Run s = run_config(cfg, out, "scattering");
  return {b.result.verdict && s.result.verdict,
          fmt("E = %.4f vs %.1f (%.2f%%), T = %.4f", b.summary["extrapolated_energy"].get<double>(),
              b.summary["oracle_energy"].get<double>(),
              100.0 * b.summary["relative_error"].get<double>(),
              s.summary["transmission"].get<double>()) +
              fmt(" vs %.4f (%.2f%%)", s.summary["oracle_transmission"].get<double>(),
                  100.0 * s.summary["relative_error"].get<double>())};
}

Outcome sign_gate() {
  const GeneratorCheck g = generator_check();
  const bool pass = g.separation >= 10.0 && g.selected == kResolvedConvention;
  return {pass, fmt("(-i)^n residual %.2e, i^n residual %.2e, separation %.0f", g.residual_minus_i,
                    g.residual_plus_i, g.separation) +
                    " -> " + to_string(g.selected)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: acceptance <config dir> <output dir>\n");
    return 2;
  }
  const fs::path cfg = argv[1], out = argv[2];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"kernel recursion oracle", kernel_recursion},
      {"first-order kernel formula", first_order_formula},
      {"unitarity and group law", unitarity_group_law},
      {"propagator norm convergence", [&] { return propagator_convergence(cfg, out); }},
      {"norm-resolvent convergence", [&] { return resolvent_convergence(cfg, out); }},
      {"resolvent-algebra relations", [&] { return relations(cfg, out); }},
      {"finite-rank continuity", [&] { return continuity(cfg, out); }},
      {"physics cross-validation", [&] { return physics(cfg, out); }},
      {"sign-convention gate", sign_gate},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %zu %s: %s  [%s; %.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
