#include "experiment.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "algebra.hpp"
#include "json.hpp"
#include "propagator.hpp"
#include "resolvent.hpp"

namespace pointdyn {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* to_string(ExperimentType t) {
  switch (t) {
    case ExperimentType::propagator_convergence: return "propagator_convergence";
    case ExperimentType::resolvent_convergence: return "resolvent_convergence";
    case ExperimentType::relations: return "relations";
    case ExperimentType::continuity: return "continuity";
    case ExperimentType::validation_scattering: return "validation_scattering";
    case ExperimentType::validation_bound_state: return "validation_bound_state";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v, const char* f = "%.12e") {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Fields {
 public:
  Fields(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  [[noreturn]] void bad(const std::string& key, const std::string& msg) const {
    const auto it = entries_.find(key);
    std::ostringstream os;
    os << origin_;
    if (it != entries_.end()) os << ':' << it->second.line;
    os << ": field '" << key << "': " << msg;
    fail(ErrorCode::invalid_config, os.str());
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const { return entries_.at(key).value; }

  double real(const std::string& key, double dflt) const {
    if (!has(key)) return dflt;
    return parse_real(key, raw(key));
  }
  long long integer(const std::string& key, long long dflt) const {
    if (!has(key)) return dflt;
    const std::string& s = raw(key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno != 0) bad(key, "expected an integer, got '" + s + "'");
    return v;
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    std::string s = raw(key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(parse_real(key, tok));
    if (out.empty()) bad(key, "empty list");
    return out;
  }
  template <std::size_t K>
  std::array<double, K> tuple(const std::string& key, std::array<double, K> dflt) const {
    if (!has(key)) return dflt;
    const auto v = list(key);
    if (v.size() != K) bad(key, "expected " + std::to_string(K) + " numbers");
    std::array<double, K> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
  }

 private:
  double parse_real(const std::string& key, const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v))
      bad(key, "expected a finite number, got '" + s + "'");
    return v;
  }

  std::map<std::string, Entry> entries_;
  std::string origin_;
};

const std::set<std::string> kKnownKeys = {
    "type", "grid_n", "p_max", "time", "centers", "delta_file", "tail_bound",
    "profile", "eps_list", "tol", "n_max", "time_nodes", "output", "seed",
    "lambda", "t_max", "laplace_nodes", "t0", "dt_list", "psi", "phi",
    "l1_tails", "reference_steps", "mu", "nu", "f", "g", "probes",
    "weak_grid_n", "coarse_grid_n", "coarse_p_max", "k0", "sigma", "x0",
    "t_final"};

ExperimentType parse_type(const Fields& f) {
  if (!f.has("type")) f.bad("type", "required");
  const std::string& s = f.raw("type");
  for (auto t : {ExperimentType::propagator_convergence, ExperimentType::resolvent_convergence,
                 ExperimentType::relations, ExperimentType::continuity,
                 ExperimentType::validation_scattering, ExperimentType::validation_bound_state})
    if (s == to_string(t)) return t;
  f.bad("type", "unknown experiment '" + s + "'");
}

void require_decreasing(const Fields& f, const std::string& key,
                        const std::vector<double>& v) {
  for (double x : v)
    if (!(x > 0.0)) f.bad(key, "entries must be positive");
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) f.bad(key, "must be strictly decreasing");
}

std::string canonical(const std::map<std::string, Entry>& entries) {
  std::string s;
  for (const auto& [k, e] : entries) s += k + '=' + e.value + '\n';
  return s;
}

}  // namespace

std::string ExperimentConfig::digest() const {
  return fnv1a_hex(source_text + delta.serialize());
}

ExperimentConfig parse_config(std::string_view text, const std::string& origin,
                              const fs::path& base_dir) {
  std::map<std::string, Entry> entries;
  bool in_section = false;
  int line_no = 0;
  std::istringstream is{std::string(text)};
  std::string line;
  auto bad_line = [&](const std::string& msg) {
    fail(ErrorCode::invalid_config, origin + ':' + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t != "[experiment]") bad_line("unknown section " + t);
      if (in_section) bad_line("only one [experiment] section is allowed");
      in_section = true;
      continue;
    }
    if (!in_section) bad_line("key outside the [experiment] section");
    const auto eq = t.find('=');
    if (eq == std::string::npos) bad_line("expected key = value");
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (!kKnownKeys.count(key)) bad_line("unknown key '" + key + "'");
    if (entries.count(key))
      bad_line("duplicate key '" + key + "' (first on line " +
               std::to_string(entries[key].line) + ")");
    entries[key] = {value, line_no};
  }
  if (!in_section)
    fail(ErrorCode::invalid_config, origin + ": missing [experiment] section");

  const Fields f(entries, origin);
  ExperimentConfig c;
  c.source_text = canonical(entries);
  c.type = parse_type(f);

  auto positive = [&](const std::string& key, double v) {
    if (!(v > 0.0)) f.bad(key, "must be positive");
    return v;
  };
  auto at_least = [&](const std::string& key, long long v, long long lo) {
    if (v < lo) f.bad(key, "must be at least " + std::to_string(lo));
    return v;
  };

  c.grid_n = static_cast<std::size_t>(at_least("grid_n", f.integer("grid_n", 256), 4));
  c.p_max = positive("p_max", f.real("p_max", 32.0));
  try {
    (void)make_grid(c.grid_n, c.p_max);
  } catch (const Error& e) {
    f.bad("grid_n", e.what());
  }
  c.time = f.real("time", c.time);
  c.tol = positive("tol", f.real("tol", c.tol));
  c.n_max = static_cast<int>(at_least("n_max", f.integer("n_max", c.n_max), 1));
  c.time_nodes = static_cast<int>(at_least("time_nodes", f.integer("time_nodes", c.time_nodes), 2));
  c.seed = static_cast<std::uint64_t>(at_least("seed", f.integer("seed", 0), 0));
  if (f.has("output")) c.output = base_dir / f.raw("output");
  if (f.has("profile")) {
    c.profile = f.raw("profile");
    try {
      (void)profile_by_name(c.profile);
    } catch (const Error& e) {
      f.bad("profile", e.what());
    }
  }

  // interaction
  const double tail = f.real("tail_bound", 0.0);
  if (tail < 0.0) f.bad("tail_bound", "must be nonnegative");
  if (f.has("centers") && f.has("delta_file"))
    f.bad("delta_file", "give either centers or delta_file, not both");
  if (f.has("centers")) {
    std::vector<DeltaCenter> centers;
    std::istringstream cs(f.raw("centers"));
    std::string item;
    while (std::getline(cs, item, ';')) {
      if (trim(item).empty()) continue;
      std::istringstream ps(item);
      DeltaCenter d;
      std::string extra;
      if (!(ps >> d.alpha >> d.x) || (ps >> extra))
        f.bad("centers", "each entry must be 'alpha x', got '" + trim(item) + "'");
      centers.push_back(d);
    }
    if (centers.empty()) f.bad("centers", "no centers given");
    try {
      c.delta = DeltaConfig(std::move(centers), tail);
    } catch (const Error& e) {
      f.bad("centers", e.what());
    }
  } else if (f.has("delta_file")) {
    const fs::path p = base_dir / f.raw("delta_file");
    if (!fs::exists(p)) f.bad("delta_file", "file not found: " + p.string());
    try {
      c.delta = DeltaConfig::load(p.string());
    } catch (const Error& e) {
      f.bad("delta_file", e.what());
    }
  } else if (c.type != ExperimentType::relations) {
    f.bad("centers", "required (or delta_file)");
  }

  c.eps_list = f.list("eps_list");
  require_decreasing(f, "eps_list", c.eps_list);
  c.lambda = f.real("lambda", c.lambda);
  c.t_max = f.real("t_max", 0.0);
  if (c.t_max < 0.0) f.bad("t_max", "must be nonnegative");
  c.laplace_nodes = static_cast<int>(at_least("laplace_nodes", f.integer("laplace_nodes", 16), 2));
  c.t0 = f.real("t0", c.t0);
  c.dt_list = f.list("dt_list");
  require_decreasing(f, "dt_list", c.dt_list);
  c.psi = f.tuple<3>("psi", c.psi);
  c.phi = f.tuple<3>("phi", c.phi);
  if (!(c.psi[2] > 0.0)) f.bad("psi", "width must be positive");
  if (!(c.phi[2] > 0.0)) f.bad("phi", "width must be positive");
  c.l1_tails = f.list("l1_tails");
  if (!c.l1_tails.empty()) {
    if (c.l1_tails.size() != 2) f.bad("l1_tails", "expected two tails");
    require_decreasing(f, "l1_tails", c.l1_tails);
  }
  c.reference_steps = static_cast<int>(at_least("reference_steps", f.integer("reference_steps", 0), 0));
  c.mu = f.real("mu", c.mu);
  c.nu = f.real("nu", c.nu);
  c.f = f.tuple<2>("f", c.f);
  c.g = f.tuple<2>("g", c.g);
  c.probes = static_cast<int>(at_least("probes", f.integer("probes", c.probes), 1));
  c.weak_grid_n = static_cast<std::size_t>(at_least("weak_grid_n", f.integer("weak_grid_n", 512), 4));
  c.coarse_grid_n = static_cast<std::size_t>(at_least("coarse_grid_n", f.integer("coarse_grid_n", 0), 0));
  c.coarse_p_max = positive("coarse_p_max", f.real("coarse_p_max", c.coarse_p_max));
  c.k0 = f.real("k0", c.k0);
  c.sigma = positive("sigma", f.real("sigma", c.sigma));
  c.x0 = f.real("x0", c.x0);
  c.t_final = f.real("t_final", c.t_final);

  // per-experiment requirements
  switch (c.type) {
    case ExperimentType::propagator_convergence:
    case ExperimentType::resolvent_convergence:
      if (c.eps_list.size() < 2) f.bad("eps_list", "needs at least two values");
      break;
    case ExperimentType::continuity:
      if (c.dt_list.size() < 2) f.bad("dt_list", "needs at least two values");
      break;
    case ExperimentType::relations:
      if (c.lambda == 0.0) f.bad("lambda", "must be nonzero");
      if (c.mu == 0.0) f.bad("mu", "must be nonzero");
      if (c.lambda + c.mu == 0.0) f.bad("mu", "lambda + mu must be nonzero");
      if (c.nu <= 0.0) f.bad("nu", "must be positive");
      break;
    case ExperimentType::validation_bound_state:
      if (c.eps_list.size() < 2) f.bad("eps_list", "needs at least two values");
      [[fallthrough]];
    case ExperimentType::validation_scattering:
      if (c.delta.size() != 1) f.bad("centers", "validation needs exactly one center");
      if ((c.type == ExperimentType::validation_bound_state) != (c.delta.centers()[0].alpha < 0.0))
        f.bad("centers", "bound-state runs need alpha < 0, scattering runs alpha > 0");
      break;
  }
  if (c.type == ExperimentType::resolvent_convergence && c.lambda == 0.0)
    f.bad("lambda", "must be nonzero");
  if (c.type == ExperimentType::resolvent_convergence && c.t_max > 0.0 &&
      std::abs(c.lambda) * c.t_max < 20.0)
    f.bad("t_max", "|lambda| t_max must be at least 20");
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string(), path.parent_path());
}

double transmission_probability(double alpha, double k) {
  // psi'(0+) - psi'(0-) = alpha psi(0) with e^{ikx} + r e^{-ikx} | t e^{ikx}
  // gives t = 2ik / (2ik - alpha).
  const double a = 4.0 * k * k;
  return a / (a + alpha * alpha);
}

double bound_state_energy(double alpha) {
  if (!(alpha < 0.0)) fail(ErrorCode::invalid_argument, "bound state needs alpha < 0");
  // e^{-kappa |x|}: -2 kappa = alpha
  const double kappa = -0.5 * alpha;
  return -kappa * kappa;
}

namespace {

DysonOptions dyson_options(const ExperimentConfig& c) {
  return DysonOptions{c.tol, c.n_max, c.time_nodes};
}

json checks_json(const std::vector<CheckRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back({{"name", r.name}, {"value", r.value}, {"bound", r.bound},
                 {"passed", r.passed}, {"report_only", r.report_only}});
  return a;
}

json base_summary(const ExperimentConfig& c) {
  return json{{"library", "pointdyn"},
              {"version", POINTDYN_VERSION},
              {"experiment", to_string(c.type)},
              {"config_digest", c.digest()},
              {"grid", {{"n_points", c.grid_n}, {"p_max", c.p_max}}},
              {"seed", c.seed}};
}

ExperimentResult finish(json summary, bool verdict, std::map<std::string, std::string> files,
                        const ExperimentConfig& c) {
  ExperimentResult r;
  r.experiment = to_string(c.type);
  r.verdict = verdict;
  summary["verdict"] = verdict ? "pass" : "fail";
  json names = json::array();
  for (const auto& [name, _] : files) names.push_back(name);
  names.push_back("summary.json");
  summary["files"] = names;
  r.summary = summary.dump(2) + "\n";
  files["summary.json"] = r.summary;
  r.files = std::move(files);
  return r;
}

ExperimentResult from_report(const ExperimentConfig& c, const ConvergenceReport& rep,
                             const std::string& title, const std::string& y_label) {
  json s = base_summary(c);
  s["parameter"] = rep.parameter_name;
  s["values"] = rep.values;
  s["norms"] = rep.norms;
  s["floor"] = rep.floor;
  s["monotone_with_slack"] = monotone_within_slack(rep.values, rep.norms, rep.floor);
  s["strictly_decreasing"] = rep.strictly_decreasing;
  s["checks_pass"] = rep.checks_pass();
  s["checks"] = checks_json(rep.checks);
  std::map<std::string, std::string> files;
  files["report.csv"] = report_csv(rep);
  files["checks.csv"] = checks_csv(rep);
  files["plot.svg"] = plot_svg(title, rep.parameter_name, y_label,
                               {{"measured", rep.values, rep.norms}}, rep.floor);
  return finish(std::move(s), rep.verdict, std::move(files), c);
}

ExperimentResult run_propagator(const ExperimentConfig& c) {
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const auto opts = dyson_options(c);
  const auto profile = profile_by_name(c.profile);
  ConvergenceReport rep = convergence_study(c.time, c.delta, profile, c.eps_list, grid, opts);

  const Propagator full = build_delta_propagator(c.time, c.delta, grid, opts);
  const Propagator half = build_delta_propagator(0.5 * c.time, c.delta, grid, opts);
  const double group = spectral_norm(full.matrix - half.matrix * half.matrix);
  rep.checks.push_back({"delta_group_law_residual", group, 5e-3, group <= 5e-3, false});

  if (c.l1_tails.size() == 2) {
    const L1Stability s = l1_stability(c.time, geometric_sequence(), c.l1_tails[0],
                                       c.l1_tails[1], grid, opts);
    const double bound = 10.0 * s.tail_gap * std::abs(c.time);
    rep.checks.push_back({"l1_truncation_difference", s.difference, bound,
                          s.difference <= bound, false});
    rep.checks.push_back({"l1_centers_coarse", static_cast<double>(s.coarse.size()), 0, true, true});
    rep.checks.push_back({"l1_centers_fine", static_cast<double>(s.fine.size()), 0, true, true});
  }
  if (c.reference_steps > 0) {
    const double eps = c.eps_list[std::min<std::size_t>(1, c.eps_list.size() - 1)];
    const Propagator dyson = build_mollified_propagator(c.time, c.delta, profile, eps, grid, opts);
    const Propagator ref = reference_propagator(c.time, c.delta, profile, eps, grid, c.reference_steps);
    rep.checks.push_back({"split_step_reference_distance", distance(dyson, ref),
                          rep.norms.front(), true, true});
  }
  rep.decide();
  return from_report(c, rep, "||U_delta(t) - U_eps(t)||", "operator norm difference");
}

ExperimentResult run_resolvent(const ExperimentConfig& c) {
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const double t_max = c.t_max > 0.0 ? c.t_max : default_t_max(c.lambda);
  const auto profile = profile_by_name(c.profile);
  ConvergenceReport rep = norm_resolvent_convergence(c.lambda, c.delta, profile, c.eps_list,
                                                     grid, t_max, c.laplace_nodes);

  const PropagatorFamily free{grid, zero_transform(), laplace_options(), Provenance::free, ""};
  const ResolventOperator r0 = resolvent_from_propagator(c.lambda, free, t_max, c.laplace_nodes);
  Vector exact(grid.size());
  for (Eigen::Index j = 0; j < exact.size(); ++j) {
    const double p = grid.nodes()(j);
    exact(j) = 1.0 / cplx(p * p, -c.lambda);
  }
  const double err = spectral_norm(r0.matrix - Matrix(exact.asDiagonal()));
  rep.checks.push_back({"free_laplace_vs_diagonal", err, 1e-6, err <= 1e-6, false});
  rep.decide();
  return from_report(c, rep, "||R_delta - R_eps||", "resolvent norm difference");
}

ExperimentResult run_continuity(const ExperimentConfig& c) {
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const auto family = delta_family(c.delta, grid, dyson_options(c));
  const StateVector psi = gaussian_state(grid, c.psi[0], c.psi[1], c.psi[2]);
  const StateVector phi = gaussian_state(grid, c.phi[0], c.phi[1], c.phi[2]);
  ConvergenceReport rep = finite_rank_continuity(family, psi, phi, c.t0, c.dt_list);
  return from_report(c, rep, "||tau_t(T) - tau_t0(T)||", "operator norm difference");
}

struct RelationRow {
  std::string id;
  double residual = 0.0;
  double threshold = 0.0;
  std::size_t grid_n = 0;
  bool passed = false;
};

ExperimentResult run_relations(const ExperimentConfig& c) {
  RelationParams prm;
  prm.lambda = c.lambda;
  prm.mu = c.mu;
  prm.nu = c.nu;
  prm.f = {c.f[0], c.f[1]};
  prm.g = {c.g[0], c.g[1]};
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const MomentumGrid weak = make_grid(c.weak_grid_n, c.p_max);

  std::vector<RelationRow> rows;
  const auto probes = gaussian_probes(grid, c.probes, c.seed);
  for (int k = 1; k <= 4; ++k) {
    const auto r = check_relation(k, prm, grid, probes);
    rows.push_back({std::to_string(k), r.residual, r.threshold, grid.size(), r.passed});
  }
  for (int k = 5; k <= 6; ++k) {
    const auto ref = relation_refinement(k, prm, weak, c.probes, c.seed);
    rows.push_back({std::to_string(k), ref.coarse.residual, ref.coarse.threshold,
                    weak.size(), ref.coarse.passed});
    rows.push_back({std::to_string(k) + "_refined", ref.fine.residual,
                    std::max(0.5 * ref.coarse.residual, 1e-8), 2 * weak.size(), ref.halved});
  }
  if (c.coarse_grid_n > 0) {
    // box held fixed: n and p_max both doubled, so the position spacing halves
    const MomentumGrid coarse = make_grid(c.coarse_grid_n, c.coarse_p_max);
    const MomentumGrid finer = make_grid(2 * c.coarse_grid_n, 2.0 * c.coarse_p_max);
    const auto pc = gaussian_probes(coarse, c.probes, c.seed);
    const auto pf = gaussian_probes(finer, c.probes, c.seed);
    for (int k = 5; k <= 6; ++k) {
      const auto a = check_relation(k, prm, coarse, pc);
      const auto b = check_relation(k, prm, finer, pf);
      rows.push_back({std::to_string(k) + "_coarse", a.residual, a.residual, coarse.size(), true});
      rows.push_back({std::to_string(k) + "_coarse_refined", b.residual, 0.5 * a.residual,
                      finer.size(), b.residual <= 0.5 * a.residual});
    }
  }
  double recon = 0.0;
  for (PhaseVector v : {prm.f, prm.g}) {
    const RepResolvent r = build_resolvent(1.0, v, grid);
    recon = std::max(recon, spectral_norm(reconstruct_phi(r) - build_phase_operator(v, grid)));
  }
  rows.push_back({"reconstruction", recon, 1e-8, grid.size(), recon <= 1e-8});
  const double weyl = std::max(weyl_laplace_deviation(prm.f, grid),
                               weyl_laplace_deviation(prm.g, grid));
  rows.push_back({"weyl_laplace", weyl, 1e-4, grid.size(), weyl <= 1e-4});

  std::ostringstream params;
  params << "lambda=" << fmt(c.lambda, "%g") << ";mu=" << fmt(c.mu, "%g")
         << ";nu=" << fmt(c.nu, "%g") << ";f=" << fmt(c.f[0], "%g") << ':'
         << fmt(c.f[1], "%g") << ";g=" << fmt(c.g[0], "%g") << ':' << fmt(c.g[1], "%g")
         << ";probes=" << c.probes << ";seed=" << c.seed;

  std::ostringstream csv;
  csv << "relation_id,params,residual,threshold,grid_n,verdict\n";
  bool all = true;
  json jrows = json::array();
  PlotSeries measured{"residual", {}, {}}, bounds{"threshold", {}, {}};
  for (const auto& r : rows) {
    all = all && r.passed;
    csv << r.id << ',' << params.str() << ',' << fmt(r.residual) << ','
        << fmt(r.threshold) << ',' << r.grid_n << ',' << (r.passed ? "pass" : "fail") << '\n';
    jrows.push_back({{"relation_id", r.id}, {"residual", r.residual},
                     {"threshold", r.threshold}, {"grid_n", r.grid_n}, {"passed", r.passed}});
    if (r.id.size() == 1) {
      const double k = r.id[0] - '0';
      measured.x.push_back(k);
      measured.y.push_back(std::max(r.residual, 1e-17));
      bounds.x.push_back(k);
      bounds.y.push_back(r.threshold);
    }
  }
  json s = base_summary(c);
  s["params"] = params.str();
  s["rows"] = jrows;
  std::map<std::string, std::string> files;
  files["report.csv"] = csv.str();
  files["plot.svg"] = plot_svg("relation residuals", "relation", "residual", {measured, bounds});
  return finish(std::move(s), all, std::move(files), c);
}

struct ValidationRow {
  std::string quantity;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;  // relative; 0 marks a report-only row
  bool passed = true;
};

std::string validation_csv(const std::vector<ValidationRow>& rows) {
  std::ostringstream os;
  os << "quantity,value,reference,relative_error,tolerance,passed\n";
  for (const auto& r : rows) {
    const double rel = r.reference != 0.0 ? std::abs(r.value - r.reference) / std::abs(r.reference)
                                          : std::abs(r.value);
    os << r.quantity << ',' << fmt(r.value) << ',' << fmt(r.reference) << ',' << fmt(rel)
       << ',' << fmt(r.tolerance) << ',' << (r.passed ? 1 : 0) << '\n';
  }
  return os.str();
}

double lowest_eigenvalue(const PotentialTransform& v, const MomentumGrid& grid) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian_matrix(v, grid),
                                                 Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

ExperimentResult bound_state(const ExperimentConfig& c) {
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const double alpha = c.delta.centers()[0].alpha;
  const double exact = bound_state_energy(alpha);
  const auto profile = profile_by_name(c.profile);
  std::vector<ValidationRow> rows;
  std::vector<double> energies;
  for (double eps : c.eps_list) {
    energies.push_back(lowest_eigenvalue(mollified_transform(c.delta, profile, eps), grid));
    rows.push_back({"eigenvalue_eps_" + fmt(eps, "%g"), energies.back(), exact, 0.0, true});
  }
  // first-order extrapolation in eps from the two finest values
  const std::size_t n = energies.size();
  const double e1 = c.eps_list[n - 2], e2 = c.eps_list[n - 1];
  const double extrapolated = energies[n - 1] + (energies[n - 1] - energies[n - 2]) * e2 / (e1 - e2);
  const double rel = std::abs(extrapolated - exact) / std::abs(exact);
  rows.push_back({"extrapolated_energy", extrapolated, exact, 0.02, rel <= 0.02});
  rows.push_back({"delta_grid_eigenvalue", lowest_eigenvalue(delta_transform(c.delta), grid),
                  exact, 0.0, true});

  json s = base_summary(c);
  s["alpha"] = alpha;
  s["oracle_energy"] = exact;
  s["extrapolated_energy"] = extrapolated;
  s["relative_error"] = rel;
  s["tolerance"] = 0.02;
  std::map<std::string, std::string> files;
  files["report.csv"] = validation_csv(rows);
  std::vector<double> gap;
  for (double e : energies) gap.push_back(std::abs(e - exact));
  files["plot.svg"] = plot_svg("|E(eps) - E_exact|", "epsilon", "energy error",
                               {{"mollified", c.eps_list, gap}});
  return finish(std::move(s), rel <= 0.02, std::move(files), c);
}

ExperimentResult scattering(const ExperimentConfig& c) {
  const MomentumGrid grid = make_grid(c.grid_n, c.p_max);
  const DeltaCenter center = c.delta.centers()[0];
  const double oracle = transmission_probability(center.alpha, c.k0);
  const StateVector psi0 = gaussian_state(grid, center.x + c.x0, c.k0, c.sigma);
  const Propagator u = build_delta_propagator(c.t_final, c.delta, grid, dyson_options(c));
  const StateVector psi1 = u.apply(psi0);

  const RealVector x = grid.positions();
  const RealVector w = grid.position_weights();
  auto density = [&](const StateVector& s) {
    const Vector a = fourier_inverse(s).amplitudes;
    RealVector d(a.size());
    for (Eigen::Index j = 0; j < a.size(); ++j) d(j) = std::norm(a(j));
    return d;
  };
  auto right_of = [&](const RealVector& d) {
    double p = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j)
      if (x(j) > center.x) p += w(j) * d(j);
    return p;
  };
  const RealVector d0 = density(psi0), d1 = density(psi1);
  const double transmitted = right_of(d1);
  const double rel = std::abs(transmitted - oracle) / oracle;
  std::vector<ValidationRow> rows;
  rows.push_back({"transmission_probability", transmitted, oracle, 0.05, rel <= 0.05});
  rows.push_back({"initial_weight_right", right_of(d0), 0.0, 0.0, true});
  rows.push_back({"norm_after", psi1.norm(), 1.0, 0.0, true});
  rows.push_back({"unitarity_defect", u.unitarity_defect, 0.0, 0.0, true});
  rows.push_back({"composition_steps", static_cast<double>(u.steps), 0.0, 0.0, true});

  json s = base_summary(c);
  s["alpha"] = center.alpha;
  s["k0"] = c.k0;
  s["oracle_transmission"] = oracle;
  s["transmission"] = transmitted;
  s["relative_error"] = rel;
  s["tolerance"] = 0.05;
  std::map<std::string, std::string> files;
  files["report.csv"] = validation_csv(rows);
  std::vector<double> xs(x.data(), x.data() + x.size());
  files["plot.svg"] = plot_svg("position density", "x", "|psi(x)|^2",
                               {{"t = 0", xs, {d0.data(), d0.data() + d0.size()}},
                                {"t = t_final", xs, {d1.data(), d1.data() + d1.size()}}},
                               0.0, false);
  return finish(std::move(s), rel <= 0.05, std::move(files), c);
}

}  // namespace

ExperimentResult validate_physics(const ExperimentConfig& c) {
  if (c.delta.size() != 1)
    fail(ErrorCode::invalid_config, "validate: exactly one center is required");
  return c.delta.centers()[0].alpha < 0.0 ? bound_state(c) : scattering(c);
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  switch (c.type) {
    case ExperimentType::propagator_convergence: return run_propagator(c);
    case ExperimentType::resolvent_convergence: return run_resolvent(c);
    case ExperimentType::relations: return run_relations(c);
    case ExperimentType::continuity: return run_continuity(c);
    case ExperimentType::validation_scattering:
    case ExperimentType::validation_bound_state: return validate_physics(c);
  }
  fail(ErrorCode::internal, "run_experiment: unknown type");
}

void write_outputs(const ExperimentResult& r, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, text] : r.files) {
    const fs::path target = dir / name;
    const fs::path tmp = dir / ("." + name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << text;
      if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) fail(ErrorCode::io, "cannot rename onto " + target.string() + ": " + ec.message());
  }
}

namespace {

std::vector<std::vector<std::string>> split_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool as_number(const std::string& s, double& v) {
  if (s.empty()) return false;
  char* end = nullptr;
  v = std::strtod(s.c_str(), &end);
  return *end == '\0';
}

}  // namespace

bool csv_equivalent(const std::string& expected, const std::string& actual,
                    double rel_tol, double abs_tol, std::string* why) {
  const auto a = split_csv(expected), b = split_csv(actual);
  auto say = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (a.size() != b.size())
    return say("row count " + std::to_string(b.size()) + " != " + std::to_string(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return say("column count differs on row " + std::to_string(i));
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      double x = 0, y = 0;
      if (as_number(a[i][j], x) && as_number(b[i][j], y)) {
        if (std::abs(x - y) > abs_tol + rel_tol * std::abs(x))
          return say("row " + std::to_string(i) + " column " + std::to_string(j) + ": " +
                     b[i][j] + " vs expected " + a[i][j]);
      } else if (a[i][j] != b[i][j]) {
        return say("row " + std::to_string(i) + " column " + std::to_string(j) + ": '" +
                   b[i][j] + "' vs expected '" + a[i][j] + "'");
      }
    }
  }
  return true;
}

GoldenOutcome golden_check(const fs::path& dir, bool update) {
  if (!fs::is_directory(dir)) fail(ErrorCode::io, "not a directory: " + dir.string());
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".ini") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  GoldenOutcome out;
  for (const auto& p : configs) {
    const std::string stem = p.stem().string();
    const fs::path expected_path = dir / (stem + ".report.csv");
    ++out.checked;
    std::string produced;
    try {
      produced = run_experiment(load_config(p)).files.at("report.csv");
    } catch (const std::exception& e) {
      ++out.failed;
      out.messages.push_back(stem + ": error: " + e.what());
      continue;
    }
    if (update) {
      std::ofstream(expected_path, std::ios::binary | std::ios::trunc) << produced;
      out.messages.push_back(stem + ": updated");
      continue;
    }
    std::ifstream in(expected_path, std::ios::binary);
    if (!in) {
      ++out.failed;
      out.messages.push_back(stem + ": missing " + expected_path.filename().string());
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string why;
    if (csv_equivalent(ss.str(), produced, 1e-6, 1e-9, &why)) {
      out.messages.push_back(stem + ": ok");
    } else {
      ++out.failed;
      out.messages.push_back(stem + ": mismatch: " + why);
    }
  }
  return out;
}

}  // namespace pointdyn
