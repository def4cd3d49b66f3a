#include "pointdyn/pointdyn.h"

#include <Eigen/Core>
#include <cstdlib>
#include <new>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "core/experiment.hpp"
#include "core/propagator.hpp"

using namespace pointdyn;

struct pd_grid {
  MomentumGrid grid;
};
struct pd_delta_config {
  DeltaConfig cfg;
};
struct pd_propagator {
  Propagator u;
};
struct pd_experiment {
  ExperimentConfig cfg;
  std::string digest;
  std::string output;
  std::optional<ExperimentResult> result;
};

namespace {

thread_local std::string last_error;

pd_status set_error(pd_status s, const char* what) {
  last_error = what;
  return s;
}

template <class F>
pd_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const Error& e) {
    return set_error(static_cast<pd_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(PD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(PD_ERR_INTERNAL, e.what());
  }
}

#define PD_REQUIRE(cond, msg) \
  if (!(cond)) return set_error(PD_ERR_INVALID_ARGUMENT, msg)

DysonOptions to_options(const pd_dyson_options* o) {
  if (!o) return {};
  return DysonOptions{o->tol, o->n_max, o->time_nodes};
}

}  // namespace

extern "C" {

const char* pd_version(void) { return POINTDYN_VERSION; }
const char* pd_last_error(void) { return last_error.c_str(); }

const char* pd_status_name(pd_status s) {
  switch (s) {
    case PD_OK: return "ok";
    case PD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PD_ERR_INVALID_CONFIG: return "invalid_config";
    case PD_ERR_TAIL_NOT_CERTIFIED: return "tail_not_certified";
    case PD_ERR_GRID_MISMATCH: return "grid_mismatch";
    case PD_ERR_NUMERICAL: return "numerical";
    case PD_ERR_IO: return "io";
    case PD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

pd_status pd_set_num_threads(int n) {
#ifdef _OPENMP
  static const int initial = omp_get_max_threads();
  const int k = n > 0 ? n : initial;
  omp_set_num_threads(k);
  Eigen::setNbThreads(k);
#else
  Eigen::setNbThreads(n > 0 ? n : 1);
#endif
  return PD_OK;
}

int pd_threads_from_env(void) {
  if (const char* v = std::getenv("POINTDYN_NUM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && n > 0) pd_set_num_threads(static_cast<int>(n));
  }
  return Eigen::nbThreads();
}

pd_status pd_grid_create(size_t n_points, double p_max, pd_grid** out) {
  PD_REQUIRE(out, "pd_grid_create: out is NULL");
  return guarded([&] {
    *out = new pd_grid{make_grid(n_points, p_max)};
    return PD_OK;
  });
}
void pd_grid_destroy(pd_grid* g) { delete g; }
size_t pd_grid_size(const pd_grid* g) { return g ? g->grid.size() : 0; }
double pd_grid_p_max(const pd_grid* g) { return g ? g->grid.p_max() : 0.0; }

pd_status pd_grid_nodes(const pd_grid* g, double* out) {
  PD_REQUIRE(g && out, "pd_grid_nodes: NULL argument");
  for (std::size_t j = 0; j < g->grid.size(); ++j)
    out[j] = g->grid.nodes()(static_cast<Eigen::Index>(j));
  return PD_OK;
}

pd_status pd_delta_config_create(const double* alpha, const double* x, size_t n,
                                 double tail_bound, pd_delta_config** out) {
  PD_REQUIRE(out, "pd_delta_config_create: out is NULL");
  PD_REQUIRE(n == 0 || (alpha && x), "pd_delta_config_create: NULL arrays");
  return guarded([&] {
    std::vector<DeltaCenter> c(n);
    for (size_t i = 0; i < n; ++i) c[i] = {alpha[i], x[i]};
    *out = new pd_delta_config{DeltaConfig(std::move(c), tail_bound)};
    return PD_OK;
  });
}

pd_status pd_delta_config_parse(const char* text, pd_delta_config** out) {
  PD_REQUIRE(text && out, "pd_delta_config_parse: NULL argument");
  return guarded([&] {
    *out = new pd_delta_config{DeltaConfig::parse(text)};
    return PD_OK;
  });
}
void pd_delta_config_destroy(pd_delta_config* c) { delete c; }
size_t pd_delta_config_size(const pd_delta_config* c) { return c ? c->cfg.size() : 0; }

pd_dyson_options pd_dyson_defaults(void) {
  const DysonOptions d;
  return pd_dyson_options{d.tol, d.n_max, d.time_nodes};
}

pd_status pd_propagator_delta(const pd_delta_config* c, const pd_grid* g, double t,
                              const pd_dyson_options* opts, pd_propagator** out) {
  PD_REQUIRE(c && g && out, "pd_propagator_delta: NULL argument");
  return guarded([&] {
    *out = new pd_propagator{build_delta_propagator(t, c->cfg, g->grid, to_options(opts))};
    return PD_OK;
  });
}

pd_status pd_propagator_mollified(const pd_delta_config* c, const char* profile,
                                  double epsilon, const pd_grid* g, double t,
                                  const pd_dyson_options* opts, pd_propagator** out) {
  PD_REQUIRE(c && profile && g && out, "pd_propagator_mollified: NULL argument");
  return guarded([&] {
    *out = new pd_propagator{build_mollified_propagator(
        t, c->cfg, profile_by_name(profile), epsilon, g->grid, to_options(opts))};
    return PD_OK;
  });
}
void pd_propagator_destroy(pd_propagator* u) { delete u; }

pd_status pd_propagator_get_info(const pd_propagator* u, pd_propagator_info* info) {
  PD_REQUIRE(u && info, "pd_propagator_get_info: NULL argument");
  const Propagator& p = u->u;
  *info = pd_propagator_info{p.t, p.grid.size(), p.unitarity_defect, p.declared_tolerance,
                             p.orders_used, p.tail_estimate, p.steps};
  return PD_OK;
}

pd_status pd_propagator_distance(const pd_propagator* a, const pd_propagator* b,
                                 double* out) {
  PD_REQUIRE(a && b && out, "pd_propagator_distance: NULL argument");
  return guarded([&] {
    *out = distance(a->u, b->u);
    return PD_OK;
  });
}

pd_status pd_propagator_apply(const pd_propagator* u, const double* re_in,
                              const double* im_in, double* re_out, double* im_out) {
  PD_REQUIRE(u && re_in && im_in && re_out && im_out, "pd_propagator_apply: NULL argument");
  return guarded([&] {
    const auto n = static_cast<Eigen::Index>(u->u.grid.size());
    StateVector psi{u->u.grid, Vector(n), Representation::momentum};
    for (Eigen::Index j = 0; j < n; ++j) psi.amplitudes(j) = cplx(re_in[j], im_in[j]);
    const StateVector r = u->u.apply(psi);
    for (Eigen::Index j = 0; j < n; ++j) {
      re_out[j] = r.amplitudes(j).real();
      im_out[j] = r.amplitudes(j).imag();
    }
    return PD_OK;
  });
}

pd_status pd_experiment_load(const char* path, pd_experiment** out) {
  PD_REQUIRE(path && out, "pd_experiment_load: NULL argument");
  return guarded([&] {
    auto cfg = load_config(path);
    *out = new pd_experiment{cfg, cfg.digest(), cfg.output.string(), std::nullopt};
    return PD_OK;
  });
}

pd_status pd_experiment_parse(const char* text, const char* origin, const char* base_dir,
                              pd_experiment** out) {
  PD_REQUIRE(text && out, "pd_experiment_parse: NULL argument");
  return guarded([&] {
    auto cfg = parse_config(text, origin ? origin : "<string>", base_dir ? base_dir : ".");
    *out = new pd_experiment{cfg, cfg.digest(), cfg.output.string(), std::nullopt};
    return PD_OK;
  });
}
void pd_experiment_destroy(pd_experiment* e) { delete e; }

const char* pd_experiment_type(const pd_experiment* e) {
  return e ? to_string(e->cfg.type) : "";
}
const char* pd_experiment_digest(const pd_experiment* e) {
  return e ? e->digest.c_str() : "";
}
const char* pd_experiment_output_dir(const pd_experiment* e) {
  return e ? e->output.c_str() : "";
}

pd_status pd_experiment_run(pd_experiment* e, int* verdict) {
  PD_REQUIRE(e, "pd_experiment_run: NULL handle");
  return guarded([&] {
    e->result = run_experiment(e->cfg);
    if (verdict) *verdict = e->result->verdict ? 1 : 0;
    return PD_OK;
  });
}

pd_status pd_experiment_validate(pd_experiment* e, int* verdict) {
  PD_REQUIRE(e, "pd_experiment_validate: NULL handle");
  return guarded([&] {
    e->result = validate_physics(e->cfg);
    if (verdict) *verdict = e->result->verdict ? 1 : 0;
    return PD_OK;
  });
}

pd_status pd_experiment_write(const pd_experiment* e, const char* dir) {
  PD_REQUIRE(e, "pd_experiment_write: NULL handle");
  if (!e->result) return set_error(PD_ERR_INVALID_ARGUMENT, "pd_experiment_write: nothing has run");
  return guarded([&] {
    write_outputs(*e->result, dir ? std::filesystem::path(dir) : e->cfg.output);
    return PD_OK;
  });
}

const char* pd_experiment_artifact(const pd_experiment* e, const char* name) {
  if (!e || !name || !e->result) return nullptr;
  const auto it = e->result->files.find(name);
  return it == e->result->files.end() ? nullptr : it->second.c_str();
}

pd_status pd_golden_check(const char* dir, int update, int* checked, int* failed,
                          pd_line_sink sink, void* user) {
  PD_REQUIRE(dir, "pd_golden_check: dir is NULL");
  return guarded([&] {
    const GoldenOutcome g = golden_check(dir, update != 0);
    if (checked) *checked = g.checked;
    if (failed) *failed = g.failed;
    if (sink)
      for (const auto& m : g.messages) sink(m.c_str(), user);
    return PD_OK;
  });
}

}  // extern "C"
