#ifndef POINTDYN_POINTDYN_H
#define POINTDYN_POINTDYN_H

#include <stddef.h>

#if defined(POINTDYN_BUILDING_LIBRARY)
#define PD_API __attribute__((visibility("default")))
#else
#define PD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pd_status {
  PD_OK = 0,
  PD_ERR_INVALID_ARGUMENT = 1,
  PD_ERR_INVALID_CONFIG = 2,
  PD_ERR_TAIL_NOT_CERTIFIED = 3,
  PD_ERR_GRID_MISMATCH = 4,
  PD_ERR_NUMERICAL = 5,
  PD_ERR_IO = 6,
  PD_ERR_INTERNAL = 7
} pd_status;

typedef struct pd_grid pd_grid;
typedef struct pd_delta_config pd_delta_config;
typedef struct pd_propagator pd_propagator;
typedef struct pd_experiment pd_experiment;

PD_API const char* pd_version(void);
/* Message of the last failed call on this thread; "" if none. */
PD_API const char* pd_last_error(void);
PD_API const char* pd_status_name(pd_status s);

/* Worker threads for dense kernels. n <= 0 restores the default. */
PD_API pd_status pd_set_num_threads(int n);
/* Reads POINTDYN_NUM_THREADS if set; returns the thread count in effect. */
PD_API int pd_threads_from_env(void);

/* Momentum grid: n points on [-p_max, p_max). */
PD_API pd_status pd_grid_create(size_t n_points, double p_max, pd_grid** out);
PD_API void pd_grid_destroy(pd_grid* g);
PD_API size_t pd_grid_size(const pd_grid* g);
PD_API double pd_grid_p_max(const pd_grid* g);
/* Copies the momentum nodes into out[0..size). */
PD_API pd_status pd_grid_nodes(const pd_grid* g, double* out);

PD_API pd_status pd_delta_config_create(const double* alpha, const double* x,
                                        size_t n, double tail_bound,
                                        pd_delta_config** out);
/* Text form: "tail_bound t" then one "alpha x" line per center. */
PD_API pd_status pd_delta_config_parse(const char* text, pd_delta_config** out);
PD_API void pd_delta_config_destroy(pd_delta_config* c);
PD_API size_t pd_delta_config_size(const pd_delta_config* c);

typedef struct pd_dyson_options {
  double tol;     /* series truncation tolerance, > 0 */
  int n_max;      /* maximal order */
  int time_nodes; /* Gauss-Legendre nodes per time panel */
} pd_dyson_options;
PD_API pd_dyson_options pd_dyson_defaults(void);

/* opts may be NULL for the defaults. */
PD_API pd_status pd_propagator_delta(const pd_delta_config* c, const pd_grid* g,
                                     double t, const pd_dyson_options* opts,
                                     pd_propagator** out);
/* profile: "bump" or "bump2". */
PD_API pd_status pd_propagator_mollified(const pd_delta_config* c,
                                         const char* profile, double epsilon,
                                         const pd_grid* g, double t,
                                         const pd_dyson_options* opts,
                                         pd_propagator** out);
PD_API void pd_propagator_destroy(pd_propagator* u);

typedef struct pd_propagator_info {
  double t;
  size_t n_points;
  double unitarity_defect;
  double declared_tolerance;
  int orders_used;
  double tail_estimate;
  int steps;
} pd_propagator_info;
PD_API pd_status pd_propagator_get_info(const pd_propagator* u,
                                        pd_propagator_info* info);
/* Operator-norm distance of two propagators on the same grid. */
PD_API pd_status pd_propagator_distance(const pd_propagator* a,
                                        const pd_propagator* b, double* out);
/* Momentum amplitudes (split real/imag arrays of grid size). In and out may
   alias. */
PD_API pd_status pd_propagator_apply(const pd_propagator* u, const double* re_in,
                                     const double* im_in, double* re_out,
                                     double* im_out);

PD_API pd_status pd_experiment_load(const char* path, pd_experiment** out);
/* base_dir resolves relative file references; may be NULL. */
PD_API pd_status pd_experiment_parse(const char* text, const char* origin,
                                     const char* base_dir, pd_experiment** out);
PD_API void pd_experiment_destroy(pd_experiment* e);
PD_API const char* pd_experiment_type(const pd_experiment* e);
PD_API const char* pd_experiment_digest(const pd_experiment* e);
PD_API const char* pd_experiment_output_dir(const pd_experiment* e);
/* verdict: 1 pass, 0 fail. The artifacts stay attached to the handle. */
PD_API pd_status pd_experiment_run(pd_experiment* e, int* verdict);
PD_API pd_status pd_experiment_validate(pd_experiment* e, int* verdict);
/* Writes the artifacts of the last run; dir NULL uses the configured one. */
PD_API pd_status pd_experiment_write(const pd_experiment* e, const char* dir);
/* Artifact text by file name ("report.csv", "summary.json", ...), or NULL. */
PD_API const char* pd_experiment_artifact(const pd_experiment* e, const char* name);

typedef void (*pd_line_sink)(const char* line, void* user);
/* Regression check over a directory of configs and expected CSVs. */
PD_API pd_status pd_golden_check(const char* dir, int update, int* checked,
                                 int* failed, pd_line_sink sink, void* user);

#ifdef __cplusplus
}
#endif

#endif
