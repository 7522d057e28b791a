#ifndef BPERC_BPERC_H
#define BPERC_BPERC_H

/* C interface to the bperc percolation engine and analysis toolkit.
 *
 * Every call returns a bperc_status. On failure the message is available
 * from bperc_last_error() on the same thread until the next failing call.
 * Handles are opaque; free them with the matching *_free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(BPERC_BUILDING_LIBRARY)
#    define BPERC_API __declspec(dllexport)
#  else
#    define BPERC_API __declspec(dllimport)
#  endif
#else
#  define BPERC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bperc_status {
  BPERC_OK = 0,
  BPERC_E_DOMAIN = 1,
  BPERC_E_IO = 2,
  BPERC_E_CONFIG = 3,
  BPERC_E_THRESHOLD_NOT_REACHED = 4,
  BPERC_E_INSUFFICIENT_DATA = 5,
  BPERC_E_FIT_FAILURE = 6,
  BPERC_E_OUT_OF_RANGE = 7,
  BPERC_E_UNDEFINED_RATIO = 8,
  BPERC_E_INVALID_ARGUMENT = 20,
  BPERC_E_INTERNAL = 21
} bperc_status;

typedef enum bperc_model {
  BPERC_SQ2N_1 = 0,
  BPERC_SQ2N_2 = 1,
  BPERC_SQ2N_2_CORNERS = 2,
  BPERC_SQ2N_2_PARALLELS = 3,
  BPERC_JOINT = 4
} bperc_model;

typedef enum bperc_sweep { BPERC_SWEEP_SITES = 0, BPERC_SWEEP_BONDS = 1 } bperc_sweep;
typedef enum bperc_spanning { BPERC_SPAN_TOP_BOTTOM = 0, BPERC_SPAN_EITHER = 1 } bperc_spanning;

BPERC_API const char* bperc_version(void);
BPERC_API const char* bperc_last_error(void);
BPERC_API const char* bperc_status_name(bperc_status status);
/* Accepts the names used in config files; returns BPERC_E_INVALID_ARGUMENT if unknown. */
BPERC_API bperc_status bperc_model_from_name(const char* name, bperc_model* out);
BPERC_API const char* bperc_model_name(bperc_model model);

/* ---- simulation ---- */

typedef struct bperc_histogram bperc_histogram;

typedef struct bperc_campaign_params {
  int side;
  bperc_model model;
  double param; /* p_d, q_b (joint site sweep) or p_s (bond sweep) */
  bperc_sweep sweep;
  bperc_spanning spanning;
  uint64_t replicas;
  uint64_t first_replica;
  uint64_t seed;
  unsigned workers;
} bperc_campaign_params;

typedef struct bperc_histogram_info {
  int side;
  bperc_model model;
  bperc_sweep sweep;
  bperc_spanning spanning;
  double param;
  uint64_t seed;
  uint64_t replicas;
  uint64_t nonspanning;
  size_t capacity;
  uint64_t barrier_count;
  uint64_t barrier_sum;
  uint64_t barrier_sum_sq;
} bperc_histogram_info;

BPERC_API bperc_status bperc_campaign_run(const bperc_campaign_params* params, bperc_histogram** out);
BPERC_API bperc_status bperc_histogram_merge(bperc_histogram* into, const bperc_histogram* other);
BPERC_API bperc_status bperc_histogram_info_get(const bperc_histogram* hist, bperc_histogram_info* out);
BPERC_API bperc_status bperc_histogram_count(const bperc_histogram* hist, size_t n, uint64_t* out);
/* *out = 1 when every field and count matches. */
BPERC_API bperc_status bperc_histogram_equal(const bperc_histogram* a, const bperc_histogram* b, int* out);
BPERC_API bperc_status bperc_histogram_save(const bperc_histogram* hist, const char* path,
                                            const char* config_hash);
BPERC_API bperc_status bperc_histogram_load(const char* path, bperc_histogram** out);
BPERC_API void bperc_histogram_free(bperc_histogram* hist);

/* ---- analysis ---- */

/* P_L(chi) at each of n grid points. */
BPERC_API bperc_status bperc_percolation_curve(const bperc_histogram* hist, const double* chi, size_t n,
                                               double* p_out);

typedef struct bperc_threshold {
  double chi_cL;
  double delta;
  double rough_chi_cL;
  double rough_delta;
  double window_lo;
  double window_hi;
  size_t logit_points;
} bperc_threshold;

/* epsilon <= 0 selects the default 0.1. */
BPERC_API bperc_status bperc_threshold_estimate(const bperc_histogram* hist, double epsilon, bperc_threshold* out);

typedef struct bperc_barrier_fraction {
  double value;
  double standard_error;
} bperc_barrier_fraction;

BPERC_API bperc_status bperc_barrier_fraction_get(const bperc_histogram* hist, bperc_barrier_fraction* out);

typedef struct bperc_fss {
  double alpha;
  double chi_c;
  double chi_c_se;
  double amplitude;
  double r_squared;
  int poor_scaling;
} bperc_fss;

BPERC_API bperc_status bperc_fit_threshold_scaling(const double* sizes, const double* chi_cL, size_t n,
                                                   bperc_fss* out);

typedef struct bperc_width_scaling {
  double nu;
  double nu_se;
  int low_confidence;
} bperc_width_scaling;

BPERC_API bperc_status bperc_fit_width_scaling(const double* sizes, const double* delta, size_t n,
                                               bperc_width_scaling* out);

/* ---- critical curves and cost ---- */

typedef struct bperc_qexp {
  double lambda, q, lambda_se, q_se, p_cs;
} bperc_qexp;

typedef struct bperc_power_law {
  double sigma, tau, sigma_se, tau_se;
} bperc_power_law;

/* errors may be NULL. */
BPERC_API bperc_status bperc_fit_qexp(const double* p_d, const double* chi_c, const double* errors, size_t n,
                                      bperc_qexp* out);
BPERC_API bperc_status bperc_fit_power_law(const double* p_d, const double* q_b, const double* errors, size_t n,
                                           bperc_power_law* out);
BPERC_API bperc_status bperc_reference_parameters(bperc_model model, bperc_qexp* qexp, bperc_power_law* power);
BPERC_API bperc_status bperc_chi_of_pd(const bperc_qexp* qexp, double p_d, double* out);
BPERC_API bperc_status bperc_pd_of_chi(const bperc_qexp* qexp, double chi, double* out);

typedef struct bperc_cost {
  double chi_c, q_b_model, q_b_joint, eta, eta_se;
} bperc_cost;

BPERC_API bperc_status bperc_relative_cost(const bperc_qexp* qexp, const bperc_power_law* power, double chi,
                                           bperc_cost* out);

/* ---- snapshot ---- */

typedef struct bperc_snapshot_params {
  int side;
  bperc_model model;
  double param; /* p_d, or q_b for the joint model */
  double chi;
  uint64_t seed;
  bperc_spanning spanning;
} bperc_snapshot_params;

typedef struct bperc_snapshot_info {
  size_t occupied;
  size_t largest_size;
  int largest_spans;
  size_t closed_bonds;
} bperc_snapshot_info;

/* states must hold side*side entries; state[i*side + j] is 0 unoccupied,
 * 1 other cluster, 2 largest cluster. */
BPERC_API bperc_status bperc_snapshot(const bperc_snapshot_params* params, uint8_t* states, size_t n,
                                      bperc_snapshot_info* info);

/* ---- configuration and commands ---- */

typedef struct bperc_config bperc_config;

BPERC_API bperc_status bperc_config_load(const char* path, bperc_config** out);
BPERC_API bperc_status bperc_config_parse(const char* yaml_text, bperc_config** out);
/* Writes the 16-digit hash plus NUL; buf must hold at least 17 bytes. */
BPERC_API bperc_status bperc_config_hash(const bperc_config* config, char* buf, size_t size);
BPERC_API void bperc_config_free(bperc_config* config);

typedef struct bperc_command_options {
  const char* config_path; /* may be NULL */
  const char* out_dir;     /* may be NULL */
  unsigned workers;        /* 0 = from config */
  int has_seed;
  uint64_t seed;
  int force;
  int verbose; /* progress on stderr */
} bperc_command_options;

typedef struct bperc_command_result {
  size_t files_written;
  size_t files_skipped;
  size_t warnings; /* fit-quality warnings */
  size_t notes;
} bperc_command_result;

BPERC_API bperc_status bperc_cmd_simulate(const bperc_command_options* options, bperc_command_result* result);
BPERC_API bperc_status bperc_cmd_analyze(const bperc_command_options* options, bperc_command_result* result);
BPERC_API bperc_status bperc_cmd_curves(const bperc_command_options* options, bperc_command_result* result);
BPERC_API bperc_status bperc_cmd_cost(const bperc_command_options* options, bperc_command_result* result);
BPERC_API bperc_status bperc_cmd_snapshot(const bperc_command_options* options, bperc_command_result* result);
BPERC_API bperc_status bperc_cmd_validate_config(const bperc_command_options* options,
                                                 bperc_command_result* result);

#ifdef __cplusplus
}
#endif

#endif
