#ifndef INF_RCS_H
#define INF_RCS_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum RcsB2Interpretation {
  RCS_B2_INTERPRETATION_COEFFICIENT_OF_VARIATION = 0,
  RCS_B2_INTERPRETATION_LOG_STD_DEV_DB = 1,
} RcsB2Interpretation;

typedef enum RcsCapMode {
  RCS_CAP_MODE_MEAN_RELATIVE = 0,
  RCS_CAP_MODE_ABOVE_UNIT_MEAN = 1,
  RCS_CAP_MODE_DISABLED = 2,
} RcsCapMode;

// Result code of every exported function.
typedef enum RcsStatus {
  RCS_STATUS_OK = 0,
  RCS_STATUS_NULL_POINTER = 1,
  RCS_STATUS_DOMAIN = 2,
  RCS_STATUS_VALIDATION = 3,
  RCS_STATUS_DEGENERATE = 4,
  RCS_STATUS_UNSUPPORTED = 5,
  RCS_STATUS_IO = 6,
  RCS_STATUS_INVALID_UTF8 = 7,
  RCS_STATUS_PANIC = 8,
} RcsStatus;

// Fitted groups produced by [`rcs_pipeline_run`].
typedef struct RcsFitTable RcsFitTable;

// Seeded sampler bound to one triple.
typedef struct RcsSampler RcsSampler;

typedef struct RcsSamplerOptions {
  enum RcsB2Interpretation interpretation;
  enum RcsCapMode cap_mode;
  bool bypass_b2;
} RcsSamplerOptions;

// Angle-invariant model triple; B1 is a constant in dB.
typedef struct RcsTripleC {
  double a_dbsm;
  double b1_db;
  double b2_db;
  double cap_k;
} RcsTripleC;

typedef struct RcsFit {
  double mu;
  double sigma;
  size_t n;
  double ks;
  double mse;
  bool degenerate;
} RcsFit;

// One row of a pipeline result. `target` is owned by the table.
typedef struct RcsGroupFit {
  const char *target;
  double freq_ghz;
  struct RcsFit fit;
  size_t discarded;
} RcsGroupFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *rcs_last_error(void);

// Default sampler options.
struct RcsSamplerOptions rcs_sampler_options_default(void);

// Creates a sampler for `triple`. `opts` may be null for defaults.
//
// # Safety
// `triple` and `out` must be valid pointers; `opts` must be null or valid.
enum RcsStatus rcs_sampler_new(const struct RcsTripleC *triple,
                               const struct RcsSamplerOptions *opts,
                               uint64_t seed,
                               struct RcsSampler **out);

// Creates a sampler for a builtin standard such as `"small_uav"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid; `opts` must
// be null or valid.
enum RcsStatus rcs_sampler_new_standard(const char *name,
                                        const struct RcsSamplerOptions *opts,
                                        uint64_t seed,
                                        struct RcsSampler **out);

// Draws `n` realizations at the given azimuths (equal azimuths are treated
// as monostatic). `rcs_m2` receives the RCS; `b2_linear` may be null.
//
// # Safety
// `sampler` must come from `rcs_sampler_new*`; `rcs_m2` must hold `n`
// doubles; `b2_linear` must be null or hold `n` doubles.
enum RcsStatus rcs_sampler_fill(struct RcsSampler *sampler,
                                double incident_az_deg,
                                double scattered_az_deg,
                                double *rcs_m2,
                                double *b2_linear,
                                size_t n);

// # Safety
// `sampler` must be null or come from `rcs_sampler_new*` and not be freed twice.
void rcs_sampler_free(struct RcsSampler *sampler);

// Maximum-likelihood log-normal fit with KS and CDF-MSE scores.
//
// # Safety
// `samples` must hold `n` doubles; `out` must be valid.
enum RcsStatus rcs_fit_lognormal(const double *samples, size_t n, struct RcsFit *out);

// # Safety
// `out` must be valid.
enum RcsStatus rcs_a_dbsm(double mu, double sigma, double *out);

// # Safety
// `out` must be valid.
enum RcsStatus rcs_b2_db(double sigma, double *out);

// Consolidates per-carrier fits `(freq_ghz[i], mu[i], sigma[i])` into one
// triple with B1 = 0 dB and the given cap.
//
// # Safety
// The three arrays must hold `n` doubles each; `out` must be valid.
enum RcsStatus rcs_consolidate(const double *freq_ghz,
                               const double *mu,
                               const double *sigma,
                               size_t n,
                               double cap_k,
                               struct RcsTripleC *out);

// Absolute deviations of `triple` from `standard`.
//
// # Safety
// All pointers must be valid.
enum RcsStatus rcs_compare(const struct RcsTripleC *triple,
                           const struct RcsTripleC *standard,
                           double *delta_a_db,
                           double *delta_b2_db);

// Builtin standardized triple by name.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid.
enum RcsStatus rcs_standard(const char *name, struct RcsTripleC *out);

// System factor K = P_r / (4π d²) for calibration power `p_r` at distance `d_m`.
//
// # Safety
// `out` must be valid.
enum RcsStatus rcs_system_factor(double freq_ghz, double p_r, double d_m, double *out);

// RCS in m² from differential target power and system factor.
//
// # Safety
// `out` must be valid.
enum RcsStatus rcs_from_power(double freq_ghz, double p_tar, double k_cal, double *out);

// Runs ingest, calibration, and fitting on a dataset file. `config_path`
// may be null for the default configuration.
//
// # Safety
// `dataset_path` must be a NUL-terminated string; `config_path` must be
// null or one; `out` must be valid.
enum RcsStatus rcs_pipeline_run(const char *dataset_path,
                                const char *config_path,
                                struct RcsFitTable **out);

// Number of rows, or 0 for a null table.
//
// # Safety
// `table` must be null or come from `rcs_pipeline_run`.
size_t rcs_fit_table_len(const struct RcsFitTable *table);

// Copies row `index` into `out`; its `target` string lives as long as the table.
//
// # Safety
// `table` must come from `rcs_pipeline_run`; `out` must be valid.
enum RcsStatus rcs_fit_table_get(const struct RcsFitTable *table,
                                 size_t index,
                                 struct RcsGroupFit *out);

// # Safety
// `table` must be null or come from `rcs_pipeline_run` and not be freed twice.
void rcs_fit_table_free(struct RcsFitTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INF_RCS_H */
