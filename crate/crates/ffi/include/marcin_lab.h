#ifndef MARCIN_LAB_H
#define MARCIN_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MlStatus {
  ML_STATUS_OK = 0,
  ML_STATUS_NULL_POINTER = 1,
  ML_STATUS_INVALID_ARGUMENT = 2,
  ML_STATUS_SHAPE = 3,
  ML_STATUS_INDEX = 4,
  ML_STATUS_SIZE = 5,
  ML_STATUS_ALIASING = 6,
  ML_STATUS_NUMERICAL = 7,
  ML_STATUS_IO = 8,
  // Requested value is absent, e.g. no certified upper bound for mixed exponents.
  ML_STATUS_UNAVAILABLE = 9,
  ML_STATUS_PANIC = 10,
} MlStatus;

typedef enum MlMode {
  ML_MODE_STRONG = 0,
  ML_MODE_WEAK = 1,
  ML_MODE_MIXED = 2,
} MlMode;

// Result of a maximal-operator estimate.
typedef struct MlEstimate MlEstimate;

// Complex matrix, row-major.
typedef struct MlMatrix MlMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; empty if none. Valid until
// the next failing call on the same thread.
const char *ml_last_error(void);

// Build a `rows x cols` matrix from row-major real and imaginary parts.
// `im` may be null for a real matrix.
//
// # Safety
// `re` (and `im` when non-null) must point to `rows * cols` doubles.
enum MlStatus ml_matrix_new(size_t rows,
                            size_t cols,
                            const double *re,
                            const double *im,
                            struct MlMatrix **out);

// # Safety
// `m` must be null or a handle from [`ml_matrix_new`] not yet freed.
void ml_matrix_free(struct MlMatrix *m);

// # Safety
// `m` must be a live matrix handle.
size_t ml_matrix_rows(const struct MlMatrix *m);

// # Safety
// `m` must be a live matrix handle.
size_t ml_matrix_cols(const struct MlMatrix *m);

// Twice the largest row variation, a certified upper bound for the strong
// `p = 2` constant.
//
// # Safety
// `m` must be a live matrix handle and `out` writable.
enum MlStatus ml_bv_upper_bound(const struct MlMatrix *m, double *out);

// Estimate the maximal-operator constant of `m`. `q` is read only for
// [`MlMode::Mixed`]. `restarts = 0` selects the default. The best valid
// certified upper bound is attached when one exists.
//
// # Safety
// `m` must be a live matrix handle and `out` writable.
enum MlStatus ml_estimate_h(const struct MlMatrix *m,
                            enum MlMode mode,
                            double p,
                            double q,
                            uint64_t seed,
                            size_t restarts,
                            struct MlEstimate **out);

// # Safety
// `e` must be null or a handle from [`ml_estimate_h`] not yet freed.
void ml_estimate_free(struct MlEstimate *e);

// Certified lower bound; NaN for a null handle.
//
// # Safety
// `e` must be a live estimate handle.
double ml_estimate_lower_bound(const struct MlEstimate *e);

// Certified upper bound, or [`MlStatus::Unavailable`] if none applies.
//
// # Safety
// `e` must be a live estimate handle and `out` writable.
enum MlStatus ml_estimate_upper_bound(const struct MlEstimate *e, double *out);

// Number of samples in the witness vector.
//
// # Safety
// `e` must be a live estimate handle.
size_t ml_estimate_witness_len(const struct MlEstimate *e);

// Copy the witness into `re` and `im`, each of length `len`, which must
// equal [`ml_estimate_witness_len`].
//
// # Safety
// `re` and `im` must each point to `len` writable doubles.
enum MlStatus ml_estimate_witness(const struct MlEstimate *e, double *re, double *im, size_t len);

// The estimate as a JSON document; release with [`ml_string_free`].
//
// # Safety
// `e` must be a live estimate handle and `out` writable.
enum MlStatus ml_estimate_to_json(const struct MlEstimate *e, char **out);

// # Safety
// `s` must be null or a string returned by this library.
void ml_string_free(char *s);

// Evaluate the sign-pattern counterexample of size `n` at the Rademacher
// witness, returning the achieved ratio and its closed form.
//
// # Safety
// `ratio` and `target` must be writable.
enum MlStatus ml_verify_counterexample(size_t n, double theta, double *ratio, double *target);

// Run an experiment described by a JSON config (the same format as the
// command-line `--config` file) into `out_dir`, which overrides any `out`
// key. `exit_code` receives the command-line exit code. A run that completes
// with a failed quality check returns [`MlStatus::Numerical`].
//
// # Safety
// Strings must be nul-terminated; `out_dir` may be null; `exit_code` may be null.
enum MlStatus ml_run_experiment(const char *config_json, const char *out_dir, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARCIN_LAB_H */
