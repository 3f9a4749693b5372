#ifndef POLYA_H
#define POLYA_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PolyaStatus {
  POLYA_STATUS_OK = 0,
  POLYA_STATUS_NULL_POINTER = 1,
  POLYA_STATUS_INVALID_ARGUMENT = 2,
  POLYA_STATUS_ZERO_VECTOR = 3,
  POLYA_STATUS_DOMAIN = 4,
  POLYA_STATUS_INVALID_STATE = 5,
  POLYA_STATUS_INVALID_TARGET = 6,
  POLYA_STATUS_EMPTY_SAMPLE = 7,
  POLYA_STATUS_INSUFFICIENT_SAMPLE = 8,
  POLYA_STATUS_CONFIG = 9,
  POLYA_STATUS_PARSE = 10,
  POLYA_STATUS_IO = 11,
  POLYA_STATUS_OVERFLOW = 12,
  POLYA_STATUS_PANIC = 13,
} PolyaStatus;

typedef enum PolyaDirection {
  POLYA_DIRECTION_UP = 0,
  POLYA_DIRECTION_DOWN = 1,
  POLYA_DIRECTION_TOTAL = 2,
} PolyaDirection;

typedef enum PolyaIndexing {
  POLYA_INDEXING_DESTINATION = 0,
  POLYA_INDEXING_SOURCE = 1,
} PolyaIndexing;

typedef enum PolyaKernelFamily {
  POLYA_KERNEL_FAMILY_STATE = 0,
  POLYA_KERNEL_FAMILY_XCLASS = 1,
} PolyaKernelFamily;

/**
 * Truncated probability mass function.
 */
typedef struct PolyaPmf PolyaPmf;

/**
 * Result of a verification run.
 */
typedef struct PolyaReport PolyaReport;

/**
 * Exact fraction `num / den` with `den > 0`.
 */
typedef struct PolyaRational {
  int64_t num;
  int64_t den;
} PolyaRational;

typedef struct PolyaShell {
  /**
   * Number of states at norm `n`.
   */
  uint64_t size;
  /**
   * Nonzero coordinates summed over the shell: the inward steps out of it.
   */
  uint64_t c;
  /**
   * Twice the zero coordinates summed over the shell.
   */
  uint64_t c0;
  /**
   * Probability that the norm process steps up from level `n`.
   */
  struct PolyaRational p_up;
} PolyaShell;

typedef struct PolyaExpectations {
  struct PolyaRational up;
  struct PolyaRational down;
  struct PolyaRational total;
  struct PolyaRational up_xclass;
  struct PolyaRational down_xclass;
  struct PolyaRational total_xclass;
} PolyaExpectations;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *polya_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *polya_version(void);

enum PolyaStatus polya_shell(size_t d, uint64_t n, struct PolyaShell *out_shell);

/**
 * Expected crossing counts of the state `coords` and of its X-class.
 *
 * # Safety
 * `coords` must point to `len` readable values.
 */
enum PolyaStatus polya_expectations(const int64_t *coords,
                                    size_t len,
                                    struct PolyaExpectations *out_e);

/**
 * Crossing law of the norm shell `n` in dimension `d`.
 */
enum PolyaStatus polya_pmf_shell_law(size_t d,
                                     size_t n,
                                     enum PolyaDirection dir,
                                     enum PolyaIndexing indexing,
                                     size_t k_max,
                                     struct PolyaPmf **out_pmf);

/**
 * Crossing law of the level `level` of the simple walk on `Z`.
 */
enum PolyaStatus polya_pmf_d1_level_law(int64_t level,
                                        enum PolyaDirection dir,
                                        size_t k_max,
                                        struct PolyaPmf **out_pmf);

/**
 * Law of the count at `coords` given `m` crossings of its parents.
 *
 * # Safety
 * `coords` must point to `len` readable values.
 */
enum PolyaStatus polya_pmf_state_kernel(const int64_t *coords,
                                        size_t len,
                                        enum PolyaDirection dir,
                                        enum PolyaKernelFamily family,
                                        size_t m,
                                        size_t k_max,
                                        struct PolyaPmf **out_pmf);

/**
 * Builds a pmf from `len` masses on `0..len` plus the unresolved `tail`.
 *
 * # Safety
 * `masses` must point to `len` readable values.
 */
enum PolyaStatus polya_pmf_from_masses(const double *masses,
                                       size_t len,
                                       double tail,
                                       struct PolyaPmf **out_pmf);

/**
 * Binomial thinning of `pmf` with retention probability `z`.
 */
enum PolyaStatus polya_pmf_thin(const struct PolyaPmf *pmf,
                                double z,
                                size_t k_max,
                                struct PolyaPmf **out_pmf);

/**
 * Largest resolved value; masses are defined on `0..=k_max`.
 */
enum PolyaStatus polya_pmf_k_max(const struct PolyaPmf *pmf, size_t *out_k);

/**
 * Mass at `k`; zero beyond `k_max`.
 */
enum PolyaStatus polya_pmf_mass(const struct PolyaPmf *pmf, size_t k, double *out_mass);

/**
 * Mass not resolved on `0..=k_max`.
 */
enum PolyaStatus polya_pmf_tail(const struct PolyaPmf *pmf, double *out_tail);

/**
 * Mean over the resolved part.
 */
enum PolyaStatus polya_pmf_mean(const struct PolyaPmf *pmf, double *out_mean);

enum PolyaStatus polya_pmf_tv(const struct PolyaPmf *a, const struct PolyaPmf *b, double *out_tv);

/**
 * # Safety
 * `pmf` must be null or a handle from this library that was not freed yet.
 */
void polya_pmf_free(struct PolyaPmf *pmf);

/**
 * Runs a verification described by a JSON config.
 *
 * Fails with `Config` or `Parse` for a malformed config. Identity failures are
 * not call failures; query them with [`polya_report_has_failures`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string.
 */
enum PolyaStatus polya_verify(const char *config_json, struct PolyaReport **out_report);

enum PolyaStatus polya_report_has_failures(const struct PolyaReport *report, bool *out_flag);

/**
 * Report rows as CSV. Release the string with [`polya_string_free`].
 */
enum PolyaStatus polya_report_csv(const struct PolyaReport *report, char **out_text);

/**
 * Full report as JSON. Release the string with [`polya_string_free`].
 */
enum PolyaStatus polya_report_json(const struct PolyaReport *report, char **out_text);

/**
 * # Safety
 * `report` must be null or a handle from this library that was not freed yet.
 */
void polya_report_free(struct PolyaReport *report);

/**
 * # Safety
 * `s` must be null or a string returned by this library that was not freed yet.
 */
void polya_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYA_H */
