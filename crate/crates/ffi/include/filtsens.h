#ifndef FILTSENS_H
#define FILTSENS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FsensStatus {
  FSENS_STATUS_OK = 0,
  FSENS_STATUS_NULL_ARGUMENT = 1,
  FSENS_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a document that does not fit the schema.
   */
  FSENS_STATUS_INVALID_DOCUMENT = 3,
  /**
   * The system fails one of the standing assumptions.
   */
  FSENS_STATUS_INVALID_SYSTEM = 4,
  /**
   * A root lies on the stability boundary.
   */
  FSENS_STATUS_BOUNDARY_ROOT = 5,
  /**
   * The operation needs the other time domain.
   */
  FSENS_STATUS_WRONG_DOMAIN = 6,
  /**
   * `K = K_x` (DT P-integral) or `K = 0` (M-integral).
   */
  FSENS_STATUS_DEGENERATE_GAIN = 7,
  /**
   * The weighted integral is undefined because of a root at the origin.
   */
  FSENS_STATUS_ORIGIN_ROOT = 8,
  /**
   * Root solving, factorization or quadrature failed numerically.
   */
  FSENS_STATUS_NUMERICAL = 9,
  FSENS_STATUS_INVALID_ARGUMENT = 10,
  FSENS_STATUS_PANIC = 99,
} FsensStatus;

typedef enum FsensDomain {
  FSENS_DOMAIN_CONTINUOUS = 0,
  FSENS_DOMAIN_DISCRETE = 1,
} FsensDomain;

typedef enum FsensCase {
  FSENS_CASE_CT_P_CASE1 = 0,
  FSENS_CASE_CT_P_CASE2 = 1,
  FSENS_CASE_CT_P_CASE3_BOUNDED = 2,
  FSENS_CASE_CT_P_UNBOUNDED = 3,
  FSENS_CASE_CT_P_TRIVIAL = 4,
  FSENS_CASE_CT_M_BOUNDED = 5,
  FSENS_CASE_CT_M_UNBOUNDED = 6,
  FSENS_CASE_DT_P_CASE1 = 7,
  FSENS_CASE_DT_P_CASE2 = 8,
  FSENS_CASE_DT_M = 9,
  FSENS_CASE_DIRECT = 10,
} FsensCase;

/**
 * Opaque validated system.
 */
typedef struct FsensSystem FsensSystem;

/**
 * Closed-form value of one integral.
 */
typedef struct FsensIntegral {
  enum FsensCase case_tag;
  bool bounded;
  /**
   * Finite when `bounded`, otherwise `+inf` or `-inf`.
   */
  double value;
  /**
   * 0 when bounded, +1 or -1 otherwise.
   */
  int32_t sign;
  /**
   * True when `value` is in bits (DT), false for nats (CT).
   */
  bool in_bits;
} FsensIntegral;

typedef struct FsensQuadrature {
  double value;
  double abs_error_estimate;
  uint64_t n_evaluations;
  bool diverged;
  /**
   * 0 unless `diverged`.
   */
  int32_t sign;
} FsensQuadrature;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fsens_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the next
 * library call on the same thread.
 */
const char *fsens_last_error(void);

/**
 * Parses and validates a JSON system document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FsensStatus fsens_system_from_json(const char *json, struct FsensSystem **out);

/**
 * # Safety
 * `sys` must come from [`fsens_system_from_json`] and not be freed twice. Null is ignored.
 */
void fsens_system_free(struct FsensSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_system_domain(const struct FsensSystem *sys, enum FsensDomain *out);

/**
 * Closed-form P-integral (nats in CT, bits in DT).
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_p_integral(const struct FsensSystem *sys, struct FsensIntegral *out);

/**
 * Closed-form M-integral (weighted by 1/w^2 in CT).
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_m_integral(const struct FsensSystem *sys, struct FsensIntegral *out);

/**
 * Numerical P-integral by adaptive quadrature.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_p_quadrature(const struct FsensSystem *sys,
                                    double tol,
                                    struct FsensQuadrature *out);

/**
 * Numerical M-integral by adaptive quadrature.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_m_quadrature(const struct FsensSystem *sys,
                                    double tol,
                                    struct FsensQuadrature *out);

/**
 * Largest `|P + M - 1|` over `n_samples` seeded boundary frequencies.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be writable.
 */
enum FsensStatus fsens_complementarity(const struct FsensSystem *sys,
                                       uint32_t n_samples,
                                       uint64_t seed,
                                       double *out);

/**
 * Full analysis report of a JSON document, as JSON. A system that fails
 * validation still produces a report; only unparseable documents fail.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable. The string
 * written to `out` must be released with [`fsens_string_free`].
 */
enum FsensStatus fsens_analyze_json(const char *json, bool run_quadrature, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void fsens_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FILTSENS_H */
