#ifndef PERPETUITY_H
#define PERPETUITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PerpStatus {
  PERP_STATUS_OK = 0,
  // Null pointer, bad length or non-UTF-8 text.
  PERP_STATUS_INVALID_ARGUMENT = 1,
  // The experiment text does not parse or describes an invalid law.
  PERP_STATUS_CONFIG = 2,
  // The series defining X diverges.
  PERP_STATUS_DIVERGENT = 3,
  // No tail theorem applies, or the characteristic function is unavailable.
  PERP_STATUS_NO_THEOREM = 5,
  // A quadrature or other numeric routine failed.
  PERP_STATUS_NUMERICAL = 7,
  // A Rust panic was caught at the boundary.
  PERP_STATUS_PANIC = 99,
} PerpStatus;

typedef enum PerpVerdict {
  PERP_VERDICT_FINITE = 0,
  PERP_VERDICT_INFINITE = 1,
  PERP_VERDICT_INCONCLUSIVE = 2,
} PerpVerdict;

// Opaque joint law of (A, B).
typedef struct PerpJoint PerpJoint;

// P{X > x} ~ a·x^c·e^{−bx}; `std_err` is zero unless the constant was
// estimated by simulation.
typedef struct PerpTailForm {
  double a;
  double c;
  double b;
  double constant;
  double std_err;
} PerpTailForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *perp_last_error(void);

// Library version as a static NUL-terminated string.
const char *perp_version(void);

// Builds a joint law from experiment-file text (`joint.*` keys; other
// sections are accepted and ignored). Free with [`perp_joint_free`].
//
// # Safety
// `config_text` must be a NUL-terminated string and `out` a valid pointer.
enum PerpStatus perp_joint_from_config(const char *config_text, struct PerpJoint **out);

// # Safety
// `joint` must come from [`perp_joint_from_config`] and not be used
// afterwards. Null is accepted.
void perp_joint_free(struct PerpJoint *joint);

// Writes `n` draws of X into `out`. Results depend only on the law, `n`
// and `seed`, not on `n_streams`.
//
// # Safety
// `out` must point to `n` writable doubles.
enum PerpStatus perp_simulate(const struct PerpJoint *joint,
                              size_t n,
                              uint64_t seed,
                              size_t n_streams,
                              double *out);

// Decides whether E exp(rX) is finite.
//
// # Safety
// `verdict` must be a valid pointer.
enum PerpStatus perp_moment_verdict(const struct PerpJoint *joint,
                                    double r,
                                    enum PerpVerdict *verdict);

// Tail prediction; constants estimated by simulation use `n` draws.
//
// # Safety
// `out` must be a valid pointer.
enum PerpStatus perp_tail_prediction(const struct PerpJoint *joint,
                                     size_t n,
                                     uint64_t seed,
                                     struct PerpTailForm *out);

// E e^{itX} for A ~ Beta(λ, 1).
//
// # Safety
// `re` and `im` must be valid pointers.
enum PerpStatus perp_charfn(const struct PerpJoint *joint, double t, double *re, double *im);

// Exact P{X > x} for a reference case ("E1".."E5").
//
// # Safety
// `case_id` must be NUL-terminated and `out` a valid pointer.
enum PerpStatus perp_reference_survival(const char *case_id, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERPETUITY_H */
