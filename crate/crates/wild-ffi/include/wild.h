/* C interface to the wild workflow engine. Generated by cbindgen; do not edit. */

#ifndef WILD_H
#define WILD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of an FFI call. Anything other than `Ok` leaves a message for
 * `wild_last_error`, except the two trace verdicts, which are answers
 * rather than failures.
 */
typedef enum WildStatus {
  /**
   * The call succeeded; for trace checks, the trace is a complete run.
   */
  WILD_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  WILD_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  WILD_STATUS_INVALID_UTF8 = 2,
  /**
   * The document is not parseable Turtle.
   */
  WILD_STATUS_PARSE_ERROR = 3,
  /**
   * The document parsed but holds no single valid workflow.
   */
  WILD_STATUS_MODEL_ERROR = 4,
  /**
   * The trace is a conformant prefix of a run that never finished.
   */
  WILD_STATUS_TRACE_INCOMPLETE = 5,
  /**
   * The trace breaks the model's order; see the reported position.
   */
  WILD_STATUS_TRACE_VIOLATION = 6,
} WildStatus;

/**
 * A parsed workflow model together with its compiled net. Opaque to C:
 * create with `wild_model_parse`, release with `wild_model_free`.
 */
typedef struct WildModel WildModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message left by the current thread's most recent failed
 * call, or an empty string. The pointer stays valid until the next
 * failing call on the same thread.
 */
const char *wild_last_error(void);

/**
 * Parses a Turtle document holding exactly one workflow and returns a
 * handle to it, or NULL with `wild_last_error` set.
 *
 * `base` is the absolute IRI the document is read under; relative IRIs
 * in the document resolve against it.
 *
 * # Safety
 *
 * `turtle` and `base` must be NUL-terminated strings, readable for their
 * whole length, and the returned handle must be released exactly once
 * with `wild_model_free`.
 */
struct WildModel *wild_model_parse(const char *turtle, const char *base);

/**
 * Releases a handle returned by `wild_model_parse`. NULL is a no-op.
 *
 * # Safety
 *
 * `model` must be a handle from `wild_model_parse` that has not been
 * freed before.
 */
void wild_model_free(struct WildModel *model);

/**
 * Number of activities in the model, composites included. Zero for NULL.
 *
 * # Safety
 *
 * `model` must be NULL or a live handle from `wild_model_parse`.
 */
uintptr_t wild_model_activity_count(const struct WildModel *model);

/**
 * Number of atomic activities in the model. Zero for NULL.
 *
 * # Safety
 *
 * `model` must be NULL or a live handle from `wild_model_parse`.
 */
uintptr_t wild_model_atomic_count(const struct WildModel *model);

/**
 * Checks a trace of completed activities, given as activity IRIs in
 * completion order, against the model.
 *
 * Returns `Ok` for a complete conformant run, `TraceIncomplete` for a
 * conformant prefix that never finished, or `TraceViolation` with the
 * offending index written to `violation_position` (when non-NULL).
 *
 * # Safety
 *
 * `model` must be a live handle; `completed` must point to `len`
 * NUL-terminated strings (it may be NULL only when `len` is zero);
 * `violation_position` must be NULL or writable.
 */
enum WildStatus wild_model_check_trace(const struct WildModel *model,
                                       const char *const *completed,
                                       uintptr_t len,
                                       uintptr_t *violation_position);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WILD_H */
