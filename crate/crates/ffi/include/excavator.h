#ifndef EXCAVATOR_H
#define EXCAVATOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ExcStatus {
  EXC_STATUS_OK = 0,
  EXC_STATUS_NULL_ARGUMENT = 1,
  EXC_STATUS_INVALID_UTF8 = 2,
  /**
   * Artifacts missing or inconsistent.
   */
  EXC_STATUS_LOAD = 3,
  /**
   * Unknown route or focus node.
   */
  EXC_STATUS_NOT_FOUND = 4,
  /**
   * Invalid parameters.
   */
  EXC_STATUS_BAD_REQUEST = 5,
  /**
   * A pipeline stage failed.
   */
  EXC_STATUS_PIPELINE = 6,
  /**
   * A panic was caught at the boundary.
   */
  EXC_STATUS_INTERNAL = 7,
} ExcStatus;

/**
 * Opaque handle to a loaded snapshot.
 */
typedef struct ExcSnapshot ExcSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *exc_version(void);

/**
 * Message for the last failure on this thread. Valid until the next call
 * into the library from the same thread; never null.
 */
const char *exc_last_error(void);

/**
 * Load the artifacts in `dir` into a new snapshot.
 *
 * # Safety
 * `dir` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ExcStatus exc_snapshot_open(const char *dir, struct ExcSnapshot **out);

/**
 * Release a snapshot. Null is ignored.
 *
 * # Safety
 * `snapshot` must come from [`exc_snapshot_open`] and not be used afterwards.
 */
void exc_snapshot_free(struct ExcSnapshot *snapshot);

/**
 * Answer one API request (`path` such as `/api/tcag`, `query` such as
 * `focus=Lockdown`, which may be null). The HTTP-equivalent status goes to
 * `out_http_status` and the JSON body to `out_json`, for errors too.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum ExcStatus exc_snapshot_get(const struct ExcSnapshot *snapshot,
                                const char *path,
                                const char *query,
                                uint16_t *out_http_status,
                                char **out_json);

/**
 * The unfiltered graph as canonical `tcag/1` JSON.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ExcStatus exc_snapshot_tcag_json(const struct ExcSnapshot *snapshot, char **out_json);

/**
 * Popularity series of `event` (optionally limited to `geo`, which may be
 * null) with an odd `window`; `strict` divides every window by its length.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum ExcStatus exc_snapshot_popularity(const struct ExcSnapshot *snapshot,
                                       const char *event,
                                       const char *geo,
                                       size_t window,
                                       bool strict,
                                       char **out_json);

/**
 * Run the pipeline over one JSONL `input` with built-in resources, writing
 * artifacts to `out_dir`. On success `out_json` (may be null) receives the
 * summary counts.
 *
 * # Safety
 * Pointers must be valid; strings NUL-terminated.
 */
enum ExcStatus exc_run_pipeline(const char *input, const char *out_dir, char **out_json);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void exc_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EXCAVATOR_H */
