#ifndef SOFTSCHED_H
#define SOFTSCHED_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_RESOURCE_LIMIT = 3,
  SS_STATUS_UNSUPPORTED = 4,
  SS_STATUS_IO = 5,
  SS_STATUS_PARSE = 6,
  SS_STATUS_INVALID_UTF8 = 7,
  SS_STATUS_PANIC = 8,
} SsStatus;

typedef enum SsSolver {
  SS_SOLVER_FICTITIOUS_PLAY = 0,
  SS_SOLVER_EXACT = 1,
} SsSolver;

/**
 * Opaque conflict graph.
 */
typedef struct SsConflictGraph SsConflictGraph;

/**
 * Opaque soft-coloring result: components, game solution and slot list.
 */
typedef struct SsSchedule SsSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL when the last
 * call succeeded. Release with [`ss_string_free`].
 */
char *ss_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void ss_string_free(char *s);

/**
 * Builds a conflict graph on `n_links` links from `n_pairs` index pairs
 * stored flat in `pairs` (`2 * n_pairs` entries).
 *
 * # Safety
 * `pairs` must point to `2 * n_pairs` readable values (it may be NULL when
 * `n_pairs` is 0) and `out` must be writable.
 */
enum SsStatus ss_conflict_graph_new(size_t n_links,
                                    const size_t *pairs,
                                    size_t n_pairs,
                                    struct SsConflictGraph **out);

/**
 * Parses a conflict-graph JSON document (`n_links`, `conflicts`, optional
 * `rates`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` must be writable.
 */
enum SsStatus ss_conflict_graph_from_json(const char *json, struct SsConflictGraph **out);

/**
 * # Safety
 * `g` must be NULL or a handle from this library and not yet freed.
 */
void ss_conflict_graph_free(struct SsConflictGraph *g);

/**
 * Number of links, or 0 for a NULL handle.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t ss_conflict_graph_n_links(const struct SsConflictGraph *g);

/**
 * Writes whether links `a` and `b` conflict.
 *
 * # Safety
 * `g` must be a live handle and `out` writable.
 */
enum SsStatus ss_conflict_graph_conflicts(const struct SsConflictGraph *g,
                                          size_t a,
                                          size_t b,
                                          bool *out);

/**
 * Slots used by greedy coloring in link-index order.
 *
 * # Safety
 * `g` must be a live handle, `rates` must point to one value per link and
 * `out` must be writable.
 */
enum SsStatus ss_coloring_slots(const struct SsConflictGraph *g,
                                const uint32_t *rates,
                                size_t n_rates,
                                uint64_t *out);

/**
 * Soft-colors `g` for the given link rates. `delta` and `max_iterations`
 * configure fictitious play and are ignored by the exact solver; pass 0 for
 * either to use its default.
 *
 * # Safety
 * `g` must be a live handle, `rates` must point to one value per link and
 * `out` must be writable.
 */
enum SsStatus ss_soft_schedule(const struct SsConflictGraph *g,
                               const uint32_t *rates,
                               size_t n_rates,
                               enum SsSolver solver,
                               double delta,
                               uint64_t max_iterations,
                               struct SsSchedule **out);

/**
 * # Safety
 * `s` must be NULL or a handle from this library and not yet freed.
 */
void ss_schedule_free(struct SsSchedule *s);

/**
 * Schedule length in slots, or 0 for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t ss_schedule_length(const struct SsSchedule *s);

/**
 * Number of maximal components the schedule draws from, or 0 for NULL.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t ss_schedule_n_components(const struct SsSchedule *s);

/**
 * Component index active in slot `slot`.
 *
 * # Safety
 * `s` must be a live handle and `out` writable.
 */
enum SsStatus ss_schedule_slot(const struct SsSchedule *s, size_t slot, size_t *out);

/**
 * Copies the links of component `component` into `buf` (capacity `cap`)
 * and writes the member count to `len`. When `cap` is too small nothing is
 * copied, `len` still receives the size, and the call fails with
 * `SS_STATUS_INVALID_ARGUMENT`.
 *
 * # Safety
 * `s` must be a live handle, `buf` must have room for `cap` values (it may
 * be NULL when `cap` is 0) and `len` must be writable.
 */
enum SsStatus ss_schedule_component(const struct SsSchedule *s,
                                    size_t component,
                                    size_t *buf,
                                    size_t cap,
                                    size_t *len);

/**
 * Bracket on the game value and the iteration count (0 for the exact
 * solver). Any output pointer may be NULL.
 *
 * # Safety
 * `s` must be a live handle; non-NULL outputs must be writable.
 */
enum SsStatus ss_schedule_game_value(const struct SsSchedule *s,
                                     double *lower,
                                     double *upper,
                                     uint64_t *iterations);

/**
 * Runs a full sweep described by a JSON experiment config and returns the
 * aggregated CSV table in `out_csv`. Release it with [`ss_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out_csv` writable.
 */
enum SsStatus ss_run_sweep_json(const char *config_json, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOFTSCHED_H */
