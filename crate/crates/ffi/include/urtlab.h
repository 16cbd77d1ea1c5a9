#ifndef URTLAB_H
#define URTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UrtStatus {
  URT_STATUS_OK = 0,
  URT_STATUS_NULL_POINTER = 1,
  URT_STATUS_INVALID_ARGUMENT = 2,
  URT_STATUS_TRUNCATION = 3,
  URT_STATUS_CONTRACT_VIOLATION = 4,
  URT_STATUS_DEGENERATE = 5,
  URT_STATUS_PRECISION = 6,
  URT_STATUS_RETRY = 7,
  URT_STATUS_IO = 8,
  URT_STATUS_PANIC = 9,
} UrtStatus;

/**
 * A finite rooted network.
 */
typedef struct UrtNetwork UrtNetwork;

/**
 * A random rooted network law.
 */
typedef struct UrtSampler UrtSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or NULL. The caller
 * owns the returned string.
 */
char *urt_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void urt_string_free(char *s);

/**
 * Creates a sampler for a named fixture (for example `canopy`, `line`,
 * `regular:3`, `chain_cover:1,1,1,1`, `star:10`). When `d > 0` the law is
 * replaced by its direction-marked embedding in the `d`-regular tree.
 *
 * # Safety
 * `name` must be a nul-terminated string and `out` a writable pointer.
 */
enum UrtStatus urt_sampler_new(const char *name, size_t d, struct UrtSampler **out);

/**
 * # Safety
 * `s` must be NULL or a handle from `urt_sampler_new` not yet freed.
 */
void urt_sampler_free(struct UrtSampler *s);

/**
 * Draws the ball of radius `radius`. The draw is a function of
 * `(seed, index)` only.
 *
 * # Safety
 * `s` must be a live sampler handle and `out` a writable pointer.
 */
enum UrtStatus urt_sampler_sample(const struct UrtSampler *s,
                                  uint32_t radius,
                                  uint64_t seed,
                                  uint64_t index,
                                  struct UrtNetwork **out);

/**
 * Involution test at depth `depth` with `n` draws. Writes the TV statistic,
 * the calibrated threshold and 1 (pass) or 0 (fail).
 *
 * # Safety
 * `s` must be a live sampler handle; the out-pointers must be writable.
 */
enum UrtStatus urt_involution_test(const struct UrtSampler *s,
                                   uint32_t depth,
                                   double quantization,
                                   size_t n,
                                   uint64_t seed,
                                   double *statistic,
                                   double *threshold,
                                   int32_t *passed);

/**
 * Parses a single network in the edge-list text format.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a writable pointer.
 */
enum UrtStatus urt_network_from_text(const char *text, struct UrtNetwork **out);

/**
 * # Safety
 * `g` must be a live network handle and `out` a writable pointer.
 */
enum UrtStatus urt_network_to_text(const struct UrtNetwork *g, char **out);

/**
 * # Safety
 * `g` must be NULL or a network handle not yet freed.
 */
void urt_network_free(struct UrtNetwork *g);

/**
 * Number of vertices, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live network handle.
 */
size_t urt_network_vertex_count(const struct UrtNetwork *g);

/**
 * Number of edges, or 0 for NULL.
 *
 * # Safety
 * `g` must be NULL or a live network handle.
 */
size_t urt_network_edge_count(const struct UrtNetwork *g);

/**
 * # Safety
 * `g` must be a live network handle and `out` a writable pointer.
 */
enum UrtStatus urt_network_root(const struct UrtNetwork *g, size_t *out);

/**
 * # Safety
 * `g` must be a live network handle and `out` a writable pointer.
 */
enum UrtStatus urt_network_degree(const struct UrtNetwork *g, size_t v, size_t *out);

/**
 * Hex canonical code of the depth-`depth` ball around the root.
 *
 * # Safety
 * `g` must be a live network handle and `out` a writable pointer.
 */
enum UrtStatus urt_network_canonical_code(const struct UrtNetwork *g,
                                          uint32_t depth,
                                          double quantization,
                                          char **out);

/**
 * Distance between `(x1, y1)` and `(x2, y2)` in the upper half-plane.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum UrtStatus urt_hyperbolic_distance(double x1, double y1, double x2, double y2, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* URTLAB_H */
