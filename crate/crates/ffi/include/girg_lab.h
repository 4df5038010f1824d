#ifndef GIRG_LAB_H
#define GIRG_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GirgLabStatus {
  GIRG_LAB_STATUS_OK = 0,
  GIRG_LAB_STATUS_INVALID_ARGUMENT = 1,
  GIRG_LAB_STATUS_NUMERICAL = 2,
  GIRG_LAB_STATUS_IO = 3,
  GIRG_LAB_STATUS_NULL_POINTER = 4,
  GIRG_LAB_STATUS_BUFFER_TOO_SMALL = 5,
  GIRG_LAB_STATUS_PANIC = 6,
} GirgLabStatus;

/**
 * Opaque graph handle.
 */
typedef struct GirgLabGraph GirgLabGraph;

typedef struct GirgLabRunResult {
  uint64_t steps_taken;
  uint64_t flips;
  uint64_t final_blue_count;
  uint64_t largest_blue_component;
  bool stable;
  bool survived;
} GirgLabRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *girg_lab_last_error(void);

/**
 * Static, NUL-terminated version string.
 */
const char *girg_lab_version(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum GirgLabStatus girg_lab_calibrate_k(double avg_degree, uint32_t d, double tau, double *out);

/**
 * Sample a graph. On success `*out` owns a new handle.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GirgLabStatus girg_lab_graph_new(uint64_t n,
                                      uint32_t d,
                                      double tau,
                                      double k,
                                      uint64_t seed,
                                      struct GirgLabGraph **out);

/**
 * # Safety
 * `g` must come from [`girg_lab_graph_new`] and not be used afterwards.
 */
void girg_lab_graph_free(struct GirgLabGraph *g);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
uint64_t girg_lab_graph_num_vertices(const struct GirgLabGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
uint64_t girg_lab_graph_num_edges(const struct GirgLabGraph *g);

/**
 * Copy the neighbours of `v` into `buf`. `*len` receives the degree; when it
 * exceeds `cap` nothing is copied and `BufferTooSmall` is returned.
 *
 * # Safety
 * `g` must be a live handle, `buf` valid for `cap` writes, `len` valid.
 */
enum GirgLabStatus girg_lab_graph_neighbors(const struct GirgLabGraph *g,
                                            uint64_t v,
                                            uint32_t *buf,
                                            uint64_t cap,
                                            uint64_t *len);

/**
 * Weight of `v` and its `d` coordinates into `pos` (length at least `d`).
 *
 * # Safety
 * `g` must be a live handle; `weight` and `pos` valid for writes.
 */
enum GirgLabStatus girg_lab_graph_vertex(const struct GirgLabGraph *g,
                                         uint64_t v,
                                         double *weight,
                                         double *pos,
                                         uint64_t cap);

/**
 * Majority dynamics from a centred square; `max_steps = 0` picks the
 * default `100·n·ln n`.
 *
 * # Safety
 * `g` must be a live handle and `out` valid for writes.
 */
enum GirgLabStatus girg_lab_simulate_square(const struct GirgLabGraph *g,
                                            double side,
                                            uint64_t seed,
                                            uint64_t max_steps,
                                            struct GirgLabRunResult *out);

/**
 * Smallest `k` for which the explicit subsolution exists.
 */
double girg_lab_k_min(uint32_t d, double tau);

/**
 * Root of `δ = Φ(y(δ - 1/2))` above 1/2; `InvalidArgument` when `y <= √π`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum GirgLabStatus girg_lab_delta_star(double y, double *out);

/**
 * Iterate the half-space operator from the indicator and report the
 * survival margin and the number of iterations.
 *
 * # Safety
 * `margin` and `iterations` must be valid for writes.
 */
enum GirgLabStatus girg_lab_halfspace_margin(uint32_t d,
                                             double tau,
                                             double k,
                                             double w_cap,
                                             uint64_t max_iter,
                                             double tol,
                                             double *margin,
                                             uint64_t *iterations);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GIRG_LAB_H */
