#ifndef TWISTLAB_H
#define TWISTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum TlStatus {
  TlOk = 0,
  TlInvalidInput = 1,
  TlAnglesCondition = 2,
  TlPolytopeViolation = 3,
  TlNotElliptic = 4,
  TlDegenerateOrbit = 5,
  TlIntegrityFailure = 6,
  TlNumericalFailure = 7,
  TlNullPointer = 8,
  TlBadUtf8 = 9,
  TlPanic = 10,
} TlStatus;

/**
 * Opaque handle to a chain representation.
 */
typedef struct TlRep TlRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of the current thread, or null. Owned by the library;
 * valid until the next failing call on the same thread.
 */
const char *tl_last_error(void);

/**
 * Library version string (static storage).
 */
const char *tl_version(void);

/**
 * Builds a representation from n peripheral angles, n-3 moment values and
 * n-3 twist parameters.
 *
 * # Safety
 * `alpha` must point to n doubles, `x` and `twists` to n-3 doubles, and
 * `out` must be a valid destination pointer.
 */
enum TlStatus tl_rep_build(const double *alpha,
                           uintptr_t n,
                           const double *x,
                           const double *twists,
                           struct TlRep **out);

/**
 * Builds a seeded random representation on the Deroin-Tholozan locus.
 *
 * # Safety
 * `alpha` must point to n doubles and `out` must be valid.
 */
enum TlStatus tl_rep_random(const double *alpha, uintptr_t n, uint64_t seed, struct TlRep **out);

/**
 * Frees a representation handle. Null is a no-op.
 *
 * # Safety
 * `rep` must be a handle returned by this library, freed at most once.
 */
void tl_rep_free(struct TlRep *rep);

/**
 * Number of punctures of the underlying sphere.
 *
 * # Safety
 * `rep` must be a valid handle.
 */
uintptr_t tl_rep_n(const struct TlRep *rep);

/**
 * Copies the generator matrices into `out` as 4n doubles, row-major per
 * generator (m11, m12, m21, m22).
 *
 * # Safety
 * `out` must have room for 4 * tl_rep_n(rep) doubles.
 */
enum TlStatus tl_rep_generators(const struct TlRep *rep, double *out);

/**
 * Serializes the representation to JSON. Free the result with
 * tl_string_free.
 *
 * # Safety
 * `rep` and `out` must be valid.
 */
enum TlStatus tl_rep_to_json(const struct TlRep *rep, char **out);

/**
 * Parses a representation from JSON and verifies its invariants.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum TlStatus tl_rep_from_json(const char *json, struct TlRep **out);

/**
 * Frees a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `s` must come from this library, freed at most once.
 */
void tl_string_free(char *s);

/**
 * Twist flow for time t along a chain curve ("b1", "d2", ...), returning a
 * new handle.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_twist_flow(const struct TlRep *rep,
                            const char *curve,
                            double t,
                            struct TlRep **out);

/**
 * m-fold Dehn twist along a chain curve, returning a new handle.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_dehn_twist(const struct TlRep *rep,
                            const char *curve,
                            int64_t m,
                            struct TlRep **out);

/**
 * Rotation angle of a curve holonomy.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_curve_angle(const struct TlRep *rep, const char *curve, double *out);

/**
 * Relative Euler class and volume.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_volume(const struct TlRep *rep, int64_t *k_out, double *vol_out);

/**
 * Moment-map values theta(b_1..b_{n-3}); `out` needs n-3 doubles.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_moment_map(const struct TlRep *rep, double *out);

/**
 * The two bracket zeros along the b_i-orbit, written to `zeros_out[0..2]`.
 *
 * # Safety
 * `zeros_out` must have room for two doubles.
 */
enum TlStatus tl_bracket_zeros(const struct TlRep *rep, uintptr_t i, double *zeros_out);

/**
 * Set-E membership: 1 if some twisted bracket with |m| <= m_max is nonzero,
 * 0 otherwise.
 *
 * # Safety
 * All pointers must be valid.
 */
enum TlStatus tl_in_e(const struct TlRep *rep, uintptr_t i, int64_t m_max, int32_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWISTLAB_H */
