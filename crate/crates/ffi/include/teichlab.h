#ifndef TEICHLAB_H
#define TEICHLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

#define TL_OK 0

#define TL_NULL_POINTER 1

#define TL_PANIC 2

#define TL_INVALID_ARGUMENT 3

/*
 Library errors use their own codes, from 10 upwards.
 */
#define TL_ERROR_BASE 10

/*
 Beltrami coefficient sampled on a grid.
 */
typedef struct TlBeltrami TlBeltrami;

/*
 Sample grid on the unit disk.
 */
typedef struct TlGrid TlGrid;

/*
 Quadratic differential on the exterior disk.
 */
typedef struct TlHolomorphic TlHolomorphic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *tl_version(void);

/*
 Copies the last error message of this thread into `buf` (truncated,
 always NUL-terminated when `len > 0`) and returns its full length.

 # Safety
 `buf` must be null or valid for `len` bytes.
 */
uintptr_t tl_last_error_message(char *buf, uintptr_t len);

/*
 Grid with cutoff `1 - 2^-k` and `angles` nodes per ring.

 # Safety
 `out` must be valid for writes.
 */
int32_t tl_grid_new(uint32_t k, uintptr_t angles, struct TlGrid **out);

/*
 # Safety
 `grid` must come from `tl_grid_new` and not be used afterwards.
 */
void tl_grid_free(struct TlGrid *grid);

/*
 # Safety
 Pointers must be valid.
 */
int32_t tl_grid_len(const struct TlGrid *grid, uintptr_t *out);

/*
 Writes the disk nodes; `len` must equal `tl_grid_len`.

 # Safety
 `re` and `im` must be valid for `len` doubles.
 */
int32_t tl_grid_nodes(const struct TlGrid *grid, double *re, double *im, uintptr_t len);

/*
 The constant coefficient `re + i im` on the disk.

 # Safety
 Pointers must be valid.
 */
int32_t tl_beltrami_constant(const struct TlGrid *grid,
                             double re,
                             double im,
                             struct TlBeltrami **out);

/*
 A coefficient from node samples in grid order.

 # Safety
 `re` and `im` must be valid for `len` doubles.
 */
int32_t tl_beltrami_from_samples(const struct TlGrid *grid,
                                 const double *re,
                                 const double *im,
                                 uintptr_t len,
                                 struct TlBeltrami **out);

/*
 # Safety
 `mu` must come from this library and not be used afterwards.
 */
void tl_beltrami_free(struct TlBeltrami *mu);

/*
 # Safety
 Pointers must be valid.
 */
int32_t tl_beltrami_sup(const struct TlBeltrami *mu, double *out);

/*
 # Safety
 `re` and `im` must be valid for `len` doubles.
 */
int32_t tl_beltrami_values(const struct TlBeltrami *mu, double *re, double *im, uintptr_t len);

/*
 `(re + i im) z^-n` with `n >= 4`.

 # Safety
 Pointers must be valid.
 */
int32_t tl_holomorphic_monomial(const struct TlGrid *grid,
                                double re,
                                double im,
                                uintptr_t n,
                                struct TlHolomorphic **out);

/*
 # Safety
 `phi` must come from this library and not be used afterwards.
 */
void tl_holomorphic_free(struct TlHolomorphic *phi);

/*
 Values at the reflected nodes `1/z̄`, in grid order.

 # Safety
 `re` and `im` must be valid for `len` doubles.
 */
int32_t tl_holomorphic_values(const struct TlHolomorphic *phi,
                              double *re,
                              double *im,
                              uintptr_t len);

/*
 Hyperbolic sup norm `sup ρ^-2 |φ|`.

 # Safety
 Pointers must be valid.
 */
int32_t tl_holomorphic_sup_norm(const struct TlHolomorphic *phi, double *out);

/*
 Hyperbolic `L^p` norm.

 # Safety
 Pointers must be valid.
 */
int32_t tl_holomorphic_lp_norm(const struct TlHolomorphic *phi, double p, double *out);

/*
 Principal solution values `f(z)` at the disk nodes.

 # Safety
 `re` and `im` must be valid for `len` doubles.
 */
int32_t tl_solve_principal(const struct TlBeltrami *mu, double *re, double *im, uintptr_t len);

/*
 Bers projection `Φ(μ)`.

 # Safety
 Pointers must be valid.
 */
int32_t tl_bers_projection(const struct TlBeltrami *mu, struct TlHolomorphic **out);

/*
 Ahlfors-Weill section `σ(φ)`; needs `‖φ‖_∞ < 1/2`.

 # Safety
 Pointers must be valid.
 */
int32_t tl_aw_section(const struct TlHolomorphic *phi, struct TlBeltrami **out);

/*
 Teichmüller distance between two representatives.

 # Safety
 Pointers must be valid.
 */
int32_t tl_teich_distance(const struct TlBeltrami *a, const struct TlBeltrami *b, double *out);

/*
 Orbit series length for multiplier `lambda`, decay `alpha` and relative tail `tol`.
 */
int32_t tl_orbit_terms(double lambda, double alpha, double tol, uintptr_t *out);

/*
 Number of subdivision steps for `‖μ‖_∞ = k` and ball radius `delta0`.
 */
int32_t tl_subdivision_steps(double k, double delta0, uintptr_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEICHLAB_H */
