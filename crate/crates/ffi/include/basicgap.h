#ifndef BASICGAP_H
#define BASICGAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BgStatus {
  BG_STATUS_OK = 0,
  BG_STATUS_INVALID_ARGUMENT = 1,
  BG_STATUS_DOMAIN_ERROR = 2,
  BG_STATUS_NON_CONVERGENCE = 3,
  BG_STATUS_NULL_POINTER = 4,
  BG_STATUS_BUFFER_TOO_SMALL = 5,
  BG_STATUS_NO_REDUCTION = 6,
  BG_STATUS_PANIC = 7,
} BgStatus;

// Opaque fixture handle.
typedef struct BgExample BgExample;

// Opaque spectrum handle.
typedef struct BgSpectrum BgSpectrum;

// Result of maximising the one-parameter family over s.
typedef struct BgOptimalS {
  double a;
  double b;
  double s0;
  // 0 for an interior optimum, 1 for the boundary regime s → 1.
  int32_t regime;
  double s_star;
  double bound;
} BgOptimalS;

// Drift `F(x)` supplied by the caller. Must be callable from any thread.
typedef double (*BgDriftFn)(void *user_data, double x);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t bg_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *bg_version(void);

// π²/d².
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_zhong_yang(uint32_t n, double k_curv, double d, double *out);

// nK; `valid` receives whether K > 0.
//
// # Safety
// `out` and `valid` must be valid for writes.
enum BgStatus bg_lichnerowicz(uint32_t n, double k_curv, double d, double *out, bool *valid);

// 4s(1−s)π²/d² + s(n−1)K for s ∈ (0, 1).
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_shi_zhang(uint32_t n, double k_curv, double d, double s, double *out);

// # Safety
// `out` must be valid for writes.
enum BgStatus bg_optimal_s(uint32_t n, double k_curv, double d, struct BgOptimalS *out);

// First nonzero Neumann eigenvalue of the comparison model on `[a, a + delta]`.
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_model_eigenvalue(double k_curv,
                                  uint32_t n,
                                  double a,
                                  double delta,
                                  double tol,
                                  double *out);

// # Safety
// `out` must be valid for writes.
enum BgStatus bg_psi(double theta, double *out);

// # Safety
// `out` must be valid for writes.
enum BgStatus bg_psi_ode_residual(double theta, double *out);

// `∫₀^{π/2} ψ²` by adaptive Simpson at `quad_tol` ∈ [1e-12, 1e-6].
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_barrier_integral(double quad_tol, double *out);

// # Safety
// `out` must be valid for writes.
enum BgStatus bg_refined_zhong_yang(double d, double k, double *out);

// Lowest `count` Neumann eigenvalues of `v'' + F v' = −λ v` by shooting.
//
// A null `drift` means `F ≡ 0`; a null `drift_derivative` falls back to a
// difference quotient. A multiplicity of 0 marks a regular Neumann end,
// a positive one a pole `F ~ m/(x − end)`.
//
// # Safety
// The callbacks must be safe to call with `user_data` from any thread for
// the duration of the call. `out` must be valid for writes.
enum BgStatus bg_spectrum_shooting(double left,
                                   double right,
                                   BgDriftFn drift,
                                   BgDriftFn drift_derivative,
                                   void *user_data,
                                   double left_multiplicity,
                                   double right_multiplicity,
                                   size_t count,
                                   double tol,
                                   struct BgSpectrum **out);

// Same as [`bg_spectrum_shooting`] with the finite-difference solver on `mesh` cells.
//
// # Safety
// See [`bg_spectrum_shooting`].
enum BgStatus bg_spectrum_fd(double left,
                             double right,
                             BgDriftFn drift,
                             BgDriftFn drift_derivative,
                             void *user_data,
                             double left_multiplicity,
                             double right_multiplicity,
                             size_t count,
                             size_t mesh,
                             struct BgSpectrum **out);

// Number of eigenvalues held by the handle (0 for null).
//
// # Safety
// `h` must be null or a live handle.
size_t bg_spectrum_count(const struct BgSpectrum *h);

// # Safety
// `h` must be null or a live handle; `out` must be valid for writes.
enum BgStatus bg_spectrum_eigenvalue(const struct BgSpectrum *h, size_t index, double *out);

// # Safety
// `h` must be null or a live handle; `out` must be valid for writes.
enum BgStatus bg_spectrum_residual(const struct BgSpectrum *h, double *out);

// Copies the samples `(x, v(x))` of eigenfunction `index` into `xs`/`vs`.
//
// `written` receives the number of samples. If `capacity` is too small
// nothing is copied and `BG_STATUS_BUFFER_TOO_SMALL` is returned.
//
// # Safety
// `h` must be a live handle, `xs` and `vs` valid for `capacity` doubles,
// `written` valid for writes.
enum BgStatus bg_spectrum_samples(const struct BgSpectrum *h,
                                  size_t index,
                                  double *xs,
                                  double *vs,
                                  size_t capacity,
                                  size_t *written);

// # Safety
// `h` must be null or a handle not yet freed.
void bg_spectrum_free(struct BgSpectrum *h);

// Hopf fibration of S^{2m+1}.
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_zoo_hopf(uint32_t n_complex, struct BgExample **out);

// Isoparametric foliation of S^n with `g` principal curvatures.
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_zoo_isoparametric(uint32_t g,
                                   uint32_t n,
                                   uint32_t m1,
                                   uint32_t m2,
                                   struct BgExample **out);

// Flat mapping torus with circle leaf space and first basic eigenvalue `lambda`.
//
// # Safety
// `out` must be valid for writes.
enum BgStatus bg_zoo_mapping_torus(double lambda, struct BgExample **out);

// Fills any non-null out-pointer with the fixture's closed-form data.
//
// # Safety
// `h` must be a live handle; each out-pointer must be null or valid.
enum BgStatus bg_zoo_data(const struct BgExample *h,
                          uint32_t *ambient_dim,
                          double *k_ambient,
                          double *known_lambda1b,
                          double *known_diameter);

// First eigenvalue of the fixture's transverse drift problem, when it has one.
//
// # Safety
// `h` must be a live handle; `out` must be valid for writes.
enum BgStatus bg_zoo_reduction_eigenvalue(const struct BgExample *h, double tol, double *out);

// # Safety
// `h` must be null or a handle not yet freed.
void bg_zoo_free(struct BgExample *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BASICGAP_H */
