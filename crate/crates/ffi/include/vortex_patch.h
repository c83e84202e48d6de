#ifndef VORTEX_PATCH_H
#define VORTEX_PATCH_H

#pragma once

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum VpStatus {
  VP_STATUS_OK = 0,
  VP_STATUS_NULL_POINTER = 1,
  VP_STATUS_INVALID_ARGUMENT = 2,
  VP_STATUS_SELF_INTERSECTING = 3,
  VP_STATUS_BLOW_UP = 4,
  VP_STATUS_NON_CONVERGENCE = 5,
  VP_STATUS_IO = 6,
  VP_STATUS_PANIC = 7,
} VpStatus;

// Kirchhoff ellipse constants for one aspect ratio.
typedef struct VpEllipse VpEllipse;

// Radial deformation sampled on a uniform grid.
typedef struct VpState VpState;

// Linear data of one Fourier mode at the ellipse.
typedef struct VpModeData {
  uint32_t n;
  double mu_plus;
  double mu_minus;
  double omega_n;
  double m_n;
  // 0 elliptic, 1 hyperbolic, 2 degenerate.
  int class_code;
} VpModeData;

// Conserved quantities of a state.
typedef struct VpConserved {
  double circulation;
  double center_modulus;
  double angular_momentum;
  double pseudo_energy;
  // NaN when the ellipse is a disk.
  double rectified_momentum;
} VpConserved;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
uintptr_t vp_last_error_message(char *buf, uintptr_t len);

// Creates the ellipse handle for aspect ratio `gamma ≥ 1`.
//
// # Safety
// `out` must be a valid pointer.
enum VpStatus vp_ellipse_new(double gamma, struct VpEllipse **out);

// # Safety
// `e` must be null or a handle from [`vp_ellipse_new`] not yet freed.
void vp_ellipse_free(struct VpEllipse *e);

// Angular velocity `Ω_γ`, `ℵ` and `α` (the last two NaN for the disk).
//
// # Safety
// `e` must be a live handle; output pointers may be null.
enum VpStatus vp_ellipse_constants(const struct VpEllipse *e,
                                   double *omega,
                                   double *aleph,
                                   double *alpha);

// # Safety
// `e` must be a live handle and `out` valid.
enum VpStatus vp_mode_data(const struct VpEllipse *e, uint32_t n, struct VpModeData *out);

// Critical aspect ratio `γ̄_n`, `n ≥ 3`.
//
// # Safety
// `out` must be valid.
enum VpStatus vp_critical_gamma(uint32_t n, double *out);

// State from `n_points` samples; the mean is projected out.
//
// # Safety
// `values` must point to `n_points` readable doubles, `out` valid.
enum VpStatus vp_state_new(const double *values, uintptr_t n_points, struct VpState **out);

// # Safety
// `s` must be null or a handle not yet freed.
void vp_state_free(struct VpState *s);

// # Safety
// `s` must be a live handle.
uintptr_t vp_state_len(const struct VpState *s);

// Copies the samples into `out` (length `len` must equal the state size).
//
// # Safety
// `s` live; `out` points to `len` writable doubles.
enum VpStatus vp_state_values(const struct VpState *s, double *out, uintptr_t len);

// Right-hand side of the evolution law at angular velocity `omega`.
//
// # Safety
// Handles live; `out` points to `len` writable doubles.
enum VpStatus vp_rhs(const struct VpState *s,
                     const struct VpEllipse *e,
                     double omega,
                     double *out,
                     uintptr_t len);

// # Safety
// Handles live; `out` valid.
enum VpStatus vp_conserved(const struct VpState *s,
                           const struct VpEllipse *e,
                           struct VpConserved *out);

// RK4 integration to `t_end`; the final state is returned as a new handle.
//
// # Safety
// Handles live; `out` valid.
enum VpStatus vp_integrate(const struct VpState *s,
                           const struct VpEllipse *e,
                           double omega,
                           double dt,
                           double t_end,
                           struct VpState **out);

// Rectified momentum `𝒥` and time of impact `t̄` of a state.
//
// # Safety
// Handles live; output pointers valid.
enum VpStatus vp_rectify(const struct VpState *s,
                         const struct VpEllipse *e,
                         double *j_coord,
                         double *t_coord);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VORTEX_PATCH_H */
