#ifndef CODED_APERTURE_H
#define CODED_APERTURE_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes.
 */
typedef enum CaStatus {
  CA_STATUS_OK = 0,
  CA_STATUS_NULL_POINTER = 1,
  CA_STATUS_INVALID_PARAMETER = 2,
  CA_STATUS_NO_RESIDUE_FAMILY = 3,
  CA_STATUS_CERTIFICATE_FAILED = 4,
  CA_STATUS_NOISELESS = 5,
  CA_STATUS_CAP_EXCEEDED = 6,
  CA_STATUS_BUFFER_TOO_SMALL = 7,
  CA_STATUS_INTERNAL = 8,
  CA_STATUS_PANIC = 9,
} CaStatus;

/*
 Opaque designed mask with its certificate.
 */
typedef struct CaDesign CaDesign;

/*
 Opaque scene prior.
 */
typedef struct CaPrior CaPrior;

/*
 Imaging parameters: scene length, exposure, thermal and shot noise.
 */
typedef struct CaConfig {
  uintptr_t n;
  double t;
  double w;
  double j;
} CaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *ca_last_error(void);

/*
 `β(n)`, the smallest mean absolute value over the basis.

 # Safety
 `out` must be valid for one write.
 */
enum CaStatus ca_beta(uintptr_t n, double *out);

/*
 `M(n) = (3π/2) β(n)^-2`.

 # Safety
 `out` must be valid for one write.
 */
enum CaStatus ca_m_bound(uintptr_t n, double *out);

/*
 Constant prior `d(x) = θ`.

 # Safety
 `out` must be valid for one write.
 */
enum CaStatus ca_prior_iid(double theta, struct CaPrior **out);

/*
 `θ` up to `s - r`, zero from `s + r`, linear between.

 # Safety
 `out` must be valid for one write.
 */
enum CaStatus ca_prior_bandlimited(double theta, double s, double r, struct CaPrior **out);

/*
 `θ (x0 / (x0 + x))^exponent`.

 # Safety
 `out` must be valid for one write.
 */
enum CaStatus ca_prior_power_law(double theta, double exponent, double x0, struct CaPrior **out);

/*
 Tabulated shape on `[0, 1/2]`, scaled so that `d(0) = θ`.

 # Safety
 `values` must point to `len` readable doubles; `out` must be valid for one write.
 */
enum CaStatus ca_prior_table(double theta,
                             const double *values,
                             uintptr_t len,
                             struct CaPrior **out);

/*
 # Safety
 `prior` must come from a `ca_prior_*` constructor and not be used afterwards.
 */
void ca_prior_free(struct CaPrior *prior);

/*
 Samples `d_i = d(i/n)/n` into `out[0..n]`.

 # Safety
 `prior` must be a live handle; `out` must hold `len` doubles.
 */
enum CaStatus ca_prior_sample(const struct CaPrior *prior, uintptr_t n, double *out, uintptr_t len);

/*
 LMMSE of a 1D mask of length `config.n`.

 # Safety
 `prior` must be a live handle; `mask` must hold `len` doubles; `out` one write.
 */
enum CaStatus ca_lmmse(struct CaConfig config,
                       const struct CaPrior *prior,
                       const double *mask,
                       uintptr_t len,
                       double *out);

/*
 LMMSE from a power spectrum `|â_i|²` and transmissivity, so that arbitrary
 nonnegative vectors (the ideal lens included) can be scored.

 # Safety
 `prior` must be a live handle; `power` must hold `len` doubles; `out` one write.
 */
enum CaStatus ca_lmmse_from_power(struct CaConfig config,
                                  const struct CaPrior *prior,
                                  const double *power,
                                  uintptr_t len,
                                  double rho,
                                  double *out);

/*
 `|â_i|²` of a real vector.

 # Safety
 `a` must hold `len` doubles and `out` `len` writable doubles.
 */
enum CaStatus ca_power_spectrum(const double *a, uintptr_t len, double *out);

/*
 Waterfilling lower bound at transmissivity `rho`.

 # Safety
 `prior` must be a live handle; `out` one write.
 */
enum CaStatus ca_lower_bound(struct CaConfig config,
                             const struct CaPrior *prior,
                             double rho,
                             double *out);

/*
 Transmissivity minimizing the lower bound, and the minimum.

 # Safety
 `prior` must be a live handle; `rho` and `bound` one write each.
 */
enum CaStatus ca_optimal_rho(struct CaConfig config,
                             const struct CaPrior *prior,
                             double *rho,
                             double *bound);

/*
 Indicator of the nonzero `e`-th power residues mod `p` (plus 0 if asked).

 # Safety
 `out` must hold `len ≥ p` doubles.
 */
enum CaStatus ca_residue_sequence(uint64_t p,
                                  uint32_t e,
                                  bool include_zero,
                                  double *out,
                                  uintptr_t len);

/*
 Residue mask of length `config.n` with its certificate.

 # Safety
 `prior` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_flat(struct CaConfig config,
                             const struct CaPrior *prior,
                             struct CaDesign **out);

/*
 Prior-adapted mask from the coefficient problem, with its certificate.

 # Safety
 `prior` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_nazarov(struct CaConfig config,
                                const struct CaPrior *prior,
                                uint64_t seed,
                                struct CaDesign **out);

/*
 Number of mask entries.

 # Safety
 `design` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_len(const struct CaDesign *design, uintptr_t *out);

/*
 Copies the mask into `out`.

 # Safety
 `design` must be a live handle; `out` must hold `len` doubles.
 */
enum CaStatus ca_design_values(const struct CaDesign *design, double *out, uintptr_t len);

/*
 Whether the certificate passed.

 # Safety
 `design` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_passed(const struct CaDesign *design, bool *out);

/*
 Guaranteed exposure multiplier recorded in the certificate.

 # Safety
 `design` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_penalty(const struct CaDesign *design, double *out);

/*
 Transmissivity of the mask.

 # Safety
 `design` must be a live handle; `out` one write.
 */
enum CaStatus ca_design_rho(const struct CaDesign *design, double *out);

/*
 Certificate as a JSON string owned by the handle.

 # Safety
 `design` must be a live handle; the pointer dies with it.
 */
const char *ca_design_certificate_json(const struct CaDesign *design);

/*
 # Safety
 `design` must come from a `ca_design_*` constructor and not be used afterwards.
 */
void ca_design_free(struct CaDesign *design);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODED_APERTURE_H */
