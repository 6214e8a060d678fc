/*
 * psnspd: response model, efficiency fit, statistics reconstruction and
 * uncertainty propagation for multi-pixel photon-number-resolving detectors.
 *
 * C ABI over the C++ core. Objects are opaque handles released with the
 * matching *_free function. Every fallible call returns a psnspd_status; on
 * failure psnspd_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread). Strings returned through
 * char** out-parameters are released with psnspd_string_free.
 *
 * Matrices are row-major with N+1 rows (clicks) and M+1 columns (photons).
 */
#ifndef PSNSPD_PSNSPD_H
#define PSNSPD_PSNSPD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PSNSPD_BUILDING)
#    define PSNSPD_API __declspec(dllexport)
#  else
#    define PSNSPD_API __declspec(dllimport)
#  endif
#elif defined(__GNUC__) && __GNUC__ >= 4
#  define PSNSPD_API __attribute__((visibility("default")))
#else
#  define PSNSPD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum psnspd_status {
  PSNSPD_OK = 0,
  PSNSPD_ERR_INVALID_ARGUMENT = 1,
  PSNSPD_ERR_DIMENSION_MISMATCH = 2,
  PSNSPD_ERR_SINGULAR_MATRIX = 3,
  PSNSPD_ERR_NOT_CONVERGED = 4,
  PSNSPD_ERR_PARSE = 5,
  PSNSPD_ERR_IO = 6,
  PSNSPD_ERR_INTERNAL = 7,
  PSNSPD_ERR_NULL_POINTER = 8,
  PSNSPD_ERR_BUFFER_TOO_SMALL = 9
} psnspd_status;

PSNSPD_API const char* psnspd_version(void);
/* Stable snake_case name, e.g. "singular_matrix". */
PSNSPD_API const char* psnspd_status_name(psnspd_status status);
PSNSPD_API const char* psnspd_last_error(void);
PSNSPD_API void psnspd_string_free(char* str);

/* ---- detector model ---------------------------------------------------- */

typedef struct psnspd_matrix psnspd_matrix;

PSNSPD_API psnspd_status psnspd_matrix_build(const double* etas, size_t n_pixels,
                                             size_t max_photons, psnspd_matrix** out);
/* {"n_pixels": int, "max_photons": int, "entries": [[...], ...]} */
PSNSPD_API psnspd_status psnspd_matrix_from_json(const char* json, psnspd_matrix** out);
PSNSPD_API psnspd_status psnspd_matrix_to_json(const psnspd_matrix* p, char** out);
PSNSPD_API psnspd_status psnspd_matrix_shape(const psnspd_matrix* p, size_t* n_pixels,
                                             size_t* max_photons);
/* Copies (N+1)*(M+1) row-major entries; len must be at least that. */
PSNSPD_API psnspd_status psnspd_matrix_entries(const psnspd_matrix* p, double* out,
                                               size_t len);
PSNSPD_API void psnspd_matrix_free(psnspd_matrix* p);

/* Literal enumeration oracle for one entry P(n, m). */
PSNSPD_API psnspd_status psnspd_closed_form_entry(const double* etas, size_t n_pixels,
                                                  size_t n, size_t m, double* out);

/* ---- photon sources ---------------------------------------------------- */

PSNSPD_API psnspd_status psnspd_poisson(double mu, size_t max_photons, double* probs,
                                        size_t len, double* tail_mass);
/* Renormalized Q = P S; s_len must be M+1 and q_len N+1. */
PSNSPD_API psnspd_status psnspd_forward_map(const psnspd_matrix* p, const double* s,
                                            size_t s_len, double* q, size_t q_len);

/* ---- simulation -------------------------------------------------------- */

/* threads = 0 uses hardware concurrency; output is identical for any value. */
PSNSPD_API psnspd_status psnspd_simulate_poisson(const double* etas, size_t n_pixels,
                                                 double mu, uint64_t n_pulses,
                                                 uint64_t seed, unsigned threads,
                                                 uint64_t* counts, size_t len);
PSNSPD_API psnspd_status psnspd_simulate_source(const double* etas, size_t n_pixels,
                                                const double* source, size_t source_len,
                                                uint64_t n_pulses, uint64_t seed,
                                                unsigned threads, uint64_t* counts,
                                                size_t len);

/* ---- count records ----------------------------------------------------- */

PSNSPD_API psnspd_status psnspd_counts_to_clicks(const uint64_t* threshold_counts,
                                                 size_t n_pixels, double rep_rate_hz,
                                                 double acquisition_time_s,
                                                 double background_rate_hz, double* q,
                                                 size_t len);
/* Nested threshold encoding of an (N+1)-bin histogram into N counts. */
PSNSPD_API psnspd_status psnspd_histogram_to_thresholds(const uint64_t* counts, size_t len,
                                                        uint64_t* thresholds,
                                                        size_t thresholds_len);

typedef struct psnspd_records psnspd_records;

/* One record object or an array of records. */
PSNSPD_API psnspd_status psnspd_records_from_json(const char* json, psnspd_records** out);
PSNSPD_API size_t psnspd_records_count(const psnspd_records* r);
PSNSPD_API size_t psnspd_records_n_pixels(const psnspd_records* r);
/* has_mu receives 0 when the record carries no mean photon number. */
PSNSPD_API psnspd_status psnspd_records_mu(const psnspd_records* r, size_t index,
                                           int* has_mu, double* mu);
PSNSPD_API psnspd_status psnspd_records_clicks(const psnspd_records* r, size_t index,
                                               double background_rate_hz, double* q,
                                               size_t len);
PSNSPD_API void psnspd_records_free(psnspd_records* r);

/* ---- efficiency fit ---------------------------------------------------- */

typedef struct psnspd_fit_options {
  size_t n_restarts;
  uint64_t seed;
  size_t max_evaluations;
  double ftol;
  double xtol;
  unsigned threads;
} psnspd_fit_options;

PSNSPD_API void psnspd_fit_options_init(psnspd_fit_options* options);

typedef struct psnspd_fit_result psnspd_fit_result;

/* q holds n_obs rows of N+1 values, s holds n_obs rows of s_len values. */
PSNSPD_API psnspd_status psnspd_fit(const double* q, const double* s, size_t n_obs,
                                    size_t n_pixels, size_t s_len,
                                    const psnspd_fit_options* options,
                                    psnspd_fit_result** out);
/* Joint fit over all records, each turned into Poisson statistics at max_photons. */
PSNSPD_API psnspd_status psnspd_fit_records(const psnspd_records* records,
                                            size_t max_photons, double background_rate_hz,
                                            const psnspd_fit_options* options,
                                            psnspd_fit_result** out);
PSNSPD_API psnspd_status psnspd_fit_result_etas(const psnspd_fit_result* r, double* out,
                                                size_t len);
PSNSPD_API size_t psnspd_fit_result_n_pixels(const psnspd_fit_result* r);
PSNSPD_API double psnspd_fit_result_residual(const psnspd_fit_result* r);
PSNSPD_API int psnspd_fit_result_converged(const psnspd_fit_result* r);
PSNSPD_API size_t psnspd_fit_result_restarts(const psnspd_fit_result* r);
/* {"etas_sorted", "residual_norm", "converged", "n_restarts_used"} */
PSNSPD_API psnspd_status psnspd_fit_result_to_json(const psnspd_fit_result* r, char** out);
PSNSPD_API void psnspd_fit_result_free(psnspd_fit_result* r);

/* ---- reconstruction ---------------------------------------------------- */

typedef struct psnspd_reconstruction psnspd_reconstruction;

PSNSPD_API psnspd_status psnspd_reconstruct(const psnspd_matrix* p, const double* q,
                                            size_t len, psnspd_reconstruction** out);
PSNSPD_API psnspd_status psnspd_reconstruction_raw(const psnspd_reconstruction* r,
                                                   double* out, size_t len);
PSNSPD_API psnspd_status psnspd_reconstruction_clipped(const psnspd_reconstruction* r,
                                                       double* out, size_t len);
PSNSPD_API double psnspd_reconstruction_condition(const psnspd_reconstruction* r);
PSNSPD_API int psnspd_reconstruction_truncated(const psnspd_reconstruction* r);
PSNSPD_API int psnspd_reconstruction_ill_conditioned(const psnspd_reconstruction* r);
/* {"raw", "clipped", "condition_number", "truncation_note", "ill_conditioned"} */
PSNSPD_API psnspd_status psnspd_reconstruction_to_json(const psnspd_reconstruction* r,
                                                       char** out);
/* [{"m", "s_true", "s_raw", "s_clipped"}]; s_true may be NULL. */
PSNSPD_API psnspd_status psnspd_reconstruction_table_json(const psnspd_reconstruction* r,
                                                          const double* s_true,
                                                          size_t s_true_len, char** out);
PSNSPD_API void psnspd_reconstruction_free(psnspd_reconstruction* r);

/* ---- uncertainty ------------------------------------------------------- */

PSNSPD_API psnspd_status psnspd_flux_relative_uncertainty(double sigma_pm_rel,
                                                          double sigma_op_rel,
                                                          double sigma_at_rel, double* out);
PSNSPD_API psnspd_status psnspd_resample_click_counts(const double* q, size_t len,
                                                      uint64_t n_trials, uint64_t seed,
                                                      double* out);
PSNSPD_API psnspd_status psnspd_resample_mu(double mu, double rel_sigma, uint64_t seed,
                                            double* out);

typedef struct psnspd_uncertainty_options {
  size_t n_mc_sets;
  uint64_t n_trials_per_set;
  size_t max_photons;
  uint64_t seed;
  unsigned threads;
  psnspd_fit_options fit;
} psnspd_uncertainty_options;

PSNSPD_API void psnspd_uncertainty_options_init(psnspd_uncertainty_options* options);

typedef struct psnspd_uncertainty psnspd_uncertainty;

PSNSPD_API psnspd_status psnspd_matrix_uncertainty(const double* q, size_t len, double mu,
                                                   double sigma_pm_rel, double sigma_op_rel,
                                                   double sigma_at_rel,
                                                   const psnspd_uncertainty_options* options,
                                                   psnspd_uncertainty** out);
/* Returns a new handle holding the mean matrix. */
PSNSPD_API psnspd_status psnspd_uncertainty_mean(const psnspd_uncertainty* u,
                                                 psnspd_matrix** out);
PSNSPD_API psnspd_status psnspd_uncertainty_sigma(const psnspd_uncertainty* u, double* out,
                                                  size_t len);
PSNSPD_API size_t psnspd_uncertainty_n_trials(const psnspd_uncertainty* u);
PSNSPD_API size_t psnspd_uncertainty_n_discarded(const psnspd_uncertainty* u);
PSNSPD_API psnspd_status psnspd_uncertainty_to_json(const psnspd_uncertainty* u, char** out);
PSNSPD_API void psnspd_uncertainty_free(psnspd_uncertainty* u);

#ifdef __cplusplus
}
#endif

#endif /* PSNSPD_PSNSPD_H */
