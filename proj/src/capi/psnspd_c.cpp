// C ABI wrapper. Exceptions never cross this boundary: every entry point
// funnels through guarded(), which maps them onto psnspd_status codes.

#include "psnspd/psnspd.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "core/detector_model.hpp"
#include "core/efficiency_fit.hpp"
#include "core/error.hpp"
#include "core/mc_simulator.hpp"
#include "core/photon_sources.hpp"
#include "core/pipeline.hpp"
#include "core/reconstruction.hpp"
#include "core/serialization.hpp"
#include "core/uncertainty.hpp"

struct psnspd_matrix {
  psnspd::ProbabilityMatrix value;
};
struct psnspd_records {
  std::vector<psnspd::CountRecord> value;
};
struct psnspd_fit_result {
  psnspd::FitResult value;
};
struct psnspd_reconstruction {
  psnspd::ReconstructionResult value;
};
struct psnspd_uncertainty {
  psnspd::MatrixUncertainty value;
};

namespace {

thread_local std::string g_last_error;

struct CapiError {
  psnspd_status status;
  std::string message;
};

psnspd_status to_status(psnspd::ErrorCode code) {
  switch (code) {
    case psnspd::ErrorCode::InvalidArgument: return PSNSPD_ERR_INVALID_ARGUMENT;
    case psnspd::ErrorCode::DimensionMismatch: return PSNSPD_ERR_DIMENSION_MISMATCH;
    case psnspd::ErrorCode::SingularMatrix: return PSNSPD_ERR_SINGULAR_MATRIX;
    case psnspd::ErrorCode::NotConverged: return PSNSPD_ERR_NOT_CONVERGED;
    case psnspd::ErrorCode::Parse: return PSNSPD_ERR_PARSE;
    case psnspd::ErrorCode::Io: return PSNSPD_ERR_IO;
    case psnspd::ErrorCode::Internal: return PSNSPD_ERR_INTERNAL;
  }
  return PSNSPD_ERR_INTERNAL;
}

template <class Fn>
psnspd_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return PSNSPD_OK;
  } catch (const CapiError& e) {
    g_last_error = e.message;
    return e.status;
  } catch (const psnspd::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PSNSPD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PSNSPD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PSNSPD_ERR_INTERNAL;
  }
}

void require(const void* ptr, const char* name) {
  if (ptr == nullptr) throw CapiError{PSNSPD_ERR_NULL_POINTER, std::string(name) + " is NULL"};
}

void require_len(size_t have, size_t need, const char* name) {
  if (have < need)
    throw CapiError{PSNSPD_ERR_BUFFER_TOO_SMALL, std::string(name) + " needs " +
                                                     std::to_string(need) + " elements, got " +
                                                     std::to_string(have)};
}

std::vector<double> copy_in(const double* data, size_t len, const char* name) {
  if (len > 0) require(data, name);
  return std::vector<double>(data, data + len);
}

template <class T>
void copy_out(const std::vector<T>& src, T* dst, size_t len, const char* name) {
  require(dst, name);
  require_len(len, src.size(), name);
  std::copy(src.begin(), src.end(), dst);
}

void copy_out(std::span<const double> src, double* dst, size_t len, const char* name) {
  copy_out(std::vector<double>(src.begin(), src.end()), dst, len, name);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

psnspd::FitOptions fit_options(const psnspd_fit_options* options) {
  psnspd::FitOptions out;
  if (options != nullptr) {
    out.n_restarts = options->n_restarts;
    out.seed = options->seed;
    out.max_evaluations = options->max_evaluations;
    out.ftol = options->ftol;
    out.xtol = options->xtol;
    out.threads = options->threads;
  }
  return out;
}

psnspd::PixelEfficiencies efficiencies(const double* etas, size_t n_pixels) {
  return psnspd::PixelEfficiencies(copy_in(etas, n_pixels, "etas"));
}

}  // namespace

extern "C" {

const char* psnspd_version(void) { return "0.1.0"; }

const char* psnspd_status_name(psnspd_status status) {
  switch (status) {
    case PSNSPD_OK: return "ok";
    case PSNSPD_ERR_NULL_POINTER: return "null_pointer";
    case PSNSPD_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
    default: break;
  }
  if (status >= PSNSPD_ERR_INVALID_ARGUMENT && status <= PSNSPD_ERR_INTERNAL)
    return psnspd::error_code_name(static_cast<psnspd::ErrorCode>(status));
  return "unknown_error";
}

const char* psnspd_last_error(void) { return g_last_error.c_str(); }

void psnspd_string_free(char* str) { std::free(str); }

// detector model

psnspd_status psnspd_matrix_build(const double* etas, size_t n_pixels, size_t max_photons,
                                  psnspd_matrix** out) {
  return guarded([&] {
    require(out, "out");
    *out = new psnspd_matrix{psnspd::build_p_matrix(efficiencies(etas, n_pixels), max_photons)};
  });
}

psnspd_status psnspd_matrix_from_json(const char* json, psnspd_matrix** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new psnspd_matrix{psnspd::io::matrix_from_json(psnspd::io::parse(json))};
  });
}

psnspd_status psnspd_matrix_to_json(const psnspd_matrix* p, char** out) {
  return guarded([&] {
    require(p, "matrix");
    require(out, "out");
    *out = dup_string(psnspd::io::to_json(p->value).dump());
  });
}

psnspd_status psnspd_matrix_shape(const psnspd_matrix* p, size_t* n_pixels,
                                  size_t* max_photons) {
  return guarded([&] {
    require(p, "matrix");
    if (n_pixels) *n_pixels = p->value.n_pixels();
    if (max_photons) *max_photons = p->value.max_photons();
  });
}

psnspd_status psnspd_matrix_entries(const psnspd_matrix* p, double* out, size_t len) {
  return guarded([&] {
    require(p, "matrix");
    copy_out(p->value.entries(), out, len, "out");
  });
}

void psnspd_matrix_free(psnspd_matrix* p) { delete p; }

psnspd_status psnspd_closed_form_entry(const double* etas, size_t n_pixels, size_t n,
                                       size_t m, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = psnspd::enumerate_pnm_closed_form(efficiencies(etas, n_pixels), n, m);
  });
}

// photon sources

psnspd_status psnspd_poisson(double mu, size_t max_photons, double* probs, size_t len,
                             double* tail_mass) {
  return guarded([&] {
    const auto s = psnspd::poisson_statistics(mu, max_photons);
    copy_out(s.probs(), probs, len, "probs");
    if (tail_mass) *tail_mass = s.tail_mass();
  });
}

psnspd_status psnspd_forward_map(const psnspd_matrix* p, const double* s, size_t s_len,
                                 double* q, size_t q_len) {
  return guarded([&] {
    require(p, "matrix");
    const psnspd::PhotonStatistics stats(copy_in(s, s_len, "s"));
    copy_out(psnspd::forward_map(p->value, stats).probs(), q, q_len, "q");
  });
}

// simulation

psnspd_status psnspd_simulate_poisson(const double* etas, size_t n_pixels, double mu,
                                      uint64_t n_pulses, uint64_t seed, unsigned threads,
                                      uint64_t* counts, size_t len) {
  return guarded([&] {
    psnspd::SimulationConfig cfg{efficiencies(etas, n_pixels), psnspd::PoissonSource{mu},
                                 n_pulses, seed, threads};
    copy_out(psnspd::simulate_pulses(cfg).counts, counts, len, "counts");
  });
}

psnspd_status psnspd_simulate_source(const double* etas, size_t n_pixels,
                                     const double* source, size_t source_len,
                                     uint64_t n_pulses, uint64_t seed, unsigned threads,
                                     uint64_t* counts, size_t len) {
  return guarded([&] {
    psnspd::SimulationConfig cfg{efficiencies(etas, n_pixels),
                                 psnspd::PhotonStatistics(copy_in(source, source_len, "source")),
                                 n_pulses, seed, threads};
    copy_out(psnspd::simulate_pulses(cfg).counts, counts, len, "counts");
  });
}

// count records

psnspd_status psnspd_counts_to_clicks(const uint64_t* threshold_counts, size_t n_pixels,
                                      double rep_rate_hz, double acquisition_time_s,
                                      double background_rate_hz, double* q, size_t len) {
  return guarded([&] {
    if (n_pixels > 0) require(threshold_counts, "threshold_counts");
    psnspd::CountRecord rec{{threshold_counts, threshold_counts + n_pixels},
                            rep_rate_hz,
                            acquisition_time_s,
                            std::nullopt};
    copy_out(psnspd::counts_to_click_statistics(rec, {background_rate_hz}).probs(), q, len, "q");
  });
}

psnspd_status psnspd_histogram_to_thresholds(const uint64_t* counts, size_t len,
                                             uint64_t* thresholds, size_t thresholds_len) {
  return guarded([&] {
    if (len > 0) require(counts, "counts");
    psnspd::ClickCountsHistogram hist{{counts, counts + len}, 0, 0};
    for (auto c : hist.counts) hist.n_pulses += c;
    copy_out(psnspd::histogram_to_threshold_counts(hist), thresholds, thresholds_len,
             "thresholds");
  });
}

psnspd_status psnspd_records_from_json(const char* json, psnspd_records** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new psnspd_records{psnspd::io::records_from_json(psnspd::io::parse(json))};
  });
}

size_t psnspd_records_count(const psnspd_records* r) { return r ? r->value.size() : 0; }

size_t psnspd_records_n_pixels(const psnspd_records* r) {
  return r && !r->value.empty() ? r->value.front().n_pixels() : 0;
}

psnspd_status psnspd_records_mu(const psnspd_records* r, size_t index, int* has_mu,
                                double* mu) {
  return guarded([&] {
    require(r, "records");
    require(has_mu, "has_mu");
    if (index >= r->value.size())
      throw CapiError{PSNSPD_ERR_INVALID_ARGUMENT, "record index out of range"};
    const auto& rec = r->value[index];
    *has_mu = rec.mu.has_value();
    if (mu && rec.mu) *mu = *rec.mu;
  });
}

psnspd_status psnspd_records_clicks(const psnspd_records* r, size_t index,
                                    double background_rate_hz, double* q, size_t len) {
  return guarded([&] {
    require(r, "records");
    if (index >= r->value.size())
      throw CapiError{PSNSPD_ERR_INVALID_ARGUMENT, "record index out of range"};
    copy_out(psnspd::counts_to_click_statistics(r->value[index], {background_rate_hz}).probs(),
             q, len, "q");
  });
}

void psnspd_records_free(psnspd_records* r) { delete r; }

// efficiency fit

void psnspd_fit_options_init(psnspd_fit_options* options) {
  if (options == nullptr) return;
  const psnspd::FitOptions d;
  *options = {d.n_restarts, d.seed, d.max_evaluations, d.ftol, d.xtol, d.threads};
}

psnspd_status psnspd_fit(const double* q, const double* s, size_t n_obs, size_t n_pixels,
                         size_t s_len, const psnspd_fit_options* options,
                         psnspd_fit_result** out) {
  return guarded([&] {
    require(out, "out");
    const auto q_all = copy_in(q, n_obs * (n_pixels + 1), "q");
    const auto s_all = copy_in(s, n_obs * s_len, "s");
    std::vector<psnspd::FitObservation> obs;
    for (size_t i = 0; i < n_obs; ++i) {
      obs.push_back({psnspd::ClickStatistics({q_all.begin() + i * (n_pixels + 1),
                                              q_all.begin() + (i + 1) * (n_pixels + 1)}),
                     psnspd::PhotonStatistics(
                         {s_all.begin() + i * s_len, s_all.begin() + (i + 1) * s_len})});
    }
    *out = new psnspd_fit_result{psnspd::fit_efficiencies(obs, n_pixels, fit_options(options))};
  });
}

psnspd_status psnspd_fit_records(const psnspd_records* records, size_t max_photons,
                                 double background_rate_hz, const psnspd_fit_options* options,
                                 psnspd_fit_result** out) {
  return guarded([&] {
    require(records, "records");
    require(out, "out");
    psnspd::FitWorkflowConfig cfg{max_photons, fit_options(options), {background_rate_hz}};
    *out = new psnspd_fit_result{psnspd::run_fit_workflow(records->value, cfg).fit};
  });
}

psnspd_status psnspd_fit_result_etas(const psnspd_fit_result* r, double* out, size_t len) {
  return guarded([&] {
    require(r, "fit result");
    copy_out(r->value.etas.values(), out, len, "out");
  });
}

size_t psnspd_fit_result_n_pixels(const psnspd_fit_result* r) {
  return r ? r->value.etas.size() : 0;
}
double psnspd_fit_result_residual(const psnspd_fit_result* r) {
  return r ? r->value.residual_norm : -1.0;
}
int psnspd_fit_result_converged(const psnspd_fit_result* r) {
  return r && r->value.converged ? 1 : 0;
}
size_t psnspd_fit_result_restarts(const psnspd_fit_result* r) {
  return r ? r->value.n_restarts_used : 0;
}

psnspd_status psnspd_fit_result_to_json(const psnspd_fit_result* r, char** out) {
  return guarded([&] {
    require(r, "fit result");
    require(out, "out");
    *out = dup_string(psnspd::io::to_json(r->value).dump());
  });
}

void psnspd_fit_result_free(psnspd_fit_result* r) { delete r; }

// reconstruction

psnspd_status psnspd_reconstruct(const psnspd_matrix* p, const double* q, size_t len,
                                 psnspd_reconstruction** out) {
  return guarded([&] {
    require(p, "matrix");
    require(out, "out");
    *out = new psnspd_reconstruction{
        psnspd::reconstruct_statistics(p->value, psnspd::ClickStatistics(copy_in(q, len, "q")))};
  });
}

psnspd_status psnspd_reconstruction_raw(const psnspd_reconstruction* r, double* out,
                                        size_t len) {
  return guarded([&] {
    require(r, "reconstruction");
    copy_out(r->value.raw, out, len, "out");
  });
}

psnspd_status psnspd_reconstruction_clipped(const psnspd_reconstruction* r, double* out,
                                            size_t len) {
  return guarded([&] {
    require(r, "reconstruction");
    copy_out(r->value.clipped.probs(), out, len, "out");
  });
}

double psnspd_reconstruction_condition(const psnspd_reconstruction* r) {
  return r ? r->value.condition_number : -1.0;
}
int psnspd_reconstruction_truncated(const psnspd_reconstruction* r) {
  return r && r->value.truncation_note ? 1 : 0;
}
int psnspd_reconstruction_ill_conditioned(const psnspd_reconstruction* r) {
  return r && r->value.ill_conditioned ? 1 : 0;
}

psnspd_status psnspd_reconstruction_to_json(const psnspd_reconstruction* r, char** out) {
  return guarded([&] {
    require(r, "reconstruction");
    require(out, "out");
    *out = dup_string(psnspd::io::to_json(r->value).dump());
  });
}

psnspd_status psnspd_reconstruction_table_json(const psnspd_reconstruction* r,
                                               const double* s_true, size_t s_true_len,
                                               char** out) {
  return guarded([&] {
    require(r, "reconstruction");
    require(out, "out");
    std::optional<psnspd::PhotonStatistics> truth;
    if (s_true != nullptr) truth.emplace(copy_in(s_true, s_true_len, "s_true"));
    *out = dup_string(psnspd::io::to_json(psnspd::reconstruction_table(r->value, truth)).dump());
  });
}

void psnspd_reconstruction_free(psnspd_reconstruction* r) { delete r; }

// uncertainty

psnspd_status psnspd_flux_relative_uncertainty(double sigma_pm_rel, double sigma_op_rel,
                                               double sigma_at_rel, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = psnspd::flux_relative_uncertainty({sigma_pm_rel, sigma_op_rel, sigma_at_rel});
  });
}

psnspd_status psnspd_resample_click_counts(const double* q, size_t len, uint64_t n_trials,
                                           uint64_t seed, double* out) {
  return guarded([&] {
    const psnspd::ClickStatistics stats(copy_in(q, len, "q"));
    copy_out(psnspd::resample_click_counts(stats, n_trials, seed).probs(), out, len, "out");
  });
}

psnspd_status psnspd_resample_mu(double mu, double rel_sigma, uint64_t seed, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = psnspd::resample_mu(mu, rel_sigma, seed);
  });
}

void psnspd_uncertainty_options_init(psnspd_uncertainty_options* options) {
  if (options == nullptr) return;
  const psnspd::UncertaintyOptions d;
  options->n_mc_sets = d.n_mc_sets;
  options->n_trials_per_set = d.n_trials_per_set;
  options->max_photons = d.max_photons;
  options->seed = d.seed;
  options->threads = d.threads;
  psnspd_fit_options_init(&options->fit);
}

psnspd_status psnspd_matrix_uncertainty(const double* q, size_t len, double mu,
                                        double sigma_pm_rel, double sigma_op_rel,
                                        double sigma_at_rel,
                                        const psnspd_uncertainty_options* options,
                                        psnspd_uncertainty** out) {
  return guarded([&] {
    require(out, "out");
    const psnspd::ClickStatistics stats(copy_in(q, len, "q"));
    psnspd::UncertaintyOptions opts;
    if (options != nullptr) {
      opts.n_mc_sets = options->n_mc_sets;
      opts.n_trials_per_set = options->n_trials_per_set;
      opts.max_photons = options->max_photons;
      opts.seed = options->seed;
      opts.threads = options->threads;
      opts.fit = fit_options(&options->fit);
    }
    *out = new psnspd_uncertainty{psnspd::matrix_uncertainty(
        stats, mu, stats.n_pixels(), {sigma_pm_rel, sigma_op_rel, sigma_at_rel}, opts)};
  });
}

psnspd_status psnspd_uncertainty_mean(const psnspd_uncertainty* u, psnspd_matrix** out) {
  return guarded([&] {
    require(u, "uncertainty");
    require(out, "out");
    *out = new psnspd_matrix{u->value.mean_matrix};
  });
}

psnspd_status psnspd_uncertainty_sigma(const psnspd_uncertainty* u, double* out, size_t len) {
  return guarded([&] {
    require(u, "uncertainty");
    copy_out(u->value.sigma_matrix, out, len, "out");
  });
}

size_t psnspd_uncertainty_n_trials(const psnspd_uncertainty* u) {
  return u ? u->value.n_trials : 0;
}
size_t psnspd_uncertainty_n_discarded(const psnspd_uncertainty* u) {
  return u ? u->value.n_discarded : 0;
}

psnspd_status psnspd_uncertainty_to_json(const psnspd_uncertainty* u, char** out) {
  return guarded([&] {
    require(u, "uncertainty");
    require(out, "out");
    *out = dup_string(psnspd::io::to_json(u->value).dump());
  });
}

void psnspd_uncertainty_free(psnspd_uncertainty* u) { delete u; }

}  // extern "C"
