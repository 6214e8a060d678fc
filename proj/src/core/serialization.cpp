#include "core/serialization.hpp"

#include <cmath>

#include "core/error.hpp"

namespace psnspd::io {
namespace {

constexpr double kLoadedColumnTolerance = 1e-2;

const json& field(const json& j, const char* key) {
  if (!j.is_object()) fail(ErrorCode::Parse, "expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) fail(ErrorCode::Parse, std::string("missing field \"") + key + "\"");
  return *it;
}

template <class T>
T as(const json& j, const char* what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("bad value for \"") + what + "\": " + e.what());
  }
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorCode::Parse, std::string("\"") + what + "\" must be an array");
  return as<std::vector<double>>(j, what);
}

json rows_of(std::span<const double> row_major, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r)
    out.push_back(std::vector<double>(row_major.begin() + r * cols,
                                      row_major.begin() + (r + 1) * cols));
  return out;
}

}  // namespace

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, e.what());
  }
}

json to_json(const PixelEfficiencies& etas) {
  return {{"etas", std::vector<double>(etas.values().begin(), etas.values().end())}};
}

json to_json(const ProbabilityMatrix& p) {
  return {{"n_pixels", p.n_pixels()},
          {"max_photons", p.max_photons()},
          {"entries", rows_of(p.entries(), p.rows(), p.cols())}};
}

json to_json(const PhotonStatistics& s) {
  json out{{"mu", nullptr},
           {"probs", std::vector<double>(s.probs().begin(), s.probs().end())},
           {"tail_mass", s.tail_mass()}};
  if (s.mu()) out["mu"] = *s.mu();
  return out;
}

json to_json(const ClickStatistics& q) {
  return {{"probs", std::vector<double>(q.probs().begin(), q.probs().end())}};
}

json to_json(const ClickCountsHistogram& hist) {
  return {{"n_pulses", hist.n_pulses}, {"counts", hist.counts}, {"seed", hist.seed}};
}

json to_json(const CountRecord& rec) {
  json out{{"threshold_counts", rec.threshold_counts},
           {"rep_rate_hz", rec.rep_rate_hz},
           {"acquisition_time_s", rec.acquisition_time_s}};
  if (rec.mu) out["mu"] = *rec.mu;
  return out;
}

json to_json(const FitResult& fit) {
  return {{"etas_sorted",
           std::vector<double>(fit.etas.values().begin(), fit.etas.values().end())},
          {"residual_norm", fit.residual_norm},
          {"converged", fit.converged},
          {"n_restarts_used", fit.n_restarts_used}};
}

json to_json(const ReconstructionResult& r) {
  return {{"raw", r.raw},
          {"clipped", std::vector<double>(r.clipped.probs().begin(), r.clipped.probs().end())},
          {"condition_number", r.condition_number},
          {"truncation_note", r.truncation_note},
          {"ill_conditioned", r.ill_conditioned}};
}

json to_json(const std::vector<ReconstructionRow>& table) {
  json out = json::array();
  for (const auto& row : table) {
    json j{{"m", row.m}, {"s_true", nullptr}, {"s_raw", row.s_raw}, {"s_clipped", row.s_clipped}};
    if (row.s_true) j["s_true"] = *row.s_true;
    out.push_back(std::move(j));
  }
  return out;
}

json to_json(const MatrixUncertainty& u) {
  const auto& p = u.mean_matrix;
  return {{"mean_matrix", to_json(p)},
          {"sigma_matrix", rows_of(u.sigma_matrix, p.rows(), p.cols())},
          {"etas_mean_sorted", u.etas_mean},
          {"etas_sigma_sorted", u.etas_sigma},
          {"n_trials", u.n_trials},
          {"n_discarded", u.n_discarded}};
}

json to_json(const FluxErrorBudget& budget) {
  return {{"sigma_pm_rel", budget.sigma_pm_rel},
          {"sigma_op_rel", budget.sigma_op_rel},
          {"sigma_at_rel", budget.sigma_at_rel}};
}

PixelEfficiencies efficiencies_from_json(const json& j) {
  if (j.is_array()) return PixelEfficiencies(numbers(j, "etas"));
  return PixelEfficiencies(numbers(field(j, "etas"), "etas"));
}

ProbabilityMatrix matrix_from_json(const json& j) {
  const auto n_pixels = as<std::size_t>(field(j, "n_pixels"), "n_pixels");
  const auto max_photons = as<std::size_t>(field(j, "max_photons"), "max_photons");
  const json& rows = field(j, "entries");
  if (!rows.is_array() || rows.size() != n_pixels + 1)
    fail(ErrorCode::DimensionMismatch, "\"entries\" must hold n_pixels + 1 rows");
  std::vector<double> entries;
  for (const auto& row : rows) {
    auto values = numbers(row, "entries");
    if (values.size() != max_photons + 1)
      fail(ErrorCode::DimensionMismatch, "each row of \"entries\" must hold max_photons + 1 values");
    entries.insert(entries.end(), values.begin(), values.end());
  }
  return ProbabilityMatrix(n_pixels, max_photons, std::move(entries), kLoadedColumnTolerance);
}

PhotonStatistics photon_statistics_from_json(const json& j) {
  std::optional<double> mu;
  if (const auto it = j.find("mu"); it != j.end() && !it->is_null()) mu = as<double>(*it, "mu");
  return PhotonStatistics(numbers(field(j, "probs"), "probs"), mu);
}

ClickStatistics click_statistics_from_json(const json& j) {
  if (j.is_array()) return ClickStatistics(numbers(j, "probs"));
  return ClickStatistics(numbers(field(j, "probs"), "probs"));
}

CountRecord record_from_json(const json& j) {
  CountRecord rec;
  const json& counts = field(j, "threshold_counts");
  if (!counts.is_array()) fail(ErrorCode::Parse, "\"threshold_counts\" must be an array");
  for (const auto& c : counts) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
      fail(ErrorCode::Parse, "threshold counts must be nonnegative integers");
    rec.threshold_counts.push_back(c.get<std::uint64_t>());
  }
  rec.rep_rate_hz = as<double>(field(j, "rep_rate_hz"), "rep_rate_hz");
  rec.acquisition_time_s = as<double>(field(j, "acquisition_time_s"), "acquisition_time_s");
  if (const auto it = j.find("mu"); it != j.end() && !it->is_null()) rec.mu = as<double>(*it, "mu");
  rec.validate();
  return rec;
}

std::vector<CountRecord> records_from_json(const json& j) {
  std::vector<CountRecord> records;
  if (j.is_array()) {
    for (const auto& item : j) records.push_back(record_from_json(item));
  } else {
    records.push_back(record_from_json(j));
  }
  if (records.empty()) fail(ErrorCode::Parse, "no records found");
  return records;
}

FluxErrorBudget budget_from_json(const json& j) {
  FluxErrorBudget budget{as<double>(field(j, "sigma_pm_rel"), "sigma_pm_rel"),
                         as<double>(field(j, "sigma_op_rel"), "sigma_op_rel"),
                         as<double>(field(j, "sigma_at_rel"), "sigma_at_rel")};
  budget.validate();
  return budget;
}

SimulationConfig simulation_config_from_json(const json& j) {
  PixelEfficiencies etas = efficiencies_from_json(j);
  PulseSource source = PoissonSource{};
  if (const auto it = j.find("source"); it != j.end()) {
    source = photon_statistics_from_json(*it);
  } else {
    source = PoissonSource{as<double>(field(j, "mu"), "mu")};
  }
  SimulationConfig cfg{std::move(etas), std::move(source)};
  if (const auto it = j.find("n_pulses"); it != j.end())
    cfg.n_pulses = as<std::uint64_t>(*it, "n_pulses");
  if (const auto it = j.find("seed"); it != j.end()) cfg.seed = as<std::uint64_t>(*it, "seed");
  return cfg;
}

}  // namespace psnspd::io
