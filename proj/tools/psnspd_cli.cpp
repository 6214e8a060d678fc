// psnspd command-line tool. Talks to the library only through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "psnspd/psnspd.h"

using json = nlohmann::json;

namespace {

struct CliFailure {
  std::string code;
  std::string message;
  int exit_code;
};

void check(psnspd_status status) {
  if (status != PSNSPD_OK)
    throw CliFailure{psnspd_status_name(status), psnspd_last_error(), static_cast<int>(status)};
}

[[noreturn]] void usage_error(const std::string& message) {
  throw CliFailure{"usage_error", message, 64};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using MatrixPtr = std::unique_ptr<psnspd_matrix, Deleter<psnspd_matrix, psnspd_matrix_free>>;
using RecordsPtr = std::unique_ptr<psnspd_records, Deleter<psnspd_records, psnspd_records_free>>;
using FitPtr =
    std::unique_ptr<psnspd_fit_result, Deleter<psnspd_fit_result, psnspd_fit_result_free>>;
using ReconPtr = std::unique_ptr<psnspd_reconstruction,
                                 Deleter<psnspd_reconstruction, psnspd_reconstruction_free>>;
using UncertaintyPtr =
    std::unique_ptr<psnspd_uncertainty, Deleter<psnspd_uncertainty, psnspd_uncertainty_free>>;

json take_json(char* raw) {
  std::unique_ptr<char, Deleter<char, psnspd_string_free>> owned(raw);
  return json::parse(owned.get());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliFailure{"io_error", "cannot open " + path, PSNSPD_ERR_IO};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliFailure{"parse_error", path + ": " + e.what(), PSNSPD_ERR_PARSE};
  }
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw CliFailure{"parse_error", std::string("missing field \"") + key + "\"",
                     PSNSPD_ERR_PARSE};
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CliFailure{"parse_error", std::string("bad \"") + key + "\": " + e.what(),
                     PSNSPD_ERR_PARSE};
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error("not a number: \"" + item + "\"");
    }
  }
  return out;
}

struct Globals {
  std::uint64_t seed = 0;
  std::size_t max_photons = 9;
  std::string output;
  std::string format = "json";
  unsigned threads = 0;
};

void emit(const Globals& g, const json& j) {
  const std::string text = j.dump(2) + "\n";
  if (g.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw CliFailure{"io_error", "cannot write " + g.output, PSNSPD_ERR_IO};
  out << text;
}

MatrixPtr load_matrix(const std::string& path) {
  psnspd_matrix* raw = nullptr;
  check(psnspd_matrix_from_json(read_file(path).c_str(), &raw));
  return MatrixPtr(raw);
}

std::vector<double> clicks_from_record_file(const std::string& path, double background,
                                            std::optional<double>* mu) {
  psnspd_records* raw = nullptr;
  check(psnspd_records_from_json(read_file(path).c_str(), &raw));
  RecordsPtr records(raw);
  if (psnspd_records_count(records.get()) != 1)
    usage_error(path + " must hold exactly one record for this command");
  std::vector<double> q(psnspd_records_n_pixels(records.get()) + 1);
  check(psnspd_records_clicks(records.get(), 0, background, q.data(), q.size()));
  if (mu) {
    int has_mu = 0;
    double value = 0.0;
    check(psnspd_records_mu(records.get(), 0, &has_mu, &value));
    if (has_mu) *mu = value;
  }
  return q;
}

psnspd_fit_options fit_options(const Globals& g, std::size_t restarts) {
  psnspd_fit_options opts;
  psnspd_fit_options_init(&opts);
  opts.seed = g.seed;
  opts.n_restarts = restarts;
  opts.threads = g.threads;
  return opts;
}

// build-matrix ---------------------------------------------------------------

void run_build_matrix(const Globals& g, const std::string& etas_text, const std::string& input) {
  std::vector<double> etas;
  if (!etas_text.empty()) {
    etas = parse_list(etas_text);
  } else if (!input.empty()) {
    const json j = read_json(input);
    etas = j.is_array() ? j.get<std::vector<double>>() : field<std::vector<double>>(j, "etas");
  } else {
    usage_error("build-matrix needs --etas or --input");
  }
  psnspd_matrix* raw = nullptr;
  check(psnspd_matrix_build(etas.data(), etas.size(), g.max_photons, &raw));
  MatrixPtr p(raw);
  char* text = nullptr;
  check(psnspd_matrix_to_json(p.get(), &text));
  emit(g, take_json(text));
}

// simulate -------------------------------------------------------------------

void run_simulate(const Globals& g, const std::string& input, std::uint64_t pulses_flag,
                  const std::string& as, double rep_rate, bool seed_given) {
  const json cfg = read_json(input);
  const auto etas = field<std::vector<double>>(cfg, "etas");
  const std::uint64_t pulses =
      pulses_flag ? pulses_flag
                  : (cfg.contains("n_pulses") ? field<std::uint64_t>(cfg, "n_pulses") : 0);
  if (pulses == 0) usage_error("simulate needs n_pulses in the config or --pulses");
  const std::uint64_t seed =
      seed_given || !cfg.contains("seed") ? g.seed : field<std::uint64_t>(cfg, "seed");

  std::vector<std::uint64_t> counts(etas.size() + 1);
  std::optional<double> mu;
  if (cfg.contains("source")) {
    const auto probs = field<std::vector<double>>(cfg.at("source"), "probs");
    check(psnspd_simulate_source(etas.data(), etas.size(), probs.data(), probs.size(), pulses,
                                 seed, g.threads, counts.data(), counts.size()));
    if (cfg.at("source").contains("mu") && !cfg.at("source").at("mu").is_null())
      mu = field<double>(cfg.at("source"), "mu");
  } else {
    mu = field<double>(cfg, "mu");
    check(psnspd_simulate_poisson(etas.data(), etas.size(), *mu, pulses, seed, g.threads,
                                  counts.data(), counts.size()));
  }

  if (as == "histogram") {
    emit(g, {{"n_pulses", pulses}, {"counts", counts}, {"seed", seed}});
    return;
  }
  std::vector<std::uint64_t> thresholds(etas.size());
  check(psnspd_histogram_to_thresholds(counts.data(), counts.size(), thresholds.data(),
                                       thresholds.size()));
  json rec{{"threshold_counts", thresholds},
           {"rep_rate_hz", rep_rate},
           {"acquisition_time_s", static_cast<double>(pulses) / rep_rate}};
  if (mu) rec["mu"] = *mu;
  emit(g, rec);
}

// fit ------------------------------------------------------------------------

void run_fit(const Globals& g, const std::string& input, std::size_t restarts,
             double background) {
  psnspd_records* raw = nullptr;
  check(psnspd_records_from_json(read_file(input).c_str(), &raw));
  RecordsPtr records(raw);
  const auto opts = fit_options(g, restarts);
  psnspd_fit_result* fit_raw = nullptr;
  check(psnspd_fit_records(records.get(), g.max_photons, background, &opts, &fit_raw));
  FitPtr fit(fit_raw);

  std::vector<double> etas(psnspd_fit_result_n_pixels(fit.get()));
  check(psnspd_fit_result_etas(fit.get(), etas.data(), etas.size()));
  psnspd_matrix* p_raw = nullptr;
  check(psnspd_matrix_build(etas.data(), etas.size(), g.max_photons, &p_raw));
  MatrixPtr p(p_raw);

  char* fit_text = nullptr;
  check(psnspd_fit_result_to_json(fit.get(), &fit_text));
  char* p_text = nullptr;
  check(psnspd_matrix_to_json(p.get(), &p_text));
  json out = take_json(fit_text);
  out["matrix"] = take_json(p_text);
  if (!psnspd_fit_result_converged(fit.get()))
    std::cerr << json{{"warning", "fit did not converge"}}.dump() << "\n";
  emit(g, out);
}

// reconstruct ----------------------------------------------------------------

void run_reconstruct(const Globals& g, const std::string& matrix_path,
                     const std::string& record_path, const std::string& clicks_path,
                     std::optional<double> true_mu, double background) {
  if (matrix_path.empty()) usage_error("reconstruct needs --matrix");
  if (record_path.empty() == clicks_path.empty())
    usage_error("reconstruct needs exactly one of --input (record) or --clicks");
  const MatrixPtr p = load_matrix(matrix_path);

  std::vector<double> q;
  if (!record_path.empty()) {
    q = clicks_from_record_file(record_path, background, nullptr);
  } else {
    const json j = read_json(clicks_path);
    q = j.is_array() ? j.get<std::vector<double>>() : field<std::vector<double>>(j, "probs");
  }

  psnspd_reconstruction* raw = nullptr;
  check(psnspd_reconstruct(p.get(), q.data(), q.size(), &raw));
  ReconPtr r(raw);

  std::vector<double> truth;
  if (true_mu) {
    truth.resize(q.size());
    double tail = 0.0;
    check(psnspd_poisson(*true_mu, q.size() - 1, truth.data(), truth.size(), &tail));
  }
  char* r_text = nullptr;
  check(psnspd_reconstruction_to_json(r.get(), &r_text));
  char* t_text = nullptr;
  check(psnspd_reconstruction_table_json(r.get(), true_mu ? truth.data() : nullptr,
                                         truth.size(), &t_text));
  json out = take_json(r_text);
  out["table"] = take_json(t_text);
  if (psnspd_reconstruction_ill_conditioned(r.get()))
    std::cerr << json{{"warning", "truncated matrix is ill-conditioned"}}.dump() << "\n";
  emit(g, out);
}

// uncertainty / flux-error ---------------------------------------------------

struct Budget {
  double pm = 0.0252;
  double op = 0.0019;
  double at = 0.0012;
};

Budget load_budget(const std::string& path, Budget b) {
  if (path.empty()) return b;
  const json j = read_json(path);
  return {field<double>(j, "sigma_pm_rel"), field<double>(j, "sigma_op_rel"),
          field<double>(j, "sigma_at_rel")};
}

void run_flux_error(const Globals& g, const Budget& b) {
  double rel = 0.0;
  check(psnspd_flux_relative_uncertainty(b.pm, b.op, b.at, &rel));
  emit(g, {{"relative_sigma", rel},
           {"budget", {{"sigma_pm_rel", b.pm}, {"sigma_op_rel", b.op}, {"sigma_at_rel", b.at}}}});
}

void run_uncertainty(const Globals& g, const std::string& input, const Budget& b,
                     std::size_t sets, std::uint64_t trials, std::size_t restarts,
                     std::optional<double> mu_flag, double background) {
  std::optional<double> mu;
  const auto q = clicks_from_record_file(input, background, &mu);
  if (mu_flag) mu = mu_flag;
  if (!mu) usage_error("uncertainty needs mu in the record or --mu");

  psnspd_uncertainty_options opts;
  psnspd_uncertainty_options_init(&opts);
  opts.n_mc_sets = sets;
  opts.n_trials_per_set = trials;
  opts.max_photons = g.max_photons;
  opts.seed = g.seed;
  opts.threads = g.threads;
  opts.fit.n_restarts = restarts;

  psnspd_uncertainty* raw = nullptr;
  check(psnspd_matrix_uncertainty(q.data(), q.size(), *mu, b.pm, b.op, b.at, &opts, &raw));
  UncertaintyPtr u(raw);
  char* text = nullptr;
  check(psnspd_uncertainty_to_json(u.get(), &text));
  json out = take_json(text);
  double rel = 0.0;
  check(psnspd_flux_relative_uncertainty(b.pm, b.op, b.at, &rel));
  out["flux_relative_sigma"] = rel;
  emit(g, out);
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Response model, efficiency fit and statistics reconstruction for "
               "photon-number-resolving multi-pixel detectors"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", psnspd_version());

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random operation")->capture_default_str();
  app.add_option("--max-photons", g.max_photons, "Photon-number truncation M")
      ->capture_default_str();
  app.add_option("--output,-o", g.output, "Write JSON here instead of stdout");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json"}))
      ->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  std::string input, etas_text, matrix_path, clicks_path, budget_path, as = "record";
  std::uint64_t pulses = 0, trials = 10'000'000;
  std::size_t restarts = 16, sets = 200;
  double rep_rate = 1e7, background = 0.0;
  std::optional<double> true_mu, mu_flag, pm, op, at;

  auto* build = app.add_subcommand("build-matrix", "Efficiencies -> click-probability matrix");
  build->add_option("--etas", etas_text, "Comma-separated pixel efficiencies");
  build->add_option("--input,-i", input, "JSON file {\"etas\": [...]}");

  auto* sim = app.add_subcommand("simulate", "Monte Carlo pulse train -> histogram or record");
  sim->add_option("--input,-i", input, "Simulation config JSON")->required();
  sim->add_option("--pulses", pulses, "Override n_pulses");
  sim->add_option("--as", as, "Output kind")
      ->check(CLI::IsMember({"record", "histogram"}))
      ->capture_default_str();
  sim->add_option("--rep-rate", rep_rate, "Repetition rate for record output (Hz)")
      ->capture_default_str();

  auto* fit = app.add_subcommand("fit", "Count records -> fitted efficiencies and matrix");
  fit->add_option("--input,-i", input, "Record or array of records")->required();
  fit->add_option("--restarts", restarts, "Random restarts")->capture_default_str();
  fit->add_option("--background-rate", background, "Dark-count rate to subtract (Hz)");

  auto* recon = app.add_subcommand("reconstruct", "Click statistics + matrix -> photon statistics");
  recon->add_option("--matrix,-m", matrix_path, "Matrix JSON")->required();
  recon->add_option("--input,-i", input, "Count record JSON");
  recon->add_option("--clicks", clicks_path, "Click statistics JSON {\"probs\": [...]}");
  recon->add_option("--true-mu", true_mu, "Poisson mean to tabulate alongside the result");
  recon->add_option("--background-rate", background, "Dark-count rate to subtract (Hz)");

  auto* unc = app.add_subcommand("uncertainty", "Monte Carlo uncertainty of the fitted matrix");
  unc->add_option("--input,-i", input, "Count record JSON (with mu)")->required();
  unc->add_option("--budget", budget_path, "Flux error budget JSON");
  unc->add_option("--sets", sets, "Monte Carlo sets")->capture_default_str();
  unc->add_option("--trials", trials, "Resampled pulses per set")->capture_default_str();
  unc->add_option("--restarts", restarts, "Fit restarts per set")->capture_default_str();
  unc->add_option("--mu", mu_flag, "Override the record's mean photon number");
  unc->add_option("--background-rate", background, "Dark-count rate to subtract (Hz)");

  auto* flux = app.add_subcommand("flux-error", "Flux error budget -> relative sigma");
  flux->add_option("--input,-i", budget_path, "Budget JSON");
  flux->add_option("--pm", pm, "Power meter relative sigma");
  flux->add_option("--op", op, "Optical coupler relative sigma");
  flux->add_option("--at", at, "Per-attenuator relative sigma");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return 64;
  }

  try {
    if (*build) {
      run_build_matrix(g, etas_text, input);
    } else if (*sim) {
      run_simulate(g, input, pulses, as, rep_rate, app.count("--seed") > 0);
    } else if (*fit) {
      run_fit(g, input, restarts, background);
    } else if (*recon) {
      run_reconstruct(g, matrix_path, input, clicks_path, true_mu, background);
    } else if (*unc) {
      run_uncertainty(g, input, load_budget(budget_path, {}), sets, trials, restarts, mu_flag,
                      background);
    } else if (*flux) {
      Budget b = load_budget(budget_path, {});
      if (pm) b.pm = *pm;
      if (op) b.op = *op;
      if (at) b.at = *at;
      run_flux_error(g, b);
    }
  } catch (const CliFailure& f) {
    print_error(f.code, f.message);
    return f.exit_code;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return PSNSPD_ERR_INTERNAL;
  }
  return 0;
}
