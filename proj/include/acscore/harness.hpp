#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acscore/ensemble.hpp"
#include "acscore/io.hpp"
#include "acscore/metrics.hpp"
#include "acscore/sari.hpp"
#include "acscore/trainer.hpp"

namespace acscore {

// ---- data ----------------------------------------------------------------------

/// Accepts the M4 Hourly training CSV itself or a directory holding
/// Hourly-train.csv.
std::vector<TimeSeries> load_m4_hourly(const std::filesystem::path& path);

struct DgpSpec {
  SariSpec spec;
  SariParams params;  // sigma is the innovation scale
  /// Optional moving-average filters on the innovations,
  /// (1 + theta(L)) (1 + Theta(L^s)) e_t. The fitted models have no MA part,
  /// so these produce deliberately misspecified test suites.
  std::vector<double> theta;
  std::vector<double> Theta;
  std::size_t length = 400;
  std::uint64_t seed = 42;
  std::size_t count = 1;
  /// Starting values for integration: level + seasonal_amplitude * sin(2 pi t / s)
  /// for the first d + s*D points. Unused when the model has no differencing.
  double level = 0.0;
  double seasonal_amplitude = 0.0;
  std::size_t burn_in = 200;
  std::string id_prefix = "S";
};

/// Realization r is drawn with derive_seed(seed, r) starting from zero initial
/// conditions on the differenced scale. Throws when phi/Phi are not stationary.
std::vector<TimeSeries> synth_dgp(const DgpSpec& dgp);

void to_json(json& j, const DgpSpec& d);
void from_json(const json& j, DgpSpec& d);

// ---- experiment ------------------------------------------------------------------

struct ExperimentConfig {
  std::optional<std::filesystem::path> data_path;
  std::optional<DgpSpec> synthetic;
  std::vector<std::string> series_ids;  // empty keeps every series
  std::size_t series_limit = 0;         // 0 keeps every series
  TrainConfig train;
  CssSettings css;
  std::optional<SariSpec> fixed_spec;
  OrderGrid grid;
  double split_fraction = 0.6;
  CoveragePolicy coverage = CoveragePolicy::full;
  std::vector<WeightSpec> weight_sensitivity;
  double series_timeout_seconds = 120.0;
  int workers = 0;  // 0 uses ACSCORE_WORKERS or the OpenMP default

  void validate() const;
};

/// Relative paths in "data" resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig read_experiment_config(const std::filesystem::path& path);

struct ModelResult {
  SariParams params;
  ScoreReport score;
  DiagnosticsReport diagnostics;
  bool stationary = true;
};

struct SeriesResult {
  std::string id;
  bool ok = false;
  std::string error;
  SariSpec spec;
  ModelResult baseline;
  ModelResult ac;
  int ac_epochs = 0;
  bool ac_converged = false;
  // (baseline - ac) / baseline; positive favours the AC model
  double improvement_ac_score = 0.0;
  double improvement_accuracy = 0.0;
  double improvement_stability = 0.0;
  double improvement_vertical_variance = 0.0;
  std::vector<double> improvement_mape;  // per horizon
  std::map<std::string, double> weight_log_vertical_variance;
};

/// Never throws for per-series problems; they come back as ok = false.
SeriesResult run_series(const TimeSeries& series, const ExperimentConfig& config);

json series_result_json(const SeriesResult& r);

struct PercentileSummary {
  std::vector<double> grid;  // percentiles 1..99
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  std::size_t count = 0;     // finite values used
  std::size_t excluded = 0;  // non-finite values dropped
};

/// Linear interpolation between order statistics, position p/100 * (n - 1).
double percentile(std::span<const double> sorted, double p);
/// Throws when no finite value is present.
PercentileSummary summarize(std::span<const double> values);

struct HorizonBand {
  int horizon = 0;
  PercentileSummary improvement;
};

struct AggregateReport {
  std::size_t series_total = 0;
  std::size_t series_ok = 0;
  std::vector<std::string> failed_ids;
  std::map<std::string, PercentileSummary> improvements;  // keyed by metric
  std::map<std::string, PercentileSummary> vertical_variance;  // keyed by model
  double mean_vertical_variance_baseline = 0.0;
  double mean_vertical_variance_ac = 0.0;
  double vertical_variance_ratio = 0.0;  // ac / baseline
  double share_improved_ac_score = 0.0;
  std::vector<HorizonBand> mape_bands;
  std::map<std::string, PercentileSummary> weight_sensitivity;  // log mean vertical variance by kind
};

/// Throws when every result failed.
AggregateReport aggregate(std::span<const SeriesResult> results);

json aggregate_json(const AggregateReport& report);

/// Selects, runs and sorts by series id.
std::vector<TimeSeries> experiment_series(const ExperimentConfig& config);
std::vector<SeriesResult> run_all(std::span<const TimeSeries> series, const ExperimentConfig& config);

/// Writes results.jsonl, aggregate.json, percentiles_<metric>.csv,
/// mape_by_horizon.csv and (when configured) weight_sensitivity.csv.
AggregateReport run_experiment(const ExperimentConfig& config, const std::filesystem::path& output_dir);

}  // namespace acscore
