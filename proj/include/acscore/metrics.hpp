#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "acscore/ensemble.hpp"
#include "acscore/weights.hpp"

namespace acscore {

struct ScoreConfig {
  WeightSchedule accuracy_weights;
  std::optional<WeightSchedule> stability_weights;  // defaults to accuracy_weights
  double lambda = 0.5;

  const WeightSchedule& stability() const { return stability_weights ? *stability_weights : accuracy_weights; }
  void validate() const;
};

struct ScoreReport {
  double accuracy = 0.0;
  double stability = 0.0;
  double ac_score = 0.0;
  double lambda = 0.0;
  std::vector<double> per_origin_energy_scores;
  std::vector<double> per_pair_energy_distances;
};

struct DiagnosticsReport {
  double mean_vertical_variance = 0.0;
  std::size_t vertical_variance_targets = 0;
  std::vector<double> per_horizon_mape;  // NaN where every cell was excluded
  std::vector<std::size_t> mape_excluded_cells;
  double one_step_mape = 0.0;
};

// ---- single-origin estimators ---------------------------------------------

double energy_score_empirical(const SampleBlock<double>& forecast_samples, std::span<const double> actuals,
                              const WeightSchedule& weights);
double energy_score_empirical(const SampleBlock<double>& forecast_samples, std::span<const double> actuals,
                              std::span<const double> weights);

/// `weights` is the stability sub-schedule for horizons 2..m (already renormalized).
double energy_distance_empirical(const SampleBlock<double>& earlier, const SampleBlock<double>& later,
                                 std::span<const double> weights);

double crps_empirical(std::span<const double> samples, double y);

// ---- ensemble scores -------------------------------------------------------

struct PerOriginScore {
  double mean = 0.0;
  std::vector<double> terms;
};

PerOriginScore accuracy_score(const ForecastEnsemble& ensemble, const TimeSeries& series,
                              const WeightSchedule& weights);
PerOriginScore stability_score(const ForecastEnsemble& ensemble, const WeightSchedule& stability_weights);
ScoreReport ac_score(const ForecastEnsemble& ensemble, const TimeSeries& series, const ScoreConfig& config);

// ---- expected score over a data-generating process -------------------------

using RealizationGenerator = std::function<TimeSeries(std::uint64_t seed)>;
using EnsembleForecaster = std::function<ForecastEnsemble(const TimeSeries& realization, std::uint64_t seed)>;

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> scores;
};

/// Replication r uses seed derive_seed(seed, r) for both the generator and
/// the forecaster. Needs r >= 2.
MonteCarloEstimate expected_ac_score(const RealizationGenerator& dgp, const EnsembleForecaster& forecaster,
                                     const ScoreConfig& config, std::size_t replications, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// ---- diagnostics -----------------------------------------------------------

enum class CoveragePolicy {
  full,     // only targets covered by all m origins
  partial,  // any target covered by at least two origins
};

struct VerticalVariance {
  std::vector<std::size_t> targets;  // series indices
  std::vector<double> variances;
  double mean = 0.0;
};

VerticalVariance vertical_variance(const ForecastEnsemble& ensemble, std::size_t sample,
                                   CoveragePolicy policy = CoveragePolicy::full);

struct HorizonMape {
  std::vector<double> mape;
  std::vector<std::size_t> excluded;
};

/// Cells whose actual is exactly zero are excluded and counted.
HorizonMape mape_by_horizon(const ForecastEnsemble& ensemble, const TimeSeries& series);

DiagnosticsReport diagnostics(const ForecastEnsemble& ensemble, const TimeSeries& series,
                              CoveragePolicy policy = CoveragePolicy::full);

/// (baseline - candidate) / baseline
double relative_improvement(double baseline, double candidate);

namespace reference {

// Plain serial loops kept as the baseline for the OpenMP paths.
double energy_score_empirical(const SampleBlock<double>& forecast_samples, std::span<const double> actuals,
                              std::span<const double> weights);
double energy_distance_empirical(const SampleBlock<double>& earlier, const SampleBlock<double>& later,
                                 std::span<const double> weights);
ScoreReport ac_score(const ForecastEnsemble& ensemble, const TimeSeries& series, const ScoreConfig& config);

}  // namespace reference

}  // namespace acscore
