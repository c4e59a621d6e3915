#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acscore/autodiff.hpp"
#include "acscore/metrics.hpp"
#include "acscore/optim.hpp"
#include "acscore/sari.hpp"
#include "acscore/weights.hpp"

namespace acscore {

struct TrainConfig {
  int horizon = 24;
  double lambda = 0.5;
  WeightSpec accuracy_weights{WeightKind::linear, {}};
  std::optional<WeightSpec> stability_weights;  // defaults to accuracy_weights
  int batch_size = 32;
  bool full_batch = false;
  double lr0 = 0.05;
  double scheduler_factor = 0.5;
  int scheduler_patience = 10;
  int max_epochs = 200;
  std::uint64_t seed = 42;
  double init_low = -1.0;
  double init_high = 1.0;
  double min_lr = 1e-5;
  double convergence_tol = 1e-4;
  AdamWHyper adamw;
  /// Sample paths per origin during training. 1 trains on point forecasts.
  int sample_count = 1;
  /// Innovation scale for k > 1 training paths.
  double sample_sigma = 1.0;
  /// Wall-clock limit for one train() call; 0 disables it.
  double time_budget_seconds = 0.0;

  void validate() const;
  ScoreConfig score_config() const;
};

struct TrainTrace {
  std::vector<double> loss;
  std::vector<double> lr;
  int final_epoch = 0;
  bool converged = false;
  bool stationary = true;
  bool aborted = false;
  std::string abort_reason;
};

struct TrainResult {
  SariParams params;
  TrainTrace trace;
};

/// Thrown when a training run exceeds TrainConfig::time_budget_seconds.
class TrainTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value of the smoothing constant inside the weighted norm's square root.
inline constexpr double kNormSmoothing = 1e-12;

/// Differentiable AC loss (accuracy + lambda * stability) of an ensemble.
/// `actuals` is indexed by series index. Uses the same kernels as
/// metrics::ac_score with kNormSmoothing inside each square root.
template <class T>
T ac_loss(const BasicEnsemble<T>& ensemble, std::span<const double> actuals, const ScoreConfig& config,
          std::span<const std::size_t> origins = {});

/// Builds the parameter leaves on `tape`, forecasts every valid origin of
/// `train` and returns the full-ensemble AC loss.
struct LossEvaluation {
  double value = 0.0;
  std::vector<double> gradient;
};
LossEvaluation evaluate_ac_loss(const SariSpec& spec, std::span<const double> params, std::span<const double> train,
                                const TrainConfig& config);
/// Same loss evaluated in plain double arithmetic (no tape).
double ac_loss_value(const SariSpec& spec, std::span<const double> params, std::span<const double> train,
                     const TrainConfig& config);

/// Trains phi and Phi on `train` by minimizing the AC loss of rolling
/// in-sample forecasts. max_epochs = 0 returns the initialization.
TrainResult train(const SariSpec& spec, std::span<const double> train, const TrainConfig& config);

}  // namespace acscore
