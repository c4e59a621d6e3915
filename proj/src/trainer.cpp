#include "acscore/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "acscore/metrics_kernels.hpp"

namespace acscore {

void TrainConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("train config: horizon must be >= 1");
  if (!(lambda >= 0.0)) throw std::invalid_argument("train config: lambda must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
  if (!(lr0 > 0.0) || !(min_lr > 0.0)) throw std::invalid_argument("train config: learning rates must be positive");
  if (!(scheduler_factor > 0.0 && scheduler_factor < 1.0)) {
    throw std::invalid_argument("train config: scheduler_factor must lie in (0, 1)");
  }
  if (scheduler_patience < 1) throw std::invalid_argument("train config: scheduler_patience must be >= 1");
  if (max_epochs < 0) throw std::invalid_argument("train config: max_epochs must be >= 0");
  if (!(init_low < init_high)) throw std::invalid_argument("train config: init range is empty");
  if (!(convergence_tol >= 0.0)) throw std::invalid_argument("train config: convergence_tol must be >= 0");
  if (sample_count < 1) throw std::invalid_argument("train config: sample_count must be >= 1");
}

ScoreConfig TrainConfig::score_config() const {
  ScoreConfig sc;
  sc.accuracy_weights = accuracy_weights.build(horizon);
  if (stability_weights) sc.stability_weights = stability_weights->build(horizon);
  sc.lambda = lambda;
  return sc;
}

template <class T>
T ac_loss(const BasicEnsemble<T>& e, std::span<const double> actuals, const ScoreConfig& config,
          std::span<const std::size_t> origins) {
  config.validate();
  std::vector<std::size_t> all;
  const bool full = origins.empty();
  if (full) {
    all.resize(e.origins());
    std::iota(all.begin(), all.end(), std::size_t{0});
    origins = all;
  }
  const bool with_stability = config.lambda != 0.0;
  if (with_stability && full && (e.origins() < 2 || e.horizon() < 2)) {
    throw std::invalid_argument("ac loss: stability needs at least two origins and horizon m >= 2");
  }
  const std::vector<double> tail = with_stability ? config.stability().overlap_tail() : std::vector<double>{};
  const auto terms = kernels::ac_terms<T>(e, actuals, config.accuracy_weights.weights(), tail, origins,
                                          with_stability, kNormSmoothing);
  return terms.accuracy + config.lambda * terms.stability;
}

template double ac_loss<double>(const BasicEnsemble<double>&, std::span<const double>, const ScoreConfig&,
                                std::span<const std::size_t>);
template ad::Var ac_loss<ad::Var>(const BasicEnsemble<ad::Var>&, std::span<const double>, const ScoreConfig&,
                                  std::span<const std::size_t>);

namespace {

template <class T>
BasicEnsemble<T> training_ensemble(const SariSpec& spec, std::span<const T> theta, std::span<const double> series,
                                   std::span<const double> diffed, std::size_t m, OriginRange range,
                                   const TrainConfig& config, const std::vector<char>* mask) {
  const std::span<const T> phi = theta.subspan(0, static_cast<std::size_t>(spec.p));
  const std::span<const T> Phi = theta.subspan(static_cast<std::size_t>(spec.p));
  const auto k = static_cast<std::size_t>(config.sample_count);
  if (k == 1) return rolling_forecast_ensemble<T>(spec, phi, Phi, series, diffed, m, range, mask);

  // Noise draws depend only on (seed, origin), so every epoch sees the same
  // innovations for a given origin.
  const auto lags = expand_lags<T>(spec, phi, Phi);
  const auto integ = integration_weights(spec.d, spec.D, spec.s);
  BasicEnsemble<T> e(range.count, m, k, range.first, T(0.0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> eps(m);
  for (std::size_t o = 0; o < range.count; ++o) {
    if (mask && !(*mask)[o]) continue;
    std::mt19937_64 rng(derive_seed(config.seed, 1'000'000 + range.first + o));
    for (std::size_t i = 0; i < k; ++i) {
      for (double& x : eps) x = config.sample_sigma * gauss(rng);
      const auto path = forecast_path<T>(lags, integ, series, diffed, range.first + o, m,
                                         [&eps](std::size_t j) { return eps[j]; });
      for (std::size_t j = 0; j < m; ++j) e.at(o, j, i) = path[j];
    }
  }
  return e;
}

struct Prepared {
  std::vector<double> diffed;
  OriginRange range;
  ScoreConfig score;
};

Prepared prepare(const SariSpec& spec, std::span<const double> train, const TrainConfig& config) {
  spec.validate();
  config.validate();
  Prepared p;
  p.range = valid_origins(spec, train.size(), static_cast<std::size_t>(config.horizon));
  if (p.range.count == 0) {
    throw std::invalid_argument("train: series of length " + std::to_string(train.size()) +
                                " has no valid origin for " + spec.label() + " at horizon " +
                                std::to_string(config.horizon));
  }
  p.diffed = difference(train, spec.d, spec.D, spec.s).values;
  p.score = config.score_config();
  return p;
}

}  // namespace

LossEvaluation evaluate_ac_loss(const SariSpec& spec, std::span<const double> params, std::span<const double> train,
                                const TrainConfig& config) {
  const Prepared prep = prepare(spec, train, config);
  if (params.size() != spec.parameter_count()) throw std::invalid_argument("ac loss: wrong parameter count");
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  for (double v : params) leaves.push_back(tape.variable(v));
  const auto e = training_ensemble<ad::Var>(spec, leaves, train, prep.diffed,
                                            static_cast<std::size_t>(config.horizon), prep.range, config, nullptr);
  const ad::Var loss = ac_loss<ad::Var>(e, train, prep.score);
  return {loss.value(), tape.backward(loss, leaves)};
}

double ac_loss_value(const SariSpec& spec, std::span<const double> params, std::span<const double> train,
                     const TrainConfig& config) {
  const Prepared prep = prepare(spec, train, config);
  if (params.size() != spec.parameter_count()) throw std::invalid_argument("ac loss: wrong parameter count");
  const auto e = training_ensemble<double>(spec, params, train, prep.diffed, static_cast<std::size_t>(config.horizon),
                                           prep.range, config, nullptr);
  return ac_loss<double>(e, train, prep.score);
}

TrainResult train(const SariSpec& spec, std::span<const double> train_values, const TrainConfig& config) {
  const Prepared prep = prepare(spec, train_values, config);
  const auto m = static_cast<std::size_t>(config.horizon);
  const std::size_t n = prep.range.count;
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();

  std::mt19937_64 init_rng(config.seed);
  std::uniform_real_distribution<double> init(config.init_low, config.init_high);
  std::vector<double> theta(spec.parameter_count());
  for (double& v : theta) v = init(init_rng);

  TrainResult result;
  OptimizerState opt(theta.size(), config.lr0, config.adamw);
  PlateauScheduler scheduler(config.scheduler_factor, config.scheduler_patience, config.convergence_tol,
                             config.min_lr);
  const std::size_t batch = config.full_batch ? n : static_cast<std::size_t>(config.batch_size);
  const bool with_stability = config.lambda != 0.0;

  ad::Tape tape;
  std::vector<std::size_t> order(n);
  std::vector<char> mask(n);
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (config.time_budget_seconds > 0.0 &&
        std::chrono::duration<double>(clock::now() - started).count() > config.time_budget_seconds) {
      throw TrainTimeout("train: exceeded time budget of " + std::to_string(config.time_budget_seconds) + " s");
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    const double epoch_lr = opt.lr;
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch)));
      std::sort(members.begin(), members.end());
      std::fill(mask.begin(), mask.end(), 0);
      for (std::size_t o : members) {
        mask[o] = 1;
        if (with_stability && o + 1 < n) mask[o + 1] = 1;
      }

      tape.clear();
      std::vector<ad::Var> leaves;
      leaves.reserve(theta.size());
      for (double v : theta) leaves.push_back(tape.variable(v));
      const auto e =
          training_ensemble<ad::Var>(spec, leaves, train_values, prep.diffed, m, prep.range, config, &mask);
      const ad::Var loss = ac_loss<ad::Var>(e, train_values, prep.score, members);
      const std::vector<double> grad = tape.backward(loss, leaves);
      if (!std::isfinite(loss.value()) || !adamw_step(opt, theta, grad)) {
        result.trace.aborted = true;
        result.trace.abort_reason = "non-finite loss or gradient at epoch " + std::to_string(epoch);
        break;
      }
      loss_sum += loss.value();
      ++batches;
    }
    if (result.trace.aborted) break;

    const double epoch_loss = loss_sum / static_cast<double>(batches);
    result.trace.loss.push_back(epoch_loss);
    result.trace.lr.push_back(epoch_lr);
    result.trace.final_epoch = epoch + 1;
    opt.lr = scheduler.step(epoch_loss, opt.lr);
    if (opt.lr <= config.min_lr && !scheduler.last_improved()) {
      result.trace.converged = true;
      break;
    }
  }

  result.params = SariParams::from_flat(spec, theta);
  bool finite = true;
  for (double v : theta) finite = finite && std::isfinite(v);
  result.trace.stationary = finite && stationarity_check(spec, result.params).stationary;
  return result;
}

}  // namespace acscore
