#include "acscore/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "acscore/metrics_kernels.hpp"

namespace acscore {

namespace {

// Below this many pairwise distance evaluations the parallel region costs
// more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

double distance(const SampleBlock<double>& a, std::size_t ia, const SampleBlock<double>& b, std::size_t ib,
                std::span<const double> w) {
  return kernels::weighted_distance<double>(
      w, [&](std::size_t j) { return a(ia, j); }, [&](std::size_t j) { return b(ib, j); }, 0.0);
}

// Per-sample terms are evaluated in parallel into a buffer and reduced in
// index order, so the result does not depend on the thread count.
double mean_distance_to_outcome(const SampleBlock<double>& f, std::span<const double> y, std::span<const double> w) {
  const auto k = static_cast<std::int64_t>(f.samples);
  std::vector<double> terms(f.samples);
#pragma omp parallel for schedule(static) if (f.samples * w.size() >= kParallelWork)
  for (std::int64_t i = 0; i < k; ++i) {
    terms[i] = kernels::weighted_distance<double>(
        w, [&](std::size_t j) { return f(i, j); }, [&](std::size_t j) { return y[j]; }, 0.0);
  }
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc / static_cast<double>(f.samples);
}

double mean_pair_distance(const SampleBlock<double>& a, const SampleBlock<double>& b, std::span<const double> w) {
  const auto k = static_cast<std::int64_t>(a.samples);
  std::vector<double> terms(a.samples);
#pragma omp parallel for schedule(static) if (a.samples * w.size() >= kParallelWork)
  for (std::int64_t i = 0; i < k; ++i) terms[i] = distance(a, i, b, i, w);
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc / static_cast<double>(a.samples);
}

// 1/(k(k-1)) * sum_{i1<i2} ||x_i1 - x_i2||_w, zero for k = 1.
double spread_term(const SampleBlock<double>& f, std::span<const double> w) {
  const std::size_t k = f.samples;
  if (k < 2) return 0.0;
  std::vector<double> rows(k, 0.0);
  const auto kk = static_cast<std::int64_t>(k);
#pragma omp parallel for schedule(dynamic, 16) if (k * k * w.size() / 2 >= kParallelWork)
  for (std::int64_t i1 = 0; i1 < kk; ++i1) {
    double acc = 0.0;
    for (std::size_t i2 = i1 + 1; i2 < k; ++i2) acc += distance(f, i1, f, i2, w);
    rows[i1] = acc;
  }
  double total = 0.0;
  for (double r : rows) total += r;
  return total / (static_cast<double>(k) * static_cast<double>(k - 1));
}

void check_targets(const ForecastEnsemble& e, const TimeSeries& series) {
  if (e.target_end() > series.size()) {
    throw std::invalid_argument("score: ensemble targets exceed the length of series '" + series.id + "'");
  }
}

std::vector<double> per_origin_energy(const ForecastEnsemble& e, std::span<const double> actuals,
                                      std::span<const double> w) {
  std::vector<double> out(e.origins());
  const auto n = static_cast<std::int64_t>(e.origins());
  const std::size_t m = e.horizon();
#pragma omp parallel for schedule(static) if (e.cells().size() >= kParallelWork)
  for (std::int64_t o = 0; o < n; ++o) {
    out[o] = energy_score_empirical(e.block(o, 0, m), actuals.subspan(e.origin_offset() + o + 1, m), w);
  }
  return out;
}

double sequential_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

void ScoreConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("score config: lambda must be >= 0");
  if (accuracy_weights.horizon() == 0) throw std::invalid_argument("score config: missing accuracy weights");
  if (stability().horizon() != accuracy_weights.horizon()) {
    throw std::invalid_argument("score config: accuracy and stability schedules differ in horizon");
  }
}

double energy_score_empirical(const SampleBlock<double>& f, std::span<const double> actuals,
                              std::span<const double> w) {
  if (f.samples == 0) throw std::invalid_argument("energy score: need at least one sample");
  if (f.width != w.size() || actuals.size() != w.size()) {
    throw std::invalid_argument("energy score: forecast, outcome and weight dimensions differ");
  }
  return mean_distance_to_outcome(f, actuals, w) - spread_term(f, w);
}

double energy_score_empirical(const SampleBlock<double>& f, std::span<const double> actuals,
                              const WeightSchedule& weights) {
  return energy_score_empirical(f, actuals, weights.weights());
}

double energy_distance_empirical(const SampleBlock<double>& earlier, const SampleBlock<double>& later,
                                 std::span<const double> w) {
  if (earlier.samples == 0 || earlier.samples != later.samples) {
    throw std::invalid_argument("energy distance: blocks must share a positive sample count");
  }
  if (earlier.width != later.width || earlier.width != w.size()) {
    throw std::invalid_argument("energy distance: block and weight widths differ");
  }
  if (w.empty()) throw std::invalid_argument("energy distance: needs horizon m >= 2");
  return mean_pair_distance(earlier, later, w) - spread_term(earlier, w) - spread_term(later, w);
}

double crps_empirical(std::span<const double> samples, double y) {
  if (samples.empty()) throw std::invalid_argument("crps: need at least one sample");
  const double unit[] = {1.0};
  const double outcome[] = {y};
  return energy_score_empirical(SampleBlock<double>::row_major(samples, samples.size(), 1), outcome, unit);
}

PerOriginScore accuracy_score(const ForecastEnsemble& e, const TimeSeries& series, const WeightSchedule& weights) {
  if (weights.horizon() != e.horizon()) throw std::invalid_argument("accuracy score: weights do not match horizon");
  check_targets(e, series);
  PerOriginScore out;
  out.terms = per_origin_energy(e, series.values, weights.weights());
  out.mean = sequential_mean(out.terms);
  return out;
}

PerOriginScore stability_score(const ForecastEnsemble& e, const WeightSchedule& stability_weights) {
  if (e.origins() < 2) throw std::invalid_argument("stability score: needs at least two origins");
  if (e.horizon() < 2) throw std::invalid_argument("stability score: needs horizon m >= 2");
  if (stability_weights.horizon() != e.horizon()) {
    throw std::invalid_argument("stability score: weights do not match horizon");
  }
  const std::vector<double> tail = stability_weights.overlap_tail();
  const std::size_t m = e.horizon();
  PerOriginScore out;
  out.terms.resize(e.origins() - 1);
  const auto pairs = static_cast<std::int64_t>(out.terms.size());
#pragma omp parallel for schedule(static) if (e.cells().size() >= kParallelWork)
  for (std::int64_t o = 0; o < pairs; ++o) {
    out.terms[o] = energy_distance_empirical(e.block(o, 1, m - 1), e.block(o + 1, 0, m - 1), tail);
  }
  out.mean = sequential_mean(out.terms);
  return out;
}

ScoreReport ac_score(const ForecastEnsemble& e, const TimeSeries& series, const ScoreConfig& config) {
  config.validate();
  ScoreReport r;
  r.lambda = config.lambda;
  auto acc = accuracy_score(e, series, config.accuracy_weights);
  r.accuracy = acc.mean;
  r.per_origin_energy_scores = std::move(acc.terms);
  const bool stability_defined = e.origins() >= 2 && e.horizon() >= 2;
  if (stability_defined || config.lambda != 0.0) {
    auto stb = stability_score(e, config.stability());
    r.stability = stb.mean;
    r.per_pair_energy_distances = std::move(stb.terms);
  }
  r.ac_score = r.accuracy + config.lambda * r.stability;
  return r;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over (base, stream)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MonteCarloEstimate expected_ac_score(const RealizationGenerator& dgp, const EnsembleForecaster& forecaster,
                                     const ScoreConfig& config, std::size_t replications, std::uint64_t seed) {
  if (replications < 2) throw std::invalid_argument("expected ac score: needs at least two replications");
  MonteCarloEstimate est;
  est.scores.reserve(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    const std::uint64_t s = derive_seed(seed, r);
    const TimeSeries z = dgp(s);
    const ForecastEnsemble e = forecaster(z, derive_seed(s, 1));
    est.scores.push_back(ac_score(e, z, config).ac_score);
  }
  est.mean = sequential_mean(est.scores);
  double ss = 0.0;
  for (double x : est.scores) ss += (x - est.mean) * (x - est.mean);
  const double sd = std::sqrt(ss / static_cast<double>(replications - 1));
  est.standard_error = sd / std::sqrt(static_cast<double>(replications));
  return est;
}

VerticalVariance vertical_variance(const ForecastEnsemble& e, std::size_t sample, CoveragePolicy policy) {
  if (e.horizon() < 2) throw std::invalid_argument("vertical variance: horizon 1 gives one origin per target");
  const std::size_t needed = policy == CoveragePolicy::full ? e.horizon() : 2;
  VerticalVariance out;
  double total = 0.0;
  for (std::size_t target = e.origin_offset() + 1; target < e.target_end(); ++target) {
    const std::vector<double> diag = e.anti_diagonal(target, sample);
    if (diag.size() < needed) continue;
    double mean = 0.0;
    for (double v : diag) mean += v;
    mean /= static_cast<double>(diag.size());
    double ss = 0.0;
    for (double v : diag) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(diag.size() - 1);
    out.targets.push_back(target);
    out.variances.push_back(var);
    total += var;
  }
  if (out.targets.empty()) throw std::invalid_argument("vertical variance: no target has enough covering origins");
  out.mean = total / static_cast<double>(out.targets.size());
  return out;
}

HorizonMape mape_by_horizon(const ForecastEnsemble& e, const TimeSeries& series) {
  check_targets(e, series);
  HorizonMape out;
  out.mape.assign(e.horizon(), 0.0);
  out.excluded.assign(e.horizon(), 0);
  for (std::size_t s = 0; s < e.horizon(); ++s) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t o = 0; o < e.origins(); ++o) {
      const double y = series.values[e.target_index(o, s)];
      for (std::size_t i = 0; i < e.samples(); ++i) {
        if (y == 0.0) {
          ++out.excluded[s];
          continue;
        }
        sum += std::abs(e.at(o, s, i) - y) / std::abs(y);
        ++count;
      }
    }
    out.mape[s] = count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

DiagnosticsReport diagnostics(const ForecastEnsemble& e, const TimeSeries& series, CoveragePolicy policy) {
  DiagnosticsReport d;
  const VerticalVariance vv = vertical_variance(e, 0, policy);
  d.mean_vertical_variance = vv.mean;
  d.vertical_variance_targets = vv.targets.size();
  HorizonMape mape = mape_by_horizon(e, series);
  d.per_horizon_mape = std::move(mape.mape);
  d.mape_excluded_cells = std::move(mape.excluded);
  d.one_step_mape = d.per_horizon_mape.front();
  return d;
}

double relative_improvement(double baseline, double candidate) {
  if (baseline == 0.0) throw std::invalid_argument("relative improvement: zero baseline");
  return (baseline - candidate) / baseline;
}

namespace reference {

double energy_score_empirical(const SampleBlock<double>& f, std::span<const double> actuals,
                              std::span<const double> w) {
  return kernels::energy_score<double>(f, actuals, w, 0.0);
}

double energy_distance_empirical(const SampleBlock<double>& earlier, const SampleBlock<double>& later,
                                 std::span<const double> w) {
  return kernels::energy_distance<double>(earlier, later, w, 0.0);
}

ScoreReport ac_score(const ForecastEnsemble& e, const TimeSeries& series, const ScoreConfig& config) {
  config.validate();
  check_targets(e, series);
  const std::size_t m = e.horizon();
  const auto acc_w = config.accuracy_weights.weights();
  ScoreReport r;
  r.lambda = config.lambda;
  for (std::size_t o = 0; o < e.origins(); ++o) {
    r.per_origin_energy_scores.push_back(
        kernels::energy_score<double>(e.block(o, 0, m), std::span(series.values).subspan(e.origin_offset() + o + 1, m),
                                      acc_w, 0.0));
  }
  r.accuracy = sequential_mean(r.per_origin_energy_scores);
  if (e.origins() >= 2 && m >= 2) {
    const std::vector<double> tail = config.stability().overlap_tail();
    for (std::size_t o = 0; o + 1 < e.origins(); ++o) {
      r.per_pair_energy_distances.push_back(
          kernels::energy_distance<double>(e.block(o, 1, m - 1), e.block(o + 1, 0, m - 1), tail, 0.0));
    }
    r.stability = sequential_mean(r.per_pair_energy_distances);
  } else if (config.lambda != 0.0) {
    throw std::invalid_argument("stability score: needs at least two origins and horizon m >= 2");
  }
  r.ac_score = r.accuracy + config.lambda * r.stability;
  return r;
}

}  // namespace reference

}  // namespace acscore
