#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "acscore/metrics.hpp"

using namespace acscore;
using doctest::Approx;

namespace {

// Energy score written from the ordered-pair definition:
//   1/k sum_i ||x_i - y|| - 1/(2 k (k-1)) sum_{i != j} ||x_i - x_j||
double es_oracle(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                 const std::vector<double>& w) {
  auto norm = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  };
  const double k = static_cast<double>(x.size());
  double first = 0.0;
  for (const auto& xi : x) first += norm(xi, y);
  double second = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (i != j) second += norm(x[i], x[j]);
  return first / k - (x.size() > 1 ? second / (2.0 * k * (k - 1.0)) : 0.0);
}

double gaussian_crps(double mu, double sigma, double y) {
  const double z = (y - mu) / sigma;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return sigma * (z * (2.0 * cdf - 1.0) + 2.0 * pdf - 1.0 / std::sqrt(M_PI));
}

ForecastEnsemble random_ensemble(std::mt19937_64& rng, std::size_t n, std::size_t m, std::size_t k,
                                 std::size_t offset) {
  std::normal_distribution<double> g(0.0, 2.0);
  ForecastEnsemble e(n, m, k, offset);
  for (std::size_t o = 0; o < n; ++o)
    for (std::size_t s = 0; s < m; ++s)
      for (std::size_t i = 0; i < k; ++i) e.at(o, s, i) = g(rng);
  return e;
}

TimeSeries random_series(std::mt19937_64& rng, std::size_t len) {
  std::normal_distribution<double> g(0.0, 2.0);
  TimeSeries t{"r", std::vector<double>(len)};
  for (double& v : t.values) v = g(rng);
  return t;
}

ScoreConfig config_for(std::size_t m, double lambda, WeightKind kind = WeightKind::uniform) {
  ScoreConfig c;
  c.accuracy_weights = build_weight_schedule(kind, static_cast<int>(m));
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST_CASE("energy score hand examples") {
  const std::vector<double> w{0.5, 0.5};
  const std::vector<double> same{1.0, 2.0};
  CHECK(energy_score_empirical(SampleBlock<double>::row_major(same, 1, 2), same, w) == 0.0);

  const std::vector<double> f{3.0, 1.0};
  const std::vector<double> y{1.0, 1.0};
  CHECK(energy_score_empirical(SampleBlock<double>::row_major(f, 1, 2), y, w) == Approx(std::sqrt(2.0)));

  const std::vector<double> two{1.0, 3.0};
  const std::vector<double> one{1.0};
  const std::vector<double> y2{2.0};
  CHECK(energy_score_empirical(SampleBlock<double>::row_major(two, 2, 1), y2, one) == Approx(0.0));
}

TEST_CASE("energy score agrees with the ordered-pair oracle") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.5);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t k = 1 + rep % 9;
    const std::size_t m = 1 + rep % 5;
    std::vector<std::vector<double>> x(k, std::vector<double>(m));
    std::vector<double> flat;
    for (auto& row : x)
      for (double& v : row) {
        v = g(rng);
        flat.push_back(v);
      }
    std::vector<double> y(m);
    for (double& v : y) v = g(rng);
    const auto w = build_weight_schedule(WeightKind::hyperbolic, static_cast<int>(m));
    const std::vector<double> wv(w.weights().begin(), w.weights().end());
    const auto block = SampleBlock<double>::row_major(flat, k, m);
    const double oracle = es_oracle(x, y, wv);
    CHECK(energy_score_empirical(block, y, w) == Approx(oracle).epsilon(1e-12));
    CHECK(reference::energy_score_empirical(block, y, wv) == Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("crps of point and degenerate forecasts") {
  const std::vector<double> point{2.5};
  CHECK(crps_empirical(point, -1.0) == Approx(3.5));
  const std::vector<double> zeros(50, 0.0);
  CHECK(crps_empirical(zeros, 0.0) == 0.0);
  CHECK_THROWS_AS(crps_empirical(std::vector<double>{}, 0.0), std::invalid_argument);
}

TEST_CASE("crps of Gaussian samples approaches the closed form") {
  std::mt19937_64 rng(2024);
  for (double mu : {0.0, 1.0}) {
    std::normal_distribution<double> g(mu, 2.0);
    std::vector<double> s(4000);
    for (double& v : s) v = g(rng);
    CHECK(crps_empirical(s, 0.5) == Approx(gaussian_crps(mu, 2.0, 0.5)).epsilon(0.05));
  }
}

TEST_CASE("energy distance hand examples") {
  const std::vector<double> w{1.0};
  const std::vector<double> a{5.0};
  const std::vector<double> b{8.0};
  CHECK(energy_distance_empirical(SampleBlock<double>::row_major(a, 1, 1), SampleBlock<double>::row_major(b, 1, 1),
                                  w) == Approx(3.0));
  CHECK(energy_distance_empirical(SampleBlock<double>::row_major(a, 1, 1), SampleBlock<double>::row_major(a, 1, 1),
                                  w) == 0.0);

  // Paired identical blocks with k = 2: cross term 0, each spread term 1.
  const std::vector<double> pair{0.0, 2.0};
  const auto blk = SampleBlock<double>::row_major(pair, 2, 1);
  CHECK(energy_distance_empirical(blk, blk, w) == Approx(-2.0));
  CHECK(reference::energy_distance_empirical(blk, blk, w) == Approx(-2.0));

  CHECK_THROWS_AS(energy_distance_empirical(blk, SampleBlock<double>::row_major(a, 1, 1), w), std::invalid_argument);
  CHECK_THROWS_AS(energy_distance_empirical(blk, blk, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("accuracy, stability and ac score on small ensembles") {
  // Constant truth, constant forecasts.
  TimeSeries flat{"c", std::vector<double>(12, 4.0)};
  ForecastEnsemble perfect(5, 3, 2, 2, 4.0);
  const auto r = ac_score(perfect, flat, config_for(3, 0.5, WeightKind::linear));
  CHECK(r.accuracy == 0.0);
  CHECK(r.stability == 0.0);
  CHECK(r.ac_score == 0.0);
  CHECK(r.per_origin_energy_scores.size() == 5);
  CHECK(r.per_pair_energy_distances.size() == 4);

  std::mt19937_64 rng(3);
  const auto e = random_ensemble(rng, 4, 3, 3, 1);
  const auto series = random_series(rng, 10);
  const auto cfg = config_for(3, 0.5);
  const auto acc = accuracy_score(e, series, cfg.accuracy_weights);
  REQUIRE(acc.terms.size() == 4);
  CHECK(acc.mean == Approx((acc.terms[0] + acc.terms[1] + acc.terms[2] + acc.terms[3]) / 4.0));
  const auto y0 = std::span<const double>(series.values).subspan(2, 3);
  CHECK(acc.terms[0] == Approx(energy_score_empirical(e.block(0, 0, 3), y0, cfg.accuracy_weights)));

  const auto stab = stability_score(e, cfg.stability());
  REQUIRE(stab.terms.size() == 3);
  const auto tail = cfg.stability().overlap_tail();
  CHECK(stab.terms[1] == Approx(energy_distance_empirical(e.block(1, 1, 2), e.block(2, 0, 2), tail)));

  const auto full = ac_score(e, series, cfg);
  CHECK(full.ac_score == Approx(acc.mean + 0.5 * stab.mean));

  auto lambda0 = cfg;
  lambda0.lambda = 0.0;
  CHECK(ac_score(e, series, lambda0).ac_score == acc.mean);

  ForecastEnsemble single(1, 3, 3, 1);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t i = 0; i < 3; ++i) single.at(0, s, i) = e.at(0, s, i);
  CHECK(accuracy_score(single, series, cfg.accuracy_weights).mean == Approx(acc.terms[0]));
}

TEST_CASE("stability of a constant forecaster is zero") {
  ForecastEnsemble e(6, 4, 3, 0, 1.25);
  CHECK(stability_score(e, build_weight_schedule(WeightKind::uniform, 4)).mean == 0.0);
  ForecastEnsemble m1(3, 1, 1, 0);
  CHECK_THROWS_AS(stability_score(m1, build_weight_schedule(WeightKind::uniform, 1)), std::invalid_argument);
}

TEST_CASE("ac score errors") {
  ForecastEnsemble e(3, 2, 1, 0);
  TimeSeries short_series{"s", std::vector<double>(4, 1.0)};
  CHECK_THROWS_AS(ac_score(e, short_series, config_for(2, 0.5)), std::invalid_argument);
  TimeSeries ok{"s", std::vector<double>(5, 1.0)};
  CHECK_NOTHROW(ac_score(e, ok, config_for(2, 0.5)));
  CHECK_THROWS_AS(ac_score(e, ok, config_for(3, 0.5)), std::invalid_argument);
  auto neg = config_for(2, -1.0);
  CHECK_THROWS_AS(ac_score(e, ok, neg), std::invalid_argument);
}

TEST_CASE("point ensembles reduce to weighted absolute errors") {
  std::mt19937_64 rng(11);
  const auto e = random_ensemble(rng, 5, 4, 1, 0);
  const auto series = random_series(rng, 9);
  const auto w = build_weight_schedule(WeightKind::linear, 4);
  const auto acc = accuracy_score(e, series, w);
  for (std::size_t o = 0; o < 5; ++o) {
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const double d = e.at(o, j, 0) - series.values[o + j + 1];
      s += w[j] * d * d;
    }
    CHECK(acc.terms[o] == Approx(std::sqrt(s)).epsilon(1e-12));
  }
}

TEST_CASE("parallel scores match the serial reference") {
  std::mt19937_64 rng(5);
  for (std::size_t k : {1u, 7u, 200u}) {
    const auto e = random_ensemble(rng, 12, 6, k, 3);
    const auto series = random_series(rng, 24);
    const auto cfg = config_for(6, 0.5, WeightKind::exponential);
    const auto fast = ac_score(e, series, cfg);
    const auto slow = reference::ac_score(e, series, cfg);
    CHECK(fast.ac_score == Approx(slow.ac_score).epsilon(1e-12));
    REQUIRE(fast.per_pair_energy_distances.size() == slow.per_pair_energy_distances.size());
    for (std::size_t i = 0; i < fast.per_pair_energy_distances.size(); ++i)
      CHECK(fast.per_pair_energy_distances[i] == Approx(slow.per_pair_energy_distances[i]).epsilon(1e-12));
  }
}

TEST_CASE("scores are translation invariant and scale with the data") {
  std::mt19937_64 rng(9);
  const auto e = random_ensemble(rng, 6, 3, 4, 0);
  const auto series = random_series(rng, 9);
  const auto cfg = config_for(3, 0.5, WeightKind::hyperbolic);
  const double base = ac_score(e, series, cfg).ac_score;

  ForecastEnsemble moved(6, 3, 4, 0);
  ForecastEnsemble scaled(6, 3, 4, 0);
  TimeSeries ms = series, ss = series;
  for (double& v : ms.values) v += 100.0;
  for (double& v : ss.values) v *= 3.0;
  for (std::size_t o = 0; o < 6; ++o)
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t i = 0; i < 4; ++i) {
        moved.at(o, s, i) = e.at(o, s, i) + 100.0;
        scaled.at(o, s, i) = 3.0 * e.at(o, s, i);
      }
  CHECK(ac_score(moved, ms, cfg).ac_score == Approx(base).epsilon(1e-9));
  CHECK(ac_score(scaled, ss, cfg).ac_score == Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("vertical variance") {
  ForecastEnsemble flat(4, 3, 1, 0, 2.0);
  CHECK(vertical_variance(flat, 0).mean == 0.0);

  // Target 3 is covered by origins 0, 1, 2 with forecasts 1, 2, 3.
  ForecastEnsemble e(3, 3, 1, 0, 0.0);
  e.at(0, 2, 0) = 1.0;
  e.at(1, 1, 0) = 2.0;
  e.at(2, 0, 0) = 3.0;
  const auto vv = vertical_variance(e, 0, CoveragePolicy::full);
  REQUIRE(vv.targets.size() == 1);
  CHECK(vv.targets[0] == 3);
  CHECK(vv.variances[0] == Approx(1.0));

  const auto partial = vertical_variance(e, 0, CoveragePolicy::partial);
  CHECK(partial.targets.size() == 3);  // targets 2, 3 and 4

  ForecastEnsemble m1(4, 1, 1, 0);
  CHECK_THROWS_AS(vertical_variance(m1, 0), std::invalid_argument);
  ForecastEnsemble too_few(2, 3, 1, 0);
  CHECK_THROWS_AS(vertical_variance(too_few, 0, CoveragePolicy::full), std::invalid_argument);
}

TEST_CASE("mape by horizon") {
  TimeSeries t{"m", {0.0, 100.0, 200.0}};
  ForecastEnsemble e(2, 1, 1, 0);
  e.at(0, 0, 0) = 110.0;
  e.at(1, 0, 0) = 180.0;
  const auto m = mape_by_horizon(e, t);
  CHECK(m.mape[0] == Approx(0.10));
  CHECK(m.excluded[0] == 0);

  TimeSeries z{"z", {1.0, 0.0, 4.0}};
  const auto mz = mape_by_horizon(e, z);
  CHECK(mz.excluded[0] == 1);
  CHECK(mz.mape[0] == Approx(44.0));

  TimeSeries zeros{"zz", {1.0, 0.0, 0.0}};
  CHECK(std::isnan(mape_by_horizon(e, zeros).mape[0]));

  ForecastEnsemble exact(2, 1, 1, 0);
  exact.at(0, 0, 0) = 100.0;
  exact.at(1, 0, 0) = 200.0;
  CHECK(mape_by_horizon(exact, t).mape[0] == 0.0);
}

TEST_CASE("relative improvement") {
  CHECK(relative_improvement(0.3, 0.3) == 0.0);
  CHECK(relative_improvement(0.2, 0.1) == Approx(0.5));
  CHECK(relative_improvement(0.1, 0.2) == Approx(-1.0));
  CHECK_THROWS_AS(relative_improvement(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("expected ac score by Monte Carlo") {
  const auto cfg = config_for(2, 0.5);
  const RealizationGenerator fixed = [](std::uint64_t) { return TimeSeries{"f", {1.0, 2.0, 3.0, 4.0, 5.0}}; };
  const EnsembleForecaster naive = [](const TimeSeries& z, std::uint64_t) {
    ForecastEnsemble e(3, 2, 1, 0);
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t s = 0; s < 2; ++s) e.at(o, s, 0) = z.values[o];
    return e;
  };
  const auto est = expected_ac_score(fixed, naive, cfg, 5, 1);
  const TimeSeries z = fixed(0);
  CHECK(est.mean == Approx(ac_score(naive(z, 0), z, cfg).ac_score));
  CHECK(est.standard_error == 0.0);

  const RealizationGenerator noisy = [](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    TimeSeries t{"n", std::vector<double>(6)};
    for (double& v : t.values) v = g(rng);
    return t;
  };
  const auto a = expected_ac_score(noisy, naive, cfg, 2, 99);
  const auto b = expected_ac_score(noisy, naive, cfg, 2, 99);
  CHECK(a.scores == b.scores);
  CHECK(a.mean == Approx((a.scores[0] + a.scores[1]) / 2.0));
  CHECK_THROWS_AS(expected_ac_score(noisy, naive, cfg, 1, 99), std::invalid_argument);
}

TEST_CASE("derived seeds differ by stream") {
  CHECK(derive_seed(42, 0) != derive_seed(42, 1));
  CHECK(derive_seed(42, 0) != derive_seed(43, 0));
  CHECK(derive_seed(42, 5) == derive_seed(42, 5));
}
