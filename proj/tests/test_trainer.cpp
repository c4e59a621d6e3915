#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "acscore/metrics.hpp"
#include "acscore/trainer.hpp"

using namespace acscore;
using doctest::Approx;

namespace {

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> y(n);
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) prev = phi * prev + g(rng);
  for (double& v : y) v = prev = phi * prev + g(rng);
  return y;
}

std::vector<double> seasonal_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) {
    y[t] = 10.0 * std::sin(2.0 * M_PI * static_cast<double>(t) / 6.0) + g(rng);
    if (t >= 1) y[t] += 0.4 * y[t - 1];
  }
  return y;
}

TrainConfig small_config(int m) {
  TrainConfig c;
  c.horizon = m;
  c.max_epochs = 30;
  c.batch_size = 8;
  return c;
}

}  // namespace

TEST_CASE("ac loss of a perfect ensemble is only smoothing") {
  const std::vector<double> y{1, 2, 3, 4, 5, 6, 7, 8};
  ForecastEnsemble e(4, 3, 1, 0);
  for (std::size_t o = 0; o < 4; ++o)
    for (std::size_t s = 0; s < 3; ++s) e.at(o, s, 0) = y[o + s + 1];
  ScoreConfig cfg;
  cfg.accuracy_weights = build_weight_schedule(WeightKind::linear, 3);
  const double loss = ac_loss<double>(e, y, cfg);
  CHECK(loss >= 0.0);
  CHECK(loss < 1e-5);
}

TEST_CASE("ac loss tracks the metric module") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (std::size_t k : {1u, 3u}) {
    ForecastEnsemble e(6, 4, k, 2);
    for (std::size_t o = 0; o < 6; ++o)
      for (std::size_t s = 0; s < 4; ++s)
        for (std::size_t i = 0; i < k; ++i) e.at(o, s, i) = g(rng);
    TimeSeries t{"x", std::vector<double>(12)};
    for (double& v : t.values) v = g(rng);
    ScoreConfig cfg;
    cfg.accuracy_weights = build_weight_schedule(WeightKind::exponential, 4);
    cfg.stability_weights = build_weight_schedule(WeightKind::uniform, 4);
    const double loss = ac_loss<double>(e, t.values, cfg);
    const double metric = ac_score(e, t, cfg).ac_score;
    CHECK(std::abs(loss - metric) < 1e-5);

    auto acc_only = cfg;
    acc_only.lambda = 0.0;
    CHECK(ac_loss<double>(e, t.values, acc_only) == Approx(accuracy_score(e, t, cfg.accuracy_weights).mean).epsilon(1e-6));
  }
}

TEST_CASE("loss does not depend on origin order") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  ad::Tape tape;
  std::vector<ad::Var> leaves;
  BasicEnsemble<ad::Var> e(7, 3, 1, 0);
  for (std::size_t o = 0; o < 7; ++o)
    for (std::size_t s = 0; s < 3; ++s) {
      leaves.push_back(tape.variable(g(rng)));
      e.at(o, s, 0) = leaves.back();
    }
  std::vector<double> y(10);
  for (double& v : y) v = g(rng);
  ScoreConfig cfg;
  cfg.accuracy_weights = build_weight_schedule(WeightKind::linear, 3);

  std::vector<std::size_t> fwd{0, 1, 2, 3, 4, 5, 6};
  std::vector<std::size_t> rev(fwd.rbegin(), fwd.rend());
  const ad::Var a = ac_loss<ad::Var>(e, y, cfg, fwd);
  const auto ga = tape.backward(a, leaves);
  const ad::Var b = ac_loss<ad::Var>(e, y, cfg, rev);
  const auto gb = tape.backward(b, leaves);
  CHECK(a.value() == Approx(b.value()).epsilon(1e-12));
  for (std::size_t i = 0; i < ga.size(); ++i) CHECK(std::abs(ga[i] - gb[i]) <= 1e-12);
}

TEST_CASE("loss gradient matches finite differences") {
  const auto y = seasonal_series(80, 4);
  for (const SariSpec spec : {SariSpec{1, 0, 0, 0, 1}, SariSpec{2, 1, 0, 0, 1}, SariSpec{1, 0, 1, 1, 6}}) {
    TrainConfig c = small_config(5);
    std::vector<double> theta(spec.parameter_count(), 0.2);
    const auto eval = evaluate_ac_loss(spec, theta, y, c);
    CHECK(eval.value == Approx(ac_loss_value(spec, theta, y, c)).epsilon(1e-12));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      auto up = theta, dn = theta;
      const double h = 1e-6;
      up[i] += h;
      dn[i] -= h;
      const double fd = (ac_loss_value(spec, up, y, c) - ac_loss_value(spec, dn, y, c)) / (2.0 * h);
      CHECK(std::abs(eval.gradient[i] - fd) <= 1e-5 * std::abs(fd) + 1e-7);
    }
  }
}

TEST_CASE("training lowers the loss on AR(1) data") {
  const SariSpec spec{1, 0, 0, 0, 1};
  int descended = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto y = ar1(0.6, 150, 100 + seed);
    TrainConfig c = small_config(6);
    c.seed = seed;
    const TrainResult r = train(spec, y, c);
    REQUIRE_FALSE(r.trace.aborted);
    std::mt19937_64 init_rng(seed);
    std::uniform_real_distribution<double> init(c.init_low, c.init_high);
    const std::vector<double> start{init(init_rng)};
    if (ac_loss_value(spec, r.params.flat(), y, c) < ac_loss_value(spec, start, y, c)) ++descended;
  }
  CHECK(descended >= 19);
}

TEST_CASE("training is deterministic and traces are aligned") {
  const SariSpec spec{1, 0, 1, 0, 6};
  const auto y = seasonal_series(120, 9);
  TrainConfig c = small_config(6);
  const auto a = train(spec, y, c);
  const auto b = train(spec, y, c);
  CHECK(a.trace.loss == b.trace.loss);
  CHECK(a.trace.lr == b.trace.lr);
  CHECK(a.params.flat() == b.params.flat());
  CHECK(a.trace.loss.size() == static_cast<std::size_t>(a.trace.final_epoch));
  CHECK(a.trace.lr.size() == a.trace.loss.size());

  c.sample_count = 3;
  const auto s1 = train(spec, y, c);
  const auto s2 = train(spec, y, c);
  CHECK(s1.trace.loss == s2.trace.loss);
}

TEST_CASE("zero epochs returns the initialization") {
  const SariSpec spec{2, 0, 0, 0, 1};
  const auto y = ar1(0.5, 60, 1);
  TrainConfig c = small_config(4);
  c.max_epochs = 0;
  const auto r = train(spec, y, c);
  CHECK(r.trace.loss.empty());
  CHECK(r.trace.final_epoch == 0);
  std::mt19937_64 init_rng(c.seed);
  std::uniform_real_distribution<double> init(c.init_low, c.init_high);
  const double first = init(init_rng);
  const double second = init(init_rng);
  CHECK(r.params.phi == std::vector<double>{first, second});
}

TEST_CASE("full batch and batch configurations") {
  const SariSpec spec{1, 0, 0, 0, 1};
  const auto y = ar1(0.7, 80, 2);
  TrainConfig c = small_config(4);
  c.full_batch = true;
  c.max_epochs = 5;
  const auto full = train(spec, y, c);
  CHECK(full.trace.loss.size() == 5);
  c.init_low = 0.3;
  c.init_high = 0.3 + 1e-15;
  c.seed = 1;
  const auto s1 = train(spec, y, c);
  c.seed = 2;
  const auto s2 = train(spec, y, c);
  CHECK(s1.params.phi[0] == Approx(s2.params.phi[0]).epsilon(1e-12));
}

TEST_CASE("config validation and errors") {
  const SariSpec spec{1, 0, 0, 0, 1};
  const auto y = ar1(0.5, 30, 1);
  TrainConfig c = small_config(4);
  c.batch_size = 0;
  CHECK_THROWS_AS(train(spec, y, c), std::invalid_argument);
  c = small_config(40);
  CHECK_THROWS_AS(train(spec, y, c), std::invalid_argument);
  c = small_config(4);
  c.lr0 = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);

  const auto long_y = ar1(0.5, 1000, 1);
  TrainConfig slow = small_config(24);
  slow.max_epochs = 100000;
  slow.time_budget_seconds = 0.05;
  CHECK_THROWS_AS(train(SariSpec{2, 0, 1, 0, 24}, long_y, slow), TrainTimeout);
}
