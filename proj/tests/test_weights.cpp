#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "acscore/weights.hpp"

using namespace acscore;
using doctest::Approx;

namespace {

double total(std::span<const double> w) { return std::accumulate(w.begin(), w.end(), 0.0); }

}  // namespace

TEST_CASE("uniform weights split evenly") {
  const auto w = build_weight_schedule(WeightKind::uniform, 4);
  REQUIRE(w.horizon() == 4);
  for (std::size_t h = 0; h < 4; ++h) CHECK(w[h] == 0.25);
}

TEST_CASE("linear weights follow 1 - h/m") {
  const auto w = build_weight_schedule(WeightKind::linear, 4);
  CHECK(w[0] == Approx(0.5));
  CHECK(w[1] == Approx(1.0 / 3.0));
  CHECK(w[2] == Approx(1.0 / 6.0));
  CHECK(w[3] == 0.0);
}

TEST_CASE("linear floor keeps the last horizon positive") {
  WeightParams p;
  p.floor = 0.1;
  const auto w = build_weight_schedule(WeightKind::linear, 4, p);
  CHECK(w[3] > 0.0);
  CHECK(w[3] == Approx(0.1 / 1.6));
}

TEST_CASE("hyperbolic weights at m = 2") {
  const auto w = build_weight_schedule(WeightKind::hyperbolic, 2);
  CHECK(w[0] == Approx(0.6));
  CHECK(w[1] == Approx(0.4));
}

TEST_CASE("exponential weights") {
  CHECK(build_weight_schedule(WeightKind::exponential, 1)[0] == 1.0);
  const auto w = build_weight_schedule(WeightKind::exponential, 24);
  for (std::size_t h = 1; h < 24; ++h) CHECK(w[h] / w[h - 1] == Approx(std::exp(-5.0 / 24.0)));
}

TEST_CASE("inverse variance and piecewise forms") {
  WeightParams p;
  p.variances = {1.0, 2.0, 4.0};
  const auto iv = build_weight_schedule(WeightKind::inverse_variance, 3, p);
  CHECK(iv[0] == Approx(4.0 / 7.0));
  CHECK(iv[2] == Approx(1.0 / 7.0));

  WeightParams q;
  q.breaks = {3};
  q.levels = {2.0, 1.0};
  const auto pw = build_weight_schedule(WeightKind::piecewise, 4, q);
  CHECK(pw[0] == Approx(2.0 / 6.0));
  CHECK(pw[1] == Approx(2.0 / 6.0));
  CHECK(pw[2] == Approx(1.0 / 6.0));
  CHECK(pw[3] == Approx(1.0 / 6.0));
}

TEST_CASE("every kind is nonnegative and sums to one") {
  WeightParams p;
  p.floor = 0.05;
  p.breaks = {2, 5};
  p.levels = {3.0, 2.0, 1.0};
  for (int m : {2, 3, 7, 24, 48}) {
    p.variances.assign(static_cast<std::size_t>(m), 0.0);
    for (int h = 0; h < m; ++h) p.variances[static_cast<std::size_t>(h)] = 1.0 + h;
    for (auto kind : {WeightKind::uniform, WeightKind::linear, WeightKind::exponential, WeightKind::hyperbolic,
                      WeightKind::inverse_variance, WeightKind::piecewise}) {
      const auto w = build_weight_schedule(kind, m, p);
      CHECK(total(w.weights()) == Approx(1.0).epsilon(1e-14));
      for (double x : w.weights()) CHECK(x >= 0.0);
    }
  }
}

TEST_CASE("overlap tail renormalizes horizons 2..m") {
  const auto w = build_weight_schedule(WeightKind::linear, 4);
  const auto tail = w.overlap_tail();
  REQUIRE(tail.size() == 3);
  CHECK(tail[0] == Approx(2.0 / 3.0));
  CHECK(tail[1] == Approx(1.0 / 3.0));
  CHECK(tail[2] == 0.0);

  const auto zero_tail = build_weight_schedule(WeightKind::linear, 2).overlap_tail();
  REQUIRE(zero_tail.size() == 1);
  CHECK(zero_tail[0] == 0.0);
  CHECK(build_weight_schedule(WeightKind::uniform, 1).overlap_tail().empty());
}

TEST_CASE("invalid schedules throw") {
  CHECK_THROWS_AS(build_weight_schedule(WeightKind::uniform, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_weight_schedule(WeightKind::linear, 1), std::invalid_argument);
  WeightParams bad;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(build_weight_schedule(WeightKind::exponential, 3, bad), std::invalid_argument);
  CHECK_THROWS_AS(build_weight_schedule(WeightKind::inverse_variance, 3), std::invalid_argument);
  CHECK_THROWS_AS(WeightSchedule::from_raw(WeightKind::uniform, {1.0, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(WeightSchedule::from_raw(WeightKind::uniform, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(WeightSchedule::from_raw(WeightKind::uniform, {NAN}), std::invalid_argument);
  CHECK_THROWS_AS(parse_weight_kind("triangular"), std::invalid_argument);
  CHECK(parse_weight_kind("hyperbolic") == WeightKind::hyperbolic);
}
