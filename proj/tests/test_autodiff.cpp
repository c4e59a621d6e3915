#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "acscore/autodiff.hpp"
#include "acscore/metrics_kernels.hpp"

using namespace acscore;
using ad::Tape;
using ad::Var;
using doctest::Approx;

TEST_CASE("squared residual derivative") {
  Tape t;
  const Var phi = t.variable(1.0);
  const Var r = Var(3.0) - phi * 2.0;
  const Var loss = r * r;
  const std::vector<Var> wrt{phi};
  CHECK(loss.value() == 1.0);
  CHECK(t.backward(loss, wrt)[0] == Approx(-4.0));
}

TEST_CASE("elementary rules") {
  Tape t;
  const Var x = t.variable(3.0);
  const std::vector<Var> wx{x};
  CHECK(t.backward(x * x, wx)[0] == Approx(6.0));

  const Var p1 = t.variable(2.0);
  const Var p2 = t.variable(5.0);
  const std::vector<Var> wp{p1, p2};
  const auto g = t.backward(p1 * p2, wp);
  CHECK(g[0] == Approx(5.0));
  CHECK(g[1] == Approx(2.0));

  const auto q = t.backward(p1 / p2, wp);
  CHECK(q[0] == Approx(0.2));
  CHECK(q[1] == Approx(-2.0 / 25.0));

  const auto s = t.backward(ad::sqrt(p1 * p2), wp);
  CHECK(s[0] == Approx(5.0 / (2.0 * std::sqrt(10.0))));

  const auto n = t.backward(-(p1 - p2) + p2, wp);
  CHECK(n[0] == Approx(-1.0));
  CHECK(n[1] == Approx(2.0));
}

TEST_CASE("constants have zero gradient") {
  Tape t;
  const Var a = t.variable(1.5);
  const Var c1 = t.lift(2.0);
  const Var c2 = t.lift(4.0);
  const std::vector<Var> terms{c1, c2, Var(1.0)};
  const Var root = ad::sum(terms);
  const std::vector<Var> wrt{a, c1};
  const auto g = t.backward(root, wrt);
  CHECK(root.value() == 7.0);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
  CHECK((Var(2.0) * Var(3.0)).is_constant());
}

TEST_CASE("repeated backward passes do not accumulate") {
  Tape t;
  const Var x = t.variable(2.0);
  const Var y = x * x * x;
  const std::vector<Var> wrt{x};
  const double first = t.backward(y, wrt)[0];
  const double second = t.backward(y, wrt)[0];
  CHECK(first == Approx(12.0));
  CHECK(second == first);
}

TEST_CASE("compound assignment and shared subexpressions") {
  Tape t;
  const Var x = t.variable(0.7);
  Var acc = x;
  acc *= x;
  acc += x;
  acc -= 1.0;
  acc /= x;
  const std::vector<Var> wrt{x};
  // (x^2 + x - 1) / x = x + 1 - 1/x
  CHECK(acc.value() == Approx(0.7 + 1.0 - 1.0 / 0.7));
  CHECK(t.backward(acc, wrt)[0] == Approx(1.0 + 1.0 / 0.49));
}

TEST_CASE("domain errors") {
  Tape t;
  const Var x = t.variable(-1.0);
  CHECK_THROWS_AS(ad::sqrt(x), std::domain_error);
  CHECK_THROWS_AS(x / Var(0.0), std::domain_error);
  const Var z = t.variable(0.0);
  const std::vector<Var> wrt{z};
  CHECK(t.backward(ad::sqrt(z), wrt)[0] == 0.0);

  Tape other;
  const Var y = other.variable(1.0);
  CHECK_THROWS_AS(x + y, std::logic_error);
}

TEST_CASE("weighted norm of an AR(1) forecast matches finite differences") {
  const std::vector<double> w{0.6, 0.4};
  const std::vector<double> y{1.1, 0.2};
  const double last = 2.0;
  auto value = [&](double phi) {
    const double f1 = phi * last;
    const double f2 = phi * f1;
    return std::sqrt(w[0] * (f1 - y[0]) * (f1 - y[0]) + w[1] * (f2 - y[1]) * (f2 - y[1]));
  };
  for (double phi0 : {-0.8, 0.1, 0.45, 0.9}) {
    Tape t;
    const Var phi = t.variable(phi0);
    const Var f1 = phi * last;
    const Var f2 = phi * f1;
    const Var norm = kernels::weighted_distance<Var>(
        w, [&](std::size_t j) { return j == 0 ? f1 : f2; }, [&](std::size_t j) { return Var(y[j]); }, 0.0);
    const std::vector<Var> wrt{phi};
    const double h = 1e-5;
    const double fd = (value(phi0 + h) - value(phi0 - h)) / (2.0 * h);
    CHECK(norm.value() == Approx(value(phi0)));
    CHECK(t.backward(norm, wrt)[0] == Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("energy score kernel is differentiable in the samples") {
  Tape t;
  const std::vector<double> w{0.5, 0.5};
  const std::vector<double> y{0.0, 1.0};
  std::vector<Var> cells{t.variable(0.3), t.variable(1.4), t.variable(-0.2), t.variable(0.9)};
  const SampleBlock<Var> block{cells.data(), 2, 2, 2, 1};
  const Var es = kernels::energy_score<Var>(block, y, w, 0.0);
  const auto g = t.backward(es, cells);

  std::vector<double> base{0.3, 1.4, -0.2, 0.9};
  auto f = [&](const std::vector<double>& v) {
    return kernels::energy_score<double>(SampleBlock<double>{v.data(), 2, 2, 2, 1}, y, w, 0.0);
  };
  CHECK(es.value() == Approx(f(base)));
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto up = base, dn = base;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    CHECK(g[i] == Approx((f(up) - f(dn)) / 2e-6).epsilon(1e-6));
  }
}
