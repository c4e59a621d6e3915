#pragma once

// Scalar-generic score kernels. These are the serial reference path: the
// public double-precision API in metrics.hpp runs the OpenMP variants, and the
// trainer instantiates these same templates with ad::Var to get a
// differentiable loss with identical arithmetic.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "acscore/autodiff.hpp"
#include "acscore/ensemble.hpp"

namespace acscore::kernels {

/// sqrt(sum_j w_j (a_j - b_j)^2 + eps)
template <class T, class Lhs, class Rhs>
T weighted_distance(std::span<const double> w, Lhs&& a, Rhs&& b, double eps) {
  using std::sqrt;
  T acc = T(eps);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0.0) continue;
    T d = a(j) - b(j);
    acc += w[j] * (d * d);
  }
  return sqrt(acc);
}

/// Empirical weighted energy score of k sampled paths against one outcome
/// vector. The within-sample spread term uses 1/(k(k-1)) over unordered
/// pairs and is zero for k = 1.
template <class T>
T energy_score(const SampleBlock<T>& f, std::span<const double> actuals, std::span<const double> w,
               double eps = 0.0) {
  if (f.samples == 0) throw std::invalid_argument("energy score: need at least one sample");
  if (f.width != w.size() || actuals.size() != w.size()) {
    throw std::invalid_argument("energy score: forecast, outcome and weight dimensions differ");
  }
  const std::size_t k = f.samples;
  T accuracy = T(0.0);
  for (std::size_t i = 0; i < k; ++i) {
    accuracy += weighted_distance<T>(
        w, [&](std::size_t j) { return f(i, j); }, [&](std::size_t j) { return T(actuals[j]); }, eps);
  }
  accuracy = accuracy / static_cast<double>(k);
  if (k == 1) return accuracy;
  T spread = T(0.0);
  for (std::size_t i1 = 0; i1 < k; ++i1) {
    for (std::size_t i2 = i1 + 1; i2 < k; ++i2) {
      spread += weighted_distance<T>(
          w, [&](std::size_t j) { return f(i1, j); }, [&](std::size_t j) { return f(i2, j); }, eps);
    }
  }
  return accuracy - spread / (static_cast<double>(k) * static_cast<double>(k - 1));
}

template <class T>
T within_spread(const SampleBlock<T>& b, std::span<const double> w, double eps) {
  const std::size_t k = b.samples;
  if (k < 2) return T(0.0);
  T spread = T(0.0);
  for (std::size_t i1 = 0; i1 < k; ++i1) {
    for (std::size_t i2 = i1 + 1; i2 < k; ++i2) {
      spread += weighted_distance<T>(
          w, [&](std::size_t j) { return b(i1, j); }, [&](std::size_t j) { return b(i2, j); }, eps);
    }
  }
  return spread / (static_cast<double>(k) * static_cast<double>(k - 1));
}

/// Empirical weighted energy distance between the overlapping parts of two
/// successive origins. Sample i of `earlier` is paired with sample i of
/// `later` in the cross term.
template <class T>
T energy_distance(const SampleBlock<T>& earlier, const SampleBlock<T>& later, std::span<const double> w,
                  double eps = 0.0) {
  if (earlier.samples == 0 || earlier.samples != later.samples) {
    throw std::invalid_argument("energy distance: blocks must share a positive sample count");
  }
  if (earlier.width != later.width || earlier.width != w.size()) {
    throw std::invalid_argument("energy distance: block and weight widths differ");
  }
  if (w.empty()) throw std::invalid_argument("energy distance: needs horizon m >= 2");
  const std::size_t k = earlier.samples;
  T cross = T(0.0);
  for (std::size_t i = 0; i < k; ++i) {
    cross += weighted_distance<T>(
        w, [&](std::size_t j) { return earlier(i, j); }, [&](std::size_t j) { return later(i, j); }, eps);
  }
  cross = cross / static_cast<double>(k);
  return cross - within_spread(earlier, w, eps) - within_spread(later, w, eps);
}

/// Accuracy and stability terms of the AC score over a subset of origins.
/// Accuracy averages the energy score over `origins`; stability averages the
/// energy distance over pairs (o, o + 1) with o in `origins` and o + 1 < n.
/// `actuals` is the full series (indexed by series index).
template <class T>
struct AcTerms {
  T accuracy;
  T stability;
  std::size_t origin_count = 0;
  std::size_t pair_count = 0;
};

template <class T>
AcTerms<T> ac_terms(const BasicEnsemble<T>& e, std::span<const double> actuals, std::span<const double> acc_weights,
                    std::span<const double> stab_tail, std::span<const std::size_t> origins, bool with_stability,
                    double eps) {
  const std::size_t m = e.horizon();
  if (acc_weights.size() != m) throw std::invalid_argument("ac score: accuracy weights do not match horizon");
  if (e.target_end() > actuals.size()) throw std::invalid_argument("ac score: ensemble targets exceed series length");
  AcTerms<T> out{T(0.0), T(0.0)};
  for (std::size_t o : origins) {
    const auto y = actuals.subspan(e.origin_offset() + o + 1, m);
    out.accuracy += energy_score<T>(e.block(o, 0, m), y, acc_weights, eps);
    ++out.origin_count;
  }
  if (out.origin_count == 0) throw std::invalid_argument("ac score: no origins");
  out.accuracy = out.accuracy / static_cast<double>(out.origin_count);
  if (!with_stability) return out;
  if (m < 2) throw std::invalid_argument("stability score: needs horizon m >= 2");
  if (stab_tail.size() != m - 1) throw std::invalid_argument("stability score: weight tail does not match horizon");
  for (std::size_t o : origins) {
    if (o + 1 >= e.origins()) continue;
    out.stability += energy_distance<T>(e.block(o, 1, m - 1), e.block(o + 1, 0, m - 1), stab_tail, eps);
    ++out.pair_count;
  }
  if (out.pair_count > 0) out.stability = out.stability / static_cast<double>(out.pair_count);
  return out;
}

}  // namespace acscore::kernels
