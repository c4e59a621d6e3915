#pragma once

// Seasonal autoregressive integrated model SARI(p,d,0)x(P,D,0,s):
//   Phi(L^s) phi(L) (1 - L^s)^D (1 - L)^d y_t = e_t
// with phi(x) = 1 - phi_1 x - ... - phi_p x^p and Phi likewise.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "acscore/autodiff.hpp"
#include "acscore/ensemble.hpp"
#include "acscore/optim.hpp"

namespace acscore {

struct SariSpec {
  int p = 0;
  int d = 0;
  int P = 0;
  int D = 0;
  int s = 1;

  /// Throws std::invalid_argument on negative orders or a seasonal part with s < 2.
  void validate() const;
  std::size_t max_lag() const { return static_cast<std::size_t>(p + s * P); }
  std::size_t diff_order() const { return static_cast<std::size_t>(d + s * D); }
  std::size_t required_history() const { return diff_order() + max_lag(); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(p + P); }
  std::string label() const;

  friend bool operator==(const SariSpec&, const SariSpec&) = default;
};

struct SariParams {
  std::vector<double> phi;
  std::vector<double> Phi;
  double sigma = 0.0;

  /// phi followed by Phi.
  std::vector<double> flat() const;
  static SariParams from_flat(const SariSpec& spec, std::span<const double> flat, double sigma = 0.0);
  void check(const SariSpec& spec) const;
};

// ---- differencing ------------------------------------------------------------

/// The `anchor` holds the d + s*D original values that precede the first
/// differenced value; integrate() continues the series from them.
struct RestorationState {
  int d = 0;
  int D = 0;
  int s = 1;
  std::vector<double> anchor;
};

struct Differenced {
  std::vector<double> values;
  RestorationState state;
};

/// Applies (1 - L)^d then (1 - L^s)^D. Needs more than d + s*D values.
Differenced difference(std::span<const double> values, int d, int D, int s);

/// Exact inverse of difference(), extended forward in time.
std::vector<double> integrate(std::span<const double> diffs, const RestorationState& state);

/// Coefficients e_1..e_K (K = d + s*D) with y_t = w_t + sum_b e_b y_{t-b}.
std::vector<double> integration_weights(int d, int D, int s);

// ---- AR structure --------------------------------------------------------------

/// One nonzero lag of the expanded recursion w_t = sum_a c_a w_{t-a}.
template <class T>
struct LagTerm {
  std::size_t lag;
  T coef;
};

/// Expands phi(L) Phi(L^s) into sparse recursion coefficients, merging lags
/// that coincide. Entries are sorted by lag.
template <class T>
std::vector<LagTerm<T>> expand_lags(const SariSpec& spec, std::span<const T> phi, std::span<const T> Phi) {
  std::vector<LagTerm<T>> raw;
  for (int i = 1; i <= spec.p; ++i) raw.push_back({static_cast<std::size_t>(i), phi[i - 1]});
  for (int k = 1; k <= spec.P; ++k) raw.push_back({static_cast<std::size_t>(spec.s * k), Phi[k - 1]});
  for (int i = 1; i <= spec.p; ++i) {
    for (int k = 1; k <= spec.P; ++k) {
      raw.push_back({static_cast<std::size_t>(i + spec.s * k), T(0.0) - phi[i - 1] * Phi[k - 1]});
    }
  }
  std::vector<LagTerm<T>> merged;
  for (std::size_t lag = 1; lag <= spec.max_lag(); ++lag) {
    bool any = false;
    T acc = T(0.0);
    for (const auto& t : raw) {
      if (t.lag != lag) continue;
      acc = any ? acc + t.coef : t.coef;
      any = true;
    }
    if (any) merged.push_back({lag, acc});
  }
  return merged;
}

/// Dense c_1..c_{max_lag}.
std::vector<double> expanded_coefficients(const SariSpec& spec, const SariParams& params);

/// Deterministic (or noise-driven) m-step path from an origin.
///   series:   original-scale values; only indices <= origin are read
///   diffed:   differenced series, diffed[i] pairs with series[i + K]
///   noise(j): innovation added at step j (0-based) on the differenced scale
/// Returns original-scale forecasts for origin+1 .. origin+m.
template <class T, class Noise>
std::vector<T> forecast_path(const std::vector<LagTerm<T>>& lags, std::span<const double> integ,
                             std::span<const double> series, std::span<const double> diffed, std::size_t origin,
                             std::size_t m, Noise&& noise) {
  const std::size_t K = integ.size();
  std::vector<T> wf(m);
  std::vector<T> yf(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t t = origin + 1 + j;
    T acc = T(noise(j));
    for (const auto& term : lags) {
      const std::size_t idx = t - term.lag;
      if (idx <= origin) {
        acc += term.coef * T(diffed[idx - K]);
      } else {
        acc += term.coef * wf[idx - origin - 1];
      }
    }
    wf[j] = acc;
    T y = acc;
    for (std::size_t b = 1; b <= K; ++b) {
      const double e = integ[b - 1];
      if (e == 0.0) continue;
      const std::size_t idx = t - b;
      if (idx <= origin) {
        y += T(e * series[idx]);
      } else {
        y += e * yf[idx - origin - 1];
      }
    }
    yf[j] = y;
  }
  return yf;
}

/// Origins whose full history and m-step target window lie inside a series of
/// length `length`. The first valid origin has required_history observations.
struct OriginRange {
  std::size_t first = 0;
  std::size_t count = 0;
};
OriginRange valid_origins(const SariSpec& spec, std::size_t length, std::size_t m, std::size_t earliest = 0);

/// Rolling m-step forecasts for origins [first, first + count). When `mask`
/// is given, only origins o with mask[o] set are computed; the rest stay 0.
template <class T>
BasicEnsemble<T> rolling_forecast_ensemble(const SariSpec& spec, std::span<const T> phi, std::span<const T> Phi,
                                           std::span<const double> series, std::span<const double> diffed,
                                           std::size_t m, OriginRange origins,
                                           const std::vector<char>* mask = nullptr) {
  const auto lags = expand_lags<T>(spec, phi, Phi);
  const std::vector<double> integ = integration_weights(spec.d, spec.D, spec.s);
  BasicEnsemble<T> e(origins.count, m, 1, origins.first, T(0.0));
  for (std::size_t o = 0; o < origins.count; ++o) {
    if (mask && !(*mask)[o]) continue;
    const auto path =
        forecast_path<T>(lags, integ, series, diffed, origins.first + o, m, [](std::size_t) { return 0.0; });
    for (std::size_t j = 0; j < m; ++j) e.at(o, j, 0) = path[j];
  }
  return e;
}

/// k x m forecast matrix (row-major, one row per sample path).
struct SampleMatrix {
  std::size_t samples = 0;
  std::size_t horizon = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * horizon + j]; }
};

/// Forecasts from the end of `history`. Without a seed and with k = 1 the
/// conditional-mean path is returned. With a seed each path adds i.i.d.
/// N(0, sigma^2) innovations. k > 1 requires a seed.
SampleMatrix forecast_recursive(const SariSpec& spec, const SariParams& params, std::span<const double> history,
                                std::size_t m, std::size_t k = 1, std::optional<std::uint64_t> noise_seed = {});

/// Deterministic out-of-sample ensemble for `series` with parameters frozen:
/// origins start at index `earliest` (or the first origin with enough
/// history) and step by one until the m-step window reaches the end.
ForecastEnsemble rolling_ensemble(const SariSpec& spec, const SariParams& params, std::span<const double> series,
                                  std::size_t m, std::size_t earliest);

// ---- stationarity ------------------------------------------------------------

struct StationarityReport {
  std::vector<std::complex<double>> roots;
  double min_modulus = 0.0;  // +inf when there are no roots
  bool stationary = true;
};

/// Roots of phi(z) Phi(z^s) from the companion matrix of the expanded
/// polynomial. Stationary iff every |z| > 1 + tol.
StationarityReport stationarity_check(const SariSpec& spec, const SariParams& params, double tol = 1e-6);

// ---- estimation ---------------------------------------------------------------

struct CssSettings {
  int max_epochs = 600;
  double lr = 0.05;
  double min_lr = 1e-7;
  double tolerance = 1e-12;  // relative loss change treated as converged
  AdamWHyper hyper{0.9, 0.999, 1e-8, 0.0};
};

struct CssFit {
  SariParams params;
  double sse = 0.0;
  std::size_t residual_count = 0;
  bool converged = false;
  int epochs = 0;
  std::vector<double> loss_trace;  // accepted mean squared residuals, one per epoch
};

/// Conditional least squares: minimizes the mean squared one-step residual
/// on the differenced scale with AdamW and step rejection (a rejected step
/// halves the learning rate), so the loss trace never increases.
CssFit css_fit(const SariSpec& spec, std::span<const double> train, const CssSettings& settings = {});

struct OrderGrid {
  int p_max = 2;
  int d_max = 1;
  int P_max = 1;
  int D_max = 1;
  std::vector<int> periods{24};

  std::vector<SariSpec> candidates() const;
};

struct AicEntry {
  SariSpec spec;
  double aic = 0.0;
  double sse = 0.0;
  std::size_t residual_count = 0;
};

struct OrderSelection {
  SariSpec best;
  std::vector<AicEntry> table;
};

/// AIC = n_eff ln(SSE / n_eff) + 2 (p + P + 1), minimized over the grid;
/// ties go to fewer AR terms, then less differencing.
OrderSelection select_orders(std::span<const double> train, const OrderGrid& grid, const CssSettings& settings = {});
OrderSelection select_orders(std::span<const double> train, std::span<const SariSpec> candidates,
                             const CssSettings& settings = {});

}  // namespace acscore
