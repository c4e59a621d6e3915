#include "acscore/sari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "acscore/metrics.hpp"

namespace acscore {

void SariSpec::validate() const {
  if (p < 0 || d < 0 || P < 0 || D < 0) throw std::invalid_argument("sari spec: orders must be nonnegative");
  if (s < 1) throw std::invalid_argument("sari spec: seasonal period must be >= 1");
  if ((P > 0 || D > 0) && s < 2) throw std::invalid_argument("sari spec: seasonal terms need period s > 1");
}

std::string SariSpec::label() const {
  return "(" + std::to_string(p) + "," + std::to_string(d) + ",0)x(" + std::to_string(P) + "," + std::to_string(D) +
         ",0," + std::to_string(s) + ")";
}

std::vector<double> SariParams::flat() const {
  std::vector<double> out(phi);
  out.insert(out.end(), Phi.begin(), Phi.end());
  return out;
}

SariParams SariParams::from_flat(const SariSpec& spec, std::span<const double> flat, double sigma) {
  if (flat.size() != spec.parameter_count()) throw std::invalid_argument("sari params: wrong parameter count");
  SariParams out;
  out.phi.assign(flat.begin(), flat.begin() + spec.p);
  out.Phi.assign(flat.begin() + spec.p, flat.end());
  out.sigma = sigma;
  return out;
}

void SariParams::check(const SariSpec& spec) const {
  if (phi.size() != static_cast<std::size_t>(spec.p) || Phi.size() != static_cast<std::size_t>(spec.P)) {
    throw std::invalid_argument("sari params: coefficient counts do not match " + spec.label());
  }
  for (double v : flat()) {
    if (!std::isfinite(v)) throw std::invalid_argument("sari params: non-finite coefficient");
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("sari params: sigma must be >= 0");
}

// ---- differencing ------------------------------------------------------------

Differenced difference(std::span<const double> values, int d, int D, int s) {
  if (d < 0 || D < 0 || s < 1) throw std::invalid_argument("difference: invalid orders");
  const auto K = static_cast<std::size_t>(d + s * D);
  if (values.size() <= K) throw std::invalid_argument("difference: series too short for the differencing orders");
  std::vector<double> w(values.begin(), values.end());
  auto apply = [&w](std::size_t lag) {
    std::vector<double> next(w.size() - lag);
    for (std::size_t t = lag; t < w.size(); ++t) next[t - lag] = w[t] - w[t - lag];
    w = std::move(next);
  };
  for (int i = 0; i < d; ++i) apply(1);
  for (int i = 0; i < D; ++i) apply(static_cast<std::size_t>(s));
  Differenced out;
  out.values = std::move(w);
  out.state = {d, D, s, std::vector<double>(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(K))};
  return out;
}

std::vector<double> integration_weights(int d, int D, int s) {
  // (1 - L)^d (1 - L^s)^D as a dense polynomial in L.
  std::vector<double> poly{1.0};
  auto multiply = [&poly](std::size_t lag) {
    std::vector<double> next(poly.size() + lag, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + lag] -= poly[i];
    }
    poly = std::move(next);
  };
  for (int i = 0; i < d; ++i) multiply(1);
  for (int i = 0; i < D; ++i) multiply(static_cast<std::size_t>(s));
  std::vector<double> e(poly.size() - 1);
  for (std::size_t b = 1; b < poly.size(); ++b) e[b - 1] = -poly[b];
  return e;
}

std::vector<double> integrate(std::span<const double> diffs, const RestorationState& state) {
  const auto K = static_cast<std::size_t>(state.d + state.s * state.D);
  if (state.anchor.size() != K) throw std::invalid_argument("integrate: restoration state does not match the orders");
  const std::vector<double> e = integration_weights(state.d, state.D, state.s);
  std::vector<double> y(state.anchor);
  y.reserve(K + diffs.size());
  for (double w : diffs) {
    double v = w;
    const std::size_t t = y.size();
    for (std::size_t b = 1; b <= K; ++b) v += e[b - 1] * y[t - b];
    y.push_back(v);
  }
  return {y.begin() + static_cast<std::ptrdiff_t>(K), y.end()};
}

// ---- forecasting --------------------------------------------------------------

std::vector<double> expanded_coefficients(const SariSpec& spec, const SariParams& params) {
  spec.validate();
  params.check(spec);
  std::vector<double> c(spec.max_lag(), 0.0);
  for (const auto& t : expand_lags<double>(spec, params.phi, params.Phi)) c[t.lag - 1] = t.coef;
  return c;
}

OriginRange valid_origins(const SariSpec& spec, std::size_t length, std::size_t m, std::size_t earliest) {
  OriginRange r;
  r.first = std::max(std::max<std::size_t>(spec.required_history(), 1) - 1, earliest);
  if (m == 0 || length < m + 1) return r;
  const std::size_t last = length - 1 - m;
  if (last >= r.first) r.count = last - r.first + 1;
  return r;
}

SampleMatrix forecast_recursive(const SariSpec& spec, const SariParams& params, std::span<const double> history,
                                std::size_t m, std::size_t k, std::optional<std::uint64_t> noise_seed) {
  spec.validate();
  params.check(spec);
  if (m == 0) throw std::invalid_argument("forecast: horizon must be >= 1");
  if (k == 0) throw std::invalid_argument("forecast: need at least one sample path");
  if (k > 1 && !noise_seed) throw std::invalid_argument("forecast: sampling k > 1 paths requires a noise seed");
  if (history.size() < std::max<std::size_t>(spec.required_history(), 1)) {
    throw std::invalid_argument("forecast: history shorter than the required " +
                                std::to_string(spec.required_history()) + " values");
  }
  const auto lags = expand_lags<double>(spec, params.phi, params.Phi);
  const auto integ = integration_weights(spec.d, spec.D, spec.s);
  const auto diffed = difference(history, spec.d, spec.D, spec.s).values;
  const std::size_t origin = history.size() - 1;

  SampleMatrix out{k, m, std::vector<double>(k * m)};
  std::mt19937_64 rng(noise_seed.value_or(0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> eps(m, 0.0);
    if (noise_seed) {
      for (double& x : eps) x = params.sigma * gauss(rng);
    }
    const auto path =
        forecast_path<double>(lags, integ, history, diffed, origin, m, [&eps](std::size_t j) { return eps[j]; });
    std::copy(path.begin(), path.end(), out.values.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  return out;
}

ForecastEnsemble rolling_ensemble(const SariSpec& spec, const SariParams& params, std::span<const double> series,
                                  std::size_t m, std::size_t earliest) {
  spec.validate();
  params.check(spec);
  const OriginRange range = valid_origins(spec, series.size(), m, earliest);
  if (range.count == 0) throw std::invalid_argument("rolling forecast: no valid origin");
  const auto diffed = difference(series, spec.d, spec.D, spec.s).values;
  return rolling_forecast_ensemble<double>(spec, params.phi, params.Phi, series, diffed, m, range);
}

// ---- stationarity ------------------------------------------------------------

StationarityReport stationarity_check(const SariSpec& spec, const SariParams& params, double tol) {
  std::vector<double> c = expanded_coefficients(spec, params);
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  StationarityReport r;
  r.min_modulus = std::numeric_limits<double>::infinity();
  if (c.empty()) return r;

  // 1 - sum_a c_a z^a, made monic by dividing through by -c_n.
  const auto n = static_cast<Eigen::Index>(c.size());
  const double lead = -c.back();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  companion(0, n - 1) = -1.0 / lead;
  for (Eigen::Index i = 1; i < n; ++i) companion(i, n - 1) = c[i - 1] / lead;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw std::runtime_error("stationarity check: eigenvalue solver failed");
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    r.roots.push_back(z);
    r.min_modulus = std::min(r.min_modulus, std::abs(z));
  }
  r.stationary = r.min_modulus > 1.0 + tol;
  return r;
}

// ---- conditional least squares --------------------------------------------------

namespace {

// Sufficient statistics of the one-step residuals over the spec's lag set:
// SSE(c) = S - 2 sum_a c_a g_a + sum_ab c_a c_b G_ab.
struct LagMoments {
  std::vector<std::size_t> lags;
  double S = 0.0;
  std::vector<double> g;
  std::vector<double> G;  // row-major |lags| x |lags|
  std::size_t count = 0;
};

LagMoments lag_moments(const SariSpec& spec, std::span<const double> w) {
  LagMoments lm;
  const std::vector<double> ones_phi(spec.p, 1.0), ones_Phi(spec.P, 1.0);
  for (const auto& t : expand_lags<double>(spec, ones_phi, ones_Phi)) lm.lags.push_back(t.lag);
  const std::size_t L = spec.max_lag();
  const std::size_t q = lm.lags.size();
  lm.g.assign(q, 0.0);
  lm.G.assign(q * q, 0.0);
  for (std::size_t t = L; t < w.size(); ++t) {
    lm.S += w[t] * w[t];
    for (std::size_t a = 0; a < q; ++a) {
      const double xa = w[t - lm.lags[a]];
      lm.g[a] += w[t] * xa;
      for (std::size_t b = 0; b < q; ++b) lm.G[a * q + b] += xa * w[t - lm.lags[b]];
    }
    ++lm.count;
  }
  return lm;
}

double residual_sse(const SariSpec& spec, const SariParams& params, std::span<const double> w) {
  const auto lags = expand_lags<double>(spec, params.phi, params.Phi);
  double sse = 0.0;
  for (std::size_t t = spec.max_lag(); t < w.size(); ++t) {
    double r = w[t];
    for (const auto& term : lags) r -= term.coef * w[t - term.lag];
    sse += r * r;
  }
  return sse;
}

}  // namespace

CssFit css_fit(const SariSpec& spec, std::span<const double> train, const CssSettings& settings) {
  spec.validate();
  if (train.size() < spec.required_history() + 1) {
    throw std::invalid_argument("css fit: training series shorter than required history + 1");
  }
  const std::vector<double> w = difference(train, spec.d, spec.D, spec.s).values;
  const LagMoments lm = lag_moments(spec, w);
  const std::size_t q = lm.lags.size();
  const double n_eff = static_cast<double>(lm.count);

  ad::Tape tape;
  auto evaluate = [&](const std::vector<double>& theta, std::vector<double>& grad) {
    tape.clear();
    std::vector<ad::Var> leaves;
    leaves.reserve(theta.size());
    for (double v : theta) leaves.push_back(tape.variable(v));
    const std::span<const ad::Var> phi(leaves.data(), static_cast<std::size_t>(spec.p));
    const std::span<const ad::Var> Phi(leaves.data() + spec.p, static_cast<std::size_t>(spec.P));
    const auto terms = expand_lags<ad::Var>(spec, phi, Phi);
    ad::Var quad = 0.0;
    ad::Var cross = 0.0;
    for (std::size_t a = 0; a < q; ++a) {
      cross += terms[a].coef * lm.g[a];
      ad::Var row = 0.0;
      for (std::size_t b = 0; b < q; ++b) row += terms[b].coef * lm.G[a * q + b];
      quad += terms[a].coef * row;
    }
    const ad::Var loss = (ad::Var(lm.S) - 2.0 * cross + quad) / n_eff;
    grad = tape.backward(loss, leaves);
    return loss.value();
  };

  CssFit fit;
  fit.residual_count = lm.count;
  std::vector<double> theta(spec.parameter_count(), 0.0);
  if (!theta.empty()) {
    OptimizerState state(theta.size(), settings.lr, settings.hyper);
    std::vector<double> grad;
    double loss = evaluate(theta, grad);
    for (fit.epochs = 0; fit.epochs < settings.max_epochs; ++fit.epochs) {
      OptimizerState trial_state = state;
      std::vector<double> trial = theta;
      if (!adamw_step(trial_state, trial, grad)) break;
      std::vector<double> trial_grad;
      const double trial_loss = evaluate(trial, trial_grad);
      if (std::isfinite(trial_loss) && trial_loss <= loss) {
        const double gain = loss - trial_loss;
        state = std::move(trial_state);
        theta = std::move(trial);
        grad = std::move(trial_grad);
        loss = trial_loss;
        fit.loss_trace.push_back(loss);
        if (gain <= settings.tolerance * std::max(loss, std::numeric_limits<double>::min())) {
          fit.converged = true;
          ++fit.epochs;
          break;
        }
      } else {
        state.lr *= 0.5;
        fit.loss_trace.push_back(loss);
        if (state.lr < settings.min_lr) {
          fit.converged = true;
          ++fit.epochs;
          break;
        }
      }
    }
  } else {
    fit.converged = true;
  }
  fit.params = SariParams::from_flat(spec, theta);
  fit.sse = residual_sse(spec, fit.params, w);
  fit.params.sigma = fit.residual_count > 0 ? std::sqrt(fit.sse / n_eff) : 0.0;
  return fit;
}

std::vector<SariSpec> OrderGrid::candidates() const {
  std::vector<SariSpec> out;
  for (int p = 0; p <= p_max; ++p) {
    for (int d = 0; d <= d_max; ++d) {
      out.push_back({p, d, 0, 0, 1});
      for (int s : periods) {
        if (s < 2) continue;
        for (int P = 0; P <= P_max; ++P) {
          for (int D = 0; D <= D_max; ++D) {
            if (P == 0 && D == 0) continue;
            out.push_back({p, d, P, D, s});
          }
        }
      }
    }
  }
  return out;
}

OrderSelection select_orders(std::span<const double> train, const OrderGrid& grid, const CssSettings& settings) {
  const auto candidates = grid.candidates();
  return select_orders(train, candidates, settings);
}

OrderSelection select_orders(std::span<const double> train, std::span<const SariSpec> candidates,
                             const CssSettings& settings) {
  if (candidates.empty()) throw std::invalid_argument("select orders: empty grid");
  OrderSelection sel;
  const AicEntry* best = nullptr;
  for (const auto& spec : candidates) {
    spec.validate();
    if (train.size() < spec.required_history() + 2) continue;
    const CssFit fit = css_fit(spec, train, settings);
    const double n = static_cast<double>(fit.residual_count);
    const double sse = std::max(fit.sse, n * 1e-300);
    sel.table.push_back({spec, n * std::log(sse / n) + 2.0 * static_cast<double>(spec.p + spec.P + 1), fit.sse,
                         fit.residual_count});
  }
  if (sel.table.empty()) throw std::invalid_argument("select orders: no candidate fits the training length");
  for (const auto& e : sel.table) {
    if (!best) {
      best = &e;
      continue;
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(best->aic));
    if (e.aic < best->aic - tol) {
      best = &e;
    } else if (std::abs(e.aic - best->aic) <= tol) {
      const int k_e = e.spec.p + e.spec.P, k_b = best->spec.p + best->spec.P;
      const int d_e = e.spec.d + e.spec.D, d_b = best->spec.d + best->spec.D;
      if (k_e < k_b || (k_e == k_b && d_e < d_b)) best = &e;
    }
  }
  sel.best = best->spec;
  return sel;
}

}  // namespace acscore
