#include "acscore/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace acscore {

std::string_view to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::uniform: return "uniform";
    case WeightKind::linear: return "linear";
    case WeightKind::exponential: return "exponential";
    case WeightKind::hyperbolic: return "hyperbolic";
    case WeightKind::inverse_variance: return "inverse_variance";
    case WeightKind::piecewise: return "piecewise";
  }
  return "unknown";
}

WeightKind parse_weight_kind(std::string_view name) {
  for (auto k : {WeightKind::uniform, WeightKind::linear, WeightKind::exponential, WeightKind::hyperbolic,
                 WeightKind::inverse_variance, WeightKind::piecewise}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown weight kind: " + std::string(name));
}

WeightSchedule WeightSchedule::from_raw(WeightKind kind, std::vector<double> raw) {
  if (raw.empty()) throw std::invalid_argument("weight schedule: horizon must be positive");
  for (double w : raw) {
    if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("weight schedule: raw weights must be finite and >= 0");
  }
  const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total <= 0.0) throw std::invalid_argument("weight schedule: all raw weights are zero");
  for (double& w : raw) w /= total;
  WeightSchedule s;
  s.kind_ = kind;
  s.weights_ = std::move(raw);
  return s;
}

std::vector<double> WeightSchedule::overlap_tail() const {
  if (weights_.size() < 2) return {};
  std::vector<double> tail(weights_.begin() + 1, weights_.end());
  const double total = std::accumulate(tail.begin(), tail.end(), 0.0);
  if (total > 0.0) {
    for (double& w : tail) w /= total;
  }
  return tail;
}

WeightSchedule build_weight_schedule(WeightKind kind, int horizon, const WeightParams& params) {
  if (horizon < 1) throw std::invalid_argument("weight schedule: horizon must be positive");
  const auto m = static_cast<std::size_t>(horizon);
  std::vector<double> raw(m);
  for (std::size_t idx = 0; idx < m; ++idx) {
    const double h = static_cast<double>(idx + 1);
    switch (kind) {
      case WeightKind::uniform:
        raw[idx] = 1.0;
        break;
      case WeightKind::linear:
        raw[idx] = std::max(1.0 - h / static_cast<double>(m), params.floor);
        break;
      case WeightKind::exponential:
        if (!(params.alpha > 0.0)) throw std::invalid_argument("weight schedule: exponential alpha must be > 0");
        raw[idx] = std::exp(-params.alpha * h);
        break;
      case WeightKind::hyperbolic:
        if (!(params.beta > 0.0)) throw std::invalid_argument("weight schedule: hyperbolic beta must be > 0");
        raw[idx] = 1.0 / (1.0 + params.beta * h);
        break;
      case WeightKind::inverse_variance:
        if (params.variances.size() != m) {
          throw std::invalid_argument("weight schedule: need one variance per horizon");
        }
        if (!(params.variances[idx] > 0.0)) throw std::invalid_argument("weight schedule: variances must be > 0");
        raw[idx] = 1.0 / params.variances[idx];
        break;
      case WeightKind::piecewise: {
        if (params.levels.size() != params.breaks.size() + 1) {
          throw std::invalid_argument("weight schedule: piecewise needs breaks.size() + 1 levels");
        }
        if (!std::is_sorted(params.breaks.begin(), params.breaks.end())) {
          throw std::invalid_argument("weight schedule: piecewise breaks must be ascending");
        }
        const auto segment = std::upper_bound(params.breaks.begin(), params.breaks.end(), static_cast<int>(idx + 1)) -
                             params.breaks.begin();
        raw[idx] = params.levels[static_cast<std::size_t>(segment)];
        break;
      }
    }
  }
  return WeightSchedule::from_raw(kind, std::move(raw));
}

}  // namespace acscore
