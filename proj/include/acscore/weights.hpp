#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acscore {

enum class WeightKind { uniform, linear, exponential, hyperbolic, inverse_variance, piecewise };

std::string_view to_string(WeightKind kind);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
WeightKind parse_weight_kind(std::string_view name);

/// Shape parameters for the per-horizon weight forms. Only the fields used by
/// the chosen kind are read.
struct WeightParams {
  double alpha = 5.0 / 24.0;      // exponential: e^{-alpha h}
  double beta = 1.0;              // hyperbolic: 1 / (1 + beta h)
  double floor = 0.0;             // linear: max(1 - h/m, floor)
  std::vector<double> variances;  // inverse_variance: one per horizon, all > 0
  std::vector<int> breaks;        // piecewise: ascending horizons where a new level starts
  std::vector<double> levels;     // piecewise: breaks.size() + 1 nonnegative levels
};

/// Normalized nonnegative weights w_1..w_m.
class WeightSchedule {
 public:
  WeightSchedule() = default;

  /// Normalizes `raw` to sum to one. Throws on negative, non-finite or
  /// all-zero input.
  static WeightSchedule from_raw(WeightKind kind, std::vector<double> raw);

  WeightKind kind() const { return kind_; }
  std::size_t horizon() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t step) const { return weights_[step]; }

  /// Weights for horizons 2..m renormalized to sum to one. When the tail is
  /// all zero (e.g. the linear form at m = 2) the zero tail is returned as is.
  std::vector<double> overlap_tail() const;

 private:
  WeightKind kind_ = WeightKind::uniform;
  std::vector<double> weights_;
};

WeightSchedule build_weight_schedule(WeightKind kind, int horizon, const WeightParams& params = {});

/// A weight form without a bound horizon; the trainer and harness carry these
/// and instantiate them once the horizon is known.
struct WeightSpec {
  WeightKind kind = WeightKind::linear;
  WeightParams params;

  WeightSchedule build(int horizon) const { return build_weight_schedule(kind, horizon, params); }
  /// Short label such as "exponential" used in report keys.
  std::string label() const { return std::string(to_string(kind)); }
};

}  // namespace acscore
