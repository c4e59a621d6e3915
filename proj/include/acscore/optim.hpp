#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace acscore {

struct AdamWHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;
};

struct OptimizerState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step = 0;
  double lr = 0.05;
  AdamWHyper hyper;

  OptimizerState() = default;
  OptimizerState(std::size_t parameters, double learning_rate, AdamWHyper h = {})
      : first_moment(parameters, 0.0), second_moment(parameters, 0.0), lr(learning_rate), hyper(h) {}
};

/// One decoupled-weight-decay Adam update:
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * p
/// Returns false and leaves everything untouched if any gradient is not finite.
bool adamw_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

/// Reduce-on-plateau learning-rate schedule. An epoch improves when its loss
/// beats the best seen loss by more than `threshold` relative; after
/// `patience` consecutive non-improving epochs the rate is multiplied by
/// `factor` (not below `min_lr`) and the counter resets.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor = 0.5, int patience = 10, double threshold = 1e-4, double min_lr = 1e-5);

  /// Feeds one epoch loss and returns the learning rate to use next.
  double step(double loss, double lr);

  double best() const { return best_; }
  int bad_epochs() const { return bad_epochs_; }
  bool last_improved() const { return last_improved_; }

 private:
  double factor_;
  int patience_;
  double threshold_;
  double min_lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
  bool last_improved_ = false;
};

}  // namespace acscore
