#include "acscore/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace acscore {

bool adamw_step(OptimizerState& s, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size() || params.size() != s.first_moment.size()) {
    throw std::invalid_argument("adamw: parameter, gradient and state sizes differ");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) return false;
  }
  ++s.step;
  const auto& h = s.hyper;
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(s.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.first_moment[i] = h.beta1 * s.first_moment[i] + (1.0 - h.beta1) * grads[i];
    s.second_moment[i] = h.beta2 * s.second_moment[i] + (1.0 - h.beta2) * grads[i] * grads[i];
    const double m_hat = s.first_moment[i] / c1;
    const double v_hat = s.second_moment[i] / c2;
    params[i] = params[i] - s.lr * m_hat / (std::sqrt(v_hat) + h.eps) - s.lr * h.weight_decay * params[i];
  }
  return true;
}

PlateauScheduler::PlateauScheduler(double factor, int patience, double threshold, double min_lr)
    : factor_(factor), patience_(patience), threshold_(threshold), min_lr_(min_lr) {
  if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("scheduler: factor must lie in (0, 1)");
  if (patience < 1) throw std::invalid_argument("scheduler: patience must be >= 1");
}

double PlateauScheduler::step(double loss, double lr) {
  last_improved_ = loss < best_ - threshold_ * std::abs(best_) || (std::isinf(best_) && std::isfinite(loss));
  if (last_improved_) {
    best_ = loss;
    bad_epochs_ = 0;
    return lr;
  }
  if (++bad_epochs_ >= patience_) {
    bad_epochs_ = 0;
    return lr <= min_lr_ ? lr : std::max(lr * factor_, min_lr_);
  }
  return lr;
}

}  // namespace acscore
