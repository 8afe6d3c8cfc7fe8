#include "evbat/nn/adam.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evbat::nn {

AdamOptimizer::AdamOptimizer(TensorRefs params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor* t : params_) {
    m_.push_back(Eigen::MatrixXd::Zero(t->value.rows(), t->value.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(t->value.rows(), t->value.cols()));
  }
}

double AdamOptimizer::effective_lr() const {
  if (config_.cosine_period_steps == 0) {
    return config_.learning_rate;
  }
  const double progress =
      static_cast<double>(std::min(step_count_, config_.cosine_period_steps)) /
      static_cast<double>(config_.cosine_period_steps);
  return config_.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void AdamOptimizer::step() {
  if (config_.clip_global_norm > 0.0) {
    double sq_sum = 0.0;
    for (const Tensor* t : params_) {
      sq_sum += t->grad.squaredNorm();
    }
    const double norm = std::sqrt(sq_sum);
    if (norm > config_.clip_global_norm) {
      const double scale = config_.clip_global_norm / norm;
      for (Tensor* t : params_) {
        t->grad *= scale;
      }
    }
  }

  const double lr = effective_lr();
  const double t_step = static_cast<double>(step_count_ + 1);
  const double bias1 = 1.0 - std::pow(config_.beta1, t_step);
  const double bias2 = 1.0 - std::pow(config_.beta2, t_step);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = *params_[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] +
            (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad).eval();
    p.value.array() -= lr * (m_[i].array() / bias1) /
                       ((v_[i].array() / bias2).sqrt() + config_.epsilon);
    if (!p.value.allFinite()) {
      throw std::runtime_error("AdamOptimizer: non-finite parameter " + p.name);
    }
  }
  ++step_count_;
}

void AdamOptimizer::zero_grads() {
  for (Tensor* t : params_) {
    t->zero_grad();
  }
}

}  // namespace evbat::nn
