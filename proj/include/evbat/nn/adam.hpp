#pragma once

#include "evbat/nn/tensor.hpp"

#include <cstddef>

namespace evbat::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Cosine annealing period in steps; 0 keeps the learning rate constant.
  /// The effective rate is lr * 0.5 * (1 + cos(pi * step / period)) and
  /// reaches 0 at step == period.
  std::size_t cosine_period_steps = 0;
  /// Global-norm gradient clip applied before the update; 0 disables.
  double clip_global_norm = 0.0;
};

/// Adam with bias correction, optional cosine-annealed learning rate and
/// optional global-norm clipping. Throws if an update produces non-finite
/// parameters.
class AdamOptimizer {
 public:
  AdamOptimizer(TensorRefs params, AdamConfig config);

  void step();
  void zero_grads();

  /// Learning rate the next step() call will use.
  double effective_lr() const;
  std::size_t steps_taken() const { return step_count_; }

 private:
  TensorRefs params_;
  AdamConfig config_;
  std::vector<Eigen::MatrixXd> m_;
  std::vector<Eigen::MatrixXd> v_;
  std::size_t step_count_ = 0;
};

}  // namespace evbat::nn
