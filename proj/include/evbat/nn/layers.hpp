#pragma once

#include "evbat/nn/tensor.hpp"

#include <random>
#include <string>

namespace evbat::nn {

enum class Activation { kIdentity, kSigmoid, kRelu, kTanh };

/// Elementwise activation; all four derivatives are functions of the output.
Eigen::MatrixXd activate(const Eigen::MatrixXd& x, Activation act);
Eigen::MatrixXd activation_grad_from_output(const Eigen::MatrixXd& y, Activation act);

/// Fully connected layer, y = act(W x + b), on (features x batch) matrices.
class Dense {
 public:
  Dense(const std::string& name, int in_size, int out_size, Activation act,
        std::mt19937_64& rng);

  const Eigen::MatrixXd& forward(const Eigen::MatrixXd& x);
  /// Accumulates parameter gradients, returns dL/dx.
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy);

  TensorRefs params() { return {&w, &b}; }

  Tensor w, b;
  Activation activation;

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd y_;
};

/// Batch normalization over the batch dimension with running statistics for
/// inference. Population (1/B) batch variance.
class BatchNorm {
 public:
  BatchNorm(const std::string& name, int features, double momentum = 0.1,
            double eps = 1e-5);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, bool training);
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy);

  TensorRefs params() { return {&gamma, &beta}; }
  double eps() const { return eps_; }

  Tensor gamma, beta;
  Eigen::ArrayXd running_mean, running_var;

 private:
  double momentum_;
  double eps_;
  bool trained_forward_ = false;
  Eigen::MatrixXd xhat_;
  Eigen::ArrayXd inv_std_;
};

/// Cache-free inference paths; safe for concurrent use of a frozen model.
Eigen::MatrixXd dense_infer(const Dense& layer, const Eigen::MatrixXd& x);
Eigen::MatrixXd batchnorm_infer(const BatchNorm& layer, const Eigen::MatrixXd& x);

/// Inverted dropout; identity at inference.
class Dropout {
 public:
  explicit Dropout(double rate) : rate_(rate) {}

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, bool training,
                          std::mt19937_64& rng);
  Eigen::MatrixXd backward(const Eigen::MatrixXd& dy) const;

  double rate() const { return rate_; }

 private:
  double rate_;
  bool masked_ = false;
  Eigen::ArrayXXd mask_;
};

}  // namespace evbat::nn
