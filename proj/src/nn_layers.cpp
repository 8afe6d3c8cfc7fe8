#include "evbat/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace evbat::nn {

void init_glorot(Tensor& tensor, std::mt19937_64& rng) {
  const double fan_out = static_cast<double>(tensor.value.rows());
  const double fan_in = static_cast<double>(tensor.value.cols());
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index j = 0; j < tensor.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < tensor.value.rows(); ++i) {
      tensor.value(i, j) = dist(rng);
    }
  }
}

void zero_grads(const TensorRefs& params) {
  for (Tensor* t : params) {
    t->zero_grad();
  }
}

Eigen::MatrixXd activate(const Eigen::MatrixXd& x, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return x;
    case Activation::kSigmoid:
      return (1.0 / (1.0 + (-x.array()).exp())).matrix();
    case Activation::kRelu:
      return x.cwiseMax(0.0);
    case Activation::kTanh:
      return x.array().tanh().matrix();
  }
  throw std::logic_error("unknown activation");
}

Eigen::MatrixXd activation_grad_from_output(const Eigen::MatrixXd& y, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(y.rows(), y.cols());
    case Activation::kSigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
    case Activation::kRelu:
      return (y.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - y.array().square()).matrix();
  }
  throw std::logic_error("unknown activation");
}

Dense::Dense(const std::string& name, int in_size, int out_size, Activation act,
             std::mt19937_64& rng)
    : w(name + ".w", out_size, in_size),
      b(name + ".b", out_size, 1),
      activation(act) {
  init_glorot(w, rng);
}

const Eigen::MatrixXd& Dense::forward(const Eigen::MatrixXd& x) {
  if (x.rows() != w.value.cols()) {
    throw std::invalid_argument("Dense " + w.name + ": shape mismatch, got " +
                                std::to_string(x.rows()) + " features, expected " +
                                std::to_string(w.value.cols()));
  }
  x_ = x;
  y_ = activate((w.value * x).colwise() + b.value.col(0), activation);
  return y_;
}

Eigen::MatrixXd Dense::backward(const Eigen::MatrixXd& dy) {
  if (dy.rows() != y_.rows() || dy.cols() != y_.cols()) {
    throw std::invalid_argument("Dense " + w.name + ": backward shape mismatch");
  }
  const Eigen::MatrixXd da =
      dy.cwiseProduct(activation_grad_from_output(y_, activation));
  w.grad.noalias() += da * x_.transpose();
  b.grad.col(0) += da.rowwise().sum();
  return w.value.transpose() * da;
}

BatchNorm::BatchNorm(const std::string& name, int features, double momentum,
                     double eps)
    : gamma(name + ".gamma", features, 1),
      beta(name + ".beta", features, 1),
      running_mean(Eigen::ArrayXd::Zero(features)),
      running_var(Eigen::ArrayXd::Ones(features)),
      momentum_(momentum),
      eps_(eps) {
  gamma.value.setOnes();
}

Eigen::MatrixXd BatchNorm::forward(const Eigen::MatrixXd& x, bool training) {
  if (x.rows() != gamma.value.rows()) {
    throw std::invalid_argument("BatchNorm " + gamma.name + ": shape mismatch");
  }
  if (!training) {
    trained_forward_ = false;
    Eigen::ArrayXXd xhat = (x.array().colwise() - running_mean).colwise() /
                           (running_var + eps_).sqrt();
    return ((xhat.colwise() * gamma.value.col(0).array()).colwise() +
            beta.value.col(0).array())
        .matrix();
  }
  const double batch = static_cast<double>(x.cols());
  const Eigen::ArrayXd mean = x.rowwise().mean().array();
  const Eigen::ArrayXd var =
      (x.array().colwise() - mean).square().rowwise().sum() / batch;
  inv_std_ = (var + eps_).rsqrt();
  xhat_ = ((x.array().colwise() - mean).colwise() * inv_std_).matrix();
  running_mean = (1.0 - momentum_) * running_mean + momentum_ * mean;
  running_var = (1.0 - momentum_) * running_var + momentum_ * var;
  trained_forward_ = true;
  return ((xhat_.array().colwise() * gamma.value.col(0).array()).colwise() +
          beta.value.col(0).array())
      .matrix();
}

Eigen::MatrixXd BatchNorm::backward(const Eigen::MatrixXd& dy) {
  if (!trained_forward_) {
    throw std::logic_error("BatchNorm backward without a training forward");
  }
  const double batch = static_cast<double>(dy.cols());
  gamma.grad.col(0) += dy.cwiseProduct(xhat_).rowwise().sum();
  beta.grad.col(0) += dy.rowwise().sum();
  const Eigen::ArrayXXd dxhat = dy.array().colwise() * gamma.value.col(0).array();
  const Eigen::ArrayXd sum_dxhat = dxhat.rowwise().sum();
  const Eigen::ArrayXd sum_dxhat_xhat = (dxhat * xhat_.array()).rowwise().sum();
  Eigen::ArrayXXd dx = dxhat * batch;
  dx.colwise() -= sum_dxhat;
  dx -= xhat_.array().colwise() * sum_dxhat_xhat;
  dx.colwise() *= inv_std_ / batch;
  return dx.matrix();
}

Eigen::MatrixXd dense_infer(const Dense& layer, const Eigen::MatrixXd& x) {
  return activate((layer.w.value * x).colwise() + layer.b.value.col(0),
                  layer.activation);
}

Eigen::MatrixXd batchnorm_infer(const BatchNorm& layer, const Eigen::MatrixXd& x) {
  const Eigen::ArrayXXd xhat = (x.array().colwise() - layer.running_mean)
                                   .colwise() /
                               (layer.running_var + layer.eps()).sqrt();
  return ((xhat.colwise() * layer.gamma.value.col(0).array()).colwise() +
          layer.beta.value.col(0).array())
      .matrix();
}

Eigen::MatrixXd Dropout::forward(const Eigen::MatrixXd& x, bool training,
                                 std::mt19937_64& rng) {
  if (!training || rate_ <= 0.0) {
    masked_ = false;
    return x;
  }
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  mask_.resize(x.rows(), x.cols());
  const double keep = 1.0 - rate_;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      mask_(i, j) = dist(rng) < rate_ ? 0.0 : 1.0 / keep;
    }
  }
  masked_ = true;
  return (x.array() * mask_).matrix();
}

Eigen::MatrixXd Dropout::backward(const Eigen::MatrixXd& dy) const {
  if (!masked_) {
    return dy;
  }
  return (dy.array() * mask_).matrix();
}

}  // namespace evbat::nn
