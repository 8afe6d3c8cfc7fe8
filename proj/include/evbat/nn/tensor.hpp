#pragma once

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace evbat::nn {

/// A named parameter with its paired gradient buffer. Gradients accumulate
/// across backward calls until zeroed.
struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  Tensor(std::string tensor_name, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(tensor_name)),
        value(Eigen::MatrixXd::Zero(rows, cols)),
        grad(Eigen::MatrixXd::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

using TensorRefs = std::vector<Tensor*>;

/// Glorot/uniform init with limit sqrt(6 / (fan_in + fan_out)); fan counts
/// follow the (out x in) weight convention.
void init_glorot(Tensor& tensor, std::mt19937_64& rng);

void zero_grads(const TensorRefs& params);

}  // namespace evbat::nn
