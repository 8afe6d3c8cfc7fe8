#include "evbat/nn/ops.hpp"

#include <stdexcept>

namespace evbat::nn {

namespace {

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

double mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  check_same_shape(pred, target, "mse");
  if (pred.size() == 0) {
    throw std::invalid_argument("mse: empty input");
  }
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  check_same_shape(pred, target, "mse_grad");
  return 2.0 / static_cast<double>(pred.size()) * (pred - target);
}

double gaussian_kl(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar) {
  check_same_shape(mu, logvar, "gaussian_kl");
  return -0.5 * (1.0 + logvar.array() - mu.array().square() - logvar.array().exp())
                    .sum();
}

void gaussian_kl_backward(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar,
                          double scale, Eigen::MatrixXd& dmu_accum,
                          Eigen::MatrixXd& dlogvar_accum) {
  dmu_accum.array() += scale * mu.array();
  dlogvar_accum.array() += scale * 0.5 * (logvar.array().exp() - 1.0);
}

Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu,
                               const Eigen::MatrixXd& logvar,
                               const Eigen::MatrixXd& noise) {
  check_same_shape(mu, logvar, "reparameterize");
  check_same_shape(mu, noise, "reparameterize");
  return (mu.array() + (0.5 * logvar.array()).exp() * noise.array()).matrix();
}

void reparameterize_backward(const Eigen::MatrixXd& logvar,
                             const Eigen::MatrixXd& noise,
                             const Eigen::MatrixXd& dz,
                             Eigen::MatrixXd& dmu_accum,
                             Eigen::MatrixXd& dlogvar_accum) {
  dmu_accum += dz;
  dlogvar_accum.array() +=
      dz.array() * 0.5 * (0.5 * logvar.array()).exp() * noise.array();
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      out(i, j) = dist(rng);
    }
  }
  return out;
}

}  // namespace evbat::nn
