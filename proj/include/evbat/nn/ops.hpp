#pragma once

#include <Eigen/Dense>

#include <random>

namespace evbat::nn {

/// Mean squared error over all entries.
double mse(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// d(mse)/d(pred) = 2 (pred - target) / count.
Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

/// KL divergence of N(mu, exp(logvar)) from the standard normal prior,
/// summed over all entries: -0.5 sum(1 + logvar - mu^2 - exp(logvar)).
double gaussian_kl(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar);

/// Accumulates scale * d(gaussian_kl)/d(mu, logvar) into the buffers.
void gaussian_kl_backward(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& logvar,
                          double scale, Eigen::MatrixXd& dmu_accum,
                          Eigen::MatrixXd& dlogvar_accum);

/// z = mu + exp(0.5 logvar) .* noise. Noise is supplied explicitly so the
/// operation is deterministic; gradients flow to mu and logvar only.
Eigen::MatrixXd reparameterize(const Eigen::MatrixXd& mu,
                               const Eigen::MatrixXd& logvar,
                               const Eigen::MatrixXd& noise);

void reparameterize_backward(const Eigen::MatrixXd& logvar,
                             const Eigen::MatrixXd& noise,
                             const Eigen::MatrixXd& dz,
                             Eigen::MatrixXd& dmu_accum,
                             Eigen::MatrixXd& dlogvar_accum);

/// Standard-normal matrix draw.
Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng);

}  // namespace evbat::nn
