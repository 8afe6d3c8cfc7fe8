#include "evbat/detect/autoencoder.hpp"

#include "evbat/batching.hpp"
#include "evbat/nn/adam.hpp"
#include "evbat/nn/ops.hpp"
#include "evbat/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace evbat::detect {

void AeConfig::validate() const {
  if (modeled_channels.empty()) {
    throw std::invalid_argument("AeConfig: modeled channels must be non-empty");
  }
  for (const int c : modeled_channels) {
    if (c < 0 || c >= kChannelCount || c == kTimestamp) {
      throw std::invalid_argument("AeConfig: invalid modeled channel " +
                                  std::to_string(c));
    }
  }
  if (hidden_dims.empty() || epochs < 1 || batch_size < 1) {
    throw std::invalid_argument("AeConfig: invalid sizes");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("AeConfig: dropout rate outside [0, 1)");
  }
}

AeModel::AeModel(AeConfig config) : config_(std::move(config)) {
  config_.validate();
}

nn::TensorRefs AeModel::params() {
  nn::TensorRefs refs;
  for (auto& layer : layers_) {
    for (nn::Tensor* t : layer->params()) refs.push_back(t);
  }
  for (auto& norm : norms_) {
    for (nn::Tensor* t : norm->params()) refs.push_back(t);
  }
  return refs;
}

void AeModel::train(std::span<const Vehicle* const> normal_vehicles,
                    std::uint64_t seed) {
  for (const Vehicle* v : normal_vehicles) {
    if (v->health_label != 0) {
      throw std::invalid_argument(
          "ae_train: anomalous vehicle in training input (protocol violation): " +
          v->vehicle_id);
    }
  }
  const std::vector<const ChargingSnippet*> snippets =
      collect_snippets(normal_vehicles);
  if (snippets.empty()) {
    throw std::invalid_argument("ae_train: no training snippets");
  }
  stats_ = fit_normalizer(std::span<const ChargingSnippet* const>(snippets));

  const int flat = kSnippetLength * static_cast<int>(config_.modeled_channels.size());
  std::mt19937_64 init_rng = make_engine(seed, "init");
  layers_.clear();
  norms_.clear();
  dropouts_.clear();
  int in_dim = flat;
  for (std::size_t i = 0; i < config_.hidden_dims.size(); ++i) {
    const int out_dim = config_.hidden_dims[i];
    layers_.push_back(std::make_unique<nn::Dense>(
        "ae.layer" + std::to_string(i), in_dim, out_dim, nn::Activation::kSigmoid,
        init_rng));
    norms_.push_back(
        std::make_unique<nn::BatchNorm>("ae.bn" + std::to_string(i), out_dim));
    dropouts_.push_back(std::make_unique<nn::Dropout>(config_.dropout_rate));
    in_dim = out_dim;
  }
  layers_.push_back(std::make_unique<nn::Dense>("ae.out", in_dim, flat,
                                                nn::Activation::kIdentity, init_rng));

  const std::size_t n = snippets.size();
  const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
  nn::AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  nn::AdamOptimizer optimizer(params(), adam);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  epoch_losses_.clear();

  std::vector<const ChargingSnippet*> batch;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng = make_engine(seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 dropout_rng = make_engine(seed, "dropout", epoch);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(snippets[order[i]]);
      }
      const Eigen::MatrixXd x =
          flattened_batch(std::span<const ChargingSnippet* const>(batch),
                          config_.modeled_channels, stats_);

      optimizer.zero_grads();
      Eigen::MatrixXd h = x;
      for (std::size_t i = 0; i < norms_.size(); ++i) {
        h = layers_[i]->forward(h);
        h = norms_[i]->forward(h, true);
        h = dropouts_[i]->forward(h, true, dropout_rng);
      }
      const Eigen::MatrixXd y = layers_.back()->forward(h);
      loss_sum += nn::mse(y, x) * static_cast<double>(batch.size());

      Eigen::MatrixXd grad = layers_.back()->backward(nn::mse_grad(y, x));
      for (std::size_t i = norms_.size(); i-- > 0;) {
        grad = dropouts_[i]->backward(grad);
        grad = norms_[i]->backward(grad);
        grad = layers_[i]->backward(grad);
      }
      optimizer.step();
    }
    epoch_losses_.push_back(loss_sum / static_cast<double>(n));
  }
  trained_ = true;
}

Eigen::MatrixXd AeModel::infer(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    h = nn::dense_infer(*layers_[i], h);
    h = nn::batchnorm_infer(*norms_[i], h);
  }
  return nn::dense_infer(*layers_.back(), h);
}

std::vector<double> AeModel::score_batch(
    std::span<const ChargingSnippet* const> snippets) const {
  if (!trained_) {
    throw std::logic_error("ae_score: model is not trained");
  }
  const Eigen::MatrixXd x =
      flattened_batch(snippets, config_.modeled_channels, stats_);
  const Eigen::MatrixXd y = infer(x);
  std::vector<double> scores(snippets.size());
  const double denom = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    scores[static_cast<std::size_t>(j)] = (y.col(j) - x.col(j)).squaredNorm() / denom;
  }
  return scores;
}

std::vector<SnippetScore> AeModel::score_vehicle(const Vehicle& vehicle) const {
  std::vector<SnippetScore> out;
  out.reserve(vehicle.snippets.size());
  std::vector<const ChargingSnippet*> batch;
  const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
  for (std::size_t start = 0; start < vehicle.snippets.size(); start += batch_size) {
    const std::size_t end = std::min(vehicle.snippets.size(), start + batch_size);
    batch.clear();
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(&vehicle.snippets[i]);
    }
    const std::vector<double> scores =
        score_batch(std::span<const ChargingSnippet* const>(batch));
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.push_back(SnippetScore{batch[i]->vehicle_id(), batch[i]->snippet_index(),
                                 scores[i]});
    }
  }
  return out;
}

double AeModel::score_snippet(const ChargingSnippet& snippet) const {
  const ChargingSnippet* ptr = &snippet;
  return score_batch(std::span<const ChargingSnippet* const>(&ptr, 1)).front();
}

double AeModel::score_series(const SeriesMatrix& series) const {
  const ChargingSnippet snippet(kUnchecked, "series", 0, 0.0,
                                std::make_shared<SeriesMatrix>(series));
  return score_snippet(snippet);
}

}  // namespace evbat::detect
