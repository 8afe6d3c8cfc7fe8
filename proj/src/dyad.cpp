#include "evbat/detect/dyad.hpp"

#include "evbat/batching.hpp"
#include "evbat/nn/adam.hpp"
#include "evbat/nn/ops.hpp"
#include "evbat/rng.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace evbat::detect {

void DyadConfig::validate() const {
  if (response_channels.empty()) {
    throw std::invalid_argument("DyadConfig: response channels must be non-empty");
  }
  std::set<int> inputs(input_channels.begin(), input_channels.end());
  for (const int c : response_channels) {
    if (inputs.count(c) != 0) {
      throw std::invalid_argument("DyadConfig: input and response channels overlap");
    }
  }
  for (const int c : modeled_channels()) {
    if (c < 0 || c >= kChannelCount || c == kTimestamp) {
      throw std::invalid_argument("DyadConfig: invalid modeled channel " +
                                  std::to_string(c));
    }
  }
  if (hidden_size < 1 || latent_size < 0 || epochs < 1 || batch_size < 1) {
    throw std::invalid_argument("DyadConfig: invalid sizes");
  }
  if (kl_weight < 0.0) {
    throw std::invalid_argument("DyadConfig: kl_weight must be >= 0");
  }
}

std::vector<int> DyadConfig::modeled_channels() const {
  std::vector<int> all = input_channels;
  all.insert(all.end(), response_channels.begin(), response_channels.end());
  return all;
}

DyadModel::DyadModel(DyadConfig config) : config_(std::move(config)) {
  config_.validate();
}

nn::TensorRefs DyadModel::params() {
  nn::TensorRefs refs;
  for (nn::Tensor* t : encoder_->params()) refs.push_back(t);
  for (nn::Tensor* t : mu_head_->params()) refs.push_back(t);
  for (nn::Tensor* t : logvar_head_->params()) refs.push_back(t);
  for (nn::Tensor* t : decoder_->params()) refs.push_back(t);
  for (nn::Tensor* t : out_head_->params()) refs.push_back(t);
  return refs;
}

void DyadModel::train(std::span<const Vehicle* const> normal_vehicles,
                      std::uint64_t seed) {
  for (const Vehicle* v : normal_vehicles) {
    if (v->health_label != 0) {
      throw std::invalid_argument(
          "dyad_train: anomalous vehicle in training input (protocol violation): " +
          v->vehicle_id);
    }
  }
  const std::vector<const ChargingSnippet*> snippets =
      collect_snippets(normal_vehicles);
  if (snippets.empty()) {
    throw std::invalid_argument("dyad_train: no training snippets");
  }
  stats_ = fit_normalizer(std::span<const ChargingSnippet* const>(snippets));

  const auto n_model = static_cast<int>(config_.modeled_channels().size());
  const auto n_in = static_cast<int>(config_.input_channels.size());
  const auto n_resp = static_cast<int>(config_.response_channels.size());
  const int latent = config_.latent_size;

  std::mt19937_64 init_rng = make_engine(seed, "init");
  encoder_ = std::make_unique<nn::Gru>("dyad.encoder", n_model,
                                       config_.hidden_size, init_rng);
  mu_head_ = std::make_unique<nn::Dense>("dyad.mu", config_.hidden_size, latent,
                                         nn::Activation::kIdentity, init_rng);
  logvar_head_ = std::make_unique<nn::Dense>(
      "dyad.logvar", config_.hidden_size, latent, nn::Activation::kIdentity,
      init_rng);
  decoder_ = std::make_unique<nn::Gru>("dyad.decoder", latent + n_in,
                                       config_.hidden_size, init_rng);
  out_head_ = std::make_unique<nn::Dense>("dyad.out", config_.hidden_size, n_resp,
                                          nn::Activation::kIdentity, init_rng);

  const std::size_t n = snippets.size();
  const std::size_t batch_size = static_cast<std::size_t>(config_.batch_size);
  const std::size_t steps_per_epoch = (n + batch_size - 1) / batch_size;
  nn::AdamConfig adam;
  adam.learning_rate = config_.learning_rate;
  adam.clip_global_norm = config_.clip_global_norm;
  adam.cosine_period_steps =
      config_.cosine_schedule ? steps_per_epoch * config_.epochs : 0;
  nn::AdamOptimizer optimizer(params(), adam);

  const std::vector<int> model_channels = config_.modeled_channels();
  const int T = kSnippetLength;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  epoch_losses_.clear();

  std::vector<const ChargingSnippet*> batch;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng = make_engine(seed, "shuffle", epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 noise_rng = make_engine(seed, "noise", epoch);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t end = std::min(n, start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(snippets[order[i]]);
      }
      const auto B = static_cast<Eigen::Index>(batch.size());

      const std::vector<Eigen::MatrixXd> enc_seq = sequence_batch(
          std::span<const ChargingSnippet* const>(batch), model_channels, stats_);

      optimizer.zero_grads();

      nn::Gru::Cache enc_cache;
      const Eigen::MatrixXd& h_final = encoder_->forward(enc_seq, enc_cache);
      const Eigen::MatrixXd mu = mu_head_->forward(h_final);
      const Eigen::MatrixXd logvar = logvar_head_->forward(h_final);
      const Eigen::MatrixXd noise = nn::gaussian_matrix(latent, B, noise_rng);
      const Eigen::MatrixXd z = nn::reparameterize(mu, logvar, noise);

      std::vector<Eigen::MatrixXd> dec_seq(T);
      for (int t = 0; t < T; ++t) {
        dec_seq[t].resize(latent + n_in, B);
        dec_seq[t].topRows(latent) = z;
        dec_seq[t].bottomRows(n_in) = enc_seq[t].topRows(n_in);
      }
      nn::Gru::Cache dec_cache;
      decoder_->forward(dec_seq, dec_cache);

      Eigen::MatrixXd h_all(config_.hidden_size, static_cast<Eigen::Index>(T) * B);
      Eigen::MatrixXd target_all(n_resp, static_cast<Eigen::Index>(T) * B);
      for (int t = 0; t < T; ++t) {
        h_all.middleCols(static_cast<Eigen::Index>(t) * B, B) = dec_cache.h[t + 1];
        target_all.middleCols(static_cast<Eigen::Index>(t) * B, B) =
            enc_seq[t].bottomRows(n_resp);
      }
      const Eigen::MatrixXd y_all = out_head_->forward(h_all);

      const double recon = nn::mse(y_all, target_all);
      const double kl = nn::gaussian_kl(mu, logvar) / static_cast<double>(B);
      loss_sum += (recon + config_.kl_weight * kl) * static_cast<double>(B);

      const Eigen::MatrixXd dh_all = out_head_->backward(nn::mse_grad(y_all, target_all));
      std::vector<Eigen::MatrixXd> dh_seq(T);
      for (int t = 0; t < T; ++t) {
        dh_seq[t] = dh_all.middleCols(static_cast<Eigen::Index>(t) * B, B);
      }
      const std::vector<Eigen::MatrixXd> dx_seq = decoder_->backward(dec_cache, dh_seq);

      Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(latent, B);
      for (int t = 0; t < T; ++t) {
        dz += dx_seq[t].topRows(latent);
      }
      Eigen::MatrixXd dmu = Eigen::MatrixXd::Zero(latent, B);
      Eigen::MatrixXd dlogvar = Eigen::MatrixXd::Zero(latent, B);
      nn::reparameterize_backward(logvar, noise, dz, dmu, dlogvar);
      nn::gaussian_kl_backward(mu, logvar, config_.kl_weight / static_cast<double>(B),
                               dmu, dlogvar);

      Eigen::MatrixXd dh_final = mu_head_->backward(dmu);
      dh_final += logvar_head_->backward(dlogvar);
      encoder_->backward_from_last(enc_cache, dh_final);

      optimizer.step();
    }
    epoch_losses_.push_back(loss_sum / static_cast<double>(n));
  }
  trained_ = true;
}

std::vector<double> DyadModel::score_batch(
    std::span<const ChargingSnippet* const> snippets) const {
  if (!trained_) {
    throw std::logic_error("dyad_score: model is not trained");
  }
  const auto B = static_cast<Eigen::Index>(snippets.size());
  const auto n_in = static_cast<int>(config_.input_channels.size());
  const auto n_resp = static_cast<int>(config_.response_channels.size());
  const int latent = config_.latent_size;
  const int T = kSnippetLength;

  const std::vector<Eigen::MatrixXd> enc_seq =
      sequence_batch(snippets, config_.modeled_channels(), stats_);

  nn::Gru::Cache enc_cache;
  const Eigen::MatrixXd& h_final = encoder_->forward(enc_seq, enc_cache);
  // Posterior mean latent; no sampling at inference.
  const Eigen::MatrixXd z = nn::dense_infer(*mu_head_, h_final);

  std::vector<Eigen::MatrixXd> dec_seq(T);
  for (int t = 0; t < T; ++t) {
    dec_seq[t].resize(latent + n_in, B);
    dec_seq[t].topRows(latent) = z;
    dec_seq[t].bottomRows(n_in) = enc_seq[t].topRows(n_in);
  }
  nn::Gru::Cache dec_cache;
  decoder_->forward(dec_seq, dec_cache);

  std::vector<double> scores(static_cast<std::size_t>(B), 0.0);
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd y_t = nn::dense_infer(*out_head_, dec_cache.h[t + 1]);
    const Eigen::MatrixXd residual = y_t - enc_seq[t].bottomRows(n_resp);
    for (Eigen::Index j = 0; j < B; ++j) {
      scores[static_cast<std::size_t>(j)] += residual.col(j).squaredNorm();
    }
  }
  const double denom = static_cast<double>(T) * n_resp;
  for (double& s : scores) {
    s /= denom;
  }
  return scores;
}

std::vector<SnippetScore> DyadModel::score_vehicle(const Vehicle& vehicle) const {
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

double DyadModel::score_snippet(const ChargingSnippet& snippet) const {
  const ChargingSnippet* ptr = &snippet;
  return score_batch(std::span<const ChargingSnippet* const>(&ptr, 1)).front();
}

double DyadModel::score_series(const SeriesMatrix& series) const {
  const ChargingSnippet snippet(kUnchecked, "series", 0, 0.0,
                                std::make_shared<SeriesMatrix>(series));
  return score_snippet(snippet);
}

Eigen::MatrixXd DyadModel::reconstruct_series(const SeriesMatrix& series) const {
  if (!trained_) {
    throw std::logic_error("dyad reconstruct: model is not trained");
  }
  const ChargingSnippet snippet(kUnchecked, "series", 0, 0.0,
                                std::make_shared<SeriesMatrix>(series));
  const ChargingSnippet* ptr = &snippet;
  const auto n_in = static_cast<int>(config_.input_channels.size());
  const auto n_resp = static_cast<int>(config_.response_channels.size());
  const int latent = config_.latent_size;
  const int T = kSnippetLength;

  const std::vector<Eigen::MatrixXd> enc_seq =
      sequence_batch(std::span<const ChargingSnippet* const>(&ptr, 1),
                     config_.modeled_channels(), stats_);
  nn::Gru::Cache enc_cache;
  const Eigen::MatrixXd& h_final = encoder_->forward(enc_seq, enc_cache);
  const Eigen::MatrixXd z = nn::dense_infer(*mu_head_, h_final);

  std::vector<Eigen::MatrixXd> dec_seq(T);
  for (int t = 0; t < T; ++t) {
    dec_seq[t].resize(latent + n_in, 1);
    dec_seq[t].topRows(latent) = z;
    dec_seq[t].bottomRows(n_in) = enc_seq[t].topRows(n_in);
  }
  nn::Gru::Cache dec_cache;
  decoder_->forward(dec_seq, dec_cache);

  Eigen::MatrixXd decoded(n_resp, T);
  for (int t = 0; t < T; ++t) {
    decoded.col(t) = nn::dense_infer(*out_head_, dec_cache.h[t + 1]);
  }
  return decoded;
}

}  // namespace evbat::detect
