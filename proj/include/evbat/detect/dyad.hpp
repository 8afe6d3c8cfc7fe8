#pragma once

#include "evbat/detect/score.hpp"
#include "evbat/normalize.hpp"
#include "evbat/nn/gru.hpp"
#include "evbat/nn/layers.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace evbat::detect {

/// Input-conditioned variational sequence model. The encoder GRU reads all
/// modeled channels and emits a Gaussian posterior; the decoder GRU receives,
/// at every timestep, the latent sample concatenated with that timestep's
/// system-input channels and reconstructs only the response channels.
struct DyadConfig {
  std::vector<int> input_channels = {kCurrent, kSoc};
  std::vector<int> response_channels = {kAvgCellVoltage, kMaxCellVoltage,
                                        kMinCellVoltage, kMaxTemp, kMinTemp};
  int hidden_size = 64;
  int latent_size = 32;
  int epochs = 10;
  int batch_size = 128;
  double kl_weight = 1e-3;
  double learning_rate = 1e-3;
  bool cosine_schedule = true;  // period = total training steps
  double clip_global_norm = 5.0;

  void validate() const;  // disjoint channel sets, non-empty response, ...
  std::vector<int> modeled_channels() const;  // inputs then responses
};

class DyadModel : public DetectorBackend {
 public:
  explicit DyadModel(DyadConfig config = {});

  std::string name() const override { return "dyad"; }
  void train(std::span<const Vehicle* const> normal_vehicles,
             std::uint64_t seed) override;
  std::vector<SnippetScore> score_vehicle(const Vehicle& vehicle) const override;

  double score_snippet(const ChargingSnippet& snippet) const;
  /// Scores a raw series against the trained model (normalization included).
  double score_series(const SeriesMatrix& series) const;

  /// Decoded response channels (normalized units) with the posterior-mean
  /// latent, one column per snippet row.
  Eigen::MatrixXd reconstruct_series(const SeriesMatrix& series) const;

  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  const DyadConfig& config() const { return config_; }
  const NormStats& norm_stats() const { return stats_; }
  nn::TensorRefs params();

 private:
  std::vector<double> score_batch(
      std::span<const ChargingSnippet* const> snippets) const;

  DyadConfig config_;
  NormStats stats_;
  bool trained_ = false;
  std::unique_ptr<nn::Gru> encoder_;
  std::unique_ptr<nn::Gru> decoder_;
  std::unique_ptr<nn::Dense> mu_head_;
  std::unique_ptr<nn::Dense> logvar_head_;
  std::unique_ptr<nn::Dense> out_head_;
  std::vector<double> epoch_losses_;
};

}  // namespace evbat::detect
