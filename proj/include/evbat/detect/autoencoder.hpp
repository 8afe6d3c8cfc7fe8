#pragma once

#include "evbat/detect/score.hpp"
#include "evbat/normalize.hpp"
#include "evbat/nn/layers.hpp"

#include <memory>
#include <vector>

namespace evbat::detect {

/// Feed-forward autoencoder on flattened snippets: sigmoid hidden layers with
/// batch normalization and dropout, linear reconstruction head. Scores are
/// the reconstruction MSE over all modeled channels.
struct AeConfig {
  std::vector<int> modeled_channels = {kAvgCellVoltage, kCurrent,
                                       kMaxCellVoltage, kMinCellVoltage,
                                       kMaxTemp,        kMinTemp,
                                       kSoc};
  std::vector<int> hidden_dims = {64, 32, 32, 64};
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double dropout_rate = 0.1;

  void validate() const;
};

class AeModel : public DetectorBackend {
 public:
  explicit AeModel(AeConfig config = {});

  std::string name() const override { return "ae"; }
  void train(std::span<const Vehicle* const> normal_vehicles,
             std::uint64_t seed) override;
  std::vector<SnippetScore> score_vehicle(const Vehicle& vehicle) const override;

  double score_snippet(const ChargingSnippet& snippet) const;
  double score_series(const SeriesMatrix& series) const;

  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  const AeConfig& config() const { return config_; }
  nn::TensorRefs params();

 private:
  Eigen::MatrixXd infer(const Eigen::MatrixXd& x) const;
  std::vector<double> score_batch(
      std::span<const ChargingSnippet* const> snippets) const;

  AeConfig config_;
  NormStats stats_;
  bool trained_ = false;
  std::vector<std::unique_ptr<nn::Dense>> layers_;
  std::vector<std::unique_ptr<nn::BatchNorm>> norms_;
  std::vector<std::unique_ptr<nn::Dropout>> dropouts_;
  std::vector<double> epoch_losses_;
};

}  // namespace evbat::detect
