#pragma once

#include "evbat/normalize.hpp"
#include "evbat/nn/gru.hpp"
#include "evbat/nn/layers.hpp"
#include "evbat/snippet.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace evbat::capacity {

enum class RegressorKind { kRecurrent, kFeedforward, kRidge };

const char* regressor_kind_name(RegressorKind kind);

struct RegressorConfig {
  RegressorKind kind = RegressorKind::kRecurrent;
  std::vector<int> modeled_channels = {kAvgCellVoltage, kCurrent,
                                       kMaxCellVoltage, kMinCellVoltage,
                                       kMaxTemp,        kMinTemp,
                                       kSoc};
  int hidden_size = 32;
  int epochs = 10;
  int batch_size = 128;
  double learning_rate = 1e-3;
  double clip_global_norm = 5.0;
  double ridge_lambda = 1e-3;

  void validate() const;
};

/// Supervised capacity regressor over capacity-labeled snippets. Targets are
/// standardized by training-set mean/std; the recurrent and feedforward kinds
/// are trained with Adam on MSE, the ridge kind is a closed-form solve over
/// per-snippet summary features (mean, std, min, max, last per channel).
class CapacityModel {
 public:
  /// Throws std::invalid_argument if any snippet lacks a capacity label.
  static CapacityModel train(std::span<const ChargingSnippet* const> labeled,
                             const RegressorConfig& config, std::uint64_t seed);

  double predict(const ChargingSnippet& snippet) const;
  std::vector<double> predict(std::span<const ChargingSnippet* const> snippets) const;

  const RegressorConfig& config() const { return config_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// Ridge introspection (throws for other kinds).
  const Eigen::VectorXd& ridge_coefficients() const;
  double ridge_intercept() const;
  /// || (X^T X + lambda I) beta - X^T y || on the standardized system.
  double normal_equation_residual() const;

 private:
  CapacityModel() = default;

  RegressorConfig config_;
  NormStats stats_;
  double target_mean_ = 0.0;
  double target_std_ = 1.0;

  // recurrent / feedforward
  std::unique_ptr<nn::Gru> gru_;
  std::vector<std::unique_ptr<nn::Dense>> dense_;
  std::vector<double> epoch_losses_;

  // ridge
  Eigen::VectorXd ridge_beta_;
  Eigen::ArrayXd feature_mean_;
  Eigen::ArrayXd feature_std_;
  double ridge_residual_ = 0.0;
  bool is_ridge_ = false;
};

/// Per-snippet summary feature vector for the ridge kind: mean, std, min,
/// max and last value of each modeled channel, in normalized units.
Eigen::VectorXd summary_features(const ChargingSnippet& snippet,
                                 std::span<const int> channels,
                                 const NormStats& stats);

/// Closed-form ridge solve, coefficients of (X^T X + lambda I) beta = X^T y.
/// Rows of X are samples. Optionally reports the normal-equation residual.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            double lambda, double* normal_eq_residual = nullptr);

struct CapacityPrediction {
  std::string vehicle_id;
  int snippet_index = 0;
  double predicted = 0.0;
  double truth = 0.0;
};

struct CapacityRound {
  int round = 0;
  double rmse = 0.0;
  double mean_predictor_rmse = 0.0;  // predict-the-training-mean baseline
  std::size_t test_count = 0;
};

struct CapacityReport {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<CapacityRound> rounds;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double baseline_rmse_mean = 0.0;
  double baseline_rmse_std = 0.0;
};

/// K-fold over all vehicles jointly (no label stratification); only labeled
/// snippets enter train and test. Throws if a round ends up with no labeled
/// train or test snippets.
CapacityReport evaluate_capacity(std::span<const Vehicle> fleet,
                                 const RegressorConfig& config, int k,
                                 std::uint64_t seed,
                                 std::vector<CapacityPrediction>* predictions = nullptr,
                                 bool parallel_rounds = true);

/// report.json plus predictions CSV (vehicle_id,snippet_index,
/// predicted_capacity,true_capacity) under `dir`.
void write_capacity_report(const std::filesystem::path& dir,
                           const CapacityReport& report,
                           std::span<const CapacityPrediction> predictions);

}  // namespace evbat::capacity
