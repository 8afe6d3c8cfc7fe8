#pragma once

#include "evbat/detect/score.hpp"
#include "evbat/eval/folds.hpp"
#include "evbat/eval/metrics.hpp"
#include "evbat/eval/robust.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evbat::eval {

struct HyperparamGrids {
  std::vector<double> h_grid = {1, 2, 5, 10, 25, 50, 100};
  int tau_quantiles = 50;
};

/// Picks h maximizing validation AUROC of robust vehicle scores, then tau
/// maximizing validation F1 of the binarized predictions; ties break toward
/// smaller h, then smaller tau. Throws if validation has a single class.
RobustScoreParams select_hyperparams(
    std::span<const int> validation_labels,
    const std::vector<std::vector<double>>& validation_snippet_scores,
    const HyperparamGrids& grids);

/// Tau grid = quantiles of the given vehicle scores; F1-maximizing pick.
double select_tau_by_f1(std::span<const int> labels,
                        std::span<const double> vehicle_scores, int quantiles);

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct RoundResult {
  int round = 0;
  double auroc = 0.0;
  double h_percentile = 100.0;
  double tau = 0.0;
  ConfusionCounts confusion;
  std::vector<RocPoint> roc;
  std::vector<std::pair<std::string, double>> test_vehicle_scores;
};

struct DetectionReport {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<RoundResult> rounds;
  double auroc_mean = 0.0;
  double auroc_std = 0.0;
  AveragedRoc averaged_roc;
};

using BackendFactory = std::function<std::unique_ptr<detect::DetectorBackend>()>;

/// Full cross-validation protocol: per round, train the backend on the
/// round's normal folds, tune (h, tau) on train-normal plus one anomalous
/// fold, then score the held-out test vehicles. Rounds are independent and
/// run concurrently when `parallel_rounds` is set; results are identical to
/// the sequential order.
DetectionReport run_detection(std::span<const Vehicle> fleet, const FoldPlan& plan,
                              const BackendFactory& make_backend,
                              std::uint64_t seed, const HyperparamGrids& grids = {},
                              bool parallel_rounds = true);

/// report.json plus per-round and averaged ROC CSVs under `dir`.
void write_detection_report(const std::filesystem::path& dir,
                            const DetectionReport& report);

/// Snippet scores CSV with header vehicle_id,snippet_index,score.
void write_scores_csv(const std::filesystem::path& path,
                      std::span<const detect::SnippetScore> scores);

}  // namespace evbat::eval
