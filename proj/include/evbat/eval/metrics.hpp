#pragma once

#include <span>
#include <vector>

namespace evbat::eval {

/// Probability that a random positive outranks a random negative, ties
/// counted half; equals the trapezoidal ROC area. Throws
/// std::invalid_argument unless both classes are present.
double auroc(std::span<const int> labels, std::span<const double> scores);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// One point per distinct score threshold plus the (0,0) endpoint; ends at
/// (1,1).
std::vector<RocPoint> roc_curve(std::span<const int> labels,
                                std::span<const double> scores);

struct AveragedRoc {
  std::vector<double> fpr_grid;
  std::vector<double> tpr_mean;
  std::vector<double> tpr_std;
};

/// Interpolates each curve's tpr onto a uniform fpr grid and reports the
/// per-gridpoint mean and population standard deviation across curves.
AveragedRoc average_roc(const std::vector<std::vector<RocPoint>>& curves,
                        int grid_points = 101);

/// Root mean squared error; throws on empty or mismatched lengths.
double rmse(std::span<const double> predictions, std::span<const double> targets);

}  // namespace evbat::eval
