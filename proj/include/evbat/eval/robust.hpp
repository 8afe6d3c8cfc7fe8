#pragma once

#include <span>

namespace evbat::eval {

/// Hyperparameters of the robust vehicle-level scoring rule.
struct RobustScoreParams {
  double h_percentile = 100.0;  // in (0, 100]
  double tau = 0.0;
};

/// Mean of the largest h% of a vehicle's snippet scores; the top-k count is
/// k = max(1, floor(n * h / 100)). Throws on an empty list.
double robust_vehicle_score(std::span<const double> snippet_scores,
                            double h_percentile);

/// 1 iff score > tau (strict).
int robust_vehicle_predict(double vehicle_score, double tau);

}  // namespace evbat::eval
