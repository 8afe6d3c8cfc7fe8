#include "evbat/eval/robust.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace evbat::eval {

double robust_vehicle_score(std::span<const double> snippet_scores,
                            double h_percentile) {
  if (snippet_scores.empty()) {
    throw std::invalid_argument("robust_vehicle_score: vehicle has no snippets");
  }
  if (!(h_percentile > 0.0 && h_percentile <= 100.0)) {
    throw std::invalid_argument("robust_vehicle_score: h must be in (0, 100]");
  }
  std::vector<double> sorted(snippet_scores.begin(), snippet_scores.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto n = static_cast<double>(sorted.size());
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(n * h_percentile / 100.0)));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += sorted[i];
  }
  return sum / static_cast<double>(k);
}

int robust_vehicle_predict(double vehicle_score, double tau) {
  return vehicle_score > tau ? 1 : 0;
}

}  // namespace evbat::eval
