#include "evbat/normalize.hpp"

#include <cmath>
#include <stdexcept>

namespace evbat {

NormStats fit_normalizer(std::span<const ChargingSnippet* const> training) {
  if (training.empty()) {
    throw std::invalid_argument("fit_normalizer: no training data");
  }
  Eigen::Array<double, kChannelCount, 1> sum = Eigen::Array<double, kChannelCount, 1>::Zero();
  Eigen::Array<double, kChannelCount, 1> sum_sq = Eigen::Array<double, kChannelCount, 1>::Zero();
  double n = 0.0;
  for (const ChargingSnippet* s : training) {
    const SeriesMatrix& m = s->series();
    sum += m.colwise().sum().transpose().array();
    sum_sq += m.array().square().colwise().sum().transpose();
    n += static_cast<double>(m.rows());
  }
  NormStats stats;
  stats.epsilon = kNormEpsilon;
  stats.mean = sum / n;
  // Population variance; guard tiny negatives from cancellation.
  const auto var = (sum_sq / n - stats.mean.square()).max(0.0);
  stats.std_dev = var.sqrt().max(stats.epsilon);
  return stats;
}

NormStats fit_normalizer(const std::vector<ChargingSnippet>& training) {
  std::vector<const ChargingSnippet*> ptrs;
  ptrs.reserve(training.size());
  for (const ChargingSnippet& s : training) {
    ptrs.push_back(&s);
  }
  return fit_normalizer(std::span<const ChargingSnippet* const>(ptrs));
}

SeriesMatrix apply_normalizer(const SeriesMatrix& series, const NormStats& stats) {
  SeriesMatrix out;
  out.array() = (series.array().rowwise() - stats.mean.transpose()).rowwise() /
                stats.std_dev.transpose();
  return out;
}

SeriesMatrix apply_normalizer(const ChargingSnippet& snippet, const NormStats& stats) {
  return apply_normalizer(snippet.series(), stats);
}

SeriesMatrix invert_normalizer(const SeriesMatrix& normalized, const NormStats& stats) {
  SeriesMatrix out;
  out.array() = (normalized.array().rowwise() * stats.std_dev.transpose()).rowwise() +
                stats.mean.transpose();
  return out;
}

}  // namespace evbat
