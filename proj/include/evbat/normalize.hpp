#pragma once

#include "evbat/snippet.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace evbat {

/// Per-channel standardization statistics fitted on training data.
/// Standard deviations are population (1/N) and floored at `epsilon` so
/// constant channels map to zeros instead of NaN.
struct NormStats {
  Eigen::Array<double, kChannelCount, 1> mean = Eigen::Array<double, kChannelCount, 1>::Zero();
  Eigen::Array<double, kChannelCount, 1> std_dev = Eigen::Array<double, kChannelCount, 1>::Ones();
  double epsilon = 1e-6;
};

inline constexpr double kNormEpsilon = 1e-6;

/// Fits per-channel mean and std over all rows of all training snippets.
/// Throws std::invalid_argument on an empty list ("no training data").
NormStats fit_normalizer(std::span<const ChargingSnippet* const> training);
NormStats fit_normalizer(const std::vector<ChargingSnippet>& training);

/// (x - mean) / std, columnwise.
SeriesMatrix apply_normalizer(const SeriesMatrix& series, const NormStats& stats);
SeriesMatrix apply_normalizer(const ChargingSnippet& snippet, const NormStats& stats);

/// Inverse of apply_normalizer: x * std + mean.
SeriesMatrix invert_normalizer(const SeriesMatrix& normalized, const NormStats& stats);

}  // namespace evbat
