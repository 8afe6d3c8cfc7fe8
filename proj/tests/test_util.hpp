#pragma once

#include "evbat/fleet_gen.hpp"
#include "evbat/snippet.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

namespace evbat::test {

/// A well-formed series: rising voltage, constant current, rising soc,
/// 10 s sampling. Channels can be reshaped afterwards through `edit`.
inline SeriesMatrix make_valid_series(
    const std::function<void(SeriesMatrix&)>& edit = nullptr) {
  SeriesMatrix m;
  for (int i = 0; i < kSnippetLength; ++i) {
    const double frac = static_cast<double>(i) / (kSnippetLength - 1);
    const double v = 3.5 + 0.6 * frac;
    m(i, kAvgCellVoltage) = v;
    m(i, kCurrent) = 35.0;
    m(i, kMaxCellVoltage) = v + 0.01;
    m(i, kMinCellVoltage) = v - 0.01;
    m(i, kMaxTemp) = 26.0;
    m(i, kMinTemp) = 24.0;
    m(i, kSoc) = 10.0 + 80.0 * frac;
    m(i, kTimestamp) = 10.0 * i;
  }
  if (edit) {
    edit(m);
  }
  return m;
}

inline ChargingSnippet make_snippet(
    const std::string& vehicle_id = "v0000", int index = 0,
    const std::function<void(SeriesMatrix&)>& edit = nullptr,
    std::optional<double> capacity = std::nullopt) {
  return ChargingSnippet(kUnchecked, vehicle_id, index, 1000.0,
                         std::make_shared<SeriesMatrix>(make_valid_series(edit)),
                         capacity);
}

/// Small fleet for fast pipeline tests.
inline synth::GenConfig tiny_gen_config(int n_normal = 6, int n_anomalous = 5,
                                        int snippets = 24,
                                        std::uint64_t seed = 7) {
  synth::GenConfig config;
  config.seed = seed;
  config.n_normal = n_normal;
  config.n_anomalous = n_anomalous;
  config.snippets_per_vehicle = snippets;
  config.dt_s = 20.0;
  return config;
}

/// Exhaustive positive-negative pair counting, ties worth half.
inline double brute_force_auroc(std::span<const int> labels,
                                std::span<const double> scores) {
  double concordant = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        concordant += 1.0;
      } else if (scores[i] == scores[j]) {
        concordant += 0.5;
      }
    }
  }
  return concordant / pairs;
}

/// Exhaustive top-k mean with k = max(1, floor(n h / 100)).
inline double brute_force_top_h_mean(std::vector<double> scores, double h) {
  std::sort(scores.begin(), scores.end(), std::greater<>());
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(scores.size() * h / 100.0)));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += scores[i];
  }
  return sum / static_cast<double>(k);
}

}  // namespace evbat::test
