#include "evbat/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace evbat::eval {

namespace {

void check_binary_labels(std::span<const int> labels, std::span<const double> scores,
                         const char* what) {
  if (labels.size() != scores.size()) {
    throw std::invalid_argument(std::string(what) + ": labels/scores length mismatch");
  }
  std::size_t positives = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument(std::string(what) + ": labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) {
    throw std::invalid_argument(std::string(what) +
                                ": both classes must be present");
  }
}

}  // namespace

double auroc(std::span<const int> labels, std::span<const double> scores) {
  check_binary_labels(labels, scores, "auroc");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mid-ranks over tie groups give the ties-count-half convention exactly.
  double rank_sum_pos = 0.0;
  double positives = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += mid_rank;
        positives += 1.0;
      }
    }
    i = j + 1;
  }
  const double negatives = static_cast<double>(n) - positives;
  const double u = rank_sum_pos - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

std::vector<RocPoint> roc_curve(std::span<const int> labels,
                                std::span<const double> scores) {
  check_binary_labels(labels, scores, "roc_curve");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double positives = 0.0, negatives = 0.0;
  for (const int y : labels) {
    (y == 1 ? positives : negatives) += 1.0;
  }

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0});
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    for (std::size_t k = i; k <= j; ++k) {
      (labels[order[k]] == 1 ? tp : fp) += 1.0;
    }
    curve.push_back({fp / negatives, tp / positives});
    i = j + 1;
  }
  return curve;
}

AveragedRoc average_roc(const std::vector<std::vector<RocPoint>>& curves,
                        int grid_points) {
  if (curves.empty() || grid_points < 2) {
    throw std::invalid_argument("average_roc: need curves and >= 2 grid points");
  }
  AveragedRoc out;
  out.fpr_grid.resize(grid_points);
  out.tpr_mean.assign(grid_points, 0.0);
  out.tpr_std.assign(grid_points, 0.0);
  for (int g = 0; g < grid_points; ++g) {
    out.fpr_grid[g] = static_cast<double>(g) / (grid_points - 1);
  }

  std::vector<std::vector<double>> tprs(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    // Collapse vertical segments: keep the best tpr per distinct fpr.
    std::vector<double> fpr, tpr;
    for (const RocPoint& p : curves[c]) {
      if (!fpr.empty() && p.fpr == fpr.back()) {
        tpr.back() = std::max(tpr.back(), p.tpr);
      } else {
        fpr.push_back(p.fpr);
        tpr.push_back(p.tpr);
      }
    }
    tprs[c].resize(grid_points);
    for (int g = 0; g < grid_points; ++g) {
      const double x = out.fpr_grid[g];
      const auto it = std::lower_bound(fpr.begin(), fpr.end(), x);
      double y;
      if (it == fpr.begin()) {
        y = tpr.front();
      } else if (it == fpr.end()) {
        y = tpr.back();
      } else {
        const std::size_t hi = static_cast<std::size_t>(it - fpr.begin());
        const std::size_t lo = hi - 1;
        const double span = fpr[hi] - fpr[lo];
        const double frac = span > 0.0 ? (x - fpr[lo]) / span : 0.0;
        y = tpr[lo] + frac * (tpr[hi] - tpr[lo]);
      }
      tprs[c][g] = y;
    }
  }

  const double count = static_cast<double>(curves.size());
  for (int g = 0; g < grid_points; ++g) {
    double sum = 0.0;
    for (const auto& t : tprs) {
      sum += t[g];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (const auto& t : tprs) {
      sq += (t[g] - mean) * (t[g] - mean);
    }
    out.tpr_mean[g] = mean;
    out.tpr_std[g] = std::sqrt(sq / count);
  }
  return out;
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) {
    throw std::invalid_argument("rmse: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("rmse: empty input");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sq += e * e;
  }
  return std::sqrt(sq / static_cast<double>(predictions.size()));
}

}  // namespace evbat::eval
