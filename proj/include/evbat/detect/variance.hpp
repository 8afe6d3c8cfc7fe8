#pragma once

#include "evbat/detect/score.hpp"

namespace evbat::detect {

/// Average over a vehicle's snippets of the per-snippet population variance
/// of one raw channel; used directly as the vehicle score.
double variance_score(const Vehicle& vehicle, int channel);

/// Statistic-only baseline; train() is a no-op.
class VarianceBackend : public DetectorBackend {
 public:
  explicit VarianceBackend(int channel = kAvgCellVoltage) : channel_(channel) {}

  std::string name() const override { return "variance"; }
  void train(std::span<const Vehicle* const>, std::uint64_t) override {}
  std::vector<SnippetScore> score_vehicle(const Vehicle& vehicle) const override;
  bool scores_vehicles_directly() const override { return true; }
  double direct_vehicle_score(const Vehicle& vehicle) const override;

 private:
  int channel_;
};

}  // namespace evbat::detect
