#include "evbat/detect/variance.hpp"

#include <stdexcept>

namespace evbat::detect {

double DetectorBackend::direct_vehicle_score(const Vehicle&) const {
  throw std::logic_error(name() + " does not score vehicles directly");
}

double variance_score(const Vehicle& vehicle, int channel) {
  if (channel < 0 || channel >= kChannelCount) {
    throw std::invalid_argument("variance_score: invalid channel");
  }
  if (vehicle.snippets.empty()) {
    throw std::invalid_argument("variance_score: vehicle has no snippets");
  }
  double sum = 0.0;
  for (const ChargingSnippet& s : vehicle.snippets) {
    const auto column = s.series().col(channel).array();
    const double mean = column.mean();
    sum += (column - mean).square().mean();
  }
  return sum / static_cast<double>(vehicle.snippets.size());
}

double VarianceBackend::direct_vehicle_score(const Vehicle& vehicle) const {
  return variance_score(vehicle, channel_);
}

std::vector<SnippetScore> VarianceBackend::score_vehicle(
    const Vehicle& vehicle) const {
  std::vector<SnippetScore> out;
  out.reserve(vehicle.snippets.size());
  for (const ChargingSnippet& s : vehicle.snippets) {
    const auto column = s.series().col(channel_).array();
    const double mean = column.mean();
    out.push_back(SnippetScore{s.vehicle_id(), s.snippet_index(),
                               (column - mean).square().mean()});
  }
  return out;
}

}  // namespace evbat::detect
