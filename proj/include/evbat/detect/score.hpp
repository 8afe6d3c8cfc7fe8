#pragma once

#include "evbat/snippet.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evbat::detect {

/// One reconstruction-error (or statistic) score per snippet.
struct SnippetScore {
  std::string vehicle_id;
  int snippet_index = 0;
  double score = 0.0;
};

/// Common surface for anomaly scorers. Trained backends fit their normalizer
/// and parameters on normal vehicles only; statistic backends ignore train().
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;

  virtual std::string name() const = 0;

  /// Throws std::invalid_argument if an anomalous vehicle sneaks into the
  /// training input (protocol violation).
  virtual void train(std::span<const Vehicle* const> normal_vehicles,
                     std::uint64_t seed) = 0;

  virtual std::vector<SnippetScore> score_vehicle(const Vehicle& vehicle) const = 0;

  /// True for backends that produce one score per vehicle with no
  /// snippet-level aggregation.
  virtual bool scores_vehicles_directly() const { return false; }
  virtual double direct_vehicle_score(const Vehicle& vehicle) const;
};

}  // namespace evbat::detect
