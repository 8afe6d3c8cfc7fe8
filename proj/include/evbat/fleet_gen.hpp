#pragma once

#include "evbat/simulate.hpp"
#include "evbat/snippet.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace evbat::synth {

enum class FaultKind {
  kResistanceDrift,     // series resistance grows by severity x 100%
  kVoltageFluctuation,  // bursty zero-mean voltage noise episodes
  kAcceleratedFade,     // capacity fade accumulates per manifesting record
  kCellImbalance,       // max - min cell voltage spread widens
};

const char* fault_kind_name(FaultKind kind);

struct FaultSpec {
  FaultKind kind = FaultKind::kResistanceDrift;
  double severity = 0.6;        // (0, 1]
  double onset_fraction = 0.3;  // of the vehicle's lifetime
};

struct GenConfig {
  std::uint64_t seed = 42;
  int n_normal = 40;
  int n_anomalous = 10;

  /// Target snippet count per vehicle; records are generated until reached
  /// and the excess is trimmed. Ignored when records_per_vehicle > 0.
  int snippets_per_vehicle = 200;
  int records_per_vehicle = 0;

  int stride = 64;
  double dt_s = 10.0;
  double truncation_probability = 0.3;

  double fault_severity = 0.6;
  double transient_fraction = 0.3;  // share of post-onset records that manifest
  std::vector<FaultKind> fault_kinds = {
      FaultKind::kResistanceDrift, FaultKind::kVoltageFluctuation,
      FaultKind::kAcceleratedFade, FaultKind::kCellImbalance};

  /// Healthy capacity labels are calibrated into this band (A*h).
  double capacity_band_low = 28.28;
  double capacity_band_high = 46.23;
  double base_fade_per_record = 2e-4;
  double fade_per_manifest = 0.01;  // scaled by severity

  /// Measurement noise std per channel. Voltage noise is common-mode across
  /// the avg/max/min trio (index kAvgCellVoltage governs all three) and
  /// temperature noise across the max/min pair (index kMaxTemp), so the
  /// row-wise ordering invariants survive. SOC noise is clamped monotone;
  /// the timestamp entry is ignored.
  std::array<double, kChannelCount> noise_std = {0.002, 0.05,  0.0, 0.0,
                                                 0.1,   0.0,   0.0, 0.0};

  bool anonymize = false;  // applied by the CLI after generation

  CapacityLabelSpec label_spec;
};

/// Deterministic under a fixed seed; vehicle sub-streams are independent, so
/// per-vehicle generation parallelizes without changing the output.
std::vector<Vehicle> generate_fleet(const GenConfig& config);

}  // namespace evbat::synth
