#pragma once

#include "evbat/snippet.hpp"

#include <cstdint>
#include <vector>

namespace evbat::synth {

struct AnonymizeConfig {
  /// Perturbation amplitude as a fraction of each snippet channel's range.
  double perturb_amplitude_frac = 0.005;
  /// Max resampling offset, in sample steps, for the reinterpolation pass.
  double warp_max_steps = 0.3;
  double timestamp_shift_range_s = 1.0e6;  // one uniform shift per vehicle
  double mileage_scale_min = 0.7;          // one positive scale per vehicle
  double mileage_scale_max = 1.5;
};

/// Value channels (voltage trio, current, temperature pair) get a zero-mean
/// perturbation followed by linear reinterpolation on a shifted sample grid;
/// timestamps get one affine shift per vehicle and mileages one positive
/// scale. Labels are untouched and every snippet invariant is preserved:
/// the voltage trio and the temperature pair share their perturbation and
/// all value channels share the snippet's warp, while soc is left alone.
std::vector<Vehicle> anonymize(std::vector<Vehicle> fleet, std::uint64_t seed,
                               const AnonymizeConfig& config = {});

}  // namespace evbat::synth
