#include "evbat/anonymize.hpp"

#include "evbat/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace evbat::synth {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Linear resample of one column at positions i + offset, clamped to range.
Eigen::Matrix<double, kSnippetLength, 1> resample(
    const Eigen::Matrix<double, kSnippetLength, 1>& column, double offset) {
  Eigen::Matrix<double, kSnippetLength, 1> out;
  for (int i = 0; i < kSnippetLength; ++i) {
    const double p = std::clamp(i + offset, 0.0, double(kSnippetLength - 1));
    const int lo = static_cast<int>(std::floor(p));
    const int hi = std::min(lo + 1, kSnippetLength - 1);
    const double frac = p - lo;
    out(i) = (1.0 - frac) * column(lo) + frac * column(hi);
  }
  return out;
}

}  // namespace

std::vector<Vehicle> anonymize(std::vector<Vehicle> fleet, std::uint64_t seed,
                               const AnonymizeConfig& config) {
  for (std::size_t vi = 0; vi < fleet.size(); ++vi) {
    Vehicle& vehicle = fleet[vi];
    std::mt19937_64 rng = make_engine(seed, "anonymize", vi);
    const double time_shift = uniform(rng, -config.timestamp_shift_range_s,
                                      config.timestamp_shift_range_s);
    const double mileage_scale =
        uniform(rng, config.mileage_scale_min, config.mileage_scale_max);

    for (ChargingSnippet& snippet : vehicle.snippets) {
      SeriesMatrix m = snippet.series();

      // Common-mode perturbation: one draw per row for the voltage trio and
      // one for the temperature pair, so row-wise ordering is untouched.
      const double v_range = m.col(kAvgCellVoltage).maxCoeff() -
                             m.col(kAvgCellVoltage).minCoeff();
      const double i_range = m.col(kCurrent).maxCoeff() - m.col(kCurrent).minCoeff();
      const double t_range = m.col(kMaxTemp).maxCoeff() - m.col(kMaxTemp).minCoeff();
      const double v_amp = config.perturb_amplitude_frac * v_range;
      const double i_amp = config.perturb_amplitude_frac * i_range;
      const double t_amp = config.perturb_amplitude_frac * t_range;
      for (int i = 0; i < kSnippetLength; ++i) {
        const double nv = v_amp > 0.0 ? uniform(rng, -v_amp, v_amp) : 0.0;
        const double ni = i_amp > 0.0 ? uniform(rng, -i_amp, i_amp) : 0.0;
        const double nt = t_amp > 0.0 ? uniform(rng, -t_amp, t_amp) : 0.0;
        m(i, kAvgCellVoltage) += nv;
        m(i, kMaxCellVoltage) += nv;
        m(i, kMinCellVoltage) += nv;
        m(i, kCurrent) += ni;
        m(i, kMaxTemp) += nt;
        m(i, kMinTemp) += nt;
      }

      // One warp per snippet, shared across value channels.
      const double offset = uniform(rng, -config.warp_max_steps, config.warp_max_steps);
      for (const int c : {kAvgCellVoltage, kCurrent, kMaxCellVoltage,
                          kMinCellVoltage, kMaxTemp, kMinTemp}) {
        m.col(c) = resample(m.col(c), offset);
      }

      m.col(kTimestamp).array() += time_shift;

      snippet = ChargingSnippet(snippet.vehicle_id(), snippet.snippet_index(),
                                snippet.mileage() * mileage_scale,
                                std::make_shared<SeriesMatrix>(std::move(m)),
                                snippet.capacity_label());
    }
  }
  return fleet;
}

}  // namespace evbat::synth
