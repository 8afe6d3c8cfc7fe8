#include "evbat/fleet_gen.hpp"

#include "evbat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace evbat::synth {

const char* fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::kResistanceDrift: return "resistance_drift";
    case FaultKind::kVoltageFluctuation: return "voltage_fluctuation";
    case FaultKind::kAcceleratedFade: return "accelerated_fade";
    case FaultKind::kCellImbalance: return "cell_imbalance";
  }
  return "unknown";
}

namespace {

struct VehicleDraw {
  double resistance;
  double voltage_spread;
  double base_fade;
  double target_label;
  double mileage;
  double clock;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double gaussian(std::mt19937_64& rng, double std_dev) {
  if (std_dev <= 0.0) {
    return 0.0;
  }
  return std::normal_distribution<double>(0.0, std_dev)(rng);
}

/// Fraction of soc swept between the label-spec voltage crossings at the
/// reference current; used to size the pack so healthy labels land in band.
double label_soc_fraction(const OcvCurve& ocv, const CapacityLabelSpec& spec,
                          double resistance) {
  const double drop = spec.i_ref_a * resistance;
  const double soc_low = ocv.soc_at(spec.v_low - drop);
  const double soc_high = ocv.soc_at(spec.v_high - drop);
  return (soc_high - soc_low) / 100.0;
}

void add_measurement_noise(Eigen::MatrixXd& record, const GenConfig& config,
                           std::mt19937_64& rng) {
  const double v_std = config.noise_std[kAvgCellVoltage];
  const double i_std = config.noise_std[kCurrent];
  const double t_std = config.noise_std[kMaxTemp];
  const double soc_std = config.noise_std[kSoc];
  for (Eigen::Index i = 0; i < record.rows(); ++i) {
    const double nv = gaussian(rng, v_std);
    record(i, kAvgCellVoltage) += nv;
    record(i, kMaxCellVoltage) += nv;
    record(i, kMinCellVoltage) += nv;
    record(i, kCurrent) += gaussian(rng, i_std);
    const double nt = gaussian(rng, t_std);
    record(i, kMaxTemp) += nt;
    record(i, kMinTemp) += nt;
    if (soc_std > 0.0) {
      record(i, kSoc) += gaussian(rng, soc_std);
    }
  }
  if (soc_std > 0.0) {
    double running = 0.0;
    for (Eigen::Index i = 0; i < record.rows(); ++i) {
      running = i == 0 ? record(i, kSoc) : std::max(running, record(i, kSoc));
      record(i, kSoc) = std::clamp(running, 0.0, 100.0);
    }
  }
}

void add_fluctuation_episodes(Eigen::MatrixXd& record, double severity,
                              std::mt19937_64& rng) {
  const Eigen::Index rows = record.rows();
  if (rows < 4) {
    return;
  }
  const int episodes = 1 + static_cast<int>(rng() % 3);
  const double noise_std = 0.08 * severity;
  for (int e = 0; e < episodes; ++e) {
    const auto len = static_cast<Eigen::Index>(
        std::max(2.0, uniform(rng, 0.05, 0.15) * static_cast<double>(rows)));
    const auto start = static_cast<Eigen::Index>(
        uniform(rng, 0.0, static_cast<double>(rows - len)));
    for (Eigen::Index i = start; i < start + len; ++i) {
      const double n = gaussian(rng, noise_std);
      record(i, kAvgCellVoltage) += n;
      record(i, kMaxCellVoltage) += n;
      record(i, kMinCellVoltage) += n;
    }
  }
}

Vehicle generate_vehicle(const GenConfig& config, int vehicle_index,
                         bool anomalous, int anomalous_index) {
  std::mt19937_64 rng = make_engine(config.seed, "vehicle",
                                    static_cast<std::uint64_t>(vehicle_index));

  char id_buf[16];
  std::snprintf(id_buf, sizeof(id_buf), "v%04d", vehicle_index);
  Vehicle vehicle{id_buf, anomalous ? 1 : 0, {}};

  VehicleDraw draw;
  draw.resistance = uniform(rng, 0.0015, 0.0030);
  draw.voltage_spread = uniform(rng, 0.012, 0.030);
  draw.base_fade = uniform(rng, 0.0, 0.03);
  const double band_margin =
      0.02 * (config.capacity_band_high - config.capacity_band_low);
  draw.target_label = uniform(rng, config.capacity_band_low + band_margin,
                              config.capacity_band_high - band_margin);
  draw.mileage = uniform(rng, 1000.0, 30000.0);
  draw.clock = uniform(rng, 0.0, 86400.0);

  FaultSpec fault;
  if (anomalous) {
    fault.kind = config.fault_kinds[static_cast<std::size_t>(anomalous_index) %
                                    config.fault_kinds.size()];
    fault.severity = config.fault_severity;
    fault.onset_fraction = uniform(rng, 0.15, 0.45);
  }

  const OcvCurve ocv = OcvCurve::standard();
  const double frac = label_soc_fraction(ocv, config.label_spec, draw.resistance);
  const double nominal_capacity =
      draw.target_label / (frac * (1.0 - draw.base_fade));

  const bool target_mode = config.records_per_vehicle <= 0;
  const int target_snippets = config.snippets_per_vehicle;
  const int max_records =
      target_mode ? std::max(50, 4 * target_snippets) : config.records_per_vehicle;

  double fade_extra = 0.0;
  int record_index = 0;
  while (true) {
    if (target_mode) {
      if (static_cast<int>(vehicle.snippets.size()) >= target_snippets) {
        break;
      }
      if (record_index >= max_records) {
        throw std::runtime_error("generate_fleet: vehicle " + vehicle.vehicle_id +
                                 " cannot reach the snippet target; check config");
      }
    } else if (record_index >= max_records) {
      break;
    }

    const double progress =
        target_mode
            ? static_cast<double>(vehicle.snippets.size()) / target_snippets
            : static_cast<double>(record_index) / max_records;
    const bool past_onset = anomalous && progress >= fault.onset_fraction;
    const bool manifests =
        past_onset && uniform(rng, 0.0, 1.0) < config.transient_fraction;
    if (manifests && fault.kind == FaultKind::kAcceleratedFade) {
      fade_extra += fault.severity * config.fade_per_manifest;
    }

    BatteryState state;
    state.ocv = ocv;
    state.nominal_capacity_ah = nominal_capacity;
    state.fade_fraction = std::min(
        0.9, draw.base_fade + record_index * config.base_fade_per_record + fade_extra);
    state.internal_resistance = draw.resistance * (1.0 + fade_extra);
    if (manifests && fault.kind == FaultKind::kResistanceDrift) {
      state.internal_resistance *= 1.0 + fault.severity;
    }
    state.temperature_base = uniform(rng, 10.0, 35.0);

    ChargeProtocol protocol;
    protocol.precharge_current_a = uniform(rng, 10.0, 16.0);
    protocol.cc_current_a = uniform(rng, 26.0, 44.0);
    protocol.cv_voltage_v = uniform(rng, 4.08, 4.14);
    protocol.dt_s = config.dt_s;
    protocol.precharge_soc_end = uniform(rng, 8.0, 14.0);

    SimOptions options;
    options.start_soc = uniform(rng, 3.0, 25.0);
    options.voltage_spread = draw.voltage_spread * (1.0 + 3.0 * fade_extra);
    if (manifests && fault.kind == FaultKind::kCellImbalance) {
      options.voltage_spread *= 1.0 + 4.0 * fault.severity;
    }
    options.temp_spread = uniform(rng, 1.0, 3.0);
    options.start_timestamp = draw.clock;

    Eigen::MatrixXd record = simulate_charge(state, protocol, options);

    const bool truncate = uniform(rng, 0.0, 1.0) < config.truncation_probability;
    const double keep_frac = uniform(rng, 0.35, 0.90);
    if (truncate) {
      record.conservativeResize(
          static_cast<Eigen::Index>(std::floor(record.rows() * keep_frac)),
          Eigen::NoChange);
    }

    // Label from the clean record; faults act through the physics above,
    // measurement noise does not belong in an engineer-assigned label.
    const std::optional<double> label = capacity_label(record, config.label_spec);

    if (manifests && fault.kind == FaultKind::kVoltageFluctuation) {
      add_fluctuation_episodes(record, fault.severity, rng);
    }
    add_measurement_noise(record, config, rng);

    if (record.rows() >= kSnippetLength) {
      std::vector<ChargingSnippet> snippets = extract_snippets(
          record, kSnippetLength, config.stride, vehicle.vehicle_id, draw.mileage,
          label, static_cast<int>(vehicle.snippets.size()));
      for (ChargingSnippet& s : snippets) {
        if (target_mode &&
            static_cast<int>(vehicle.snippets.size()) >= target_snippets) {
          break;
        }
        vehicle.snippets.push_back(std::move(s));
      }
    }

    const double duration =
        record.rows() > 0
            ? record(record.rows() - 1, kTimestamp) - record(0, kTimestamp)
            : 0.0;
    draw.clock += duration + uniform(rng, 0.5, 3.0) * 86400.0;
    draw.mileage += uniform(rng, 80.0, 400.0);
    ++record_index;
  }

  return vehicle;
}

}  // namespace

std::vector<Vehicle> generate_fleet(const GenConfig& config) {
  if (config.n_normal < 0 || config.n_anomalous < 0) {
    throw std::invalid_argument("generate_fleet: negative vehicle counts");
  }
  if (config.n_anomalous > 0 && config.fault_kinds.empty()) {
    throw std::invalid_argument("generate_fleet: anomalous vehicles need fault kinds");
  }
  std::vector<Vehicle> fleet;
  fleet.reserve(static_cast<std::size_t>(config.n_normal + config.n_anomalous));
  for (int i = 0; i < config.n_normal + config.n_anomalous; ++i) {
    const bool anomalous = i >= config.n_normal;
    fleet.push_back(
        generate_vehicle(config, i, anomalous, anomalous ? i - config.n_normal : 0));
  }
  return fleet;
}

}  // namespace evbat::synth
