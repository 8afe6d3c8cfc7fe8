#include "evbat/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace evbat::synth {

OcvCurve OcvCurve::standard() {
  return OcvCurve{{{0.0, 3.40},
                   {20.0, 3.55},
                   {40.0, 3.70},
                   {60.0, 3.85},
                   {80.0, 4.00},
                   {100.0, 4.20}}};
}

double OcvCurve::voltage_at(double soc) const {
  if (soc <= knots.front().first) {
    return knots.front().second;
  }
  if (soc >= knots.back().first) {
    return knots.back().second;
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (soc <= knots[i].first) {
      const auto& [s0, v0] = knots[i - 1];
      const auto& [s1, v1] = knots[i];
      return v0 + (v1 - v0) * (soc - s0) / (s1 - s0);
    }
  }
  return knots.back().second;
}

double OcvCurve::soc_at(double voltage) const {
  if (voltage <= knots.front().second) {
    return knots.front().first;
  }
  if (voltage >= knots.back().second) {
    return knots.back().first;
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (voltage <= knots[i].second) {
      const auto& [s0, v0] = knots[i - 1];
      const auto& [s1, v1] = knots[i];
      return s0 + (s1 - s0) * (voltage - v0) / (v1 - v0);
    }
  }
  return knots.back().first;
}

Eigen::MatrixXd simulate_charge(const BatteryState& state,
                                const ChargeProtocol& protocol,
                                const SimOptions& options) {
  if (protocol.dt_s <= 0.0) {
    throw std::invalid_argument("simulate_charge: dt must be positive");
  }
  if (state.effective_capacity_ah() <= 0.0) {
    throw std::invalid_argument("simulate_charge: non-positive effective capacity");
  }
  const double start_ocv = state.ocv.voltage_at(options.start_soc);
  if (protocol.cv_voltage_v <= start_ocv) {
    throw std::invalid_argument("simulate_charge: unreachable setpoint (CV voltage " +
                                std::to_string(protocol.cv_voltage_v) +
                                " V at or below starting OCV " +
                                std::to_string(start_ocv) + " V)");
  }
  if (protocol.cv_voltage_v > state.ocv.max_voltage()) {
    throw std::invalid_argument("simulate_charge: CV voltage above OCV curve range");
  }

  const double dt = protocol.dt_s;
  const double resistance = state.internal_resistance;
  const double cutoff_a = protocol.cv_cutoff_frac * protocol.cc_current_a;
  const double capacity_as = state.effective_capacity_ah() * 3600.0;

  double soc = options.start_soc;
  double temp = state.temperature_base;
  double t = options.start_timestamp;

  std::vector<Eigen::Matrix<double, 1, kChannelCount>> rows;
  for (int step = 0; step < options.max_steps; ++step) {
    if (soc >= 100.0) {
      break;
    }
    const double ocv = state.ocv.voltage_at(soc);
    double current;
    if (soc < protocol.precharge_soc_end) {
      current = protocol.precharge_current_a;
    } else if (ocv + protocol.cc_current_a * resistance < protocol.cv_voltage_v) {
      current = protocol.cc_current_a;
    } else {
      // CV: the circuit fixes the current at (V_set - OCV) / R.
      if (resistance <= 0.0) {
        break;
      }
      current = std::min((protocol.cv_voltage_v - ocv) / resistance,
                         protocol.cc_current_a);
      if (current <= cutoff_a) {
        break;
      }
    }

    const double terminal_v = ocv + current * resistance;
    Eigen::Matrix<double, 1, kChannelCount> row;
    row(kAvgCellVoltage) = terminal_v;
    row(kCurrent) = current;
    row(kMaxCellVoltage) = terminal_v + 0.5 * options.voltage_spread;
    row(kMinCellVoltage) = terminal_v - 0.5 * options.voltage_spread;
    row(kMaxTemp) = temp + 0.5 * options.temp_spread;
    row(kMinTemp) = temp - 0.5 * options.temp_spread;
    row(kSoc) = std::min(soc, 100.0);
    row(kTimestamp) = t;
    rows.push_back(row);

    soc = std::min(100.0, soc + current * dt * 100.0 / capacity_as);
    const double temp_target = state.temperature_base +
                               options.thermal_gain_k_per_w * current * current * resistance;
    temp += (temp_target - temp) * dt / options.thermal_tau_s;
    t += dt;
  }

  Eigen::MatrixXd record(static_cast<Eigen::Index>(rows.size()), kChannelCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    record.row(static_cast<Eigen::Index>(i)) = rows[i];
  }
  return record;
}

namespace {

struct Crossing {
  Eigen::Index segment;  // crossing lies in [segment, segment+1]
  double time;
  double current;
};

std::optional<Crossing> first_upward_crossing(const Eigen::MatrixXd& record,
                                              double level,
                                              Eigen::Index from_segment) {
  for (Eigen::Index k = from_segment; k + 1 < record.rows(); ++k) {
    const double v0 = record(k, kAvgCellVoltage);
    const double v1 = record(k + 1, kAvgCellVoltage);
    if (v0 < level && level <= v1) {
      const double frac = (level - v0) / (v1 - v0);
      const double t0 = record(k, kTimestamp);
      const double t1 = record(k + 1, kTimestamp);
      const double i0 = record(k, kCurrent);
      const double i1 = record(k + 1, kCurrent);
      return Crossing{k, t0 + frac * (t1 - t0), i0 + frac * (i1 - i0)};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> capacity_label(const Eigen::MatrixXd& record,
                                     const CapacityLabelSpec& spec) {
  if (record.rows() < 2) {
    return std::nullopt;
  }
  const auto low = first_upward_crossing(record, spec.v_low, 0);
  if (!low) {
    return std::nullopt;
  }
  const auto high = first_upward_crossing(record, spec.v_high, low->segment);
  if (!high || high->time <= low->time) {
    return std::nullopt;
  }

  const double i_min = spec.i_ref_a * (1.0 - spec.i_tol_frac);
  const double i_max = spec.i_ref_a * (1.0 + spec.i_tol_frac);
  const auto in_band = [&](double i) { return i >= i_min && i <= i_max; };
  if (!in_band(low->current) || !in_band(high->current)) {
    return std::nullopt;
  }
  for (Eigen::Index k = low->segment + 1; k <= high->segment; ++k) {
    if (!in_band(record(k, kCurrent))) {
      return std::nullopt;
    }
  }

  // Trapezoidal integral of current over [t_lo, t_hi], interpolated endpoints.
  double charge_as = 0.0;
  if (low->segment == high->segment) {
    charge_as = 0.5 * (low->current + high->current) * (high->time - low->time);
  } else {
    charge_as += 0.5 * (low->current + record(low->segment + 1, kCurrent)) *
                 (record(low->segment + 1, kTimestamp) - low->time);
    for (Eigen::Index k = low->segment + 1; k < high->segment; ++k) {
      charge_as += 0.5 * (record(k, kCurrent) + record(k + 1, kCurrent)) *
                   (record(k + 1, kTimestamp) - record(k, kTimestamp));
    }
    charge_as += 0.5 * (record(high->segment, kCurrent) + high->current) *
                 (high->time - record(high->segment, kTimestamp));
  }
  return charge_as / 3600.0;
}

}  // namespace evbat::synth
