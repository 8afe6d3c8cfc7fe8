#pragma once

#include "evbat/snippet.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace evbat::synth {

/// Piecewise-linear open-circuit voltage as a function of state of charge.
/// Knots must be strictly increasing in both soc and voltage.
struct OcvCurve {
  std::vector<std::pair<double, double>> knots;  // (soc percent, volts)

  /// 6-knot curve spanning 3.40 V at 0% to 4.20 V at 100%.
  static OcvCurve standard();

  double voltage_at(double soc) const;  // clamped outside [first, last] knot
  double soc_at(double voltage) const;  // inverse, clamped likewise
  double min_voltage() const { return knots.front().second; }
  double max_voltage() const { return knots.back().second; }
};

/// Equivalent-circuit cell stand-in: OCV source behind a series resistance.
struct BatteryState {
  double nominal_capacity_ah = 40.0;
  double fade_fraction = 0.0;          // in [0,1)
  double internal_resistance = 0.002;  // ohm, > 0 (0 allowed for ideal cells)
  OcvCurve ocv = OcvCurve::standard();
  double temperature_base = 25.0;  // degC ambient

  double effective_capacity_ah() const {
    return nominal_capacity_ah * (1.0 - fade_fraction);
  }
};

/// CC-CV charging protocol with a low-current pre-charge stage.
struct ChargeProtocol {
  double precharge_current_a = 8.0;
  double cc_current_a = 35.0;
  double cv_voltage_v = 4.10;
  double dt_s = 10.0;
  double precharge_soc_end = 10.0;  // percent; pre-charge runs while soc below
  double cv_cutoff_frac = 0.05;     // CV ends once current <= frac * cc current
};

/// Knobs that shape the recorded channels but not the charge dynamics.
struct SimOptions {
  double start_soc = 10.0;        // percent
  double voltage_spread = 0.02;   // max - min cell voltage, volts
  double temp_spread = 2.0;       // max - min temperature, degC
  double thermal_tau_s = 500.0;   // first-order lag of pack temperature
  double thermal_gain_k_per_w = 3.0;  // steady-state rise per watt of I^2 R
  double start_timestamp = 0.0;   // seconds
  int max_steps = 200000;
};

/// Simulates one full charging record: pre-charge, constant current until the
/// terminal voltage (ocv + I*R) reaches the CV setpoint, then constant voltage
/// with the circuit's naturally decaying current until cutoff. Returns a
/// (steps x 8) noise-free record in the standard channel order.
/// Throws std::invalid_argument if the setpoint is unreachable.
Eigen::MatrixXd simulate_charge(const BatteryState& state,
                                const ChargeProtocol& protocol,
                                const SimOptions& options = {});

/// Capacity-label definition: charge integrated between the first upward
/// crossings of v_low and v_high on the average cell voltage, eligible only
/// when the current over that span stays within i_tol_frac of i_ref.
struct CapacityLabelSpec {
  double v_low = 3.77;    // volts
  double v_high = 4.05;   // volts
  double i_ref_a = 35.0;  // amps
  double i_tol_frac = 0.20;
};

/// Trapezoidal time-integral of current between the crossings, in A*h.
/// Absence (nullopt) is the valid signal for ineligible records.
std::optional<double> capacity_label(const Eigen::MatrixXd& record,
                                     const CapacityLabelSpec& spec = {});

}  // namespace evbat::synth
