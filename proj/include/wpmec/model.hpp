#pragma once
#include <cstdint>
#include <vector>

#include "wpmec/errors.hpp"

// Domain types and physical constants for the wireless-powered MEC system:
// one hybrid access point (HAP) that broadcasts RF energy and runs an edge
// server, and K wireless devices (WDs) that harvest energy, sense data, and
// process it locally or by offloading over TDMA.
//
// Unit conventions, used everywhere in the library:
//   - SI throughout: seconds, Watts, Joules, Hz, bits.
//   - Battery-side quantities (battery level, capacity, deficit thresholds)
//     are kept in "scaled energy" units: Joules multiplied by energy_scale
//     (e.g. energy_scale = 1000 means the battery is tracked in mJ).
//   - The HAP deficit queue is kept in deficit_scale * Joule units.
//   - dBm-valued inputs are converted to Watts at parse time.

namespace wpmec {

/// System-wide constants (HAP hardware, radio, controller weights).
struct SystemParams {
  double slot_duration_s = 5.0;          // T
  double bandwidth_hz = 30e3;            // W, offloading bandwidth
  double noise_power_w = 1e-10;          // N0 at the HAP receiver
  double hap_max_tx_power_w = 3.0;       // WPT transmit power cap
  double hap_max_cpu_hz = 2e9;           // edge CPU cap
  double hap_cpu_energy_coeff = 1e-26;   // J*s^2/cycle^3
  double hap_cycles_per_bit = 1000.0;    // edge cycles per bit
  double hap_avg_energy_budget_j = 8.0;  // long-term average HAP energy/slot
  double sensing_energy_per_bit_j = 1e-9;
  double max_sense_bits = 512e3;         // per-slot sensing cap (512 kbit)
  double lyapunov_v = 32e5;              // sensing-vs-delay weight
  double energy_scale = 1000.0;          // battery unit scale, >= 1
  double deficit_scale = 1.0;            // deficit queue unit scale, > 0
  double min_battery_j = 1e-3;           // device spend cut-off level
  int num_devices = 8;                   // K
  bool harvest_spans_slot = false;  // multiply harvested energy by T (off:
                                    // the conversion model already yields
                                    // per-slot energy)

  /// min_battery_j expressed in battery (scaled) units.
  double min_battery_scaled() const { return energy_scale * min_battery_j; }

  void validate() const;  // throws ValidationError
};

/// Sentinel: derive the battery capacity from the safe-capacity threshold.
inline constexpr double kAutoCapacity = -1.0;

/// Per-device constants.
struct WdParams {
  double weight = 1.0;               // w_i in the sensing objective
  double max_tx_power_w = 3.16227766016838e-3;  // 5 dBm
  double max_cpu_hz = 16e6;
  double cpu_energy_coeff = 1e-26;   // J*s^2/cycle^3
  double cycles_per_bit = 1000.0;
  double distance_m = 2.0;
  // Nonlinear energy-harvesting response constants. Valid sets satisfy
  // a1*a3 - a2 >= 0 and a3 > 0, which makes the harvested energy a concave,
  // non-decreasing function of the charging power.
  double eh_a1 = 2.463;
  double eh_a2 = 1.635;
  double eh_a3 = 0.826;
  double battery_capacity = kAutoCapacity;  // scaled units; kAutoCapacity =
                                            // derive from battery_threshold
  bool unsafe_capacity = false;  // accept a capacity below the safe threshold

  void validate() const;  // throws ValidationError
};

/// Radio propagation constants shared by both bands.
struct ChannelParams {
  double wpt_carrier_hz = 915e6;
  double comms_carrier_hz = 2.4e9;
  double antenna_gain = 4.11;
  double pathloss_exponent = 2.4;  // >= 2
  std::uint64_t rng_seed = 1;

  void validate() const;
};

/// One slot's channel realization.
struct ChannelState {
  std::vector<double> wpt_gain;             // downlink energy gain per device
  std::vector<double> offload_gain;         // uplink data gain per device
  std::vector<double> offload_snr_per_watt; // offload_gain / N0
};

/// Queue backlog at the start of a slot.
struct SystemState {
  long slot = 0;
  double hap_queue_bits = 0.0;       // Q0
  double deficit_queue = 0.0;        // Z0, scaled by deficit_scale
  std::vector<double> wd_queue_bits; // Qi
  std::vector<double> battery;       // Bi, scaled units, within [0, capacity]
};

/// One slot's full control decision.
struct Action {
  double hap_tx_power_w = 0.0;
  double hap_cpu_hz = 0.0;
  std::vector<double> sense_bits;
  std::vector<double> wd_tx_power_w;
  std::vector<double> wd_cpu_hz;
  std::vector<double> offload_time_s;
};

/// Derived rates, energies and the updated state for one executed slot.
struct SlotOutcome {
  std::vector<double> local_bits;    // processed on-device
  std::vector<double> offload_bits;  // shipped to the HAP
  double edge_bits = 0.0;            // processed at the edge
  std::vector<double> harvested_j;
  std::vector<double> wd_energy_j;   // sensing + local + offload spend
  double hap_energy_j = 0.0;         // WPT + edge compute spend
  SystemState next_state;
};

/// Worst-case per-slot magnitudes and the drift-bound constant built from
/// them; used by the stability analysis checks, not by the controller.
struct DriftBound {
  double c_constant = 0.0;
  std::vector<double> local_bits_max;    // per device
  std::vector<double> offload_bits_max;  // per device, fading average
  std::vector<double> wd_energy_max_j;
  std::vector<double> harvest_max_j;
  double edge_bits_max = 0.0;
  double hap_energy_max_j = 0.0;
};

double dbm_to_watt(double dbm);

/// Defaults for a K-device deployment: devices share identical hardware and
/// are placed on a line from 2 m to 10 m (a single device sits at 2 m).
struct DefaultSetup {
  SystemParams system;
  std::vector<WdParams> devices;
  ChannelParams channel;
};
DefaultSetup default_params(int k);

void validate_all(const SystemParams& sys, const std::vector<WdParams>& wds,
                  const ChannelParams& chan);

/// Worst-case per-slot bounds and the quadratic drift constant. The fading
/// average in offload_bits_max is a seeded Monte-Carlo estimate
/// (100000 draws per device, fixed internal seed).
DriftBound drift_bound(const SystemParams& sys,
                       const std::vector<WdParams>& wds,
                       const ChannelParams& chan);

}  // namespace wpmec
