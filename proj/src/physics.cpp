#include "wpmec/physics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wpmec {

namespace {

// Feasibility slack for validating solver-constructed actions that sit
// exactly on a constraint boundary.
constexpr double kRelTol = 1e-9;

double slack(double bound) { return kRelTol * std::max(1.0, std::abs(bound)); }

}  // namespace

double energy_harvested(double p0_w, double wpt_gain, const WdParams& wd,
                        const SystemParams& sys) {
  double x = p0_w * wpt_gain;
  double e = (wd.eh_a1 * x + wd.eh_a2) / (x + wd.eh_a3) - wd.eh_a2 / wd.eh_a3;
  if (sys.harvest_spans_slot) e *= sys.slot_duration_s;
  return e;
}

BitsEnergy local_compute(double cpu_hz, const WdParams& wd,
                         const SystemParams& sys) {
  if (!(cpu_hz >= 0.0) || cpu_hz > wd.max_cpu_hz + slack(wd.max_cpu_hz))
    throw InfeasibleActionError(ConstraintId::kBoxConstraint, -1, -1,
                                "cpu_hz=" + std::to_string(cpu_hz) +
                                    " outside [0, " +
                                    std::to_string(wd.max_cpu_hz) + "]");
  double t = sys.slot_duration_s;
  return {cpu_hz * t / wd.cycles_per_bit,
          wd.cpu_energy_coeff * cpu_hz * cpu_hz * cpu_hz * t};
}

BitsEnergy offload(double tx_power_w, double tau_s, double snr_per_watt,
                   const SystemParams& sys) {
  if (tau_s <= 0.0 || tx_power_w <= 0.0) return {0.0, 0.0};
  double bits =
      sys.bandwidth_hz * tau_s * std::log2(1.0 + tx_power_w * snr_per_watt);
  return {bits, tx_power_w * tau_s};
}

BitsEnergy edge_compute(double cpu_hz, const SystemParams& sys) {
  if (!(cpu_hz >= 0.0) ||
      cpu_hz > sys.hap_max_cpu_hz + slack(sys.hap_max_cpu_hz))
    throw InfeasibleActionError(ConstraintId::kBoxConstraint, -1, -1,
                                "edge cpu_hz outside [0, f0max]");
  double t = sys.slot_duration_s;
  return {cpu_hz * t / sys.hap_cycles_per_bit,
          sys.hap_cpu_energy_coeff * cpu_hz * cpu_hz * cpu_hz * t};
}

void validate_action(const SystemState& state, const Action& action,
                     const ChannelState& channel, const SystemParams& sys,
                     const std::vector<WdParams>& wds) {
  const int k = sys.num_devices;
  const long slot = state.slot;
  auto box = [&](double v, double hi, int dev, const char* what) {
    if (!(v >= 0.0) || v > hi + slack(hi))
      throw InfeasibleActionError(
          ConstraintId::kBoxConstraint, dev, slot,
          std::string(what) + "=" + std::to_string(v) + " outside [0, " +
              std::to_string(hi) + "]");
  };

  box(action.hap_tx_power_w, sys.hap_max_tx_power_w, -1, "hap_tx_power_w");
  box(action.hap_cpu_hz, sys.hap_max_cpu_hz, -1, "hap_cpu_hz");

  double edge_bits =
      action.hap_cpu_hz * sys.slot_duration_s / sys.hap_cycles_per_bit;
  if (edge_bits > state.hap_queue_bits + slack(state.hap_queue_bits))
    throw InfeasibleActionError(
        ConstraintId::kHapDataCausality, -1, slot,
        "edge bits " + std::to_string(edge_bits) + " exceed queue " +
            std::to_string(state.hap_queue_bits));

  double tau_sum = 0.0;
  for (int i = 0; i < k; ++i) {
    const WdParams& wd = wds[i];
    if (!(wd.battery_capacity > 0.0))
      throw ValidationError("device.battery_capacity",
                            "unresolved capacity; call "
                            "resolve_battery_capacities first");
    box(action.sense_bits[i], sys.max_sense_bits, i, "sense_bits");
    box(action.wd_tx_power_w[i], wd.max_tx_power_w, i, "wd_tx_power_w");
    box(action.wd_cpu_hz[i], wd.max_cpu_hz, i, "wd_cpu_hz");
    box(action.offload_time_s[i], sys.slot_duration_s, i, "offload_time_s");
    tau_sum += action.offload_time_s[i];

    BitsEnergy local = local_compute(action.wd_cpu_hz[i], wd, sys);
    BitsEnergy off = offload(action.wd_tx_power_w[i], action.offload_time_s[i],
                             channel.offload_snr_per_watt[i], sys);
    double qi = state.wd_queue_bits[i];
    if (local.bits + off.bits > qi + slack(qi))
      throw InfeasibleActionError(
          ConstraintId::kWdDataCausality, i, slot,
          "processed bits " + std::to_string(local.bits + off.bits) +
              " exceed queue " + std::to_string(qi));

    double spend_j = sys.sensing_energy_per_bit_j * action.sense_bits[i] +
                     local.energy_j + off.energy_j;
    double scaled = sys.energy_scale * spend_j;
    double battery = state.battery[i];
    if (battery < sys.min_battery_scaled()) {
      if (scaled > slack(1.0))
        throw InfeasibleActionError(
            ConstraintId::kEnergyCausality, i, slot,
            "battery below minimum level but the device spends energy");
    } else if (scaled > battery + slack(battery)) {
      throw InfeasibleActionError(
          ConstraintId::kEnergyCausality, i, slot,
          "scaled spend " + std::to_string(scaled) + " exceeds battery " +
              std::to_string(battery));
    }
  }
  if (tau_sum > sys.slot_duration_s + slack(sys.slot_duration_s))
    throw InfeasibleActionError(
        ConstraintId::kTimeBudget, -1, slot,
        "offload times sum to " + std::to_string(tau_sum));
}

SlotOutcome step_queues(const SystemState& state, const Action& action,
                        const ChannelState& channel, const SystemParams& sys,
                        const std::vector<WdParams>& wds) {
  validate_action(state, action, channel, sys, wds);
  const int k = sys.num_devices;
  const double t = sys.slot_duration_s;

  SlotOutcome out;
  out.local_bits.resize(k);
  out.offload_bits.resize(k);
  out.harvested_j.resize(k);
  out.wd_energy_j.resize(k);
  out.next_state = state;
  out.next_state.slot = state.slot + 1;

  double total_offload_bits = 0.0;
  for (int i = 0; i < k; ++i) {
    const WdParams& wd = wds[i];
    BitsEnergy local = local_compute(action.wd_cpu_hz[i], wd, sys);
    BitsEnergy off = offload(action.wd_tx_power_w[i], action.offload_time_s[i],
                             channel.offload_snr_per_watt[i], sys);
    out.local_bits[i] = local.bits;
    out.offload_bits[i] = off.bits;
    total_offload_bits += off.bits;
    out.wd_energy_j[i] = sys.sensing_energy_per_bit_j * action.sense_bits[i] +
                         local.energy_j + off.energy_j;
    out.harvested_j[i] =
        energy_harvested(action.hap_tx_power_w, channel.wpt_gain[i], wd, sys);

    double q_left = state.wd_queue_bits[i] - local.bits - off.bits;
    out.next_state.wd_queue_bits[i] =
        std::max(q_left, 0.0) + action.sense_bits[i];

    double b = state.battery[i] - sys.energy_scale * out.wd_energy_j[i] +
               sys.energy_scale * out.harvested_j[i];
    out.next_state.battery[i] =
        std::clamp(b, 0.0, wds[i].battery_capacity);
  }

  BitsEnergy edge = edge_compute(action.hap_cpu_hz, sys);
  out.edge_bits = edge.bits;
  out.hap_energy_j = action.hap_tx_power_w * t + edge.energy_j;
  out.next_state.hap_queue_bits =
      std::max(state.hap_queue_bits - edge.bits, 0.0) + total_offload_bits;
  out.next_state.deficit_queue =
      std::max(state.deficit_queue +
                   sys.deficit_scale *
                       (out.hap_energy_j - sys.hap_avg_energy_budget_j),
               0.0);
  return out;
}

}  // namespace wpmec
