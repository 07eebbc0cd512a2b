#pragma once
#include <utility>
#include <vector>

#include "wpmec/model.hpp"

// Pure per-slot physics: rate and energy formulas plus the queue dynamics.
// No control logic lives here; policies own feasibility and these functions
// validate rather than repair.

namespace wpmec {

struct BitsEnergy {
  double bits = 0.0;
  double energy_j = 0.0;
};

/// Nonlinear harvested energy at one device for charging power p0 and
/// downlink gain h: (a1*p0*h + a2)/(p0*h + a3) - a2/a3. Concave and
/// non-decreasing in p0, zero at p0 = 0, saturating at (a1*a3 - a2)/a3.
/// With sys.harvest_spans_slot the value is additionally multiplied by the
/// slot duration.
double energy_harvested(double p0_w, double wpt_gain, const WdParams& wd,
                        const SystemParams& sys);

/// Local computing at CPU speed f: bits = f*T/phi, energy = kappa*f^3*T.
/// f outside [0, max_cpu_hz] is a contract violation.
BitsEnergy local_compute(double cpu_hz, const WdParams& wd,
                         const SystemParams& sys);

/// Offloading at power p for time tau against SNR-per-Watt gamma:
/// bits = W*tau*log2(1 + p*gamma), energy = p*tau. tau = 0 maps to (0, 0)
/// (perspective-function convention).
BitsEnergy offload(double tx_power_w, double tau_s, double snr_per_watt,
                   const SystemParams& sys);

/// Edge computing at the HAP, same form as local_compute with HAP constants.
BitsEnergy edge_compute(double cpu_hz, const SystemParams& sys);

/// Validates an action against the slot's constraints: variable boxes, the
/// time budget, data causality at devices and HAP, and the battery spending
/// rule (no spend below the minimum level, spend bounded by the battery).
/// Throws InfeasibleActionError identifying the violated constraint.
void validate_action(const SystemState& state, const Action& action,
                     const ChannelState& channel, const SystemParams& sys,
                     const std::vector<WdParams>& wds);

/// Executes one slot: computes all rates and energies, validates, and
/// applies the queue, battery and deficit updates. Sensed bits join the
/// device queue for the next slot.
SlotOutcome step_queues(const SystemState& state, const Action& action,
                        const ChannelState& channel, const SystemParams& sys,
                        const std::vector<WdParams>& wds);

}  // namespace wpmec
