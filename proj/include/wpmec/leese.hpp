#pragma once
#include <vector>

#include "wpmec/model.hpp"

// The LEESE per-slot controller. Each slot it maximizes a drift-plus-penalty
// surrogate that rewards sensing and drains queues, decomposed into four
// independent subproblems: wireless charging power, edge CPU speed, per-device
// sensing, and task execution (local CPU + offload power + time shares).
// All solutions are closed-form up to 1-D bisections.

namespace wpmec {

/// Block-coordinate-descent knobs for the task-execution subproblem.
struct BcdConfig {
  double tol = 1e-6;    // relative objective improvement threshold
  int max_iters = 50;   // solve passes over the (cpu, power) block
  std::vector<double> tau_init;  // empty: uniform T/K

  void validate() const;
};

struct BisectionConfig {
  double abs_tol = 1e-12;  // on the root variable
  double rel_tol = 0.0;
  int max_iters = 200;

  void validate() const;
};

/// Optimal WPT power: the charging gain vs. deficit tradeoff has a threshold
/// structure. Full power when the deficit queue is empty; zero when the
/// marginal charging value at 0 is already non-positive; otherwise the root
/// of the concave objective's derivative, clamped to the power box.
double charging_power(const SystemState& state, const ChannelState& channel,
                      const SystemParams& sys, const std::vector<WdParams>& wds,
                      const BisectionConfig& bisect = {});

/// Optimal edge CPU speed: min(sqrt(Q0 / (3*Z0*lambda_c*phi0*kappa0)), cap)
/// with cap = min(Q0*phi0/T, f0max). An empty deficit queue makes the
/// objective increasing, so the cap is returned.
double edge_cpu(const SystemState& state, const SystemParams& sys);

/// ON-OFF sensing: each device senses max_sense_bits iff
/// Qi - V*wi - lambda_e*(Bi - capacity)*e_unit <= 0 (boundary inclusive).
std::vector<double> sensing(const SystemState& state, const SystemParams& sys,
                            const std::vector<WdParams>& wds);

struct WdExec {
  double cpu_hz = 0.0;
  double tx_power_w = 0.0;
};

/// Optimal (cpu, power) for one device at a fixed offload time share.
/// Inputs are the device queue, the HAP queue, the perturbed battery
/// b_tilde = battery - capacity (<= 0, scaled units), and the offload SNR
/// per Watt. Covers the offload-off branch (device queue below HAP queue,
/// tau = 0, or dead channel), the unconstrained-caps branch, and the
/// data-constraint-binding branch solved by bisection on the monotone
/// derivative.
WdExec per_wd_execution(double qi_bits, double q0_bits, double b_tilde,
                        double snr_per_watt, double tau_s,
                        const SystemParams& sys, const WdParams& wd,
                        const BisectionConfig& bisect = {});

/// Greedy time allocation for fixed per-device rates: devices sorted by
/// marginal value Ci descending (ties by index) are filled to
/// min(tau_ub, remaining time); non-positive Ci gets zero.
std::vector<double> time_allocation(const std::vector<double>& ci,
                                    const std::vector<double>& tau_ub,
                                    double slot_duration_s);

struct BcdResult {
  std::vector<double> cpu_hz;
  std::vector<double> tx_power_w;
  std::vector<double> offload_time_s;
  double objective = 0.0;
  int iterations = 0;                   // (cpu, power) solve passes
  std::vector<double> objective_trace;  // value after each pass
};

/// Task-execution solver: alternates exact (cpu, power) solves at fixed time
/// shares with exact time reallocation until the objective improvement
/// drops below tol or max_iters passes. Devices whose queue is below the
/// HAP queue never offload (their power and time are pinned to zero).
/// max_iters = 1 returns the solve at tau_init untouched.
BcdResult bcd_execution(const SystemState& state, const ChannelState& channel,
                        const SystemParams& sys,
                        const std::vector<WdParams>& wds,
                        const BcdConfig& cfg = {});

/// Full per-slot decision: composes the four subproblem solvers, then
/// applies the battery guard (devices below the minimum level neither sense
/// nor spend).
Action decide(const SystemState& state, const ChannelState& channel,
              const SystemParams& sys, const std::vector<WdParams>& wds,
              const BcdConfig& cfg = {});

/// Zeroes sensing, CPU, power and time for devices below the minimum
/// battery level. Shared by all policies.
void apply_energy_guard(Action& action, const SystemState& state,
                        const SystemParams& sys);

/// Value of the task-execution objective for a candidate (cpu, power, time)
/// triple per device (higher is better).
double execution_objective(const SystemState& state,
                           const ChannelState& channel,
                           const SystemParams& sys,
                           const std::vector<WdParams>& wds,
                           const std::vector<double>& cpu_hz,
                           const std::vector<double>& tx_power_w,
                           const std::vector<double>& offload_time_s);

/// Value of the full per-slot surrogate objective for an action (higher is
/// better); the quantity the controller maximizes each slot.
double per_slot_objective(const SystemState& state,
                          const ChannelState& channel, const SystemParams& sys,
                          const std::vector<WdParams>& wds,
                          const Action& action);

/// Safe battery capacity (scaled units): capacities at or above this level
/// make the battery spending rule non-binding for the controller, so a run
/// never hits an energy-causality violation. Computed as
/// max(V/(lambda_e*e_unit) + lambda_e*e_max, root of H) + lambda_e*p0max*T,
/// where H is strictly decreasing and its root is found by bisection with
/// doubling of the upper bracket.
double battery_threshold(const SystemParams& sys, const WdParams& wd,
                         const BisectionConfig& bisect = {});

/// H(capacity) used by battery_threshold; exposed for monotonicity and
/// residual checks.
double battery_threshold_h(double capacity, const SystemParams& sys,
                           const WdParams& wd);

/// The root of H alone (one ingredient of battery_threshold).
double battery_threshold_root(const SystemParams& sys, const WdParams& wd,
                              const BisectionConfig& bisect = {});

/// Fill in kAutoCapacity entries from battery_threshold and reject explicit
/// capacities below the threshold unless flagged unsafe.
void resolve_battery_capacities(const SystemParams& sys,
                                std::vector<WdParams>& wds);

}  // namespace wpmec
