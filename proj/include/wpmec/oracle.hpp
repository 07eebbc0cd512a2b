#pragma once
#include <vector>

#include "wpmec/model.hpp"

// Brute-force grid verifiers for the closed-form solvers. Test-side ground
// truth only; nothing here runs on the simulation hot path.
//
// Grid convention: n_points means n_points intervals, i.e. the evaluated
// set is {j * hi / n_points, j = 0..n_points}. Doubling n_points therefore
// yields a superset of the coarse grid, so refinement can never decrease
// the best value found. Where a closed-form candidate is known it is added
// to the evaluated set, so the oracle can only confirm or beat the solver,
// never lose to it by discretization at the solver's own point.

namespace wpmec {

struct GridPoint1D {
  double arg = 0.0;
  double objective = 0.0;
};

struct GridPointExec {
  double cpu_hz = 0.0;
  double tx_power_w = 0.0;
  double objective = 0.0;
};

struct GridAction {
  Action action;
  double objective = 0.0;
};

/// Exhaustive search of the charging-power objective over [0, p0max].
GridPoint1D grid_charging_power(const SystemState& state,
                                const ChannelState& channel,
                                const SystemParams& sys,
                                const std::vector<WdParams>& wds,
                                int n_points);

/// Exhaustive search of the edge-CPU objective over [0, f0max] subject to
/// the HAP data-causality cap.
GridPoint1D grid_edge_cpu(const SystemState& state, const SystemParams& sys,
                          int n_points);

/// n x n feasible-filtered search of one device's execution objective over
/// the (cpu, power) box at fixed tau. (0, 0) is always feasible.
GridPointExec grid_per_wd(double qi_bits, double q0_bits, double b_tilde,
                          double snr_per_watt, double tau_s,
                          const SystemParams& sys, const WdParams& wd,
                          int n_points);

/// Best execution block (cpu, power, time for every device) on a grid over
/// the time simplex with an inner (cpu, power) grid per device. The
/// objective is additive across devices and devices couple only through the
/// shared time budget, so per-device maximization inside a time cell is
/// exact, not an approximation. K <= 2 only.
struct GridExecResult {
  std::vector<double> cpu_hz;
  std::vector<double> tx_power_w;
  std::vector<double> offload_time_s;
  double objective = 0.0;
};
GridExecResult grid_execution(const SystemState& state,
                              const ChannelState& channel,
                              const SystemParams& sys,
                              const std::vector<WdParams>& wds, int n_points);

/// Best full per-slot action by exhausting every decision variable, K <= 2.
/// The per-slot objective splits into independent blocks (charging power,
/// edge CPU, per-device sensing, execution); each block is exhausted on its
/// own grid — sensing is linear per device so its box endpoints suffice —
/// and the execution block is searched jointly over the time simplex.
GridAction joint_grid_decide(const SystemState& state,
                             const ChannelState& channel,
                             const SystemParams& sys,
                             const std::vector<WdParams>& wds, int n_points);

}  // namespace wpmec
