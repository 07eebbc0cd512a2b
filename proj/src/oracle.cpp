#include "wpmec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "wpmec/leese.hpp"
#include "wpmec/physics.hpp"

namespace wpmec {

namespace {

constexpr double kFeasSlack = 1e-12;  // accept boundary grid points

double charging_objective(double p0, const SystemState& state,
                          const ChannelState& channel, const SystemParams& sys,
                          const std::vector<WdParams>& wds) {
  double v = -state.deficit_queue * sys.deficit_scale * p0 *
             sys.slot_duration_s;
  for (std::size_t i = 0; i < wds.size(); ++i) {
    double gap = wds[i].battery_capacity - state.battery[i];
    v += sys.energy_scale * gap *
         energy_harvested(p0, channel.wpt_gain[i], wds[i], sys);
  }
  return v;
}

double edge_objective(double f0, const SystemState& state,
                      const SystemParams& sys) {
  double t = sys.slot_duration_s;
  return state.hap_queue_bits * f0 * t / sys.hap_cycles_per_bit -
         state.deficit_queue * sys.deficit_scale * sys.hap_cpu_energy_coeff *
             f0 * f0 * f0 * t;
}

double wd_exec_objective(double f, double p, double qi, double q0,
                         double b_tilde, double gamma, double tau,
                         const SystemParams& sys, const WdParams& wd) {
  double t = sys.slot_duration_s;
  double local_bits = f * t / wd.cycles_per_bit;
  double local_j = wd.cpu_energy_coeff * f * f * f * t;
  double off_bits =
      (tau > 0.0 && p > 0.0)
          ? sys.bandwidth_hz * tau * std::log2(1.0 + p * gamma)
          : 0.0;
  double off_j = p * tau;
  return (qi - q0) * off_bits + qi * local_bits +
         sys.energy_scale * b_tilde * (off_j + local_j);
}

bool wd_exec_feasible(double f, double p, double qi, double gamma, double tau,
                      const SystemParams& sys, const WdParams& wd) {
  double t = sys.slot_duration_s;
  double bits = f * t / wd.cycles_per_bit;
  if (tau > 0.0 && p > 0.0)
    bits += sys.bandwidth_hz * tau * std::log2(1.0 + p * gamma);
  return bits <= qi * (1.0 + kFeasSlack) + 1e-9;
}

// best (cpu, power) for one device at fixed tau on an n x n grid
GridPointExec best_wd_cell(double qi, double q0, double b_tilde, double gamma,
                           double tau, const SystemParams& sys,
                           const WdParams& wd, int n) {
  GridPointExec best;
  best.objective = -std::numeric_limits<double>::infinity();
  for (int jf = 0; jf <= n; ++jf) {
    double f = wd.max_cpu_hz * jf / n;
    for (int jp = 0; jp <= n; ++jp) {
      double p = wd.max_tx_power_w * jp / n;
      if (!wd_exec_feasible(f, p, qi, gamma, tau, sys, wd)) continue;
      double v = wd_exec_objective(f, p, qi, q0, b_tilde, gamma, tau, sys, wd);
      if (v > best.objective) best = {f, p, v};
    }
  }
  return best;
}

}  // namespace

GridPoint1D grid_charging_power(const SystemState& state,
                                const ChannelState& channel,
                                const SystemParams& sys,
                                const std::vector<WdParams>& wds,
                                int n_points) {
  if (n_points < 100)
    throw ValidationError("n_points", "charging grid needs >= 100 points");
  GridPoint1D best{0.0, charging_objective(0.0, state, channel, sys, wds)};
  for (int j = 1; j <= n_points; ++j) {
    double p0 = sys.hap_max_tx_power_w * j / n_points;
    double v = charging_objective(p0, state, channel, sys, wds);
    if (v > best.objective) best = {p0, v};
  }
  double cand = charging_power(state, channel, sys, wds);
  double vc = charging_objective(cand, state, channel, sys, wds);
  if (vc > best.objective) best = {cand, vc};
  return best;
}

GridPoint1D grid_edge_cpu(const SystemState& state, const SystemParams& sys,
                          int n_points) {
  if (n_points < 2) throw ValidationError("n_points", "needs >= 2 points");
  double cap = std::min(state.hap_queue_bits * sys.hap_cycles_per_bit /
                            sys.slot_duration_s,
                        sys.hap_max_cpu_hz);
  GridPoint1D best{0.0, edge_objective(0.0, state, sys)};
  for (int j = 1; j <= n_points; ++j) {
    double f = cap * j / n_points;
    double v = edge_objective(f, state, sys);
    if (v > best.objective) best = {f, v};
  }
  double cand = edge_cpu(state, sys);
  double vc = edge_objective(cand, state, sys);
  if (vc > best.objective) best = {cand, vc};
  return best;
}

GridPointExec grid_per_wd(double qi_bits, double q0_bits, double b_tilde,
                          double snr_per_watt, double tau_s,
                          const SystemParams& sys, const WdParams& wd,
                          int n_points) {
  if (n_points < 2) throw ValidationError("n_points", "needs >= 2 points");
  GridPointExec best = best_wd_cell(qi_bits, q0_bits, b_tilde, snr_per_watt,
                                    tau_s, sys, wd, n_points);
  WdExec cand =
      per_wd_execution(qi_bits, q0_bits, b_tilde, snr_per_watt, tau_s, sys, wd);
  if (wd_exec_feasible(cand.cpu_hz, cand.tx_power_w, qi_bits, snr_per_watt,
                       tau_s, sys, wd)) {
    double vc = wd_exec_objective(cand.cpu_hz, cand.tx_power_w, qi_bits,
                                  q0_bits, b_tilde, snr_per_watt, tau_s, sys,
                                  wd);
    if (vc > best.objective) best = {cand.cpu_hz, cand.tx_power_w, vc};
  }
  return best;
}

GridExecResult grid_execution(const SystemState& state,
                              const ChannelState& channel,
                              const SystemParams& sys,
                              const std::vector<WdParams>& wds, int n_points) {
  const int k = sys.num_devices;
  if (k > 2)
    throw UnsupportedScaleError(
        "grid_execution enumerates the time simplex for K <= 2 only");
  if (n_points < 2) throw ValidationError("n_points", "needs >= 2 points");
  const int n = n_points;
  const double t = sys.slot_duration_s;

  // per-device best (cpu, power) and value for each grid time share; the
  // execution objective is additive across devices, so cells combine exactly
  std::vector<std::vector<GridPointExec>> cell(k);
  for (int i = 0; i < k; ++i) {
    cell[i].resize(n + 1);
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    for (int j = 0; j <= n; ++j) {
      cell[i][j] = best_wd_cell(state.wd_queue_bits[i], state.hap_queue_bits,
                                b_tilde, channel.offload_snr_per_watt[i],
                                t * j / n, sys, wds[i], n);
    }
  }

  GridExecResult best;
  best.cpu_hz.resize(k);
  best.tx_power_w.resize(k);
  best.offload_time_s.resize(k);
  best.objective = -std::numeric_limits<double>::infinity();

  auto consider = [&](int j0, int j1) {
    double v = cell[0][j0].objective + (k == 2 ? cell[1][j1].objective : 0.0);
    if (v <= best.objective) return;
    best.objective = v;
    best.cpu_hz[0] = cell[0][j0].cpu_hz;
    best.tx_power_w[0] = cell[0][j0].tx_power_w;
    best.offload_time_s[0] = t * j0 / n;
    if (k == 2) {
      best.cpu_hz[1] = cell[1][j1].cpu_hz;
      best.tx_power_w[1] = cell[1][j1].tx_power_w;
      best.offload_time_s[1] = t * j1 / n;
    }
  };
  if (k == 1) {
    for (int j0 = 0; j0 <= n; ++j0) consider(j0, 0);
  } else {
    for (int j0 = 0; j0 <= n; ++j0)
      for (int j1 = 0; j0 + j1 <= n; ++j1) consider(j0, j1);
  }

  // solver candidate, so discretization never hides a solver win
  BcdResult cand = bcd_execution(state, channel, sys, wds);
  double vc = execution_objective(state, channel, sys, wds, cand.cpu_hz,
                                  cand.tx_power_w, cand.offload_time_s);
  if (vc > best.objective) {
    best.objective = vc;
    best.cpu_hz = cand.cpu_hz;
    best.tx_power_w = cand.tx_power_w;
    best.offload_time_s = cand.offload_time_s;
  }
  return best;
}

GridAction joint_grid_decide(const SystemState& state,
                             const ChannelState& channel,
                             const SystemParams& sys,
                             const std::vector<WdParams>& wds, int n_points) {
  const int k = sys.num_devices;
  if (k > 2)
    throw UnsupportedScaleError(
        "joint_grid_decide enumerates actions for K <= 2 only");

  GridAction out;
  Action& a = out.action;
  a.sense_bits.resize(k);
  a.wd_cpu_hz.resize(k);
  a.wd_tx_power_w.resize(k);
  a.offload_time_s.resize(k);

  // The per-slot objective splits into blocks over disjoint variables:
  // charging power, edge cpu, per-device sensing (linear, so its box
  // endpoints suffice), and the execution block. Each block is exhausted
  // independently and the values add up exactly.
  double value = state.deficit_queue * sys.deficit_scale *
                 sys.hap_avg_energy_budget_j;  // action-independent term

  GridPoint1D p0 =
      grid_charging_power(state, channel, sys, wds,
                          std::max(n_points, 100));
  a.hap_tx_power_w = p0.arg;
  value += p0.objective;

  GridPoint1D f0 = grid_edge_cpu(state, sys, n_points);
  a.hap_cpu_hz = f0.arg;
  value += f0.objective;

  for (int i = 0; i < k; ++i) {
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    double gain = sys.lyapunov_v * wds[i].weight +
                  sys.energy_scale * b_tilde * sys.sensing_energy_per_bit_j -
                  state.wd_queue_bits[i];
    if (gain >= 0.0) {  // boundary inclusive, like the solver
      a.sense_bits[i] = sys.max_sense_bits;
      value += gain * sys.max_sense_bits;
    } else {
      a.sense_bits[i] = 0.0;
    }
  }

  GridExecResult exec = grid_execution(state, channel, sys, wds, n_points);
  a.wd_cpu_hz = exec.cpu_hz;
  a.wd_tx_power_w = exec.tx_power_w;
  a.offload_time_s = exec.offload_time_s;
  value += exec.objective;
  out.objective = value;

  // full composed candidate from the controller
  Action cand = decide(state, channel, sys, wds);
  double vc = per_slot_objective(state, channel, sys, wds, cand);
  if (vc > out.objective) {
    out.action = cand;
    out.objective = vc;
  }
  return out;
}

}  // namespace wpmec
