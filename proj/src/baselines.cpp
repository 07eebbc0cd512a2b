#include "wpmec/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "wpmec/physics.hpp"

namespace wpmec {

namespace {

// shared charging / edge-cpu / sensing head of every baseline
Action policy_head(const SystemState& state, const ChannelState& channel,
                   const SystemParams& sys, const std::vector<WdParams>& wds) {
  Action a;
  a.hap_tx_power_w = charging_power(state, channel, sys, wds);
  a.hap_cpu_hz = edge_cpu(state, sys);
  a.sense_bits = sensing(state, sys, wds);
  const int k = sys.num_devices;
  a.wd_cpu_hz.assign(k, 0.0);
  a.wd_tx_power_w.assign(k, 0.0);
  a.offload_time_s.assign(k, 0.0);
  return a;
}

// Golden-section maximum of a unimodal function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

Action lco_decide(const SystemState& state, const ChannelState& channel,
                  const SystemParams& sys, const std::vector<WdParams>& wds) {
  Action a = policy_head(state, channel, sys, wds);
  for (int i = 0; i < sys.num_devices; ++i) {
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    // tau = 0 forces the pure local-computing branch
    a.wd_cpu_hz[i] =
        per_wd_execution(state.wd_queue_bits[i], state.hap_queue_bits, b_tilde,
                         channel.offload_snr_per_watt[i], 0.0, sys, wds[i])
            .cpu_hz;
  }
  apply_energy_guard(a, state, sys);
  return a;
}

Action eqot_decide(const SystemState& state, const ChannelState& channel,
                   const SystemParams& sys, const std::vector<WdParams>& wds) {
  Action a = policy_head(state, channel, sys, wds);
  const double share = sys.slot_duration_s / sys.num_devices;
  for (int i = 0; i < sys.num_devices; ++i) {
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    WdExec e =
        per_wd_execution(state.wd_queue_bits[i], state.hap_queue_bits, b_tilde,
                         channel.offload_snr_per_watt[i], share, sys, wds[i]);
    a.wd_cpu_hz[i] = e.cpu_hz;
    a.wd_tx_power_w[i] = e.tx_power_w;
    a.offload_time_s[i] = share;
  }
  apply_energy_guard(a, state, sys);
  return a;
}

Action myopic_decide(const SystemState& state, const ChannelState& channel,
                     const SystemParams& sys, const std::vector<WdParams>& wds,
                     double spent_history_j, const BcdConfig& cfg) {
  Action a;
  a.sense_bits = sensing(state, sys, wds);
  BcdResult exec = bcd_execution(state, channel, sys, wds, cfg);
  a.wd_cpu_hz = std::move(exec.cpu_hz);
  a.wd_tx_power_w = std::move(exec.tx_power_w);
  a.offload_time_s = std::move(exec.offload_time_s);

  // hard cumulative budget up to and including this slot
  const double t = sys.slot_duration_s;
  double budget =
      (state.slot + 1) * sys.hap_avg_energy_budget_j - spent_history_j;
  if (budget > 0.0) {
    double queue_cap = std::min(
        sys.hap_max_cpu_hz,
        state.hap_queue_bits * sys.hap_cycles_per_bit / t);
    auto edge_speed = [&](double p0) {
      double remaining = budget - p0 * t;
      if (remaining <= 0.0) return 0.0;
      return std::min(queue_cap,
                      std::cbrt(remaining / (sys.hap_cpu_energy_coeff * t)));
    };
    auto value = [&](double p0) {
      double v = state.hap_queue_bits * edge_speed(p0) * t /
                 sys.hap_cycles_per_bit;
      for (int i = 0; i < sys.num_devices; ++i) {
        double gap = wds[i].battery_capacity - state.battery[i];
        v += sys.energy_scale * gap *
             energy_harvested(p0, channel.wpt_gain[i], wds[i], sys);
      }
      return v;
    };

    double p_hi = std::min(sys.hap_max_tx_power_w, budget / t);
    double p_star = golden_max(value, 0.0, p_hi, 1e-9);
    double v_star = value(p_star);
    // flat stretches resolve to the cheapest point
    if (value(0.0) >= v_star - 1e-12 * std::max(1.0, std::abs(v_star)))
      p_star = 0.0;
    a.hap_tx_power_w = p_star;
    a.hap_cpu_hz = state.hap_queue_bits > 0.0 ? edge_speed(p_star) : 0.0;
  }

  apply_energy_guard(a, state, sys);
  return a;
}

}  // namespace wpmec
