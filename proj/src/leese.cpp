#include "wpmec/leese.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "wpmec/physics.hpp"

namespace wpmec {

namespace {

// Bisection for a strictly decreasing function with f(lo) >= 0 >= f(hi).
// Stops on the variable tolerance or at machine resolution.
template <typename F>
double bisect_decreasing(F&& f, double lo, double hi,
                         const BisectionConfig& cfg) {
  for (int it = 0; it < cfg.max_iters; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= cfg.abs_tol + cfg.rel_tol * std::abs(hi)) break;
  }
  return 0.5 * (lo + hi);
}

double wd_energy_cap_j(const SystemParams& sys, const WdParams& wd) {
  return sys.sensing_energy_per_bit_j * sys.max_sense_bits +
         wd.max_tx_power_w * sys.slot_duration_s +
         wd.cpu_energy_coeff * std::pow(wd.max_cpu_hz, 3) *
             sys.slot_duration_s;
}

}  // namespace

void BcdConfig::validate() const {
  if (!(tol > 0.0)) throw ValidationError("bcd.tol", "must be > 0");
  if (max_iters < 1) throw ValidationError("bcd.max_iters", "must be >= 1");
  for (double t : tau_init)
    if (!(t >= 0.0)) throw ValidationError("bcd.tau_init", "must be >= 0");
}

void BisectionConfig::validate() const {
  if (!(abs_tol > 0.0) && !(rel_tol > 0.0))
    throw ValidationError("bisection", "needs a positive tolerance");
  if (max_iters < 1) throw ValidationError("bisection.max_iters", ">= 1");
}

double charging_power(const SystemState& state, const ChannelState& channel,
                      const SystemParams& sys, const std::vector<WdParams>& wds,
                      const BisectionConfig& bisect) {
  if (state.deficit_queue <= 0.0) return sys.hap_max_tx_power_w;

  const double span = sys.harvest_spans_slot ? sys.slot_duration_s : 1.0;
  const double deficit_weight =
      state.deficit_queue * sys.deficit_scale * sys.slot_duration_s;

  // derivative of the charging objective: marginal scaled harvest minus the
  // deficit price; strictly decreasing in p0
  auto marginal = [&](double p0) {
    double s = 0.0;
    for (std::size_t i = 0; i < wds.size(); ++i) {
      const WdParams& wd = wds[i];
      double h = channel.wpt_gain[i];
      double den = p0 * h + wd.eh_a3;
      double gap = wd.battery_capacity - state.battery[i];
      s += sys.energy_scale * gap * span *
           (wd.eh_a1 * wd.eh_a3 - wd.eh_a2) * h / (den * den);
    }
    return s - deficit_weight;
  };

  if (marginal(0.0) <= 0.0) return 0.0;

  double hi = sys.hap_max_tx_power_w;
  int doublings = 0;
  while (marginal(hi) >= 0.0) {
    hi *= 2.0;
    if (++doublings > 200)
      throw NumericError("charging_power: no sign change while doubling");
  }
  double root = bisect_decreasing(marginal, 0.0, hi, bisect);
  return std::min(root, sys.hap_max_tx_power_w);
}

double edge_cpu(const SystemState& state, const SystemParams& sys) {
  double cap = std::min(state.hap_queue_bits * sys.hap_cycles_per_bit /
                            sys.slot_duration_s,
                        sys.hap_max_cpu_hz);
  if (state.deficit_queue <= 0.0) return cap;  // objective increasing
  double f = std::sqrt(state.hap_queue_bits /
                       (3.0 * state.deficit_queue * sys.deficit_scale *
                        sys.hap_cycles_per_bit * sys.hap_cpu_energy_coeff));
  return std::min(f, cap);
}

std::vector<double> sensing(const SystemState& state, const SystemParams& sys,
                            const std::vector<WdParams>& wds) {
  std::vector<double> r(wds.size(), 0.0);
  for (std::size_t i = 0; i < wds.size(); ++i) {
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    double margin = state.wd_queue_bits[i] - sys.lyapunov_v * wds[i].weight -
                    sys.energy_scale * b_tilde * sys.sensing_energy_per_bit_j;
    if (margin <= 0.0) r[i] = sys.max_sense_bits;
  }
  return r;
}

WdExec per_wd_execution(double qi_bits, double q0_bits, double b_tilde,
                        double snr_per_watt, double tau_s,
                        const SystemParams& sys, const WdParams& wd,
                        const BisectionConfig& bisect) {
  const double t = sys.slot_duration_s;
  const double w = sys.bandwidth_hz;
  const double phi = wd.cycles_per_bit;
  const double kappa = wd.cpu_energy_coeff;
  const double le = sys.energy_scale;
  const double ln2 = std::numbers::ln2;
  const double gamma = snr_per_watt;

  const double f_data_cap = qi_bits * phi / t;  // data causality, no offload

  // unconstrained maximizer of the local-computing term; a level battery
  // removes the energy penalty, so the box cap takes over
  auto f_unconstrained = [&]() {
    if (b_tilde == 0.0) return wd.max_cpu_hz;
    return std::sqrt(qi_bits / (3.0 * le * (-b_tilde) * kappa * phi));
  };

  if (qi_bits < q0_bits || tau_s <= 0.0 || gamma <= 0.0) {
    // no offloading; pure local computing
    double f = std::min({f_unconstrained(), wd.max_cpu_hz, f_data_cap});
    return {f, 0.0};
  }

  // power that makes the data constraint bind at a given cpu speed, and the
  // cpu speed that does so at a given power
  auto bind_power = [&](double f) {
    double expo = (qi_bits - f * t / phi) / (w * tau_s);
    return (std::exp2(expo) - 1.0) / gamma;
  };
  auto bind_cpu = [&](double p) {
    return (qi_bits - w * tau_s * std::log2(1.0 + p * gamma)) * phi / t;
  };

  const double p_cap = std::min(wd.max_tx_power_w, bind_power(0.0));
  const double f_cap = std::min(wd.max_cpu_hz, f_data_cap);

  double p_unc;
  if (b_tilde == 0.0)
    p_unc = wd.max_tx_power_w;
  else
    p_unc = (q0_bits - qi_bits) * w / (le * b_tilde * ln2) - 1.0 / gamma;

  const double f_hat = std::min(f_unconstrained(), f_cap);
  const double p_hat = std::clamp(p_unc, 0.0, p_cap);

  double bits_at_caps = f_hat * t / phi +
                        w * tau_s * std::log2(1.0 + p_hat * gamma);
  if (bits_at_caps <= qi_bits) return {f_hat, p_hat};

  // the data constraint binds: trade cpu bits against offload bits
  if (b_tilde == 0.0)
    return {f_hat, std::clamp(bind_power(f_hat), 0.0, p_cap)};

  double f_lo = std::max(0.0, bind_cpu(p_hat));
  double f_hi = f_hat;
  // derivative of the substituted single-variable objective, strictly
  // decreasing on [0, inf)
  auto slope = [&](double f) {
    double expo = (qi_bits - f * t / phi) / (w * tau_s);
    return 3.0 * le * kappa * t * b_tilde * f * f -
           le * b_tilde * t * (ln2 / (w * phi * gamma)) * std::exp2(expo) +
           (t / phi) * q0_bits;
  };
  double f_star;
  if (slope(f_lo) <= 0.0)
    f_star = f_lo;
  else if (slope(f_hi) >= 0.0)
    f_star = f_hi;
  else
    f_star = bisect_decreasing(slope, f_lo, f_hi, bisect);
  return {f_star, std::clamp(bind_power(f_star), 0.0, p_cap)};
}

std::vector<double> time_allocation(const std::vector<double>& ci,
                                    const std::vector<double>& tau_ub,
                                    double slot_duration_s) {
  const std::size_t k = ci.size();
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ci[a] > ci[b]; });

  std::vector<double> tau(k, 0.0);
  double remaining = slot_duration_s;
  for (std::size_t j : order) {
    if (ci[j] <= 0.0) continue;
    double take = std::min(tau_ub[j], remaining);
    if (take <= 0.0) continue;
    tau[j] = take;
    remaining -= take;
  }
  return tau;
}

double execution_objective(const SystemState& state,
                           const ChannelState& channel,
                           const SystemParams& sys,
                           const std::vector<WdParams>& wds,
                           const std::vector<double>& cpu_hz,
                           const std::vector<double>& tx_power_w,
                           const std::vector<double>& offload_time_s) {
  double sum = 0.0;
  for (std::size_t i = 0; i < wds.size(); ++i) {
    BitsEnergy local = local_compute(cpu_hz[i], wds[i], sys);
    BitsEnergy off = offload(tx_power_w[i], offload_time_s[i],
                             channel.offload_snr_per_watt[i], sys);
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    sum += (state.wd_queue_bits[i] - state.hap_queue_bits) * off.bits +
           state.wd_queue_bits[i] * local.bits +
           sys.energy_scale * b_tilde * (off.energy_j + local.energy_j);
  }
  return sum;
}

namespace {

// One run of the alternating solver from a given time allocation.
BcdResult bcd_from(const SystemState& state, const ChannelState& channel,
                   const SystemParams& sys, const std::vector<WdParams>& wds,
                   const BcdConfig& cfg, const std::vector<char>& may_offload,
                   std::vector<double> tau) {
  const int k = sys.num_devices;
  const double t = sys.slot_duration_s;
  for (int i = 0; i < k; ++i)
    if (!may_offload[i]) tau[i] = 0.0;

  BcdResult res;
  res.cpu_hz.resize(k);
  res.tx_power_w.resize(k);

  auto solve_cpu_power = [&]() {
    for (int i = 0; i < k; ++i) {
      double b_tilde = state.battery[i] - wds[i].battery_capacity;
      WdExec e = per_wd_execution(state.wd_queue_bits[i],
                                  state.hap_queue_bits, b_tilde,
                                  channel.offload_snr_per_watt[i], tau[i],
                                  sys, wds[i]);
      res.cpu_hz[i] = e.cpu_hz;
      res.tx_power_w[i] = may_offload[i] ? e.tx_power_w : 0.0;
    }
  };

  solve_cpu_power();
  double obj = execution_objective(state, channel, sys, wds, res.cpu_hz,
                                   res.tx_power_w, tau);
  res.iterations = 1;
  res.objective_trace.push_back(obj);

  while (res.iterations < cfg.max_iters) {
    // time reallocation at fixed (cpu, power)
    std::vector<double> ci(k, 0.0), ub(k, t);
    for (int i = 0; i < k; ++i) {
      double p = res.tx_power_w[i];
      if (p <= 0.0) continue;  // ci = 0, never allocated
      double gamma = channel.offload_snr_per_watt[i];
      double rate = sys.bandwidth_hz * std::log2(1.0 + p * gamma);
      double b_tilde = state.battery[i] - wds[i].battery_capacity;
      ci[i] = (state.wd_queue_bits[i] - state.hap_queue_bits) * rate +
              sys.energy_scale * b_tilde * p;
      double local_bits = res.cpu_hz[i] * t / wds[i].cycles_per_bit;
      ub[i] = std::min(
          t, std::max(state.wd_queue_bits[i] - local_bits, 0.0) / rate);
    }
    tau = time_allocation(ci, ub, t);
    for (int i = 0; i < k; ++i)
      if (!may_offload[i]) tau[i] = 0.0;

    solve_cpu_power();
    double next = execution_objective(state, channel, sys, wds, res.cpu_hz,
                                      res.tx_power_w, tau);
    ++res.iterations;
    res.objective_trace.push_back(next);
    double gain = next - obj;
    obj = next;
    if (gain <= cfg.tol * std::max(1.0, std::abs(next))) break;
  }

  res.objective = obj;
  res.offload_time_s = std::move(tau);
  return res;
}

// Time shares from a greedy pass that rates every device at its box-capped
// power, before any data-binding reduction. Starting here avoids the
// alternating solver's fixed point where a device stuck at a binding power
// looks slower than it is and keeps an oversized share.
std::vector<double> greedy_full_power_shares(
    const SystemState& state, const ChannelState& channel,
    const SystemParams& sys, const std::vector<WdParams>& wds,
    const std::vector<char>& may_offload) {
  const int k = sys.num_devices;
  const double t = sys.slot_duration_s;
  std::vector<double> ci(k, 0.0), ub(k, t);
  for (int i = 0; i < k; ++i) {
    double gamma = channel.offload_snr_per_watt[i];
    if (!may_offload[i] || gamma <= 0.0) continue;
    const WdParams& wd = wds[i];
    double qi = state.wd_queue_bits[i];
    double b_tilde = state.battery[i] - wd.battery_capacity;
    double p_full;
    if (b_tilde == 0.0) {
      p_full = wd.max_tx_power_w;
    } else {
      double p_unc = (state.hap_queue_bits - qi) * sys.bandwidth_hz /
                         (sys.energy_scale * b_tilde * std::numbers::ln2) -
                     1.0 / gamma;
      p_full = std::clamp(p_unc, 0.0, wd.max_tx_power_w);
    }
    if (p_full <= 0.0) continue;
    double rate = sys.bandwidth_hz * std::log2(1.0 + p_full * gamma);
    ci[i] = (qi - state.hap_queue_bits) * rate +
            sys.energy_scale * b_tilde * p_full;
    double f_unc = b_tilde == 0.0
                       ? wd.max_cpu_hz
                       : std::sqrt(qi / (3.0 * sys.energy_scale *
                                         (-b_tilde) * wd.cpu_energy_coeff *
                                         wd.cycles_per_bit));
    double f_full =
        std::min({f_unc, wd.max_cpu_hz, qi * wd.cycles_per_bit / t});
    double local_bits = f_full * t / wd.cycles_per_bit;
    ub[i] = std::min(t, std::max(qi - local_bits, 0.0) / rate);
  }
  return time_allocation(ci, ub, t);
}

}  // namespace

BcdResult bcd_execution(const SystemState& state, const ChannelState& channel,
                        const SystemParams& sys,
                        const std::vector<WdParams>& wds,
                        const BcdConfig& cfg) {
  cfg.validate();
  const int k = sys.num_devices;
  const double t = sys.slot_duration_s;

  std::vector<double> tau0;
  bool explicit_init = !cfg.tau_init.empty();
  if (explicit_init) {
    if (static_cast<int>(cfg.tau_init.size()) != k)
      throw ValidationError("bcd.tau_init", "size must equal K");
    tau0 = cfg.tau_init;
    double sum = std::accumulate(tau0.begin(), tau0.end(), 0.0);
    if (sum > t * (1.0 + 1e-9))
      throw ValidationError("bcd.tau_init", "exceeds the slot duration");
  } else {
    tau0.assign(k, t / k);
  }

  // devices whose backlog is below the HAP's never offload
  std::vector<char> may_offload(k);
  for (int i = 0; i < k; ++i)
    may_offload[i] = state.wd_queue_bits[i] >= state.hap_queue_bits;

  BcdResult best =
      bcd_from(state, channel, sys, wds, cfg, may_offload, tau0);
  // second start from the greedy full-power shares; an explicit tau_init or
  // a single-pass budget pins the solver to its one start
  if (!explicit_init && cfg.max_iters > 1 && k > 1) {
    BcdResult alt = bcd_from(
        state, channel, sys, wds, cfg, may_offload,
        greedy_full_power_shares(state, channel, sys, wds, may_offload));
    if (alt.objective > best.objective) best = std::move(alt);
  }
  return best;
}

void apply_energy_guard(Action& action, const SystemState& state,
                        const SystemParams& sys) {
  double floor = sys.min_battery_scaled();
  for (std::size_t i = 0; i < action.sense_bits.size(); ++i) {
    if (state.battery[i] < floor) {
      action.sense_bits[i] = 0.0;
      action.wd_tx_power_w[i] = 0.0;
      action.wd_cpu_hz[i] = 0.0;
      action.offload_time_s[i] = 0.0;
    }
  }
}

Action decide(const SystemState& state, const ChannelState& channel,
              const SystemParams& sys, const std::vector<WdParams>& wds,
              const BcdConfig& cfg) {
  Action a;
  a.hap_tx_power_w = charging_power(state, channel, sys, wds);
  a.hap_cpu_hz = edge_cpu(state, sys);
  a.sense_bits = sensing(state, sys, wds);
  BcdResult exec = bcd_execution(state, channel, sys, wds, cfg);
  a.wd_cpu_hz = std::move(exec.cpu_hz);
  a.wd_tx_power_w = std::move(exec.tx_power_w);
  a.offload_time_s = std::move(exec.offload_time_s);
  apply_energy_guard(a, state, sys);
  return a;
}

double per_slot_objective(const SystemState& state,
                          const ChannelState& channel, const SystemParams& sys,
                          const std::vector<WdParams>& wds,
                          const Action& action) {
  BitsEnergy edge = edge_compute(action.hap_cpu_hz, sys);
  double hap_energy =
      action.hap_tx_power_w * sys.slot_duration_s + edge.energy_j;

  double sum = state.hap_queue_bits * edge.bits +
               state.deficit_queue * sys.deficit_scale *
                   (sys.hap_avg_energy_budget_j - hap_energy);
  for (std::size_t i = 0; i < wds.size(); ++i) {
    BitsEnergy local = local_compute(action.wd_cpu_hz[i], wds[i], sys);
    BitsEnergy off = offload(action.wd_tx_power_w[i],
                             action.offload_time_s[i],
                             channel.offload_snr_per_watt[i], sys);
    double r = action.sense_bits[i];
    double spend = sys.sensing_energy_per_bit_j * r + local.energy_j +
                   off.energy_j;
    double harvest = energy_harvested(action.hap_tx_power_w,
                                      channel.wpt_gain[i], wds[i], sys);
    double b_tilde = state.battery[i] - wds[i].battery_capacity;
    sum += sys.lyapunov_v * wds[i].weight * r +
           state.wd_queue_bits[i] * (local.bits + off.bits - r) -
           state.hap_queue_bits * off.bits +
           sys.energy_scale * b_tilde * (spend - harvest);
  }
  return sum;
}

double battery_threshold_h(double capacity, const SystemParams& sys,
                           const WdParams& wd) {
  const double le = sys.energy_scale;
  const double x = capacity - le * wd_energy_cap_j(sys, wd);
  const double head = sys.lyapunov_v + sys.max_sense_bits;
  double cpu_term = le * wd.cpu_energy_coeff * sys.slot_duration_s *
                    std::pow(head / (3.0 * le * x * wd.cpu_energy_coeff *
                                     wd.cycles_per_bit),
                             1.5);
  double tx_term = head * sys.bandwidth_hz * sys.slot_duration_s /
                   (le * x * std::numbers::ln2);
  return cpu_term + tx_term - sys.min_battery_scaled();
}

double battery_threshold_root(const SystemParams& sys, const WdParams& wd,
                              const BisectionConfig& bisect) {
  bisect.validate();
  const double le = sys.energy_scale;
  const double spend_cap = le * wd_energy_cap_j(sys, wd);

  // H decreases strictly from +inf (at the open lower end) to -B_min; double
  // the bracket until the sign flips, then bisect
  double lo = spend_cap;
  double hi = spend_cap > 0.0 ? 2.0 * spend_cap : 1.0;
  int doublings = 0;
  while (battery_threshold_h(hi, sys, wd) >= 0.0) {
    hi *= 2.0;
    if (++doublings > 400)
      throw NumericError("battery_threshold: bracket search failed");
  }
  double root = hi;
  double best_residual = std::abs(battery_threshold_h(hi, sys, wd));
  for (int it = 0; it < bisect.max_iters; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double v = battery_threshold_h(mid, sys, wd);
    if (std::abs(v) < best_residual) {
      best_residual = std::abs(v);
      root = mid;
    }
    if (v > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= bisect.abs_tol + bisect.rel_tol * std::abs(hi)) break;
  }
  if (best_residual > 1e-9)
    throw NumericError("battery_threshold: residual " +
                       std::to_string(best_residual) + " above 1e-9 at root " +
                       std::to_string(root));
  return root;
}

double battery_threshold(const SystemParams& sys, const WdParams& wd,
                         const BisectionConfig& bisect) {
  const double le = sys.energy_scale;
  const double spend_cap = le * wd_energy_cap_j(sys, wd);
  double root = battery_threshold_root(sys, wd, bisect);
  double sensing_head =
      sys.lyapunov_v / (le * sys.sensing_energy_per_bit_j) + spend_cap;
  return std::max(sensing_head, root) +
         le * sys.hap_max_tx_power_w * sys.slot_duration_s;
}

void resolve_battery_capacities(const SystemParams& sys,
                                std::vector<WdParams>& wds) {
  for (auto& wd : wds) {
    double threshold = battery_threshold(sys, wd);
    if (wd.battery_capacity == kAutoCapacity) {
      wd.battery_capacity = threshold;
    } else if (wd.battery_capacity < threshold && !wd.unsafe_capacity) {
      throw ValidationError(
          "device.battery_capacity",
          "below the safe threshold " + std::to_string(threshold) +
              " (scaled); set unsafe_capacity to run anyway");
    }
  }
}

}  // namespace wpmec
