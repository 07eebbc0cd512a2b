#include "wpmec/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wpmec/baselines.hpp"
#include "wpmec/engine.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/parallel.hpp"
#include "wpmec/physics.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Setup {
  SystemParams sys;
  std::vector<WdParams> wds;
  ChannelParams chan;
};

Setup resolved_setup(int k) {
  DefaultSetup d = default_params(k);
  resolve_battery_capacities(d.system, d.devices);
  return {d.system, d.devices, d.channel};
}

// Backlogs across the operating envelope, deficit sometimes exactly empty,
// batteries mixing level, lightly displaced and deeply discharged (floored
// well above the spend cut-off so the guard stays out of the comparison).
SystemState random_state(rng::Stream& st, const SystemParams& sys,
                         const std::vector<WdParams>& wds) {
  const int k = sys.num_devices;
  SystemState s;
  s.wd_queue_bits.resize(k);
  s.battery.resize(k);
  double q_cap = sys.lyapunov_v + sys.max_sense_bits;
  for (int i = 0; i < k; ++i) s.wd_queue_bits[i] = st.next_unit() * q_cap;
  double u = st.next_unit();
  s.hap_queue_bits = u * u * sys.lyapunov_v;
  s.deficit_queue = st.next_unit() < 0.25 ? 0.0 : st.next_unit() * 100.0;
  for (int i = 0; i < k; ++i) {
    double mode = st.next_unit();
    double cap = wds[i].battery_capacity;
    double b;
    if (mode < 0.25)
      b = cap;
    else if (mode < 0.6)
      b = cap - st.next_unit() * 1e6;
    else
      b = st.next_unit() * cap;
    s.battery[i] = std::max(b, 10.0 * sys.min_battery_scaled());
  }
  return s;
}

double rel_gap(double oracle, double solver) {
  return (oracle - solver) / std::max(std::abs(oracle), 1e-6);
}

struct LeeseRunRecord {
  double lyapunov_v;
  double max_sense_bits;
  double max_wd_queue_bits;
};

// ---- criterion 1: solver vs oracle --------------------------------------

CheckResult criterion_oracle_gap(bool quick, int jobs) {
  auto t0 = clock_type::now();
  CheckResult r{1, "solver-vs-oracle objective gaps", false, "", 0.0};

  const int draws_k1 = quick ? 60 : 500;
  const int draws_k2 = quick ? 10 : 100;
  const int draws_pw = quick ? 100 : 500;
  const int grid_k1 = quick ? 64 : 96;
  const int grid_k2 = quick ? 32 : 48;

  double worst_k1 = 0.0, worst_k2 = 0.0, worst_pw = 0.0;

  for (int pass = 0; pass < 2; ++pass) {
    const int k = pass == 0 ? 1 : 2;
    const int draws = pass == 0 ? draws_k1 : draws_k2;
    const int grid = pass == 0 ? grid_k1 : grid_k2;
    Setup su = resolved_setup(k);
    std::vector<SystemState> states(draws);
    std::vector<ChannelState> channels(draws);
    rng::Stream st(rng::substream(0xACCE11, k, 0));
    ChannelParams cp = su.chan;
    cp.rng_seed = 77 + k;
    std::vector<double> dist;
    for (const auto& wd : su.wds) dist.push_back(wd.distance_m);
    ChannelStream chan_stream(cp, dist, su.sys.noise_power_w);
    for (int d = 0; d < draws; ++d) {
      states[d] = random_state(st, su.sys, su.wds);
      channels[d] = chan_stream.next_slot();
    }

    std::vector<double> gaps(draws, 0.0);
    detail::parallel_for(draws, jobs, [&](long d) {
      Action a = decide(states[d], channels[d], su.sys, su.wds);
      double solver = per_slot_objective(states[d], channels[d], su.sys,
                                         su.wds, a);
      GridAction oracle =
          joint_grid_decide(states[d], channels[d], su.sys, su.wds, grid);
      gaps[d] = rel_gap(oracle.objective, solver);
    });
    double worst = *std::max_element(gaps.begin(), gaps.end());
    (pass == 0 ? worst_k1 : worst_k2) = worst;
  }

  {
    Setup su = resolved_setup(1);
    const SystemParams& sys = su.sys;
    const WdParams& wd = su.wds.front();
    rng::Stream st(rng::substream(0xACCE11, 9, 0));
    double q_cap = sys.lyapunov_v + sys.max_sense_bits;
    double mean_g = mean_gain(wd.distance_m, su.chan.comms_carrier_hz,
                              su.chan);

    std::vector<std::array<double, 5>> cases(draws_pw);
    for (int d = 0; d < draws_pw; ++d) {
      double qi = st.next_unit() * q_cap;
      double u = st.next_unit();
      double q0 = u * u * sys.lyapunov_v;
      double bt = st.next_unit() < 0.25 ? 0.0 : -st.next_unit() * 1e6;
      double gamma = st.next_exp() * mean_g / sys.noise_power_w;
      double tm = st.next_unit();
      double tau = tm < 0.2 ? 0.0
                 : tm < 0.4 ? sys.slot_duration_s
                            : st.next_unit() * sys.slot_duration_s;
      cases[d] = {qi, q0, bt, gamma, tau};
    }
    std::vector<double> gaps(draws_pw, 0.0);
    detail::parallel_for(draws_pw, jobs, [&](long d) {
      auto [qi, q0, bt, gamma, tau] = cases[d];
      WdExec e = per_wd_execution(qi, q0, bt, gamma, tau, sys, wd);
      SystemState s;
      s.wd_queue_bits = {qi};
      s.hap_queue_bits = q0;
      s.battery = {wd.battery_capacity + bt};
      ChannelState ch;
      ch.wpt_gain = {0.0};
      ch.offload_gain = {gamma * sys.noise_power_w};
      ch.offload_snr_per_watt = {gamma};
      double solver = execution_objective(s, ch, sys, su.wds, {e.cpu_hz},
                                          {e.tx_power_w}, {tau});
      GridPointExec oracle =
          grid_per_wd(qi, q0, bt, gamma, tau, sys, wd, 400);
      gaps[d] = rel_gap(oracle.objective, solver);
    });
    worst_pw = *std::max_element(gaps.begin(), gaps.end());
  }

  r.seconds = seconds_since(t0);
  bool in_time = r.seconds < 300.0;
  r.pass = worst_k1 <= 5e-3 && worst_k2 <= 5e-3 && worst_pw <= 1e-4 && in_time;
  std::ostringstream os;
  os << "worst gap K=1 " << fmt(worst_k1) << " (tol 5e-3), K=2 "
     << fmt(worst_k2) << " (tol 5e-3), per-device " << fmt(worst_pw)
     << " (tol 1e-4), " << fmt(r.seconds) << "s (limit 300)";
  r.detail = os.str();
  return r;
}

// ---- criterion 2: long feasibility run ----------------------------------

CheckResult criterion_feasibility(bool quick,
                                  std::vector<LeeseRunRecord>* records) {
  auto t0 = clock_type::now();
  CheckResult r{2, "feasibility run (K=8)", false, "", 0.0};

  Setup su = resolved_setup(8);
  RunConfig cfg;
  cfg.num_slots = quick ? 5000 : 20000;
  cfg.policy = Policy::kLeese;
  cfg.seed = 1;
  RunMetrics m = run(su.sys, su.wds, su.chan, cfg);
  if (records)
    records->push_back(
        {su.sys.lyapunov_v, su.sys.max_sense_bits, m.max_wd_queue_bits});

  double cap_hi = *std::max_element(m.battery_capacity.begin(),
                                    m.battery_capacity.end());
  bool no_violations = m.causality_violations == 0 &&
                       m.capacity_violations == 0 && m.budget_violations == 0;
  bool energy_ok =
      m.avg_hap_energy_j <= su.sys.hap_avg_energy_budget_j * 1.02;
  bool deficit_ok = m.deficit_over_slots <
                    1e-3 * su.sys.deficit_scale * su.sys.hap_avg_energy_budget_j;
  bool battery_ok =
      m.min_battery_seen >= 0.0 && m.max_battery_seen <= cap_hi * (1 + 1e-12);
  double q_abs_floor = 1e-6 * (su.sys.lyapunov_v + su.sys.max_sense_bits);
  bool window_q0_ok =
      std::abs(m.final_window_hap_queue - m.penult_window_hap_queue) <=
      0.2 * m.penult_window_hap_queue + q_abs_floor;
  bool window_qi_ok =
      std::abs(m.final_window_wd_queue - m.penult_window_wd_queue) <=
      0.2 * m.penult_window_wd_queue + q_abs_floor;

  r.seconds = seconds_since(t0);
  bool in_time = r.seconds < 120.0;
  r.pass = no_violations && energy_ok && deficit_ok && battery_ok &&
           window_q0_ok && window_qi_ok && in_time;
  std::ostringstream os;
  os << "violations " << m.causality_violations << "/"
     << m.capacity_violations << "/" << m.budget_violations << ", avg e0 "
     << fmt(m.avg_hap_energy_j) << " J (cap "
     << fmt(su.sys.hap_avg_energy_budget_j * 1.02) << "), Z0/N "
     << fmt(m.deficit_over_slots) << " (cap "
     << fmt(1e-3 * su.sys.deficit_scale * su.sys.hap_avg_energy_budget_j)
     << "), windows q0 " << fmt(m.penult_window_hap_queue) << "->"
     << fmt(m.final_window_hap_queue) << " qi "
     << fmt(m.penult_window_wd_queue) << "->" << fmt(m.final_window_wd_queue)
     << ", " << fmt(r.seconds) << "s (limit 120)";
  r.detail = os.str();
  return r;
}

// ---- criterion 4: V tradeoff ---------------------------------------------

CheckResult criterion_v_tradeoff(int jobs,
                                 std::vector<LeeseRunRecord>* records) {
  auto t0 = clock_type::now();
  CheckResult r{4, "sensing-rate / queue-length tradeoff in V", false, "", 0.0};

  Setup su = resolved_setup(8);
  RunConfig base;
  base.num_slots = 20000;
  SweepConfig sc;
  sc.axis = SweepAxis::kV;
  sc.values = {4e5, 8e5, 16e5, 32e5};
  sc.seeds = {1, 2, 3, 4, 5};
  sc.policies = {Policy::kLeese};
  sc.jobs = jobs;
  auto cells = sweep(su.sys, su.wds, su.chan, base, sc);
  if (records)
    for (const auto& c : cells)
      records->push_back({c.value, su.sys.max_sense_bits,
                          c.metrics.max_wd_queue_bits});

  bool rate_monotone = true, queue_monotone = true;
  std::ostringstream os;
  os << "R(V)=";
  double prev_rate = -1.0, prev_queue = -1.0;
  for (double v : sc.values) {
    double rate = mean_sensing_rate(cells, Policy::kLeese, v);
    double queue = mean_wd_queue(cells, Policy::kLeese, v);
    os << fmt(rate) << " ";
    if (prev_rate >= 0.0 && rate < prev_rate * (1.0 - 1e-9))
      rate_monotone = false;
    if (prev_queue >= 0.0 && queue < prev_queue * (1.0 - 1e-9))
      queue_monotone = false;
    prev_rate = rate;
    prev_queue = queue;
  }
  os << "bits/slot non-decreasing=" << (rate_monotone ? "yes" : "NO")
     << ", E[avg Qi] non-decreasing=" << (queue_monotone ? "yes" : "NO");
  r.seconds = seconds_since(t0);
  r.pass = rate_monotone && queue_monotone;
  r.detail = os.str();
  return r;
}

// ---- criterion 5: benchmark dominance ------------------------------------

CheckResult criterion_dominance(int jobs,
                                std::vector<LeeseRunRecord>* records) {
  auto t0 = clock_type::now();
  CheckResult r{5, "benchmark dominance at defaults", false, "", 0.0};

  Setup su = resolved_setup(8);
  RunConfig base;
  base.num_slots = 20000;
  SweepConfig sc;
  sc.axis = SweepAxis::kSigma;
  sc.values = {su.chan.pathloss_exponent};  // defaults, sweep used for fanout
  sc.seeds = {1, 2, 3, 4, 5};
  sc.policies = {Policy::kLeese, Policy::kLco, Policy::kEqOT,
                 Policy::kMyopicEdge};
  sc.jobs = jobs;
  auto cells = sweep(su.sys, su.wds, su.chan, base, sc);
  if (records)
    for (const auto& c : cells)
      if (c.policy == Policy::kLeese)
        records->push_back({su.sys.lyapunov_v, su.sys.max_sense_bits,
                            c.metrics.max_wd_queue_bits});

  double v = sc.values.front();
  double leese = mean_sensing_rate(cells, Policy::kLeese, v);
  double lco = mean_sensing_rate(cells, Policy::kLco, v);
  double eqot = mean_sensing_rate(cells, Policy::kEqOT, v);
  double myopic = mean_sensing_rate(cells, Policy::kMyopicEdge, v);

  bool margin = leese >= 1.05 * lco && leese >= 1.05 * eqot &&
                leese >= 1.05 * myopic;
  bool lco_weakest = lco < eqot && lco < myopic;
  r.seconds = seconds_since(t0);
  r.pass = margin && lco_weakest;
  std::ostringstream os;
  os << "R: leese " << fmt(leese) << ", lco " << fmt(lco) << ", eqot "
     << fmt(eqot) << ", myopic " << fmt(myopic) << " bits/slot; margins "
     << fmt(leese / lco) << "/" << fmt(leese / eqot) << "/"
     << fmt(leese / myopic) << "x (need >= 1.05), LCO weakest="
     << (lco_weakest ? "yes" : "NO");
  r.detail = os.str();
  return r;
}

// ---- criterion 6: decide timing -------------------------------------------

CheckResult criterion_timing(std::vector<LeeseRunRecord>* records) {
  auto t0 = clock_type::now();
  CheckResult r{6, "per-slot decide wall time", false, "", 0.0};

  double mean16 = 0.0, mean1 = 0.0;
  for (int k : {16, 1}) {
    Setup su = resolved_setup(k);
    RunConfig cfg;
    cfg.num_slots = 2000;
    cfg.policy = Policy::kLeese;
    cfg.seed = 1;
    RunMetrics m = run(su.sys, su.wds, su.chan, cfg);
    (k == 16 ? mean16 : mean1) = m.decide_mean_s;
    if (records)
      records->push_back({su.sys.lyapunov_v, su.sys.max_sense_bits,
                          m.max_wd_queue_bits});
  }
  r.seconds = seconds_since(t0);
  r.pass = mean16 < 10e-3 && mean1 < 1e-3;
  std::ostringstream os;
  os << "mean decide K=16 " << fmt(mean16 * 1e3) << " ms (< 10), K=1 "
     << fmt(mean1 * 1e3) << " ms (< 1)";
  r.detail = os.str();
  return r;
}

// ---- criterion 7: property suites -----------------------------------------

CheckResult criterion_properties() {
  auto t0 = clock_type::now();
  CheckResult r{7, "property suites", false, "", 0.0};
  std::ostringstream os;
  bool all = true;
  auto note = [&](const char* name, bool ok) {
    all = all && ok;
    os << name << "=" << (ok ? "ok" : "FAIL") << " ";
  };

  Setup su = resolved_setup(8);
  const SystemParams& sys = su.sys;

  {  // harvested energy: concave, non-decreasing, zero at zero power
    rng::Stream st(rng::substream(0x9A0B, 1, 0));
    bool ok = true;
    for (int n = 0; n < 1000 && ok; ++n) {
      WdParams wd = su.wds.front();
      wd.eh_a3 = 0.05 + st.next_unit() * 5.0;
      wd.eh_a1 = 0.05 + st.next_unit() * 5.0;
      wd.eh_a2 = st.next_unit() * wd.eh_a1 * wd.eh_a3;
      wd.validate();
      double h = std::pow(10.0, -6.0 + 4.0 * st.next_unit());
      double pa = st.next_unit() * 3.0;
      double pb = st.next_unit() * 3.0;
      double ea = energy_harvested(pa, h, wd, sys);
      double eb = energy_harvested(pb, h, wd, sys);
      double em = energy_harvested(0.5 * (pa + pb), h, wd, sys);
      ok = ok && em >= 0.5 * (ea + eb) - 1e-12;
      ok = ok && (pa <= pb ? eb >= ea - 1e-15 : ea >= eb - 1e-15);
      ok = ok && energy_harvested(0.0, h, wd, sys) == 0.0;
    }
    note("harvest", ok);
  }

  {  // charging-power threshold branches
    rng::Stream st(rng::substream(0x9A0B, 2, 0));
    ChannelParams cp = su.chan;
    cp.rng_seed = 5;
    std::vector<double> dist;
    for (const auto& wd : su.wds) dist.push_back(wd.distance_m);
    ChannelStream chan(cp, dist, sys.noise_power_w);
    bool ok = true;
    for (int n = 0; n < 200 && ok; ++n) {
      SystemState s = random_state(st, sys, su.wds);
      ChannelState ch = chan.next_slot();
      s.deficit_queue = 0.0;
      ok = ok && charging_power(s, ch, sys, su.wds) == sys.hap_max_tx_power_w;
      s.deficit_queue = 1e-6 + st.next_unit() * 100.0;
      for (int i = 0; i < sys.num_devices; ++i)
        s.battery[i] = su.wds[i].battery_capacity;
      ok = ok && charging_power(s, ch, sys, su.wds) == 0.0;
    }
    note("charging_branches", ok);
  }

  {  // BCD: monotone objective, bounded iterations
    rng::Stream st(rng::substream(0x9A0B, 3, 0));
    ChannelParams cp = su.chan;
    cp.rng_seed = 6;
    std::vector<double> dist;
    for (const auto& wd : su.wds) dist.push_back(wd.distance_m);
    ChannelStream chan(cp, dist, sys.noise_power_w);
    bool ok = true;
    BcdConfig bc;
    for (int n = 0; n < 200 && ok; ++n) {
      SystemState s = random_state(st, sys, su.wds);
      ChannelState ch = chan.next_slot();
      BcdResult res = bcd_execution(s, ch, sys, su.wds, bc);
      ok = ok && res.iterations <= bc.max_iters;
      for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
        double prev = res.objective_trace[i - 1];
        ok = ok && res.objective_trace[i] >=
                       prev - 1e-9 * std::max(1.0, std::abs(prev));
      }
    }
    note("bcd_monotone", ok);
  }

  {  // H: strictly decreasing, tiny residual at the root
    const WdParams& wd = su.wds.front();
    double lo = sys.energy_scale *
                (sys.sensing_energy_per_bit_j * sys.max_sense_bits +
                 wd.max_tx_power_w * sys.slot_duration_s +
                 wd.cpu_energy_coeff * std::pow(wd.max_cpu_hz, 3) *
                     sys.slot_duration_s);
    rng::Stream st(rng::substream(0x9A0B, 4, 0));
    bool ok = true;
    for (int n = 0; n < 100 && ok; ++n) {
      double a = lo * (1.0 + std::pow(10.0, st.next_unit() * 8.0 - 4.0));
      double b = a * (1.0 + std::pow(10.0, st.next_unit() * 4.0 - 4.0));
      ok = ok && battery_threshold_h(a, sys, wd) >
                     battery_threshold_h(b, sys, wd);
    }
    double root = battery_threshold_root(sys, wd);
    double residual = battery_threshold_h(root, sys, wd);
    ok = ok && std::abs(residual) <= 1e-9;
    note("h_monotone_residual", ok);
  }

  {  // data conservation through the dynamics
    rng::Stream st(rng::substream(0x9A0B, 5, 0));
    ChannelParams cp = su.chan;
    cp.rng_seed = 7;
    std::vector<double> dist;
    for (const auto& wd : su.wds) dist.push_back(wd.distance_m);
    ChannelStream chan(cp, dist, sys.noise_power_w);
    bool ok = true;
    for (int n = 0; n < 200 && ok; ++n) {
      SystemState s = random_state(st, sys, su.wds);
      ChannelState ch = chan.next_slot();
      Action a = decide(s, ch, sys, su.wds);
      SlotOutcome out = step_queues(s, a, ch, sys, su.wds);
      // offloaded bits recomputed independently from the action
      double shipped = 0.0;
      for (int i = 0; i < sys.num_devices; ++i)
        if (a.offload_time_s[i] > 0.0 && a.wd_tx_power_w[i] > 0.0)
          shipped += sys.bandwidth_hz * a.offload_time_s[i] *
                     std::log2(1.0 + a.wd_tx_power_w[i] *
                                         ch.offload_snr_per_watt[i]);
      double entered = out.next_state.hap_queue_bits -
                       std::max(s.hap_queue_bits - out.edge_bits, 0.0);
      ok = ok && std::abs(entered - shipped) <=
                     1e-9 * std::max(1.0, shipped);
      for (int i = 0; i < sys.num_devices; ++i)
        ok = ok && out.next_state.wd_queue_bits[i] >= 0.0;
    }
    note("data_conservation", ok);
  }

  r.seconds = seconds_since(t0);
  r.pass = all;
  r.detail = os.str();
  return r;
}

// ---- criterion 3: queue bound over all collected runs --------------------

CheckResult criterion_queue_bound(const std::vector<LeeseRunRecord>& records) {
  CheckResult r{3, "per-device queue bound V + r_max", false, "", 0.0};
  bool ok = !records.empty();
  double worst_margin = -1e300;
  for (const auto& rec : records) {
    double bound = rec.lyapunov_v + rec.max_sense_bits;
    worst_margin = std::max(worst_margin, rec.max_wd_queue_bits - bound);
    if (rec.max_wd_queue_bits > bound + 1e-6) ok = false;
  }
  r.pass = ok;
  std::ostringstream os;
  os << records.size() << " runs, worst max-queue minus bound "
     << fmt(worst_margin) << " bits (tol 1e-6)";
  r.detail = os.str();
  return r;
}

}  // namespace

VerifyLevel parse_verify_level(const std::string& name) {
  if (name == "quick") return VerifyLevel::kQuick;
  if (name == "full") return VerifyLevel::kFull;
  throw ValidationError("level", "expected quick or full, got '" + name + "'");
}

std::vector<CheckResult> run_verification(VerifyLevel level, int jobs) {
  std::vector<CheckResult> out;
  if (level == VerifyLevel::kQuick) {
    out.push_back(criterion_oracle_gap(true, jobs));
    out.push_back(criterion_feasibility(true, nullptr));
    return out;
  }
  std::vector<LeeseRunRecord> records;
  out.push_back(criterion_oracle_gap(false, jobs));
  out.push_back(criterion_feasibility(false, &records));
  out.push_back(criterion_v_tradeoff(jobs, &records));
  out.push_back(criterion_dominance(jobs, &records));
  out.push_back(criterion_timing(&records));
  out.push_back(criterion_properties());
  out.push_back(criterion_queue_bound(records));
  std::sort(out.begin(), out.end(),
            [](const CheckResult& a, const CheckResult& b) {
              return a.criterion < b.criterion;
            });
  return out;
}

int report_checks(const std::vector<CheckResult>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.pass;
    std::printf("[%s] criterion %d: %s — %s [%.1fs]\n",
                c.pass ? "PASS" : "FAIL", c.criterion, c.name.c_str(),
                c.detail.c_str(), c.seconds);
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}

}  // namespace wpmec
