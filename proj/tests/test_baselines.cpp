#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wpmec/baselines.hpp"
#include "wpmec/channel.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/physics.hpp"
#include "wpmec/rng.hpp"

using namespace wpmec;

TEST_SUITE_BEGIN("baselines");

namespace {

struct Fixture {
  SystemParams sys;
  std::vector<WdParams> wds;
  ChannelParams chan;

  explicit Fixture(int k) {
    DefaultSetup d = default_params(k);
    sys = d.system;
    wds = d.devices;
    chan = d.channel;
    resolve_battery_capacities(sys, wds);
  }

  SystemState fresh() const {
    SystemState s;
    s.wd_queue_bits.assign(wds.size(), 0.0);
    s.battery.resize(wds.size());
    for (std::size_t i = 0; i < wds.size(); ++i)
      s.battery[i] = wds[i].battery_capacity;
    return s;
  }

  ChannelStream stream(std::uint64_t seed) const {
    ChannelParams cp = chan;
    cp.rng_seed = seed;
    std::vector<double> dist;
    for (const auto& wd : wds) dist.push_back(wd.distance_m);
    return ChannelStream(cp, dist, sys.noise_power_w);
  }

  SystemState busy_state(rng::Stream& st) const {
    SystemState s = fresh();
    double q_cap = sys.lyapunov_v + sys.max_sense_bits;
    for (std::size_t i = 0; i < wds.size(); ++i) {
      s.wd_queue_bits[i] = st.next_unit() * q_cap;
      s.battery[i] = wds[i].battery_capacity - st.next_unit() * 1e5;
    }
    double u = st.next_unit();
    s.hap_queue_bits = u * u * sys.lyapunov_v;
    s.deficit_queue = st.next_unit() < 0.25 ? 0.0 : st.next_unit() * 50.0;
    return s;
  }
};

}  // namespace

TEST_CASE("lco never offloads and shares the charging head") {
  Fixture f(4);
  auto stream = f.stream(31);
  rng::Stream st(41);
  for (int n = 0; n < 50; ++n) {
    SystemState s = f.busy_state(st);
    ChannelState cs = stream.next_slot();
    Action a = lco_decide(s, cs, f.sys, f.wds);
    for (int i = 0; i < 4; ++i) {
      CHECK(a.wd_tx_power_w[i] == 0.0);
      CHECK(a.offload_time_s[i] == 0.0);
    }
    CHECK_NOTHROW(step_queues(s, a, cs, f.sys, f.wds));
    // shared charging-power subroutine
    CHECK(a.hap_tx_power_w == charging_power(s, cs, f.sys, f.wds));
  }
  SystemState s = f.fresh();
  s.deficit_queue = 0.0;
  Action a = lco_decide(s, stream.next_slot(), f.sys, f.wds);
  CHECK(a.hap_tx_power_w == f.sys.hap_max_tx_power_w);
  CHECK(a.wd_cpu_hz[0] == 0.0);  // empty queue: nothing to compute
}

TEST_CASE("eqot fixes equal shares and sums to the slot") {
  Fixture f(4);
  auto stream = f.stream(32);
  rng::Stream st(42);
  for (int n = 0; n < 50; ++n) {
    SystemState s = f.busy_state(st);
    ChannelState cs = stream.next_slot();
    Action a = eqot_decide(s, cs, f.sys, f.wds);
    double sum = std::accumulate(a.offload_time_s.begin(),
                                 a.offload_time_s.end(), 0.0);
    CHECK(sum == doctest::Approx(f.sys.slot_duration_s).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
      CHECK(a.offload_time_s[i] ==
            doctest::Approx(f.sys.slot_duration_s / 4).epsilon(1e-12));
    CHECK_NOTHROW(step_queues(s, a, cs, f.sys, f.wds));
  }
}

TEST_CASE("eqot devices below the HAP queue still do not transmit") {
  Fixture f(2);
  auto stream = f.stream(33);
  SystemState s = f.fresh();
  s.hap_queue_bits = 1e6;
  s.wd_queue_bits = {1e5, 5e5};  // both below the HAP queue
  for (auto& b : s.battery) b -= 1e5;
  Action a = eqot_decide(s, stream.next_slot(), f.sys, f.wds);
  CHECK(a.wd_tx_power_w[0] == 0.0);
  CHECK(a.wd_tx_power_w[1] == 0.0);
  CHECK(a.offload_time_s[0] > 0.0);  // shares stay fixed regardless
}

TEST_CASE("eqot equals the single-pass solver at uniform shares") {
  Fixture f(4);
  auto stream = f.stream(34);
  rng::Stream st(43);
  BcdConfig one_pass;
  one_pass.max_iters = 1;
  for (int n = 0; n < 50; ++n) {
    SystemState s = f.busy_state(st);
    ChannelState cs = stream.next_slot();
    Action a = eqot_decide(s, cs, f.sys, f.wds);
    BcdResult res = bcd_execution(s, cs, f.sys, f.wds, one_pass);
    for (int i = 0; i < 4; ++i) {
      CHECK(a.wd_cpu_hz[i] == res.cpu_hz[i]);
      CHECK(a.wd_tx_power_w[i] == res.tx_power_w[i]);
    }
  }
}

TEST_CASE("eqot at K=1 matches the full solver when it allocates the "
          "whole slot") {
  Fixture f(1);
  auto stream = f.stream(35);
  rng::Stream st(44);
  int agreements = 0;
  for (int n = 0; n < 80; ++n) {
    SystemState s = f.busy_state(st);
    ChannelState cs = stream.next_slot();
    Action full = decide(s, cs, f.sys, f.wds);
    if (full.offload_time_s[0] != f.sys.slot_duration_s) continue;
    Action eq = eqot_decide(s, cs, f.sys, f.wds);
    CHECK(eq.offload_time_s[0] == full.offload_time_s[0]);
    CHECK(eq.wd_tx_power_w[0] ==
          doctest::Approx(full.wd_tx_power_w[0]).epsilon(1e-9));
    CHECK(eq.wd_cpu_hz[0] ==
          doctest::Approx(full.wd_cpu_hz[0]).epsilon(1e-9));
    ++agreements;
  }
  CHECK(agreements > 0);
}

TEST_CASE("myopic with no budget keeps the HAP silent") {
  Fixture f(2);
  auto stream = f.stream(36);
  SystemState s = f.fresh();
  s.slot = 4;
  // everything earned so far is already spent
  double spent = 5 * f.sys.hap_avg_energy_budget_j;
  Action a = myopic_decide(s, stream.next_slot(), f.sys, f.wds, spent);
  CHECK(a.hap_tx_power_w == 0.0);
  CHECK(a.hap_cpu_hz == 0.0);
}

TEST_CASE("myopic flat objective resolves to zero energy") {
  Fixture f(2);
  auto stream = f.stream(37);
  SystemState s = f.fresh();  // full batteries, empty queues
  s.slot = 100;
  Action a = myopic_decide(s, stream.next_slot(), f.sys, f.wds, 0.0);
  CHECK(a.hap_tx_power_w == 0.0);
  CHECK(a.hap_cpu_hz == 0.0);
}

TEST_CASE("myopic never exceeds the cumulative budget") {
  Fixture f(3);
  auto stream = f.stream(38);
  rng::Stream st(45);
  double spent = 0.0;
  SystemState s = f.fresh();
  for (long t = 0; t < 50; ++t) {
    s.slot = t;
    s.hap_queue_bits = st.next_unit() * 2e6;
    for (auto& b : s.battery) b -= st.next_unit() * 1e3;
    ChannelState cs = stream.next_slot();
    Action a = myopic_decide(s, cs, f.sys, f.wds, spent);
    SlotOutcome out = step_queues(s, a, cs, f.sys, f.wds);
    spent += out.hap_energy_j;
    REQUIRE(spent <=
            (t + 1) * f.sys.hap_avg_energy_budget_j * (1 + 1e-9) + 1e-9);
    s.wd_queue_bits = out.next_state.wd_queue_bits;
    s.battery = out.next_state.battery;
  }
}

TEST_CASE("myopic HAP split matches a 2-D grid oracle") {
  Fixture f(3);
  auto stream = f.stream(39);
  rng::Stream st(46);
  const double t_slot = f.sys.slot_duration_s;
  for (int n = 0; n < 40; ++n) {
    SystemState s = f.fresh();
    s.slot = 1 + static_cast<long>(st.next_unit() * 100);
    s.hap_queue_bits = st.next_unit() < 0.2 ? 0.0 : st.next_unit() * 3e6;
    for (auto& b : s.battery) b -= st.next_unit() * 1e6;
    ChannelState cs = stream.next_slot();
    double budget = f.sys.hap_avg_energy_budget_j;  // one slot of credit
    double spent = (s.slot + 1) * f.sys.hap_avg_energy_budget_j - budget;

    Action a = myopic_decide(s, cs, f.sys, f.wds, spent);
    auto value = [&](double p0, double f0) {
      double v = s.hap_queue_bits * f0 * t_slot / f.sys.hap_cycles_per_bit;
      for (int i = 0; i < 3; ++i)
        v += f.sys.energy_scale *
             (f.wds[i].battery_capacity - s.battery[i]) *
             energy_harvested(p0, cs.wpt_gain[i], f.wds[i], f.sys);
      return v;
    };
    double solver_val = value(a.hap_tx_power_w, a.hap_cpu_hz);

    // feasible-filtered 2-D grid over (charging power, edge speed)
    double best = 0.0;
    const int n_grid = 400;
    double p_hi = std::min(f.sys.hap_max_tx_power_w, budget / t_slot);
    double f_hi = std::min(f.sys.hap_max_cpu_hz,
                           s.hap_queue_bits * f.sys.hap_cycles_per_bit /
                               t_slot);
    for (int jp = 0; jp <= n_grid; ++jp) {
      double p0 = p_hi * jp / n_grid;
      double rem = budget - p0 * t_slot;
      if (rem < 0.0) continue;
      double f_cap = std::min(
          f_hi, std::cbrt(rem / (f.sys.hap_cpu_energy_coeff * t_slot)));
      best = std::max(best, value(p0, f_cap));  // increasing in f0
    }
    double gap = (best - solver_val) / std::max(std::abs(best), 1e-6);
    REQUIRE(gap <= 1e-3);

    // hard budget respected
    double e0 = a.hap_tx_power_w * t_slot +
                f.sys.hap_cpu_energy_coeff * std::pow(a.hap_cpu_hz, 3) *
                    t_slot;
    REQUIRE(e0 <= budget * (1 + 1e-9));
  }
}

TEST_CASE("all baselines honor the battery floor guard") {
  Fixture f(2);
  for (auto& wd : f.wds) {
    wd.battery_capacity = 1e4;
    wd.unsafe_capacity = true;
  }
  auto stream = f.stream(40);
  SystemState s = f.fresh();
  s.wd_queue_bits = {2e5, 2e5};
  s.battery = {0.3, 9000.0};
  ChannelState cs = stream.next_slot();
  for (Action a : {lco_decide(s, cs, f.sys, f.wds),
                   eqot_decide(s, cs, f.sys, f.wds),
                   myopic_decide(s, cs, f.sys, f.wds, 0.0)}) {
    CHECK(a.sense_bits[0] == 0.0);
    CHECK(a.wd_cpu_hz[0] == 0.0);
    CHECK(a.wd_tx_power_w[0] == 0.0);
    CHECK(a.offload_time_s[0] == 0.0);
    CHECK_NOTHROW(step_queues(s, a, cs, f.sys, f.wds));
  }
}

TEST_SUITE_END();
