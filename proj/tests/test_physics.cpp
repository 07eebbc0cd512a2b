#include <doctest.h>

#include <cmath>

#include "wpmec/physics.hpp"
#include "wpmec/rng.hpp"

using namespace wpmec;

TEST_SUITE_BEGIN("physics");

namespace {

struct Fixture {
  SystemParams sys;
  std::vector<WdParams> wds;

  Fixture() {
    DefaultSetup d = default_params(2);
    sys = d.system;
    wds = d.devices;
    for (auto& wd : wds) wd.battery_capacity = 1e6;  // explicit, scaled
  }

  SystemState state() const {
    SystemState s;
    s.wd_queue_bits.assign(2, 0.0);
    s.battery.assign(2, 1e6);
    return s;
  }

  ChannelState channel(double gp = 1e-4, double gi = 1e-5) const {
    ChannelState c;
    c.wpt_gain.assign(2, gp);
    c.offload_gain.assign(2, gi);
    c.offload_snr_per_watt.assign(2, gi / sys.noise_power_w);
    return c;
  }

  Action zero_action() const {
    Action a;
    a.sense_bits.assign(2, 0.0);
    a.wd_tx_power_w.assign(2, 0.0);
    a.wd_cpu_hz.assign(2, 0.0);
    a.offload_time_s.assign(2, 0.0);
    return a;
  }
};

}  // namespace

TEST_CASE("harvested energy formula") {
  Fixture f;
  const WdParams& wd = f.wds[0];

  CHECK(energy_harvested(0.0, 1e-3, wd, f.sys) == 0.0);

  // saturation limit (a1*a3 - a2)/a3
  double limit = (wd.eh_a1 * wd.eh_a3 - wd.eh_a2) / wd.eh_a3;
  CHECK(limit == doctest::Approx(0.48358).epsilon(1e-4));
  CHECK(energy_harvested(1e12, 1.0, wd, f.sys) ==
        doctest::Approx(limit).epsilon(1e-9));

  // direct evaluation at p0 = 3 W, h = 1e-3
  double x = 3.0 * 1e-3;
  double direct =
      (wd.eh_a1 * x + wd.eh_a2) / (x + wd.eh_a3) - wd.eh_a2 / wd.eh_a3;
  CHECK(energy_harvested(3.0, 1e-3, wd, f.sys) == doctest::Approx(direct));
  CHECK(direct == doctest::Approx(1.75e-3).epsilon(1e-2));
}

TEST_CASE("harvested energy is concave and non-decreasing") {
  Fixture f;
  rng::Stream st(12345);
  for (int n = 0; n < 1000; ++n) {
    WdParams wd = f.wds[0];
    wd.eh_a3 = 0.05 + st.next_unit() * 5.0;
    wd.eh_a1 = 0.05 + st.next_unit() * 5.0;
    wd.eh_a2 = st.next_unit() * wd.eh_a1 * wd.eh_a3;
    wd.validate();
    double h = std::pow(10.0, -6.0 + 4.0 * st.next_unit());
    double pa = st.next_unit() * 3.0;
    double pb = st.next_unit() * 3.0;
    double ea = energy_harvested(pa, h, wd, f.sys);
    double eb = energy_harvested(pb, h, wd, f.sys);
    double em = energy_harvested(0.5 * (pa + pb), h, wd, f.sys);
    REQUIRE(em >= 0.5 * (ea + eb) - 1e-12);
    if (pa <= pb)
      REQUIRE(eb >= ea);
    else
      REQUIRE(ea >= eb);
  }
}

TEST_CASE("harvest-spans-slot switch multiplies by the slot duration") {
  Fixture f;
  double base = energy_harvested(2.0, 1e-4, f.wds[0], f.sys);
  f.sys.harvest_spans_slot = true;
  CHECK(energy_harvested(2.0, 1e-4, f.wds[0], f.sys) ==
        doctest::Approx(base * f.sys.slot_duration_s));
}

TEST_CASE("local computing bits and energy") {
  Fixture f;
  CHECK(local_compute(0.0, f.wds[0], f.sys).bits == 0.0);
  CHECK(local_compute(0.0, f.wds[0], f.sys).energy_j == 0.0);

  BitsEnergy be = local_compute(16e6, f.wds[0], f.sys);
  CHECK(be.bits == doctest::Approx(80000.0));
  CHECK(be.energy_j == doctest::Approx(1e-26 * std::pow(16e6, 3) * 5.0));
  CHECK(be.energy_j == doctest::Approx(2.048e-4));

  // bits scale linearly, energy cubically
  BitsEnergy half = local_compute(8e6, f.wds[0], f.sys);
  CHECK(be.bits == doctest::Approx(2.0 * half.bits));
  CHECK(be.energy_j == doctest::Approx(8.0 * half.energy_j));

  CHECK_THROWS_AS(local_compute(16e6 * 1.01, f.wds[0], f.sys),
                  InfeasibleActionError);
  CHECK_THROWS_AS(local_compute(-1.0, f.wds[0], f.sys),
                  InfeasibleActionError);
}

TEST_CASE("offloading bits and energy") {
  Fixture f;
  CHECK(offload(1e-3, 0.0, 1e5, f.sys).bits == 0.0);
  CHECK(offload(1e-3, 0.0, 1e5, f.sys).energy_j == 0.0);
  CHECK(offload(0.0, 2.0, 1e5, f.sys).bits == 0.0);

  // p*gamma = 1 over one second: W bits
  BitsEnergy be = offload(1e-5, 1.0, 1e5, f.sys);
  CHECK(be.bits == doctest::Approx(30000.0));
  CHECK(be.energy_j == doctest::Approx(1e-5));
}

TEST_CASE("edge computing bits and energy") {
  Fixture f;
  CHECK(edge_compute(0.0, f.sys).bits == 0.0);

  BitsEnergy be = edge_compute(2e9, f.sys);
  CHECK(be.bits == doctest::Approx(1e7));
  CHECK(be.energy_j == doctest::Approx(1e-26 * std::pow(2e9, 3) * 5.0));

  // the speed that spends exactly the average budget
  double f0 = std::cbrt(f.sys.hap_avg_energy_budget_j /
                        (f.sys.hap_cpu_energy_coeff * f.sys.slot_duration_s));
  CHECK(edge_compute(f0, f.sys).energy_j ==
        doctest::Approx(f.sys.hap_avg_energy_budget_j).epsilon(1e-12));
}

TEST_CASE("zero action leaves queues unchanged and drains the deficit") {
  Fixture f;
  SystemState s = f.state();
  s.wd_queue_bits = {1000.0, 2000.0};
  s.hap_queue_bits = 500.0;
  s.deficit_queue = 3.0;

  SlotOutcome out = step_queues(s, f.zero_action(), f.channel(), f.sys, f.wds);
  CHECK(out.next_state.wd_queue_bits[0] == 1000.0);
  CHECK(out.next_state.wd_queue_bits[1] == 2000.0);
  CHECK(out.next_state.hap_queue_bits == 500.0);
  CHECK(out.next_state.deficit_queue ==
        doctest::Approx(std::max(
            3.0 - f.sys.deficit_scale * f.sys.hap_avg_energy_budget_j, 0.0)));
  CHECK(out.next_state.slot == 1);
}

TEST_CASE("queue boundary: processing the whole backlog leaves the sensed "
          "bits") {
  Fixture f;
  SystemState s = f.state();
  // queue exactly equal to the local processing capability
  double qi = 80000.0;
  s.wd_queue_bits = {qi, 0.0};

  Action a = f.zero_action();
  a.wd_cpu_hz[0] = 16e6;  // processes exactly qi bits
  a.sense_bits[0] = 123.0;
  SlotOutcome out = step_queues(s, a, f.channel(), f.sys, f.wds);
  CHECK(out.next_state.wd_queue_bits[0] == doctest::Approx(123.0));

  // one bit less in the queue is a causality violation
  s.wd_queue_bits[0] = qi - 1.0;
  CHECK_THROWS_AS(step_queues(s, a, f.channel(), f.sys, f.wds),
                  InfeasibleActionError);
}

TEST_CASE("violation errors carry the constraint identity") {
  Fixture f;
  SystemState s = f.state();
  Action a = f.zero_action();
  a.hap_cpu_hz = 1e6;  // edge bits with an empty HAP queue
  try {
    step_queues(s, a, f.channel(), f.sys, f.wds);
    FAIL("expected InfeasibleActionError");
  } catch (const InfeasibleActionError& e) {
    CHECK(e.constraint() == ConstraintId::kHapDataCausality);
  }

  a = f.zero_action();
  a.offload_time_s = {3.0, 2.5};  // exceeds the slot
  s.wd_queue_bits = {1e6, 1e6};
  a.wd_tx_power_w = {1e-3, 1e-3};
  try {
    step_queues(s, a, f.channel(), f.sys, f.wds);
    FAIL("expected InfeasibleActionError");
  } catch (const InfeasibleActionError& e) {
    CHECK(e.constraint() == ConstraintId::kTimeBudget);
  }

  // spending below the battery floor
  a = f.zero_action();
  s = f.state();
  s.battery = {0.5, 1e6};  // below min_battery_scaled = 1
  s.wd_queue_bits = {1e6, 0.0};
  a.wd_cpu_hz[0] = 1e6;
  try {
    step_queues(s, a, f.channel(), f.sys, f.wds);
    FAIL("expected InfeasibleActionError");
  } catch (const InfeasibleActionError& e) {
    CHECK(e.constraint() == ConstraintId::kEnergyCausality);
    CHECK(e.device() == 0);
  }
}

TEST_CASE("battery clamps at capacity under strong charging") {
  Fixture f;
  for (auto& wd : f.wds) wd.battery_capacity = 1.0;  // tiny capacity
  SystemState s = f.state();
  s.battery = {1.0, 0.9999};

  Action a = f.zero_action();
  a.hap_tx_power_w = 3.0;
  SlotOutcome out =
      step_queues(s, a, f.channel(1e-1, 1e-5), f.sys, f.wds);
  CHECK(out.harvested_j[0] > 0.0);
  CHECK(out.next_state.battery[0] == 1.0);
  CHECK(out.next_state.battery[1] == 1.0);
}

TEST_CASE("offloaded bits land in the HAP queue the same slot") {
  Fixture f;
  SystemState s = f.state();
  s.wd_queue_bits = {5e5, 5e5};
  s.hap_queue_bits = 1000.0;

  Action a = f.zero_action();
  a.wd_tx_power_w = {2e-3, 1e-3};
  a.offload_time_s = {2.0, 1.5};
  SlotOutcome out = step_queues(s, a, f.channel(), f.sys, f.wds);
  double shipped = out.offload_bits[0] + out.offload_bits[1];
  CHECK(shipped > 0.0);
  CHECK(out.next_state.hap_queue_bits ==
        doctest::Approx(1000.0 + shipped).epsilon(1e-12));
  CHECK(out.next_state.wd_queue_bits[0] ==
        doctest::Approx(5e5 - out.offload_bits[0]).epsilon(1e-12));
}

TEST_SUITE_END();
