#include <doctest.h>

#include <cmath>

#include "wpmec/model.hpp"

using namespace wpmec;

TEST_SUITE_BEGIN("model");

TEST_CASE("defaults follow the reference deployment") {
  DefaultSetup d = default_params(8);
  CHECK(d.system.slot_duration_s == 5.0);
  CHECK(d.system.bandwidth_hz == 30e3);
  CHECK(d.system.noise_power_w == 1e-10);
  CHECK(d.system.hap_max_tx_power_w == 3.0);
  CHECK(d.system.hap_max_cpu_hz == 2e9);
  CHECK(d.system.hap_cpu_energy_coeff == 1e-26);
  CHECK(d.system.hap_cycles_per_bit == 1000.0);
  CHECK(d.system.hap_avg_energy_budget_j == 8.0);
  CHECK(d.system.sensing_energy_per_bit_j == 1e-9);
  CHECK(d.system.max_sense_bits == 512e3);
  CHECK(d.system.lyapunov_v == 32e5);
  CHECK(d.system.energy_scale == 1000.0);
  CHECK(d.system.deficit_scale == 1.0);
  CHECK(d.system.min_battery_j == 1e-3);
  CHECK(d.channel.antenna_gain == 4.11);
  CHECK(d.channel.pathloss_exponent == 2.4);
  CHECK(d.channel.wpt_carrier_hz == 915e6);
  CHECK(d.channel.comms_carrier_hz == 2.4e9);
  REQUIRE(d.devices.size() == 8);
  for (const auto& wd : d.devices) {
    CHECK(wd.weight == 1.0);
    CHECK(wd.max_cpu_hz == 16e6);
    CHECK(wd.cpu_energy_coeff == 1e-26);
    CHECK(wd.cycles_per_bit == 1000.0);
    CHECK(wd.eh_a1 == 2.463);
    CHECK(wd.eh_a2 == 1.635);
    CHECK(wd.eh_a3 == 0.826);
  }
}

TEST_CASE("line placement spans 2 m to 10 m") {
  DefaultSetup d = default_params(8);
  CHECK(d.devices.front().distance_m == doctest::Approx(2.0));
  CHECK(d.devices.back().distance_m == doctest::Approx(10.0));
  // equally spaced
  for (int i = 0; i < 8; ++i)
    CHECK(d.devices[i].distance_m ==
          doctest::Approx(2.0 + 8.0 / 7.0 * i).epsilon(1e-12));
}

TEST_CASE("single device sits at the near end") {
  DefaultSetup d = default_params(1);
  REQUIRE(d.devices.size() == 1);
  CHECK(d.devices[0].distance_m == 2.0);
}

TEST_CASE("transmit power defaults to 5 dBm in Watts") {
  // 10^(5/10) * 1e-3
  double expected = std::pow(10.0, 0.5) * 1e-3;
  CHECK(default_params(8).devices[0].max_tx_power_w ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(3.1623e-3).epsilon(1e-4));
  CHECK(dbm_to_watt(0.0) == doctest::Approx(1e-3));
  CHECK(dbm_to_watt(30.0) == doctest::Approx(1.0));
}

TEST_CASE("invalid device count is rejected") {
  CHECK_THROWS_AS(default_params(0), ValidationError);
}

TEST_CASE("default_params is deterministic") {
  DefaultSetup a = default_params(5);
  DefaultSetup b = default_params(5);
  CHECK(a.system.lyapunov_v == b.system.lyapunov_v);
  REQUIRE(a.devices.size() == b.devices.size());
  for (std::size_t i = 0; i < a.devices.size(); ++i) {
    CHECK(a.devices[i].distance_m == b.devices[i].distance_m);
    CHECK(a.devices[i].max_tx_power_w == b.devices[i].max_tx_power_w);
    CHECK(a.devices[i].battery_capacity == b.devices[i].battery_capacity);
  }
}

TEST_CASE("harvesting parameter sets violating the concavity precondition "
          "are rejected") {
  WdParams wd = default_params(1).devices[0];
  wd.eh_a2 = wd.eh_a1 * wd.eh_a3 + 0.01;  // a1*a3 - a2 < 0
  CHECK_THROWS_AS(wd.validate(), ValidationError);
  wd = default_params(1).devices[0];
  wd.eh_a3 = 0.0;
  CHECK_THROWS_AS(wd.validate(), ValidationError);
  wd = default_params(1).devices[0];
  wd.eh_a3 = -0.5;
  CHECK_THROWS_AS(wd.validate(), ValidationError);
}

TEST_CASE("drift bound magnitudes") {
  DefaultSetup d = default_params(8);
  DriftBound b = drift_bound(d.system, d.devices, d.channel);

  // local cap: f_max * T / cycles_per_bit
  CHECK(b.local_bits_max[0] == doctest::Approx(16e6 * 5.0 / 1000.0));
  CHECK(b.local_bits_max[0] == doctest::Approx(80000.0));
  // edge cap
  CHECK(b.edge_bits_max == doctest::Approx(2e9 * 5.0 / 1000.0));
  CHECK(b.edge_bits_max == doctest::Approx(1e7));
  CHECK(b.harvest_max_j[0] == doctest::Approx(15.0));
  CHECK(b.c_constant > 0.0);
  // offload cap shrinks with distance
  for (std::size_t i = 1; i < b.offload_bits_max.size(); ++i)
    CHECK(b.offload_bits_max[i] < b.offload_bits_max[i - 1]);
}

TEST_CASE("drift bound with a zero-CPU device") {
  DefaultSetup d = default_params(1);
  d.devices[0].max_cpu_hz = 0.0;
  DriftBound b = drift_bound(d.system, d.devices, d.channel);
  CHECK(b.local_bits_max[0] == 0.0);
  double expected = d.system.sensing_energy_per_bit_j *
                        d.system.max_sense_bits +
                    d.devices[0].max_tx_power_w * d.system.slot_duration_s;
  CHECK(b.wd_energy_max_j[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("drift constant is monotone in the caps") {
  DefaultSetup base = default_params(4);
  double c0 = drift_bound(base.system, base.devices, base.channel).c_constant;

  auto bumped = [&](auto&& mutate) {
    DefaultSetup d = default_params(4);
    mutate(d);
    return drift_bound(d.system, d.devices, d.channel).c_constant;
  };
  CHECK(bumped([](DefaultSetup& d) { d.system.max_sense_bits *= 2; }) >= c0);
  CHECK(bumped([](DefaultSetup& d) {
          for (auto& wd : d.devices) wd.max_cpu_hz *= 2;
        }) >= c0);
  CHECK(bumped([](DefaultSetup& d) {
          for (auto& wd : d.devices) wd.max_tx_power_w *= 2;
        }) >= c0);
  CHECK(bumped([](DefaultSetup& d) { d.system.hap_max_tx_power_w *= 2; }) >=
        c0);
}

TEST_SUITE_END();
