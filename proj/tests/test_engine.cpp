#include <doctest.h>

#include <cmath>
#include <vector>

#include "wpmec/config_io.hpp"
#include "wpmec/engine.hpp"

using namespace wpmec;

TEST_SUITE_BEGIN("engine");

TEST_CASE("policy and axis names round-trip") {
  for (Policy p : {Policy::kLeese, Policy::kLco, Policy::kEqOT,
                   Policy::kMyopicEdge})
    CHECK(parse_policy(policy_name(p)) == p);
  CHECK(parse_policy("MyopicEdge") == Policy::kMyopicEdge);
  CHECK_THROWS_AS(parse_policy("greedy"), ValidationError);
  for (SweepAxis a : {SweepAxis::kV, SweepAxis::kSigma, SweepAxis::kE0Th,
                      SweepAxis::kRMax, SweepAxis::kK})
    CHECK(parse_sweep_axis(sweep_axis_name(a)) == a);
  CHECK_THROWS_AS(parse_sweep_axis("w"), ValidationError);
}

TEST_CASE("a single fresh slot senses everywhere at full charge") {
  DefaultSetup d = default_params(8);
  RunConfig cfg;
  cfg.num_slots = 1;
  cfg.policy = Policy::kLeese;
  RunMetrics m = run(d.system, d.devices, d.channel, cfg);
  CHECK(m.avg_sensing_rate_bits ==
        doctest::Approx(8.0 * d.system.max_sense_bits));
  CHECK(m.causality_violations == 0);
}

TEST_CASE("equal seeds reproduce the run exactly") {
  DefaultSetup d = default_params(4);
  RunConfig cfg;
  cfg.num_slots = 400;
  cfg.seed = 9;
  RunMetrics a = run(d.system, d.devices, d.channel, cfg);
  RunMetrics b = run(d.system, d.devices, d.channel, cfg);
  CHECK(a.avg_sensing_rate_bits == b.avg_sensing_rate_bits);
  CHECK(a.avg_hap_energy_j == b.avg_hap_energy_j);
  CHECK(a.avg_wd_queue_bits == b.avg_wd_queue_bits);
  CHECK(a.final_deficit_queue == b.final_deficit_queue);
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) {
    CHECK(a.series[i].hap_queue_bits == b.series[i].hap_queue_bits);
    CHECK(a.series[i].min_battery == b.series[i].min_battery);
  }
}

TEST_CASE("different seeds give different channels") {
  DefaultSetup d = default_params(4);
  RunConfig cfg;
  cfg.num_slots = 400;
  cfg.seed = 9;
  RunMetrics a = run(d.system, d.devices, d.channel, cfg);
  cfg.seed = 10;
  RunMetrics b = run(d.system, d.devices, d.channel, cfg);
  CHECK(a.avg_hap_queue_bits != b.avg_hap_queue_bits);
}

TEST_CASE("five-thousand-slot conformance at defaults") {
  DefaultSetup d = default_params(8);
  RunConfig cfg;
  cfg.num_slots = 5000;
  cfg.policy = Policy::kLeese;
  cfg.seed = 1;
  RunMetrics m = run(d.system, d.devices, d.channel, cfg);
  CHECK(m.causality_violations == 0);
  CHECK(m.capacity_violations == 0);
  CHECK(m.budget_violations == 0);
  CHECK(m.avg_hap_energy_j <= d.system.hap_avg_energy_budget_j * 1.02);
  CHECK(m.max_wd_queue_bits <=
        d.system.lyapunov_v + d.system.max_sense_bits + 1e-6);
  CHECK(m.min_battery_seen >= 0.0);
  CHECK(m.max_battery_seen <= m.battery_capacity[0] * (1 + 1e-12));
  CHECK(m.deficit_over_slots <
        1e-3 * d.system.deficit_scale * d.system.hap_avg_energy_budget_j);
  CHECK(m.decide_mean_s < 10e-3);
}

TEST_CASE("replay reproduces the generator and trace capture works") {
  DefaultSetup d = default_params(2);
  RunConfig cfg;
  cfg.num_slots = 120;
  cfg.seed = 5;
  std::vector<ChannelState> trace;
  RunMetrics a = run(d.system, d.devices, d.channel, cfg, nullptr, &trace);
  REQUIRE(trace.size() == 120);
  RunMetrics b = run(d.system, d.devices, d.channel, cfg, &trace);
  CHECK(a.avg_sensing_rate_bits == b.avg_sensing_rate_bits);
  CHECK(a.avg_hap_queue_bits == b.avg_hap_queue_bits);
  CHECK(a.final_deficit_queue == b.final_deficit_queue);
}

TEST_CASE("series downsampling keeps the final window dense") {
  DefaultSetup d = default_params(2);
  RunConfig cfg;
  cfg.num_slots = 20000;  // stride 2
  cfg.policy = Policy::kLco;
  RunMetrics m = run(d.system, d.devices, d.channel, cfg);
  long in_final_window = 0;
  for (const auto& p : m.series)
    if (p.slot >= cfg.num_slots - cfg.moving_average_window) ++in_final_window;
  CHECK(in_final_window == cfg.moving_average_window);
  CHECK(m.series.size() < 12000);
  CHECK(m.series.front().slot == 0);
}

TEST_CASE("a sweep with one value and one seed equals a lone run") {
  DefaultSetup d = default_params(4);
  RunConfig base;
  base.num_slots = 300;
  SweepConfig sc;
  sc.axis = SweepAxis::kE0Th;
  sc.values = {d.system.hap_avg_energy_budget_j};
  sc.seeds = {7};
  sc.policies = {Policy::kLeese};
  auto cells = sweep(d.system, d.devices, d.channel, base, sc);
  REQUIRE(cells.size() == 1);
  RunConfig lone = base;
  lone.seed = 7;
  RunMetrics m = run(d.system, d.devices, d.channel, lone);
  CHECK(cells[0].metrics.avg_sensing_rate_bits == m.avg_sensing_rate_bits);
  CHECK(cells[0].metrics.avg_hap_energy_j == m.avg_hap_energy_j);
}

TEST_CASE("pathloss sweep degrades every policy") {
  DefaultSetup d = default_params(4);
  RunConfig base;
  base.num_slots = 2500;
  SweepConfig sc;
  sc.axis = SweepAxis::kSigma;
  sc.values = {2.0, 2.4, 2.8};
  sc.seeds = {1, 2};
  sc.policies = {Policy::kLeese, Policy::kEqOT};
  sc.jobs = 4;
  auto cells = sweep(d.system, d.devices, d.channel, base, sc);
  REQUIRE(cells.size() == 12);
  for (Policy p : {Policy::kLeese, Policy::kEqOT}) {
    double r20 = mean_sensing_rate(cells, p, 2.0);
    double r24 = mean_sensing_rate(cells, p, 2.4);
    double r28 = mean_sensing_rate(cells, p, 2.8);
    CHECK(r20 >= r24);
    CHECK(r24 >= r28);
  }
}

TEST_CASE("device-count sweep redraws clipped-Gaussian placements") {
  DefaultSetup d = default_params(2);
  RunConfig base;
  base.num_slots = 200;
  SweepConfig sc;
  sc.axis = SweepAxis::kK;
  sc.values = {1, 3};
  sc.seeds = {1, 2};
  sc.policies = {Policy::kLeese};
  sc.placements = 2;
  auto cells = sweep(d.system, d.devices, d.channel, base, sc);
  REQUIRE(cells.size() == 8);
  // distinct placements under the same seed and value produce different runs
  double r0 = -1.0, r1 = -1.0;
  for (const auto& c : cells)
    if (c.value == 3 && c.seed == 1)
      (c.placement == 0 ? r0 : r1) = c.metrics.avg_sensing_rate_bits;
  CHECK(r0 >= 0.0);
  CHECK(r1 >= 0.0);
  CHECK(r0 != r1);
}

TEST_CASE("sweep rejects empty axes") {
  SweepConfig sc;
  sc.values = {};
  sc.seeds = {1};
  sc.policies = {Policy::kLeese};
  CHECK_THROWS_AS(sc.validate(), ValidationError);
}

TEST_SUITE_END();
