#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "wpmec/channel.hpp"
#include "wpmec/leese.hpp"
#include "wpmec/model.hpp"

// Discrete-time simulation engine: runs any policy for N slots under the
// fading channel, enforcing the dynamics and accumulating metrics, plus a
// parameter-sweep harness for the experiment grids.

namespace wpmec {

enum class Policy { kLeese, kLco, kEqOT, kMyopicEdge };

const char* policy_name(Policy p);
Policy parse_policy(const std::string& name);  // throws ValidationError

struct InitialState {
  double hap_queue_bits = 0.0;
  double wd_queue_bits = 0.0;
  double deficit_queue = 0.0;
  double battery_fill = 1.0;  // fraction of capacity, default full
};

struct RunConfig {
  long num_slots = 20000;
  Policy policy = Policy::kLeese;
  std::uint64_t seed = 1;
  InitialState init;
  int moving_average_window = 400;
  BcdConfig bcd;

  void validate() const;
};

struct SeriesPoint {
  long slot = 0;
  double hap_queue_bits = 0.0;
  double mean_wd_queue_bits = 0.0;
  double min_battery = 0.0;  // scaled units
  double max_battery = 0.0;
  double hap_energy_j = 0.0;
  double deficit_queue = 0.0;
  double weighted_sense_bits = 0.0;
};

struct RunMetrics {
  Policy policy = Policy::kLeese;
  long num_slots = 0;
  std::uint64_t seed = 0;

  // long-term averages
  double avg_sensing_rate_bits = 0.0;  // weighted sensed bits per slot
  double avg_hap_energy_j = 0.0;
  double avg_hap_queue_bits = 0.0;
  double avg_wd_queue_bits = 0.0;  // device-mean of time averages
  double avg_deficit_queue = 0.0;

  // stability probes
  double final_deficit_queue = 0.0;
  double deficit_over_slots = 0.0;  // Z0(N) / N
  double max_wd_queue_bits = 0.0;
  double min_battery_seen = 0.0;  // scaled, over all slots and devices
  double max_battery_seen = 0.0;
  double final_window_hap_queue = 0.0;
  double penult_window_hap_queue = 0.0;
  double final_window_wd_queue = 0.0;
  double penult_window_wd_queue = 0.0;

  // conformance counters; all zero for a conforming run
  long causality_violations = 0;
  long capacity_violations = 0;
  long budget_violations = 0;

  // per-decide wall time
  double decide_mean_s = 0.0;
  double decide_p99_s = 0.0;

  std::vector<double> battery_capacity;  // resolved capacities, scaled
  std::vector<SeriesPoint> series;       // downsampled per-slot series
};

/// Runs one simulation. Capacities are resolved (auto entries filled from
/// battery_threshold) before the run; an infeasible action aborts with the
/// slot index and violated constraint. Deterministic given the seed.
/// `replay` substitutes a recorded channel trace for the generator;
/// `trace_out`, when non-null, receives the channel states used.
RunMetrics run(const SystemParams& sys, std::vector<WdParams> wds,
               const ChannelParams& chan, const RunConfig& cfg,
               const std::vector<ChannelState>* replay = nullptr,
               std::vector<ChannelState>* trace_out = nullptr);

enum class SweepAxis { kV, kSigma, kE0Th, kRMax, kK };

const char* sweep_axis_name(SweepAxis a);
SweepAxis parse_sweep_axis(const std::string& name);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kV;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<Policy> policies;
  int placements = 0;  // 0: 1 for most axes, 4 for device-count sweeps
  int jobs = 0;        // 0: hardware concurrency

  void validate() const;
};

struct SweepCell {
  Policy policy = Policy::kLeese;
  double value = 0.0;
  std::uint64_t seed = 0;
  int placement = 0;
  RunMetrics metrics;
};

/// Cross product of policies x values x seeds (x placements for the
/// device-count axis), each an independent run, distributed over worker
/// threads. Device-count sweeps redraw distances from the clipped Gaussian
/// placement model min(max(N(5, 3), 2), 10) per (seed, placement).
std::vector<SweepCell> sweep(const SystemParams& sys,
                             const std::vector<WdParams>& wds,
                             const ChannelParams& chan, const RunConfig& base,
                             const SweepConfig& sweep_cfg);

/// Seed/placement-averaged sensing rate for one (policy, value) pair.
double mean_sensing_rate(const std::vector<SweepCell>& cells, Policy policy,
                         double value);
/// Same for the device-mean time-average queue length.
double mean_wd_queue(const std::vector<SweepCell>& cells, Policy policy,
                     double value);

}  // namespace wpmec
