#include "wpmec/engine.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "wpmec/baselines.hpp"
#include "wpmec/parallel.hpp"
#include "wpmec/physics.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

namespace {

constexpr std::uint64_t kPlacementSalt = 0x97ACED15ull;
constexpr long kSeriesBudget = 10000;  // max stored points before striding

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::kLeese:
      return "leese";
    case Policy::kLco:
      return "lco";
    case Policy::kEqOT:
      return "eqot";
    case Policy::kMyopicEdge:
      return "myopic";
  }
  return "unknown";
}

Policy parse_policy(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "leese") return Policy::kLeese;
  if (s == "lco") return Policy::kLco;
  if (s == "eqot") return Policy::kEqOT;
  if (s == "myopic" || s == "myopicedge") return Policy::kMyopicEdge;
  throw ValidationError("policy", "unknown policy '" + name + "'");
}

const char* sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kV:
      return "V";
    case SweepAxis::kSigma:
      return "sigma";
    case SweepAxis::kE0Th:
      return "e0th";
    case SweepAxis::kRMax:
      return "r_max";
    case SweepAxis::kK:
      return "K";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "v") return SweepAxis::kV;
  if (s == "sigma") return SweepAxis::kSigma;
  if (s == "e0th") return SweepAxis::kE0Th;
  if (s == "r_max" || s == "rmax") return SweepAxis::kRMax;
  if (s == "k") return SweepAxis::kK;
  throw ValidationError("axis", "unknown sweep axis '" + name + "'");
}

void RunConfig::validate() const {
  if (num_slots < 1) throw ValidationError("run.num_slots", "must be >= 1");
  if (moving_average_window < 1)
    throw ValidationError("run.moving_average_window", "must be >= 1");
  if (!(init.battery_fill >= 0.0 && init.battery_fill <= 1.0))
    throw ValidationError("run.init.battery_fill", "must be in [0, 1]");
  bcd.validate();
}

void SweepConfig::validate() const {
  if (values.empty()) throw ValidationError("sweep.values", "must be non-empty");
  if (seeds.empty()) throw ValidationError("sweep.seeds", "must be non-empty");
  if (policies.empty())
    throw ValidationError("sweep.policies", "must be non-empty");
  if (placements < 0)
    throw ValidationError("sweep.placements", "must be >= 0");
}

RunMetrics run(const SystemParams& sys, std::vector<WdParams> wds,
               const ChannelParams& chan, const RunConfig& cfg,
               const std::vector<ChannelState>* replay,
               std::vector<ChannelState>* trace_out) {
  validate_all(sys, wds, chan);
  cfg.validate();
  resolve_battery_capacities(sys, wds);

  const int k = sys.num_devices;
  const long n = cfg.num_slots;
  const long window = std::min<long>(cfg.moving_average_window, n);

  std::unique_ptr<ChannelProvider> provider;
  if (replay) {
    provider = std::make_unique<ReplayChannel>(*replay, k);
  } else {
    // the run seed owns the fading realization
    ChannelParams seeded = chan;
    seeded.rng_seed = cfg.seed;
    std::vector<double> distances(k);
    for (int i = 0; i < k; ++i) distances[i] = wds[i].distance_m;
    provider = std::make_unique<ChannelStream>(seeded, std::move(distances),
                                               sys.noise_power_w);
  }

  SystemState state;
  state.slot = 0;
  state.hap_queue_bits = cfg.init.hap_queue_bits;
  state.deficit_queue = cfg.init.deficit_queue;
  state.wd_queue_bits.assign(k, cfg.init.wd_queue_bits);
  state.battery.resize(k);
  for (int i = 0; i < k; ++i)
    state.battery[i] = cfg.init.battery_fill * wds[i].battery_capacity;

  RunMetrics m;
  m.policy = cfg.policy;
  m.num_slots = n;
  m.seed = cfg.seed;
  m.battery_capacity.resize(k);
  for (int i = 0; i < k; ++i) m.battery_capacity[i] = wds[i].battery_capacity;
  m.min_battery_seen = std::numeric_limits<double>::infinity();
  m.max_battery_seen = -std::numeric_limits<double>::infinity();

  const long stride = n <= kSeriesBudget ? 1 : (n + kSeriesBudget - 1) / kSeriesBudget;

  double sum_rate = 0.0, sum_e0 = 0.0, sum_q0 = 0.0, sum_qi = 0.0,
         sum_z0 = 0.0;
  // ring buffers for the last two moving-average windows
  std::vector<double> q0_ring(2 * window, 0.0), qi_ring(2 * window, 0.0);
  std::vector<double> decide_s;
  decide_s.reserve(n);
  double spent_hap_j = 0.0;  // cumulative, drives the myopic budget

  for (long slot = 0; slot < n; ++slot) {
    ChannelState cs = provider->next_slot();

    auto t0 = std::chrono::steady_clock::now();
    Action action;
    switch (cfg.policy) {
      case Policy::kLeese:
        action = decide(state, cs, sys, wds, cfg.bcd);
        break;
      case Policy::kLco:
        action = lco_decide(state, cs, sys, wds);
        break;
      case Policy::kEqOT:
        action = eqot_decide(state, cs, sys, wds);
        break;
      case Policy::kMyopicEdge:
        action = myopic_decide(state, cs, sys, wds, spent_hap_j, cfg.bcd);
        break;
    }
    auto t1 = std::chrono::steady_clock::now();
    decide_s.push_back(std::chrono::duration<double>(t1 - t0).count());

    SlotOutcome out = step_queues(state, action, cs, sys, wds);
    if (trace_out) trace_out->push_back(cs);

    // state-of-slot observations
    double mean_qi =
        std::accumulate(state.wd_queue_bits.begin(),
                        state.wd_queue_bits.end(), 0.0) / k;
    double min_b = *std::min_element(state.battery.begin(),
                                     state.battery.end());
    double max_b = *std::max_element(state.battery.begin(),
                                     state.battery.end());
    double weighted_sense = 0.0;
    for (int i = 0; i < k; ++i)
      weighted_sense += wds[i].weight * action.sense_bits[i];

    sum_rate += weighted_sense;
    sum_e0 += out.hap_energy_j;
    sum_q0 += state.hap_queue_bits;
    sum_qi += mean_qi;
    sum_z0 += state.deficit_queue;
    m.max_wd_queue_bits =
        std::max(m.max_wd_queue_bits,
                 *std::max_element(state.wd_queue_bits.begin(),
                                   state.wd_queue_bits.end()));
    m.min_battery_seen = std::min(m.min_battery_seen, min_b);
    m.max_battery_seen = std::max(m.max_battery_seen, max_b);
    q0_ring[slot % (2 * window)] = state.hap_queue_bits;
    qi_ring[slot % (2 * window)] = mean_qi;

    // conformance tripwires; a conforming run never increments these
    for (int i = 0; i < k; ++i) {
      if (state.wd_queue_bits[i] < 0.0 || state.hap_queue_bits < 0.0)
        ++m.causality_violations;
      if (state.battery[i] < 0.0 ||
          state.battery[i] > wds[i].battery_capacity * (1.0 + 1e-12))
        ++m.capacity_violations;
    }
    spent_hap_j += out.hap_energy_j;
    if (cfg.policy == Policy::kMyopicEdge &&
        spent_hap_j > (slot + 1) * sys.hap_avg_energy_budget_j *
                          (1.0 + 1e-9) + 1e-9)
      ++m.budget_violations;

    if (slot % stride == 0 || slot >= n - window) {
      m.series.push_back({slot, state.hap_queue_bits, mean_qi, min_b, max_b,
                          out.hap_energy_j, state.deficit_queue,
                          weighted_sense});
    }

    state = std::move(out.next_state);
  }

  // final state checks (the run observed slots 0..n-1 before stepping)
  m.max_wd_queue_bits =
      std::max(m.max_wd_queue_bits,
               *std::max_element(state.wd_queue_bits.begin(),
                                 state.wd_queue_bits.end()));
  m.min_battery_seen =
      std::min(m.min_battery_seen,
               *std::min_element(state.battery.begin(), state.battery.end()));
  m.max_battery_seen =
      std::max(m.max_battery_seen,
               *std::max_element(state.battery.begin(), state.battery.end()));

  m.avg_sensing_rate_bits = sum_rate / n;
  m.avg_hap_energy_j = sum_e0 / n;
  m.avg_hap_queue_bits = sum_q0 / n;
  m.avg_wd_queue_bits = sum_qi / n;
  m.avg_deficit_queue = sum_z0 / n;
  m.final_deficit_queue = state.deficit_queue;
  m.deficit_over_slots = state.deficit_queue / n;

  // moving-average windows over the final and the preceding `window` slots
  double f_q0 = 0.0, p_q0 = 0.0, f_qi = 0.0, p_qi = 0.0;
  long have = std::min(n, 2 * window);
  for (long s = n - have; s < n; ++s) {
    long idx = s % (2 * window);
    bool in_final = s >= n - window;
    (in_final ? f_q0 : p_q0) += q0_ring[idx];
    (in_final ? f_qi : p_qi) += qi_ring[idx];
  }
  long penult = have - window;
  m.final_window_hap_queue = f_q0 / window;
  m.final_window_wd_queue = f_qi / window;
  m.penult_window_hap_queue = penult > 0 ? p_q0 / penult : f_q0 / window;
  m.penult_window_wd_queue = penult > 0 ? p_qi / penult : f_qi / window;

  std::sort(decide_s.begin(), decide_s.end());
  m.decide_mean_s = mean_of(decide_s);
  m.decide_p99_s =
      decide_s.empty()
          ? 0.0
          : decide_s[static_cast<std::size_t>(
                std::min<double>(decide_s.size() - 1,
                                 std::ceil(0.99 * decide_s.size()) - 1))];
  return m;
}

namespace {

struct CellSpec {
  Policy policy;
  double value;
  std::uint64_t seed;
  int placement;
};

}  // namespace

std::vector<SweepCell> sweep(const SystemParams& sys,
                             const std::vector<WdParams>& wds,
                             const ChannelParams& chan, const RunConfig& base,
                             const SweepConfig& sweep_cfg) {
  sweep_cfg.validate();
  int placements = sweep_cfg.placements;
  if (placements == 0)
    placements = sweep_cfg.axis == SweepAxis::kK ? 4 : 1;

  std::vector<CellSpec> specs;
  for (Policy p : sweep_cfg.policies)
    for (double v : sweep_cfg.values)
      for (std::uint64_t s : sweep_cfg.seeds)
        for (int pl = 0; pl < placements; ++pl)
          specs.push_back({p, v, s, pl});

  std::vector<SweepCell> cells(specs.size());
  detail::parallel_for(
      static_cast<long>(specs.size()), sweep_cfg.jobs, [&](long idx) {
        const CellSpec& spec = specs[idx];
        SystemParams sys2 = sys;
        ChannelParams chan2 = chan;
        std::vector<WdParams> wds2 = wds;
        switch (sweep_cfg.axis) {
          case SweepAxis::kV:
            sys2.lyapunov_v = spec.value;
            break;
          case SweepAxis::kSigma:
            chan2.pathloss_exponent = spec.value;
            break;
          case SweepAxis::kE0Th:
            sys2.hap_avg_energy_budget_j = spec.value;
            break;
          case SweepAxis::kRMax:
            sys2.max_sense_bits = spec.value;
            break;
          case SweepAxis::kK: {
            int kk = static_cast<int>(std::lround(spec.value));
            if (kk < 1) throw ValidationError("sweep.values", "K must be >= 1");
            sys2.num_devices = kk;
            // clipped-Gaussian placements, one draw stream per
            // (seed, placement) pair
            rng::Stream st(
                rng::substream(kPlacementSalt, spec.seed, spec.placement));
            WdParams tmpl = wds.front();
            wds2.assign(kk, tmpl);
            for (int i = 0; i < kk; ++i) {
              double d = 5.0 + 3.0 * st.next_normal();
              wds2[i].distance_m = std::clamp(d, 2.0, 10.0);
            }
            break;
          }
        }
        RunConfig cfg = base;
        cfg.policy = spec.policy;
        cfg.seed = spec.seed;
        cells[idx] = {spec.policy, spec.value, spec.seed, spec.placement,
                      run(sys2, wds2, chan2, cfg)};
      });
  return cells;
}

double mean_sensing_rate(const std::vector<SweepCell>& cells, Policy policy,
                         double value) {
  double sum = 0.0;
  long count = 0;
  for (const auto& c : cells)
    if (c.policy == policy && c.value == value) {
      sum += c.metrics.avg_sensing_rate_bits;
      ++count;
    }
  return count ? sum / count : 0.0;
}

double mean_wd_queue(const std::vector<SweepCell>& cells, Policy policy,
                     double value) {
  double sum = 0.0;
  long count = 0;
  for (const auto& c : cells)
    if (c.policy == policy && c.value == value) {
      sum += c.metrics.avg_wd_queue_bits;
      ++count;
    }
  return count ? sum / count : 0.0;
}

}  // namespace wpmec
