#include "wpmec/model.hpp"

#include <cmath>
#include <string>

#include "wpmec/channel.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ValidationError(field, what);
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

const char* constraint_name(ConstraintId id) {
  switch (id) {
    case ConstraintId::kWdDataCausality:
      return "wd_data_causality";
    case ConstraintId::kHapDataCausality:
      return "hap_data_causality";
    case ConstraintId::kTimeBudget:
      return "time_budget";
    case ConstraintId::kEnergyCausality:
      return "energy_causality";
    case ConstraintId::kBoxConstraint:
      return "box_constraint";
  }
  return "unknown";
}

InfeasibleActionError::InfeasibleActionError(ConstraintId id, int device,
                                             long slot,
                                             const std::string& detail)
    : std::runtime_error(std::string("infeasible action at slot ") +
                         std::to_string(slot) + ", constraint " +
                         constraint_name(id) +
                         (device >= 0 ? ", device " + std::to_string(device)
                                      : std::string()) +
                         ": " + detail),
      id_(id),
      device_(device),
      slot_(slot) {}

void SystemParams::validate() const {
  require(positive(slot_duration_s), "system.slot_duration_s",
          "must be > 0");
  require(positive(bandwidth_hz), "system.bandwidth_hz", "must be > 0");
  require(positive(noise_power_w), "system.noise_power_w", "must be > 0");
  require(positive(hap_max_tx_power_w), "system.hap_max_tx_power_w",
          "must be > 0");
  require(positive(hap_max_cpu_hz), "system.hap_max_cpu_hz", "must be > 0");
  require(positive(hap_cpu_energy_coeff), "system.hap_cpu_energy_coeff",
          "must be > 0");
  require(positive(hap_cycles_per_bit), "system.hap_cycles_per_bit",
          "must be > 0");
  require(positive(hap_avg_energy_budget_j), "system.hap_avg_energy_budget_j",
          "must be > 0");
  require(positive(sensing_energy_per_bit_j),
          "system.sensing_energy_per_bit_j", "must be > 0");
  require(positive(max_sense_bits), "system.max_sense_bits", "must be > 0");
  require(positive(lyapunov_v), "system.lyapunov_v", "must be > 0");
  require(std::isfinite(energy_scale) && energy_scale >= 1.0,
          "system.energy_scale", "must be >= 1");
  require(positive(deficit_scale), "system.deficit_scale", "must be > 0");
  require(positive(min_battery_j), "system.min_battery_j", "must be > 0");
  require(num_devices >= 1, "system.num_devices", "must be >= 1");
}

void WdParams::validate() const {
  require(positive(weight), "device.weight", "must be > 0");
  require(positive(max_tx_power_w), "device.max_tx_power_w", "must be > 0");
  require(non_negative(max_cpu_hz), "device.max_cpu_hz", "must be >= 0");
  require(positive(cpu_energy_coeff), "device.cpu_energy_coeff",
          "must be > 0");
  require(positive(cycles_per_bit), "device.cycles_per_bit", "must be > 0");
  require(positive(distance_m), "device.distance_m", "must be > 0");
  // concavity precondition of the harvesting model
  require(std::isfinite(eh_a1) && std::isfinite(eh_a2) && std::isfinite(eh_a3),
          "device.eh_a", "must be finite");
  require(eh_a3 > 0.0, "device.eh_a3", "must be > 0");
  require(eh_a1 * eh_a3 - eh_a2 >= 0.0, "device.eh_a",
          "requires a1*a3 - a2 >= 0");
  require(battery_capacity == kAutoCapacity || positive(battery_capacity),
          "device.battery_capacity", "must be > 0 or auto");
}

void ChannelParams::validate() const {
  require(positive(wpt_carrier_hz), "channel.wpt_carrier_hz", "must be > 0");
  require(positive(comms_carrier_hz), "channel.comms_carrier_hz",
          "must be > 0");
  require(positive(antenna_gain), "channel.antenna_gain", "must be > 0");
  require(std::isfinite(pathloss_exponent) && pathloss_exponent >= 2.0,
          "channel.pathloss_exponent", "must be >= 2");
}

void validate_all(const SystemParams& sys, const std::vector<WdParams>& wds,
                  const ChannelParams& chan) {
  sys.validate();
  chan.validate();
  if (static_cast<int>(wds.size()) != sys.num_devices)
    throw ValidationError("devices", "device list size must equal K");
  for (const auto& wd : wds) wd.validate();
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

DefaultSetup default_params(int k) {
  if (k < 1) throw ValidationError("k", "device count must be >= 1");
  DefaultSetup setup;
  setup.system.num_devices = k;
  setup.devices.resize(k);
  for (int i = 0; i < k; ++i) {
    // line placement from 2 m to 10 m; a lone device sits at the near end
    double d = (k == 1) ? 2.0 : 2.0 + 8.0 / (k - 1) * i;
    setup.devices[i].distance_m = d;
    setup.devices[i].max_tx_power_w = dbm_to_watt(5.0);
  }
  return setup;
}

DriftBound drift_bound(const SystemParams& sys,
                       const std::vector<WdParams>& wds,
                       const ChannelParams& chan) {
  validate_all(sys, wds, chan);
  const double t = sys.slot_duration_s;
  const int k = sys.num_devices;

  DriftBound b;
  b.local_bits_max.resize(k);
  b.offload_bits_max.resize(k);
  b.wd_energy_max_j.resize(k);
  b.harvest_max_j.resize(k);

  // Fading-averaged offload cap per device, by seeded Monte-Carlo over the
  // Exp(1) fading (100000 draws; the closed form would tie the estimate to
  // the exponential distribution, the sampler stays model-agnostic).
  constexpr int kMcSamples = 100000;
  constexpr std::uint64_t kMcSeed = 0x0FF10ADB17Bull;

  for (int i = 0; i < k; ++i) {
    const WdParams& wd = wds[i];
    b.local_bits_max[i] = wd.max_cpu_hz * t / wd.cycles_per_bit;
    b.harvest_max_j[i] = sys.hap_max_tx_power_w * t;
    b.wd_energy_max_j[i] =
        sys.sensing_energy_per_bit_j * sys.max_sense_bits +
        wd.max_tx_power_w * t +
        wd.cpu_energy_coeff * std::pow(wd.max_cpu_hz, 3) * t;

    const double g = mean_gain(wd.distance_m, chan.comms_carrier_hz, chan);
    rng::Stream stream(rng::substream(kMcSeed, i, 0));
    double acc = 0.0;
    for (int s = 0; s < kMcSamples; ++s) {
      double gamma = stream.next_exp() * g / sys.noise_power_w;
      acc += sys.bandwidth_hz * t * std::log2(1.0 + wd.max_tx_power_w * gamma);
    }
    b.offload_bits_max[i] = acc / kMcSamples;
  }

  b.edge_bits_max = sys.hap_max_cpu_hz * t / sys.hap_cycles_per_bit;
  b.hap_energy_max_j =
      sys.hap_cpu_energy_coeff * std::pow(sys.hap_max_cpu_hz, 3) * t +
      sys.hap_max_tx_power_w * t;

  double sum_off = 0.0;
  double c = 0.0;
  for (int i = 0; i < k; ++i) {
    double d_sum = b.local_bits_max[i] + b.offload_bits_max[i];
    c += d_sum * d_sum + sys.max_sense_bits * sys.max_sense_bits;
    double e_spend = sys.energy_scale * b.wd_energy_max_j[i];
    double e_gain = sys.energy_scale * b.harvest_max_j[i];
    c += e_spend * e_spend + e_gain * e_gain;
    sum_off += b.offload_bits_max[i];
  }
  c += sum_off * sum_off + b.edge_bits_max * b.edge_bits_max;
  double e0 = sys.deficit_scale * b.hap_energy_max_j;
  double e0th = sys.deficit_scale * sys.hap_avg_energy_budget_j;
  c += e0 * e0 + e0th * e0th;
  b.c_constant = 0.5 * c;
  return b;
}

}  // namespace wpmec
