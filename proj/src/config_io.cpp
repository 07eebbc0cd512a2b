#include "wpmec/config_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace wpmec {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& scope,
                    std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ValidationError(scope + "." + it.key(), "unknown config key");
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(key, "expected a number, got '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& key) {
  double v = parse_double(s, key);
  return static_cast<long>(std::llround(v));
}

void parse_capacity(const json& v, WdParams& wd) {
  if (v.is_string()) {
    if (v.get<std::string>() != "auto")
      throw ValidationError("devices.battery_capacity",
                            "expected a number or \"auto\"");
    wd.battery_capacity = kAutoCapacity;
  } else {
    wd.battery_capacity = v.get<double>();
  }
}

}  // namespace

FullConfig default_config(int k) {
  DefaultSetup d = default_params(k);
  return {d.system, d.devices, d.channel, RunConfig{}};
}

FullConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config", "must be a JSON object");
  reject_unknown(j, "config", {"system", "devices", "channel", "run"});

  int k = 8;
  if (j.contains("devices") && j.at("devices").contains("count"))
    k = j.at("devices").at("count").get<int>();
  FullConfig cfg = default_config(k);

  if (j.contains("system")) {
    const json& s = j.at("system");
    reject_unknown(
        s, "system",
        {"slot_duration_s", "bandwidth_hz", "noise_power_w",
         "hap_max_tx_power_w", "hap_max_cpu_hz", "hap_cpu_energy_coeff",
         "hap_cycles_per_bit", "hap_avg_energy_budget_j",
         "sensing_energy_per_bit_j", "max_sense_bits", "lyapunov_v",
         "energy_scale", "deficit_scale", "min_battery_j",
         "harvest_spans_slot"});
    get_if(s, "slot_duration_s", cfg.sys.slot_duration_s);
    get_if(s, "bandwidth_hz", cfg.sys.bandwidth_hz);
    get_if(s, "noise_power_w", cfg.sys.noise_power_w);
    get_if(s, "hap_max_tx_power_w", cfg.sys.hap_max_tx_power_w);
    get_if(s, "hap_max_cpu_hz", cfg.sys.hap_max_cpu_hz);
    get_if(s, "hap_cpu_energy_coeff", cfg.sys.hap_cpu_energy_coeff);
    get_if(s, "hap_cycles_per_bit", cfg.sys.hap_cycles_per_bit);
    get_if(s, "hap_avg_energy_budget_j", cfg.sys.hap_avg_energy_budget_j);
    get_if(s, "sensing_energy_per_bit_j", cfg.sys.sensing_energy_per_bit_j);
    get_if(s, "max_sense_bits", cfg.sys.max_sense_bits);
    get_if(s, "lyapunov_v", cfg.sys.lyapunov_v);
    get_if(s, "energy_scale", cfg.sys.energy_scale);
    get_if(s, "deficit_scale", cfg.sys.deficit_scale);
    get_if(s, "min_battery_j", cfg.sys.min_battery_j);
    get_if(s, "harvest_spans_slot", cfg.sys.harvest_spans_slot);
  }

  if (j.contains("devices")) {
    const json& d = j.at("devices");
    reject_unknown(d, "devices",
                   {"count", "weight", "max_tx_power_dbm", "max_tx_power_w",
                    "max_cpu_hz", "cpu_energy_coeff", "cycles_per_bit",
                    "eh_a1", "eh_a2", "eh_a3", "battery_capacity",
                    "unsafe_capacity", "distances_m"});
    for (auto& wd : cfg.wds) {
      get_if(d, "weight", wd.weight);
      if (d.contains("max_tx_power_dbm"))
        wd.max_tx_power_w = dbm_to_watt(d.at("max_tx_power_dbm").get<double>());
      get_if(d, "max_tx_power_w", wd.max_tx_power_w);
      get_if(d, "max_cpu_hz", wd.max_cpu_hz);
      get_if(d, "cpu_energy_coeff", wd.cpu_energy_coeff);
      get_if(d, "cycles_per_bit", wd.cycles_per_bit);
      get_if(d, "eh_a1", wd.eh_a1);
      get_if(d, "eh_a2", wd.eh_a2);
      get_if(d, "eh_a3", wd.eh_a3);
      if (d.contains("battery_capacity"))
        parse_capacity(d.at("battery_capacity"), wd);
      get_if(d, "unsafe_capacity", wd.unsafe_capacity);
    }
    if (d.contains("distances_m")) {
      auto dist = d.at("distances_m").get<std::vector<double>>();
      if (dist.size() != cfg.wds.size())
        throw ValidationError("devices.distances_m",
                              "length must equal devices.count");
      for (std::size_t i = 0; i < dist.size(); ++i)
        cfg.wds[i].distance_m = dist[i];
    }
  }

  if (j.contains("channel")) {
    const json& c = j.at("channel");
    reject_unknown(c, "channel",
                   {"wpt_carrier_hz", "comms_carrier_hz", "antenna_gain",
                    "pathloss_exponent", "rng_seed"});
    get_if(c, "wpt_carrier_hz", cfg.chan.wpt_carrier_hz);
    get_if(c, "comms_carrier_hz", cfg.chan.comms_carrier_hz);
    get_if(c, "antenna_gain", cfg.chan.antenna_gain);
    get_if(c, "pathloss_exponent", cfg.chan.pathloss_exponent);
    get_if(c, "rng_seed", cfg.chan.rng_seed);
  }

  if (j.contains("run")) {
    const json& r = j.at("run");
    reject_unknown(r, "run",
                   {"slots", "policy", "seed", "moving_average_window",
                    "bcd_tol", "bcd_max_iters"});
    get_if(r, "slots", cfg.run.num_slots);
    if (r.contains("policy"))
      cfg.run.policy = parse_policy(r.at("policy").get<std::string>());
    get_if(r, "seed", cfg.run.seed);
    get_if(r, "moving_average_window", cfg.run.moving_average_window);
    get_if(r, "bcd_tol", cfg.run.bcd.tol);
    get_if(r, "bcd_max_iters", cfg.run.bcd.max_iters);
  }

  validate_all(cfg.sys, cfg.wds, cfg.chan);
  cfg.run.validate();
  return cfg;
}

FullConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("JSON parse error: ") +
                                        e.what());
  }
  return config_from_json(j);
}

json config_to_json(const FullConfig& cfg) {
  json j;
  j["system"] = {
      {"slot_duration_s", cfg.sys.slot_duration_s},
      {"bandwidth_hz", cfg.sys.bandwidth_hz},
      {"noise_power_w", cfg.sys.noise_power_w},
      {"hap_max_tx_power_w", cfg.sys.hap_max_tx_power_w},
      {"hap_max_cpu_hz", cfg.sys.hap_max_cpu_hz},
      {"hap_cpu_energy_coeff", cfg.sys.hap_cpu_energy_coeff},
      {"hap_cycles_per_bit", cfg.sys.hap_cycles_per_bit},
      {"hap_avg_energy_budget_j", cfg.sys.hap_avg_energy_budget_j},
      {"sensing_energy_per_bit_j", cfg.sys.sensing_energy_per_bit_j},
      {"max_sense_bits", cfg.sys.max_sense_bits},
      {"lyapunov_v", cfg.sys.lyapunov_v},
      {"energy_scale", cfg.sys.energy_scale},
      {"deficit_scale", cfg.sys.deficit_scale},
      {"min_battery_j", cfg.sys.min_battery_j},
      {"harvest_spans_slot", cfg.sys.harvest_spans_slot},
  };
  const WdParams& w0 = cfg.wds.front();
  std::vector<double> dist;
  for (const auto& wd : cfg.wds) dist.push_back(wd.distance_m);
  j["devices"] = {
      {"count", static_cast<int>(cfg.wds.size())},
      {"weight", w0.weight},
      {"max_tx_power_w", w0.max_tx_power_w},
      {"max_cpu_hz", w0.max_cpu_hz},
      {"cpu_energy_coeff", w0.cpu_energy_coeff},
      {"cycles_per_bit", w0.cycles_per_bit},
      {"eh_a1", w0.eh_a1},
      {"eh_a2", w0.eh_a2},
      {"eh_a3", w0.eh_a3},
      {"unsafe_capacity", w0.unsafe_capacity},
      {"distances_m", dist},
  };
  if (w0.battery_capacity == kAutoCapacity)
    j["devices"]["battery_capacity"] = "auto";
  else
    j["devices"]["battery_capacity"] = w0.battery_capacity;
  j["channel"] = {
      {"wpt_carrier_hz", cfg.chan.wpt_carrier_hz},
      {"comms_carrier_hz", cfg.chan.comms_carrier_hz},
      {"antenna_gain", cfg.chan.antenna_gain},
      {"pathloss_exponent", cfg.chan.pathloss_exponent},
      {"rng_seed", cfg.chan.rng_seed},
  };
  j["run"] = {
      {"slots", cfg.run.num_slots},
      {"policy", policy_name(cfg.run.policy)},
      {"seed", cfg.run.seed},
      {"moving_average_window", cfg.run.moving_average_window},
      {"bcd_tol", cfg.run.bcd.tol},
      {"bcd_max_iters", cfg.run.bcd.max_iters},
  };
  return j;
}

void apply_override(FullConfig& cfg, const std::string& key,
                    const std::string& value) {
  auto num = [&] { return parse_double(value, key); };
  auto lng = [&] { return parse_long(value, key); };
  auto flag = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ValidationError(key, "expected true/false");
  };

  if (key == "slot_duration_s" || key == "T") {
    cfg.sys.slot_duration_s = num();
  } else if (key == "bandwidth_hz") {
    cfg.sys.bandwidth_hz = num();
  } else if (key == "noise_power_w") {
    cfg.sys.noise_power_w = num();
  } else if (key == "p0_max_w") {
    cfg.sys.hap_max_tx_power_w = num();
  } else if (key == "f0_max_hz") {
    cfg.sys.hap_max_cpu_hz = num();
  } else if (key == "kappa0") {
    cfg.sys.hap_cpu_energy_coeff = num();
  } else if (key == "phi0") {
    cfg.sys.hap_cycles_per_bit = num();
  } else if (key == "e0th") {
    cfg.sys.hap_avg_energy_budget_j = num();
  } else if (key == "e_unit") {
    cfg.sys.sensing_energy_per_bit_j = num();
  } else if (key == "r_max") {
    cfg.sys.max_sense_bits = num();
  } else if (key == "v" || key == "V") {
    cfg.sys.lyapunov_v = num();
  } else if (key == "lambda_e") {
    cfg.sys.energy_scale = num();
  } else if (key == "lambda_c") {
    cfg.sys.deficit_scale = num();
  } else if (key == "b_min_j") {
    cfg.sys.min_battery_j = num();
  } else if (key == "harvest_spans_slot") {
    cfg.sys.harvest_spans_slot = flag();
  } else if (key == "k" || key == "K") {
    // re-derive the device list for the new count, keeping device 0's
    // hardware as the template
    int kk = static_cast<int>(lng());
    if (kk < 1) throw ValidationError(key, "must be >= 1");
    WdParams tmpl = cfg.wds.front();
    DefaultSetup d = default_params(kk);
    cfg.sys.num_devices = kk;
    cfg.wds.assign(kk, tmpl);
    for (int i = 0; i < kk; ++i)
      cfg.wds[i].distance_m = d.devices[i].distance_m;
  } else if (key == "weight") {
    for (auto& wd : cfg.wds) wd.weight = num();
  } else if (key == "pi_max_dbm") {
    for (auto& wd : cfg.wds) wd.max_tx_power_w = dbm_to_watt(num());
  } else if (key == "pi_max_w") {
    for (auto& wd : cfg.wds) wd.max_tx_power_w = num();
  } else if (key == "fi_max_hz") {
    for (auto& wd : cfg.wds) wd.max_cpu_hz = num();
  } else if (key == "kappa_i") {
    for (auto& wd : cfg.wds) wd.cpu_energy_coeff = num();
  } else if (key == "phi_i") {
    for (auto& wd : cfg.wds) wd.cycles_per_bit = num();
  } else if (key == "eh_a1") {
    for (auto& wd : cfg.wds) wd.eh_a1 = num();
  } else if (key == "eh_a2") {
    for (auto& wd : cfg.wds) wd.eh_a2 = num();
  } else if (key == "eh_a3") {
    for (auto& wd : cfg.wds) wd.eh_a3 = num();
  } else if (key == "battery_capacity") {
    for (auto& wd : cfg.wds)
      wd.battery_capacity = (value == "auto") ? kAutoCapacity : num();
  } else if (key == "unsafe_capacity") {
    for (auto& wd : cfg.wds) wd.unsafe_capacity = flag();
  } else if (key == "fc_wpt_hz") {
    cfg.chan.wpt_carrier_hz = num();
  } else if (key == "fc_comms_hz") {
    cfg.chan.comms_carrier_hz = num();
  } else if (key == "antenna_gain") {
    cfg.chan.antenna_gain = num();
  } else if (key == "sigma") {
    cfg.chan.pathloss_exponent = num();
  } else if (key == "slots") {
    cfg.run.num_slots = lng();
  } else if (key == "policy") {
    cfg.run.policy = parse_policy(value);
  } else if (key == "seed") {
    cfg.run.seed = static_cast<std::uint64_t>(lng());
  } else if (key == "window") {
    cfg.run.moving_average_window = static_cast<int>(lng());
  } else if (key == "bcd_tol") {
    cfg.run.bcd.tol = num();
  } else if (key == "bcd_max_iters") {
    cfg.run.bcd.max_iters = static_cast<int>(lng());
  } else {
    throw ValidationError(key, "unknown override key");
  }
}

void apply_override_expr(FullConfig& cfg, const std::string& expr) {
  auto eq = expr.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError("override", "expected key=value, got '" + expr + "'");
  apply_override(cfg, expr.substr(0, eq), expr.substr(eq + 1));
}

json metrics_to_json(const RunMetrics& m) {
  return json{
      {"policy", policy_name(m.policy)},
      {"num_slots", m.num_slots},
      {"seed", m.seed},
      {"avg_sensing_rate_bits", m.avg_sensing_rate_bits},
      {"avg_hap_energy_j", m.avg_hap_energy_j},
      {"avg_hap_queue_bits", m.avg_hap_queue_bits},
      {"avg_wd_queue_bits", m.avg_wd_queue_bits},
      {"avg_deficit_queue", m.avg_deficit_queue},
      {"final_deficit_queue", m.final_deficit_queue},
      {"deficit_over_slots", m.deficit_over_slots},
      {"max_wd_queue_bits", m.max_wd_queue_bits},
      {"min_battery_seen", m.min_battery_seen},
      {"max_battery_seen", m.max_battery_seen},
      {"final_window_hap_queue", m.final_window_hap_queue},
      {"penult_window_hap_queue", m.penult_window_hap_queue},
      {"final_window_wd_queue", m.final_window_wd_queue},
      {"penult_window_wd_queue", m.penult_window_wd_queue},
      {"causality_violations", m.causality_violations},
      {"capacity_violations", m.capacity_violations},
      {"budget_violations", m.budget_violations},
      {"decide_mean_s", m.decide_mean_s},
      {"decide_p99_s", m.decide_p99_s},
      {"battery_capacity", m.battery_capacity},
  };
}

void write_metrics_json(const std::string& path, const FullConfig& cfg,
                        const RunMetrics& m) {
  json j;
  j["config"] = config_to_json(cfg);
  j["metrics"] = metrics_to_json(m);
  std::ofstream out(path);
  if (!out) throw ValidationError("output", "cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

namespace {

void write_repro_header(std::ofstream& out, const FullConfig& cfg) {
  out << "# config " << config_to_json(cfg).dump() << "\n";
}

}  // namespace

void write_series_csv(const std::string& path, const FullConfig& cfg,
                      const RunMetrics& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output", "cannot write '" + path + "'");
  out.precision(17);
  write_repro_header(out, cfg);
  const double le = cfg.sys.energy_scale;
  const double lc = cfg.sys.deficit_scale;
  out << "slot,hap_queue_bits,mean_wd_queue_bits,min_battery,min_battery_j,"
         "max_battery,max_battery_j,deficit_queue,deficit_queue_j,"
         "hap_energy_j,weighted_sense_bits\n";
  for (const auto& p : m.series) {
    out << p.slot << ',' << p.hap_queue_bits << ',' << p.mean_wd_queue_bits
        << ',' << p.min_battery << ',' << p.min_battery / le << ','
        << p.max_battery << ',' << p.max_battery / le << ','
        << p.deficit_queue << ',' << p.deficit_queue / lc << ','
        << p.hap_energy_j << ',' << p.weighted_sense_bits << '\n';
  }
}

void write_sweep_csv(const std::string& path, const FullConfig& cfg,
                     SweepAxis axis, const std::vector<SweepCell>& cells) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output", "cannot write '" + path + "'");
  out.precision(17);
  write_repro_header(out, cfg);
  const double le = cfg.sys.energy_scale;
  const double lc = cfg.sys.deficit_scale;
  out << "policy,axis,value,seed,placement,slots,avg_sensing_rate_bits,"
         "avg_hap_energy_j,avg_hap_queue_bits,avg_wd_queue_bits,"
         "avg_deficit_queue,avg_deficit_queue_j,max_wd_queue_bits,"
         "final_deficit_queue,final_deficit_queue_j,min_battery_seen,"
         "min_battery_seen_j,causality_violations,capacity_violations,"
         "budget_violations,decide_mean_ms,decide_p99_ms\n";
  for (const auto& c : cells) {
    const RunMetrics& m = c.metrics;
    out << policy_name(c.policy) << ',' << sweep_axis_name(axis) << ','
        << c.value << ',' << c.seed << ',' << c.placement << ','
        << m.num_slots << ',' << m.avg_sensing_rate_bits << ','
        << m.avg_hap_energy_j << ',' << m.avg_hap_queue_bits << ','
        << m.avg_wd_queue_bits << ',' << m.avg_deficit_queue << ','
        << m.avg_deficit_queue / lc << ',' << m.max_wd_queue_bits << ','
        << m.final_deficit_queue << ',' << m.final_deficit_queue / lc << ','
        << m.min_battery_seen << ',' << m.min_battery_seen / le << ','
        << m.causality_violations << ',' << m.capacity_violations << ','
        << m.budget_violations << ',' << m.decide_mean_s * 1e3 << ','
        << m.decide_p99_s * 1e3 << '\n';
  }
}

void write_channel_trace_csv(const std::string& path,
                             const std::vector<ChannelState>& states) {
  std::ofstream out(path);
  if (!out) throw ValidationError("output", "cannot write '" + path + "'");
  out.precision(17);
  out << "slot,device,wpt_gain,offload_gain\n";
  for (std::size_t t = 0; t < states.size(); ++t)
    for (std::size_t i = 0; i < states[t].wpt_gain.size(); ++i)
      out << t << ',' << i << ',' << states[t].wpt_gain[i] << ','
          << states[t].offload_gain[i] << '\n';
}

std::vector<ChannelState> read_channel_trace_csv(const std::string& path,
                                                 int num_devices,
                                                 double noise_power_w) {
  std::ifstream in(path);
  if (!in) throw ValidationError("channel_trace", "cannot open '" + path + "'");
  std::vector<ChannelState> states;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("slot,", 0) == 0)
      continue;
    std::istringstream ss(line);
    std::string cell;
    long slot, device;
    double gp, gi;
    std::getline(ss, cell, ',');
    slot = std::stol(cell);
    std::getline(ss, cell, ',');
    device = std::stol(cell);
    std::getline(ss, cell, ',');
    gp = std::stod(cell);
    std::getline(ss, cell, ',');
    gi = std::stod(cell);
    if (device < 0 || device >= num_devices)
      throw ValidationError("channel_trace", "device index out of range");
    while (static_cast<long>(states.size()) <= slot) {
      ChannelState cs;
      cs.wpt_gain.assign(num_devices, 0.0);
      cs.offload_gain.assign(num_devices, 0.0);
      cs.offload_snr_per_watt.assign(num_devices, 0.0);
      states.push_back(std::move(cs));
    }
    states[slot].wpt_gain[device] = gp;
    states[slot].offload_gain[device] = gi;
    states[slot].offload_snr_per_watt[device] = gi / noise_power_w;
  }
  return states;
}

}  // namespace wpmec
