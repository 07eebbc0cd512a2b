// wpmec: run, sweep and verify the wireless-powered MEC simulator.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/config error,
// 3 runtime infeasibility.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "wpmec/config_io.hpp"
#include "wpmec/engine.hpp"
#include "wpmec/verify.hpp"

namespace fs = std::filesystem;
using namespace wpmec;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("WPMEC_OUT_DIR");
  return env ? env : "out";
}

FullConfig make_config(const std::string& config_path,
                       const std::vector<std::string>& overrides) {
  FullConfig cfg =
      config_path.empty() ? default_config(8) : load_config_file(config_path);
  for (const auto& expr : overrides) apply_override_expr(cfg, expr);
  validate_all(cfg.sys, cfg.wds, cfg.chan);
  cfg.run.validate();
  return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(std::stod(csv.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides,
            const std::string& out_dir, const std::string& trace_in,
            const std::string& trace_out_name) {
  FullConfig cfg = make_config(config_path, overrides);
  fs::create_directories(out_dir);

  std::vector<ChannelState> replay, trace;
  const std::vector<ChannelState>* replay_ptr = nullptr;
  if (!trace_in.empty()) {
    replay = read_channel_trace_csv(trace_in, cfg.sys.num_devices,
                                    cfg.sys.noise_power_w);
    replay_ptr = &replay;
  }
  RunMetrics m = run(cfg.sys, cfg.wds, cfg.chan, cfg.run, replay_ptr,
                     trace_out_name.empty() ? nullptr : &trace);

  write_metrics_json((fs::path(out_dir) / "metrics.json").string(), cfg, m);
  write_series_csv((fs::path(out_dir) / "series.csv").string(), cfg, m);
  if (!trace_out_name.empty())
    write_channel_trace_csv((fs::path(out_dir) / trace_out_name).string(),
                            trace);

  std::printf(
      "policy=%s slots=%ld seed=%llu R=%.6g bits/slot e0=%.6g J maxQi=%.6g "
      "bits violations=%ld -> %s\n",
      policy_name(m.policy), m.num_slots,
      static_cast<unsigned long long>(m.seed), m.avg_sensing_rate_bits,
      m.avg_hap_energy_j, m.max_wd_queue_bits,
      m.causality_violations + m.capacity_violations + m.budget_violations,
      out_dir.c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& out_dir, const std::string& axis,
              const std::string& values_csv, const std::string& seeds_csv,
              const std::string& policies_csv, int placements, int jobs) {
  FullConfig cfg = make_config(config_path, overrides);

  SweepConfig sc;
  sc.axis = parse_sweep_axis(axis);
  sc.values = parse_values(values_csv);
  for (double s : parse_values(seeds_csv))
    sc.seeds.push_back(static_cast<std::uint64_t>(s));
  if (policies_csv == "all") {
    sc.policies = {Policy::kLeese, Policy::kLco, Policy::kEqOT,
                   Policy::kMyopicEdge};
  } else {
    std::size_t pos = 0;
    while (pos < policies_csv.size()) {
      auto comma = policies_csv.find(',', pos);
      if (comma == std::string::npos) comma = policies_csv.size();
      sc.policies.push_back(
          parse_policy(policies_csv.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  sc.placements = placements;
  sc.jobs = jobs;
  sc.validate();

  auto cells = sweep(cfg.sys, cfg.wds, cfg.chan, cfg.run, sc);
  fs::create_directories(out_dir);
  write_sweep_csv((fs::path(out_dir) / "sweep.csv").string(), cfg, sc.axis,
                  cells);
  std::printf("%zu runs -> %s/sweep.csv\n", cells.size(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wireless-powered MEC sensing simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = default_out_dir();
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config JSON path");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--override", overrides,
                    "flat key=value config override (repeatable)");
  };

  // run
  auto* run_cmd = app.add_subcommand("run", "simulate one policy");
  add_common(run_cmd);
  std::string policy_arg, trace_in, trace_out;
  long slots_arg = -1;
  long long seed_arg = -1;
  run_cmd->add_option("--policy", policy_arg, "leese|lco|eqot|myopic");
  run_cmd->add_option("--slots", slots_arg, "number of slots");
  run_cmd->add_option("--seed", seed_arg, "run seed");
  run_cmd->add_option("--channel-trace-in", trace_in,
                      "replay a recorded channel trace CSV");
  run_cmd->add_option("--channel-trace-out", trace_out,
                      "record the channel trace to this file name");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep_cmd);
  std::string axis, values_csv, seeds_csv = "1,2,3,4,5",
                    policies_csv = "all";
  int placements = 0, jobs = 0;
  sweep_cmd->add_option("--axis", axis, "V|sigma|e0th|r_max|K")->required();
  sweep_cmd->add_option("--values", values_csv, "comma-separated values")
      ->required();
  sweep_cmd->add_option("--seeds", seeds_csv, "comma-separated seeds");
  sweep_cmd->add_option("--policies", policies_csv,
                        "comma-separated policies or 'all'");
  sweep_cmd->add_option("--placements", placements,
                        "placements per seed for K sweeps (0 = default)");
  sweep_cmd->add_option("--jobs", jobs, "worker threads (0 = all cores)");

  // verify
  auto* verify_cmd =
      app.add_subcommand("verify", "run the verification suite");
  std::string level = "quick";
  int vjobs = 0;
  verify_cmd->add_option("--level", level, "quick|full");
  verify_cmd->add_option("--jobs", vjobs, "worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      if (!policy_arg.empty()) overrides.push_back("policy=" + policy_arg);
      if (slots_arg >= 0)
        overrides.push_back("slots=" + std::to_string(slots_arg));
      if (seed_arg >= 0)
        overrides.push_back("seed=" + std::to_string(seed_arg));
      return cmd_run(config_path, overrides, out_dir, trace_in, trace_out);
    }
    if (sweep_cmd->parsed())
      return cmd_sweep(config_path, overrides, out_dir, axis, values_csv,
                       seeds_csv, policies_csv, placements, jobs);
    if (verify_cmd->parsed())
      return report_checks(
          run_verification(parse_verify_level(level), vjobs));
  } catch (const InfeasibleActionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnsupportedScaleError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
