#pragma once
#include <string>
#include <vector>

#include <json.hpp>

#include "wpmec/engine.hpp"
#include "wpmec/model.hpp"

// Config file parsing, flat overrides, and the output file writers.
// Schemas are documented in the README; column orders are fixed.

namespace wpmec {

struct FullConfig {
  SystemParams sys;
  std::vector<WdParams> wds;
  ChannelParams chan;
  RunConfig run;
};

FullConfig default_config(int k = 8);

/// Strict parse: unknown keys are rejected with their field path.
FullConfig config_from_json(const nlohmann::json& j);
FullConfig load_config_file(const std::string& path);

nlohmann::json config_to_json(const FullConfig& cfg);

/// Flat `key=value` override (e.g. "lambda_c=10", "sigma=2.8",
/// "policy=eqot"). Unknown keys throw ValidationError.
void apply_override(FullConfig& cfg, const std::string& key,
                    const std::string& value);
void apply_override_expr(FullConfig& cfg, const std::string& expr);

nlohmann::json metrics_to_json(const RunMetrics& m);

void write_metrics_json(const std::string& path, const FullConfig& cfg,
                        const RunMetrics& m);
void write_series_csv(const std::string& path, const FullConfig& cfg,
                      const RunMetrics& m);
void write_sweep_csv(const std::string& path, const FullConfig& cfg,
                     SweepAxis axis, const std::vector<SweepCell>& cells);
void write_channel_trace_csv(const std::string& path,
                             const std::vector<ChannelState>& states);
std::vector<ChannelState> read_channel_trace_csv(const std::string& path,
                                                 int num_devices,
                                                 double noise_power_w);

}  // namespace wpmec
