#pragma once
#include <cstdint>
#include <vector>

#include "wpmec/model.hpp"
#include "wpmec/rng.hpp"

namespace wpmec {

/// Deterministic distance/antenna factor of the channel gain:
/// antenna_gain * (c / (4 pi fc d))^sigma.
/// Distances below 0.1 m violate the far-field model and are rejected.
double mean_gain(double distance_m, double carrier_hz,
                 const ChannelParams& params);

/// Abstract per-slot channel source so a recorded trace can stand in for
/// the fading generator during replay.
class ChannelProvider {
 public:
  virtual ~ChannelProvider() = default;
  virtual ChannelState next_slot() = 0;
  virtual int num_devices() const = 0;
};

/// I.i.d. block-fading generator: per slot and device, each band's gain is
/// an independent Exp(1) draw times the deterministic mean gain.
///
/// Randomness comes from counter-advanced SplitMix64 sub-streams keyed by
/// (seed, device, band), so adding devices never perturbs the sequences of
/// existing ones and two streams with equal seeds produce identical gains.
class ChannelStream : public ChannelProvider {
 public:
  ChannelStream(const ChannelParams& params, std::vector<double> distances_m,
                double noise_power_w);

  ChannelState next_slot() override;
  int num_devices() const override {
    return static_cast<int>(distances_m_.size());
  }

  /// Draws clamped up to the positivity floor (1e-30); never expected to
  /// fire in practice.
  long clamp_count() const { return clamp_count_; }

 private:
  ChannelParams params_;
  std::vector<double> distances_m_;
  double noise_power_w_;
  std::vector<double> wpt_mean_;
  std::vector<double> offload_mean_;
  std::vector<rng::Stream> wpt_streams_;
  std::vector<rng::Stream> offload_streams_;
  long clamp_count_ = 0;
};

/// Replays a recorded gain sequence (e.g. from a channel-trace CSV).
class ReplayChannel : public ChannelProvider {
 public:
  ReplayChannel(std::vector<ChannelState> states, int devices);
  ChannelState next_slot() override;
  int num_devices() const override { return devices_; }

 private:
  std::vector<ChannelState> states_;
  int devices_;
  std::size_t pos_ = 0;
};

}  // namespace wpmec
