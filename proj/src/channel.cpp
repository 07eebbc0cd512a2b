#include "wpmec/channel.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace wpmec {

namespace {
constexpr double kSpeedOfLight = 3e8;
constexpr double kGainFloor = 1e-30;
constexpr double kFarFieldMinM = 0.1;
}  // namespace

double mean_gain(double distance_m, double carrier_hz,
                 const ChannelParams& params) {
  if (!(distance_m >= kFarFieldMinM))
    throw ValidationError("distance_m",
                          "below 0.1 m the far-field path-loss model breaks");
  double ratio =
      kSpeedOfLight / (4.0 * std::numbers::pi * carrier_hz * distance_m);
  return params.antenna_gain * std::pow(ratio, params.pathloss_exponent);
}

ChannelStream::ChannelStream(const ChannelParams& params,
                             std::vector<double> distances_m,
                             double noise_power_w)
    : params_(params),
      distances_m_(std::move(distances_m)),
      noise_power_w_(noise_power_w) {
  params_.validate();
  const std::size_t k = distances_m_.size();
  wpt_mean_.reserve(k);
  offload_mean_.reserve(k);
  wpt_streams_.reserve(k);
  offload_streams_.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    wpt_mean_.push_back(mean_gain(distances_m_[i], params_.wpt_carrier_hz,
                                  params_));
    offload_mean_.push_back(
        mean_gain(distances_m_[i], params_.comms_carrier_hz, params_));
    // band 0 = energy downlink, band 1 = data uplink
    wpt_streams_.emplace_back(rng::substream(params_.rng_seed, i, 0));
    offload_streams_.emplace_back(rng::substream(params_.rng_seed, i, 1));
  }
}

ChannelState ChannelStream::next_slot() {
  const std::size_t k = distances_m_.size();
  ChannelState cs;
  cs.wpt_gain.resize(k);
  cs.offload_gain.resize(k);
  cs.offload_snr_per_watt.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double gp = wpt_streams_[i].next_exp() * wpt_mean_[i];
    double gi = offload_streams_[i].next_exp() * offload_mean_[i];
    if (gp < kGainFloor) {
      gp = kGainFloor;
      ++clamp_count_;
    }
    if (gi < kGainFloor) {
      gi = kGainFloor;
      ++clamp_count_;
    }
    cs.wpt_gain[i] = gp;
    cs.offload_gain[i] = gi;
    cs.offload_snr_per_watt[i] = gi / noise_power_w_;
  }
  return cs;
}

ReplayChannel::ReplayChannel(std::vector<ChannelState> states, int devices)
    : states_(std::move(states)), devices_(devices) {}

ChannelState ReplayChannel::next_slot() {
  if (pos_ >= states_.size())
    throw ValidationError("channel_trace", "trace shorter than the run");
  return states_[pos_++];
}

}  // namespace wpmec
