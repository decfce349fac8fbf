#pragma once

#include <cstddef>
#include <vector>

#include "uavloc/errors.hpp"

namespace uavloc {

// Synchronized multichannel sample matrix. Amplitudes are nominally in
// [-1, 1]; channel_map[i] is the microphone index recorded on channel i
// (empty map means identity).
struct MultichannelRecording {
  std::vector<std::vector<double>> samples;  // [channel][sample]
  double sample_rate = 0.0;
  std::vector<int> channel_map;

  int channel_count() const { return static_cast<int>(samples.size()); }

  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }

  double duration_s() const {
    return sample_rate > 0.0 ? static_cast<double>(length()) / sample_rate : 0.0;
  }

  int mic_for_channel(int channel) const {
    return channel_map.empty() ? channel : channel_map[channel];
  }

  void validate() const {
    if (samples.empty()) throw ShapeMismatch("recording has no channels");
    if (sample_rate <= 0.0) throw InvalidConfig("sample_rate must be > 0");
    for (const auto& ch : samples) {
      if (ch.size() != samples[0].size())
        throw ShapeMismatch("channels have unequal lengths");
    }
    if (!channel_map.empty() &&
        channel_map.size() != samples.size())
      throw ShapeMismatch("channel_map size != channel count");
  }

  static MultichannelRecording zeros(int channels, std::size_t length,
                                     double sample_rate) {
    MultichannelRecording rec;
    rec.sample_rate = sample_rate;
    rec.samples.assign(channels, std::vector<double>(length, 0.0));
    return rec;
  }
};

}  // namespace uavloc
