#pragma once

#include <complex>
#include <span>
#include <vector>

#include "uavloc/recording.hpp"

namespace uavloc {

enum class WindowKind { Rectangular, Hann };

// Periodic (DFT-even) window of the given size.
std::vector<double> make_window(WindowKind kind, int size);

// One analysis window of a multichannel signal.
struct Frame {
  std::vector<std::vector<double>> samples;  // [channel][n], equal lengths
  long start_sample = 0;
  double sample_rate = 0.0;
};

// One-sided frequency-domain view of a frame, fft_size/2+1 bins per channel.
struct SpectralBlock {
  std::vector<std::vector<std::complex<double>>> bins;  // [channel][bin]
  double bin_hz = 0.0;
  int frame_index = 0;

  int channel_count() const { return static_cast<int>(bins.size()); }
  int bin_count() const {
    return bins.empty() ? 0 : static_cast<int>(bins[0].size());
  }
  int fft_size() const { return 2 * (bin_count() - 1); }
  double sample_rate() const { return bin_hz * fft_size(); }
};

struct StftConfig {
  int fft_size = 1024;
  int hop = 512;
  WindowKind window = WindowKind::Hann;
};

// Number of analysis blocks for a signal of the given length:
// floor((len - fft_size)/hop) + 1, or 0 if the signal is shorter than one
// frame.
std::size_t stft_block_count(std::size_t length, const StftConfig& cfg);

Frame frame_at(const MultichannelRecording& rec, long start, int size);

std::vector<SpectralBlock> stft(const MultichannelRecording& rec,
                                const StftConfig& cfg);

// Weighted overlap-add inverse; output length (blocks-1)*hop + fft_size.
// Reconstruction is exact on the fully overlapped interior for any window
// whose shifted squares sum to a positive value.
MultichannelRecording istft(std::span<const SpectralBlock> blocks,
                            const StftConfig& cfg);

}  // namespace uavloc
