#include "uavloc/stft.hpp"

#include <cmath>
#include <numbers>

#include "uavloc/errors.hpp"
#include "uavloc/fft.hpp"

namespace uavloc {

std::vector<double> make_window(WindowKind kind, int size) {
  std::vector<double> w(size, 1.0);
  if (kind == WindowKind::Hann) {
    for (int n = 0; n < size; ++n)
      w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / size));
  }
  return w;
}

std::size_t stft_block_count(std::size_t length, const StftConfig& cfg) {
  if (length < static_cast<std::size_t>(cfg.fft_size)) return 0;
  return (length - cfg.fft_size) / cfg.hop + 1;
}

Frame frame_at(const MultichannelRecording& rec, long start, int size) {
  if (start < 0) throw InvalidConfig("frame start must be >= 0");
  if (start + size > static_cast<long>(rec.length()))
    throw RecordingTooShort("frame extends past end of recording");
  Frame f;
  f.start_sample = start;
  f.sample_rate = rec.sample_rate;
  f.samples.reserve(rec.channel_count());
  for (const auto& ch : rec.samples)
    f.samples.emplace_back(ch.begin() + start, ch.begin() + start + size);
  return f;
}

static void check_stft_config(const StftConfig& cfg) {
  if (!is_power_of_two(cfg.fft_size))
    throw InvalidConfig("fft_size must be a power of two");
  if (cfg.hop <= 0 || cfg.hop > cfg.fft_size)
    throw InvalidConfig("hop must satisfy 0 < hop <= fft_size");
}

std::vector<SpectralBlock> stft(const MultichannelRecording& rec,
                                const StftConfig& cfg) {
  check_stft_config(cfg);
  rec.validate();
  if (rec.length() < static_cast<std::size_t>(cfg.fft_size))
    throw RecordingTooShort("recording shorter than one fft frame");

  const int channels = rec.channel_count();
  const std::size_t count = stft_block_count(rec.length(), cfg);
  const std::vector<double> window = make_window(cfg.window, cfg.fft_size);
  const double bin_hz = rec.sample_rate / cfg.fft_size;

  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.fft_size);

  std::vector<SpectralBlock> blocks(count);
  for (std::size_t t = 0; t < count; ++t) {
    SpectralBlock& block = blocks[t];
    block.frame_index = static_cast<int>(t);
    block.bin_hz = bin_hz;
    block.bins.assign(channels,
                      std::vector<std::complex<double>>(fft.bin_count()));
    const std::size_t start = t * cfg.hop;
    for (int c = 0; c < channels; ++c) {
      for (int n = 0; n < cfg.fft_size; ++n)
        buf[n] = rec.samples[c][start + n] * window[n];
      fft.forward(buf, block.bins[c]);
    }
  }
  return blocks;
}

MultichannelRecording istft(std::span<const SpectralBlock> blocks,
                            const StftConfig& cfg) {
  check_stft_config(cfg);
  if (blocks.empty()) throw InconsistentBlocks("no blocks to invert");

  const int channels = blocks[0].channel_count();
  const int bins = blocks[0].bin_count();
  for (const SpectralBlock& b : blocks) {
    if (b.channel_count() != channels || b.bin_count() != bins)
      throw InconsistentBlocks("blocks disagree on shape");
  }
  if (2 * (bins - 1) != cfg.fft_size)
    throw InconsistentBlocks("block bin count does not match fft_size");

  const std::size_t out_len =
      static_cast<std::size_t>(blocks.size() - 1) * cfg.hop + cfg.fft_size;
  const std::vector<double> window = make_window(cfg.window, cfg.fft_size);

  MultichannelRecording out =
      MultichannelRecording::zeros(channels, out_len, blocks[0].sample_rate());

  std::vector<double> norm(out_len, 0.0);
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const std::size_t start = t * cfg.hop;
    for (int n = 0; n < cfg.fft_size; ++n)
      norm[start + n] += window[n] * window[n];
  }

  RealFft fft(cfg.fft_size);
  std::vector<double> buf(cfg.fft_size);
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const std::size_t start = t * cfg.hop;
    for (int c = 0; c < channels; ++c) {
      fft.inverse(blocks[t].bins[c], buf);
      for (int n = 0; n < cfg.fft_size; ++n)
        out.samples[c][start + n] += buf[n] * window[n];
    }
  }

  constexpr double kEps = 1e-12;
  for (int c = 0; c < channels; ++c)
    for (std::size_t n = 0; n < out_len; ++n)
      if (norm[n] > kEps) out.samples[c][n] /= norm[n];

  return out;
}

}  // namespace uavloc
