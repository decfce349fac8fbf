#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavloc/recording.hpp"

namespace uavloc {

enum class WavFormat { Float32, Pcm16 };

// Decodes a RIFF WAV held in memory. Accepts PCM 16/24/32-bit and 32-bit
// float, plain or WAVE_FORMAT_EXTENSIBLE; integer samples are normalized by
// the full-scale magnitude (16-bit -32768 reads as exactly -1.0). Throws
// CorruptHeader / UnsupportedFormat, never crashes, on malformed bytes.
MultichannelRecording parse_wav(std::span<const std::uint8_t> bytes);

MultichannelRecording read_wav(const std::string& path);

// Pcm16 clamps to [-1, 1] and quantizes by 32768 with ties away from zero,
// saturating the positive end at 32767.
std::vector<std::uint8_t> encode_wav(const MultichannelRecording& rec,
                                     WavFormat format);

void write_wav(const MultichannelRecording& rec, const std::string& path,
               WavFormat format = WavFormat::Float32);

}  // namespace uavloc
