#include "uavloc/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "uavloc/errors.hpp"

namespace uavloc {

namespace {

constexpr std::uint16_t kTagPcm = 0x0001;
constexpr std::uint16_t kTagFloat = 0x0003;
constexpr std::uint16_t kTagExtensible = 0xFFFE;

// Bounds-checked little-endian reader; every access is validated so that
// arbitrary bytes cannot read out of range.
class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void seek(std::size_t pos) {
    if (pos > bytes_.size()) throw CorruptHeader("seek past end of file");
    pos_ = pos;
  }

  void skip(std::size_t n) {
    if (n > remaining()) throw CorruptHeader("chunk extends past end of file");
    pos_ += n;
  }

  std::uint32_t u32() {
    if (remaining() < 4) throw CorruptHeader("truncated field");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }

  std::uint16_t u16() {
    if (remaining() < 2) throw CorruptHeader("truncated field");
    const std::uint16_t v = static_cast<std::uint16_t>(
        bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::array<char, 4> fourcc() {
    if (remaining() < 4) throw CorruptHeader("truncated chunk id");
    std::array<char, 4> id;
    std::memcpy(id.data(), bytes_.data() + pos_, 4);
    pos_ += 4;
    return id;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw CorruptHeader("payload extends past end");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

bool is_id(const std::array<char, 4>& id, const char* s) {
  return std::memcmp(id.data(), s, 4) == 0;
}

struct FmtChunk {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

FmtChunk parse_fmt(std::span<const std::uint8_t> payload) {
  Cursor c(payload);
  if (payload.size() < 16) throw CorruptHeader("fmt chunk too small");
  FmtChunk fmt;
  fmt.tag = c.u16();
  fmt.channels = c.u16();
  fmt.sample_rate = c.u32();
  c.u32();  // byte rate, recomputed below
  c.u16();  // block align, recomputed below
  fmt.bits = c.u16();
  if (fmt.tag == kTagExtensible) {
    if (payload.size() < 18) throw CorruptHeader("extensible fmt truncated");
    const std::uint16_t ext_size = c.u16();
    if (ext_size < 22 || payload.size() < 18u + ext_size)
      throw CorruptHeader("extensible fmt extension truncated");
    c.u16();  // valid bits
    c.u32();  // channel mask
    fmt.tag = c.u16();  // first two bytes of the subformat GUID
  }
  return fmt;
}

double decode_sample(std::span<const std::uint8_t> raw, std::size_t offset,
                     std::uint16_t tag, std::uint16_t bits) {
  const std::uint8_t* p = raw.data() + offset;
  if (tag == kTagFloat) {
    std::uint32_t u = 0;
    for (int i = 3; i >= 0; --i) u = (u << 8) | p[i];
    return static_cast<double>(std::bit_cast<float>(u));
  }
  switch (bits) {
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {  // 32
      std::uint32_t u = 0;
      for (int i = 3; i >= 0; --i) u = (u << 8) | p[i];
      return static_cast<std::int32_t>(u) / 2147483648.0;
    }
  }
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}

void append_id(std::vector<std::uint8_t>& out, const char* s) {
  out.insert(out.end(), s, s + 4);
}

std::int16_t quantize_pcm16(double v) {
  v = std::clamp(v, -1.0, 1.0);
  const double scaled = v * 32768.0;
  const long q = std::lround(scaled);  // lround ties away from zero
  return static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
}

}  // namespace

MultichannelRecording parse_wav(std::span<const std::uint8_t> bytes) {
  Cursor c(bytes);
  if (!is_id(c.fourcc(), "RIFF")) throw CorruptHeader("missing RIFF tag");
  c.u32();  // declared RIFF size; actual bounds come from the buffer
  if (!is_id(c.fourcc(), "WAVE")) throw CorruptHeader("missing WAVE tag");

  bool have_fmt = false;
  FmtChunk fmt;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (c.remaining() >= 8) {
    const auto id = c.fourcc();
    const std::uint32_t size = c.u32();
    const std::size_t payload = std::min<std::size_t>(size, c.remaining());
    if (is_id(id, "fmt ")) {
      fmt = parse_fmt(c.take(payload));
      have_fmt = true;
    } else if (is_id(id, "data")) {
      data = c.take(payload);
      have_data = true;
    } else {
      c.skip(payload);
    }
    if (payload % 2 == 1 && c.remaining() > 0) c.skip(1);  // chunk padding
  }

  if (!have_fmt) throw CorruptHeader("no fmt chunk");
  if (!have_data) throw CorruptHeader("no data chunk");
  if (fmt.channels == 0) throw CorruptHeader("zero channels");
  if (fmt.sample_rate == 0) throw CorruptHeader("zero sample rate");
  if (fmt.tag == kTagPcm) {
    if (fmt.bits != 16 && fmt.bits != 24 && fmt.bits != 32)
      throw UnsupportedFormat("PCM bit depth " + std::to_string(fmt.bits));
  } else if (fmt.tag == kTagFloat) {
    if (fmt.bits != 32)
      throw UnsupportedFormat("float bit depth " + std::to_string(fmt.bits));
  } else {
    throw UnsupportedFormat("format tag " + std::to_string(fmt.tag));
  }

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  const std::size_t frames = data.size() / frame_bytes;

  MultichannelRecording rec;
  rec.sample_rate = static_cast<double>(fmt.sample_rate);
  rec.samples.assign(fmt.channels, std::vector<double>(frames));
  for (std::size_t t = 0; t < frames; ++t)
    for (std::uint16_t ch = 0; ch < fmt.channels; ++ch)
      rec.samples[ch][t] = decode_sample(
          data, t * frame_bytes + ch * bytes_per_sample, fmt.tag, fmt.bits);
  return rec;
}

MultichannelRecording read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound(path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const MultichannelRecording& rec,
                                     WavFormat format) {
  rec.validate();
  const std::uint16_t channels = static_cast<std::uint16_t>(rec.channel_count());
  const std::uint16_t bytes_per_sample = format == WavFormat::Float32 ? 4 : 2;
  const std::uint16_t tag = format == WavFormat::Float32 ? kTagFloat : kTagPcm;
  const std::size_t frames = rec.length();
  const std::size_t data_bytes = frames * channels * bytes_per_sample;
  const bool fact = format == WavFormat::Float32;
  const std::size_t riff_size =
      4 + (8 + 16) + (fact ? 8 + 4 : 0) + 8 + data_bytes;
  if (riff_size > std::numeric_limits<std::uint32_t>::max() - 8)
    throw IoFailure("recording too large for a RIFF container");

  std::vector<std::uint8_t> out;
  out.reserve(riff_size + 8);
  append_id(out, "RIFF");
  append_u32(out, static_cast<std::uint32_t>(riff_size));
  append_id(out, "WAVE");

  append_id(out, "fmt ");
  append_u32(out, 16);
  append_u16(out, tag);
  append_u16(out, channels);
  append_u32(out, static_cast<std::uint32_t>(std::lround(rec.sample_rate)));
  append_u32(out, static_cast<std::uint32_t>(std::lround(rec.sample_rate)) *
                      channels * bytes_per_sample);
  append_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  append_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));

  if (fact) {
    append_id(out, "fact");
    append_u32(out, 4);
    append_u32(out, static_cast<std::uint32_t>(frames));
  }

  append_id(out, "data");
  append_u32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t t = 0; t < frames; ++t)
    for (std::uint16_t ch = 0; ch < channels; ++ch) {
      if (format == WavFormat::Float32) {
        const auto u =
            std::bit_cast<std::uint32_t>(static_cast<float>(rec.samples[ch][t]));
        append_u32(out, u);
      } else {
        append_u16(out,
                   static_cast<std::uint16_t>(quantize_pcm16(rec.samples[ch][t])));
      }
    }
  return out;
}

void write_wav(const MultichannelRecording& rec, const std::string& path,
               WavFormat format) {
  const auto bytes = encode_wav(rec, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write: " + path);
}

}  // namespace uavloc
