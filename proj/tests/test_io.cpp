#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "uavloc/config.hpp"
#include "uavloc/csv_io.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/rng.hpp"
#include "uavloc/text.hpp"
#include "uavloc/wav.hpp"

using namespace uavloc;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "uavloc_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

MultichannelRecording random_recording(Rng& rng, int channels,
                                       std::size_t length) {
  auto rec = MultichannelRecording::zeros(channels, length, 44100.0);
  for (auto& ch : rec.samples)
    for (auto& v : ch) v = 2.0 * rng.uniform01() - 1.0;
  return rec;
}

// Quantizes to the CSV emission precision so round trips are exact.
double q6(double v) { return *parse_double(format_fixed(v)); }

}  // namespace

TEST_CASE("wav: float32 round trip is bit-identical") {
  Rng rng(7001);
  for (int trial = 0; trial < 20; ++trial) {
    const int channels = 1 + static_cast<int>(rng.uniform01() * 8.0);
    const std::size_t length = 1 + static_cast<std::size_t>(rng.uniform01() * 500.0);
    auto rec = random_recording(rng, channels, length);
    // float32 storage: make samples exactly representable first
    for (auto& ch : rec.samples)
      for (auto& v : ch) v = static_cast<double>(static_cast<float>(v));
    const auto decoded = parse_wav(encode_wav(rec, WavFormat::Float32));
    REQUIRE(decoded.channel_count() == channels);
    REQUIRE(decoded.length() == length);
    CHECK(decoded.sample_rate == 44100.0);
    for (int c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < length; ++t)
        CHECK(decoded.samples[c][t] == rec.samples[c][t]);
  }
}

TEST_CASE("wav: file round trip through disk") {
  Rng rng(7002);
  auto rec = random_recording(rng, 8, 300);
  for (auto& ch : rec.samples)
    for (auto& v : ch) v = static_cast<double>(static_cast<float>(v));
  const auto path = temp_file("roundtrip.wav");
  write_wav(rec, path.string());
  const auto back = read_wav(path.string());
  REQUIRE(back.length() == rec.length());
  for (int c = 0; c < 8; ++c)
    for (std::size_t t = 0; t < rec.length(); ++t)
      CHECK(back.samples[c][t] == rec.samples[c][t]);
}

TEST_CASE("wav: pcm16 full-scale and quantization rules") {
  MultichannelRecording rec;
  rec.sample_rate = 44100.0;
  rec.samples = {{-1.0, 1.5, -2.0, 0.5, 0.0, 0.25}};
  const auto decoded = parse_wav(encode_wav(rec, WavFormat::Pcm16));
  CHECK(decoded.samples[0][0] == -1.0);  // -32768 reads as exactly -1.0
  CHECK(decoded.samples[0][1] == doctest::Approx(1.0).epsilon(1.0 / 32768.0));
  CHECK(decoded.samples[0][2] == -1.0);
  CHECK(std::abs(decoded.samples[0][3] - 0.5) <= 1.0 / 32768.0);
  CHECK(decoded.samples[0][4] == 0.0);
  CHECK(std::abs(decoded.samples[0][5] - 0.25) <= 1.0 / 32768.0);
}

TEST_CASE("wav: pcm16 round trip distortion is bounded by one step") {
  Rng rng(7003);
  auto rec = random_recording(rng, 2, 2000);
  const auto decoded = parse_wav(encode_wav(rec, WavFormat::Pcm16));
  for (int c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < rec.length(); ++t)
      CHECK(std::abs(decoded.samples[c][t] - rec.samples[c][t]) <=
            0.5 / 32768.0 + 1e-12);
}

TEST_CASE("wav: 24-bit and 32-bit integer decoding") {
  // Hand-assembled file: 1 channel, 2 samples.
  const auto assemble = [](int bits, std::vector<std::uint8_t> payload) {
    std::vector<std::uint8_t> b;
    const auto u32 = [&](std::uint32_t v) {
      for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
    };
    const auto u16 = [&](std::uint16_t v) {
      b.push_back(v & 0xFF);
      b.push_back(v >> 8);
    };
    const auto id = [&](const char* s) { b.insert(b.end(), s, s + 4); };
    id("RIFF");
    u32(36 + static_cast<std::uint32_t>(payload.size()));
    id("WAVE");
    id("fmt ");
    u32(16);
    u16(1);
    u16(1);
    u32(44100);
    u32(44100u * bits / 8);
    u16(static_cast<std::uint16_t>(bits / 8));
    u16(static_cast<std::uint16_t>(bits));
    id("data");
    u32(static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
  };

  SUBCASE("24-bit min and half scale") {
    const auto rec =
        parse_wav(assemble(24, {0x00, 0x00, 0x80, 0x00, 0x00, 0x40}));
    REQUIRE(rec.length() == 2);
    CHECK(rec.samples[0][0] == -1.0);
    CHECK(rec.samples[0][1] == 0.5);
  }
  SUBCASE("32-bit min and half scale") {
    const auto rec = parse_wav(
        assemble(32, {0, 0, 0, 0x80, 0, 0, 0, 0x40}));
    REQUIRE(rec.length() == 2);
    CHECK(rec.samples[0][0] == -1.0);
    CHECK(rec.samples[0][1] == 0.5);
  }
  SUBCASE("8-bit is refused as unsupported") {
    CHECK_THROWS_AS(parse_wav(assemble(8, {0x80, 0xFF})), UnsupportedFormat);
  }
}

TEST_CASE("wav: header errors are typed") {
  Rng rng(7004);
  const auto good = encode_wav(random_recording(rng, 2, 40), WavFormat::Pcm16);

  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_wav("/nonexistent/no.wav"), FileNotFound);
  }
  SUBCASE("not RIFF") {
    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_wav(bad), CorruptHeader);
  }
  SUBCASE("unknown format tag reported") {
    auto bad = good;
    bad[20] = 0x77;  // format tag low byte inside fmt
    try {
      parse_wav(bad);
      FAIL("expected UnsupportedFormat");
    } catch (const UnsupportedFormat& e) {
      CHECK(std::string(e.what()).find("119") != std::string::npos);
    }
  }
  SUBCASE("truncated header") {
    std::vector<std::uint8_t> bad(good.begin(), good.begin() + 10);
    CHECK_THROWS_AS(parse_wav(bad), CorruptHeader);
  }
  SUBCASE("truncated data is tolerated by frame truncation") {
    std::vector<std::uint8_t> bad(good.begin(), good.end() - 5);
    const auto rec = parse_wav(bad);
    CHECK(rec.length() < 40);
  }
}

TEST_CASE("csv: static ground truth and submission round trip") {
  GroundTruth gt;
  gt.kind = TaskKind::Static;
  Rng rng(7005);
  for (int i = 0; i < 25; ++i) {
    const std::string id = "rec" + std::to_string(100 + i);
    gt.static_truth[id] = Direction{q6(rng.uniform01() * 360.0 - 180.0),
                                    q6(rng.uniform01() * 180.0 - 90.0)};
  }
  std::istringstream in(format_ground_truth(gt));
  const auto back = parse_ground_truth(in);
  REQUIRE(back.kind == TaskKind::Static);
  REQUIRE(back.static_truth.size() == gt.static_truth.size());
  for (const auto& [id, d] : gt.static_truth) {
    CHECK(back.static_truth.at(id).azimuth_deg == d.azimuth_deg);
    CHECK(back.static_truth.at(id).elevation_deg == d.elevation_deg);
  }

  Submission sub;
  sub.kind = TaskKind::Static;
  for (const auto& [id, d] : gt.static_truth) sub.static_estimates[id] = d;
  std::istringstream sin(format_submission(sub));
  const auto sub_back = parse_submission(sin);
  CHECK(sub_back.static_estimates.size() == sub.static_estimates.size());
}

TEST_CASE("csv: flight ground truth round trip keeps 15 ordered timestamps") {
  GroundTruth gt;
  gt.kind = TaskKind::Flight;
  Rng rng(7006);
  for (int i = 0; i < 6; ++i) {
    FlightTruth rec;
    for (int k = 0; k < kFlightTimestamps; ++k) {
      rec.timestamps_s.push_back(q6(0.25 + 0.25 * k));
      rec.directions.push_back(Direction{q6(rng.uniform01() * 360.0 - 180.0),
                                         q6(rng.uniform01() * 160.0 - 80.0)});
    }
    gt.flight_truth["fl" + std::to_string(i)] = std::move(rec);
  }
  std::istringstream in(format_ground_truth(gt));
  const auto back = parse_ground_truth(in);
  REQUIRE(back.kind == TaskKind::Flight);
  REQUIRE(back.flight_truth.size() == 6);
  for (const auto& [id, rec] : gt.flight_truth) {
    const auto& b = back.flight_truth.at(id);
    for (int k = 0; k < kFlightTimestamps; ++k) {
      CHECK(b.timestamps_s[k] == rec.timestamps_s[k]);
      CHECK(b.directions[k].azimuth_deg == rec.directions[k].azimuth_deg);
    }
  }
}

TEST_CASE("csv: malformed rows are rejected with line numbers") {
  SUBCASE("bad number") {
    std::istringstream in(
        "recording_id,azimuth_deg,elevation_deg\nrec1,12.0,oops\n");
    try {
      parse_submission(in);
      FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("missing column") {
    std::istringstream in("recording_id,azimuth_deg,elevation_deg\nrec1,12.0\n");
    CHECK_THROWS_AS(parse_submission(in), MalformedRow);
  }
  SUBCASE("duplicate id named") {
    std::istringstream in(
        "recording_id,azimuth_deg,elevation_deg\nrec7,1,2\nrec7,3,4\n");
    try {
      parse_submission(in);
      FAIL("expected DuplicateId");
    } catch (const DuplicateId& e) {
      CHECK(std::string(e.what()).find("rec7") != std::string::npos);
    }
  }
  SUBCASE("unknown header") {
    std::istringstream in("who,what\nx,y\n");
    CHECK_THROWS_AS(parse_submission(in), ParseError);
  }
  SUBCASE("flight index out of range") {
    std::istringstream in(
        "recording_id,timestamp_index,azimuth_deg,elevation_deg\nf1,15,0,0\n");
    CHECK_THROWS_AS(parse_submission(in), MalformedRow);
  }
  SUBCASE("incomplete flight ground truth") {
    std::string text =
        "recording_id,timestamp_index,azimuth_deg,elevation_deg,timestamp_s\n";
    for (int k = 0; k < 14; ++k)
      text += "f1," + std::to_string(k) + ",0,0," + std::to_string(k) + "\n";
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_ground_truth(in), ValidationError);
  }
}

TEST_CASE("csv: motor speeds") {
  std::istringstream in(
      "recording_id,motor1_rpm,motor2_rpm,motor3_rpm,motor4_rpm\n"
      "rec001,5500,5600,5450,5580\n"
      "rec002,5400.5,5610,5455,5090\n");
  const auto table = parse_motor_speeds(in);
  REQUIRE(table.size() == 2);
  CHECK(table.at("rec001")[0] == 5500.0);
  CHECK(table.at("rec001")[3] == 5580.0);
  CHECK(table.at("rec002")[0] == 5400.5);

  std::istringstream back(format_motor_speeds(table));
  const auto again = parse_motor_speeds(back);
  CHECK(again == table);

  SUBCASE("duplicate id") {
    std::istringstream dup(
        "recording_id,motor1_rpm,motor2_rpm,motor3_rpm,motor4_rpm\n"
        "a,1,2,3,4\na,1,2,3,4\n");
    CHECK_THROWS_AS(parse_motor_speeds(dup), DuplicateId);
  }
  SUBCASE("missing column has line number") {
    std::istringstream bad(
        "recording_id,motor1_rpm,motor2_rpm,motor3_rpm,motor4_rpm\n"
        "a,1,2,3,4\nb,1,2,3\n");
    try {
      parse_motor_speeds(bad);
      FAIL("expected MalformedRow");
    } catch (const MalformedRow& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
}

TEST_CASE("csv: template bank round trip") {
  TemplateBank bank;
  bank.bin_hz = 43.066406;
  Rng rng(7007);
  bank.motors.resize(4);
  for (auto& motor : bank.motors)
    for (double rpm : {5000.0, 6000.0, 7000.0}) {
      TemplateBank::Entry e;
      e.rpm = rpm;
      for (int b = 0; b < 16; ++b)
        e.power.push_back(*parse_double(format_fixed(rng.uniform01(), 9)));
      motor.push_back(std::move(e));
    }

  std::istringstream in(format_template_bank(bank));
  const auto back = parse_template_bank(in);
  REQUIRE(back.motor_count() == 4);
  CHECK(back.bin_hz == bank.bin_hz);
  for (int m = 0; m < 4; ++m) {
    REQUIRE(back.motors[m].size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(back.motors[m][k].rpm == bank.motors[m][k].rpm);
      CHECK(back.motors[m][k].power == bank.motors[m][k].power);
    }
  }
}

TEST_CASE("config: baseline file parses and validates") {
  std::istringstream in(
      "# baseline\n"
      "[grid]\n"
      "az_step_deg = 5\n"
      "el_step_deg = 5\n"
      "[localize]\n"
      "method = srp_phat   ; default\n"
      "[enhance]\n"
      "chain =\n");
  const auto cfg = parse_config(in);
  CHECK(cfg.method == LocalizationMethod::SrpPhat);
  CHECK(cfg.az_step_deg == 5.0);
  CHECK(cfg.chain.empty());
}

TEST_CASE("config: defaults validate") { CHECK_NOTHROW(PipelineConfig{}.validate()); }

TEST_CASE("config: unknown method is named in the error") {
  std::istringstream in("[localize]\nmethod = esprit\n");
  try {
    parse_config(in);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("esprit") != std::string::npos);
  }
}

TEST_CASE("config: aggregated range errors") {
  std::istringstream in(
      "[localize]\n"
      "gamma = -1\n"
      "band_lo_hz = 9000\n"
      "band_hi_hz = 8000\n"
      "[stft]\n"
      "fft_size = 1000\n");
  try {
    parse_config(in);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("band") != std::string::npos);
    CHECK(msg.find("fft_size") != std::string::npos);
  }
}

TEST_CASE("config: syntax errors") {
  {
    std::istringstream in("[grid\naz_step_deg = 5\n");
    CHECK_THROWS_AS(parse_config(in), ParseError);
  }
  {
    std::istringstream in("[grid]\njust words\n");
    CHECK_THROWS_AS(parse_config(in), ParseError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), FileNotFound);
}

TEST_CASE("fuzz: parsers survive random mutations") {
  Rng rng(7100);

  // Seed corpus: one valid document per format.
  GroundTruth gt;
  gt.kind = TaskKind::Flight;
  for (int i = 0; i < 2; ++i) {
    FlightTruth rec;
    for (int k = 0; k < kFlightTimestamps; ++k) {
      rec.timestamps_s.push_back(0.25 + 0.25 * k);
      rec.directions.push_back(Direction{10.0 * k - 70.0, 3.0 * k - 20.0});
    }
    gt.flight_truth["f" + std::to_string(i)] = std::move(rec);
  }
  Submission sub;
  sub.kind = TaskKind::Static;
  sub.static_estimates["a"] = Direction{1.0, 2.0};
  sub.static_estimates["b"] = Direction{-3.0, 4.0};
  TemplateBank bank;
  bank.bin_hz = 43.0;
  bank.motors.assign(2, {TemplateBank::Entry{5000.0, {1.0, 2.0, 3.0}},
                         TemplateBank::Entry{6000.0, {2.0, 1.0, 0.5}}});
  MotorSpeedTable speeds{{"a", {5000.0, 5100.0, 5200.0, 5300.0}}};
  const std::string config_text =
      "[grid]\naz_step_deg = 5\nel_step_deg = 5\n[localize]\nmethod = "
      "srp_phat\ngamma = 0.3\n[track]\nmethod = kalman\n";

  auto wav_rec = MultichannelRecording::zeros(3, 50, 44100.0);
  for (auto& ch : wav_rec.samples)
    for (auto& v : ch) v = 2.0 * rng.uniform01() - 1.0;

  std::vector<std::string> texts = {
      format_ground_truth(gt), format_submission(sub),
      format_template_bank(bank), format_motor_speeds(speeds), config_text};
  const auto wav_bytes = encode_wav(wav_rec, WavFormat::Pcm16);

  const auto mutate_bytes = [&](std::vector<std::uint8_t> data) {
    const int edits = 1 + static_cast<int>(rng.uniform01() * 8.0);
    for (int e = 0; e < edits && !data.empty(); ++e) {
      const auto pos = static_cast<std::size_t>(rng.uniform01() * data.size());
      switch (static_cast<int>(rng.uniform01() * 4.0)) {
        case 0:
          data[std::min(pos, data.size() - 1)] =
              static_cast<std::uint8_t>(rng.uniform01() * 256.0);
          break;
        case 1:
          data.resize(pos);
          break;
        case 2:
          data.insert(data.begin() + std::min(pos, data.size()),
                      static_cast<std::uint8_t>(rng.uniform01() * 256.0));
          break;
        default:
          if (!data.empty())
            data.erase(data.begin() + std::min(pos, data.size() - 1));
      }
    }
    return data;
  };

  int caught = 0, parsed = 0;
  const int total = 100000;
  for (int i = 0; i < total; ++i) {
    const int which = static_cast<int>(rng.uniform01() * 6.0);
    try {
      if (which == 5) {
        auto bytes = mutate_bytes(wav_bytes);
        parse_wav(bytes);
      } else {
        const auto& seed = texts[which];
        const auto mutated = mutate_bytes(
            std::vector<std::uint8_t>(seed.begin(), seed.end()));
        std::istringstream in(std::string(mutated.begin(), mutated.end()));
        switch (which) {
          case 0: parse_ground_truth(in); break;
          case 1: parse_submission(in); break;
          case 2: parse_template_bank(in); break;
          case 3: parse_motor_speeds(in); break;
          default: parse_config(in); break;
        }
      }
      ++parsed;
    } catch (const Error&) {
      ++caught;  // typed rejection is the expected outcome
    }
    // Anything else (segfault, std::bad_alloc, logic_error) fails the test
    // by escaping doctest's handler.
  }
  CHECK(caught + parsed == total);
  CHECK(caught > total / 10);  // mutations really do break documents
  CHECK(parsed > 0);           // and some survive, so both paths are hit
}
