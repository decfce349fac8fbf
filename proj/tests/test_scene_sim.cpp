#include "uavloc/scene_sim.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/csv_io.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/fft.hpp"
#include "uavloc/wav.hpp"
#include "support/oracles.hpp"

using namespace uavloc;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "uavloc_scene" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Cross-correlation argmax over a bounded lag range, zero-padded edges:
// positive result means b lags a.
int xcorr_argmax(std::span<const double> a, std::span<const double> b,
                 int max_lag) {
  const long n = static_cast<long>(a.size());
  double best = -1e300;
  int best_lag = 0;
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (long t = 0; t < n; ++t) {
      const long u = t + lag;
      if (u >= 0 && u < n) acc += a[t] * b[u];
    }
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  return best_lag;
}

// Phase of the f component over the interior of the signal.
double tone_phase(std::span<const double> x, double f, double fs) {
  std::complex<double> z{0.0, 0.0};
  for (std::size_t t = 100; t + 100 < x.size(); ++t) {
    const double w = 2.0 * std::numbers::pi * f * static_cast<double>(t) / fs;
    z += x[t] * std::complex<double>(std::cos(w), -std::sin(w));
  }
  return std::arg(z);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("fractional_delay: zero delay is the identity") {
  Rng rng(9001);
  std::vector<double> x(400);
  for (auto& v : x) v = rng.normal();
  const auto y = fractional_delay(x, 0.0);
  REQUIRE(y.size() == x.size());
  for (std::size_t t = 0; t < x.size(); ++t)
    CHECK(std::abs(y[t] - x[t]) < 1e-9);
}

TEST_CASE("fractional_delay: integer delays shift exactly") {
  Rng rng(9002);
  std::vector<double> x(600);
  for (auto& v : x) v = rng.normal();
  const auto y = fractional_delay(x, 3.0);
  CHECK(xcorr_argmax(x, y, 20) == 3);
  for (std::size_t t = 40; t + 40 < x.size(); ++t)
    CHECK(std::abs(y[t] - x[t - 3]) < 1e-9);

  const auto z = fractional_delay(x, -7.0);
  CHECK(xcorr_argmax(x, z, 20) == -7);
}

TEST_CASE("fractional_delay: half-sample delay of a tone shifts its phase") {
  const double fs = 44100.0;
  const double f = 1000.0;
  std::vector<double> x(4000);
  for (std::size_t t = 0; t < x.size(); ++t)
    x[t] = std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / fs);
  const auto y = fractional_delay(x, 0.5);
  const double expected = 2.0 * std::numbers::pi * f * 0.5 / fs;
  double dphi = tone_phase(x, f, fs) - tone_phase(y, f, fs);
  while (dphi > std::numbers::pi) dphi -= 2.0 * std::numbers::pi;
  while (dphi < -std::numbers::pi) dphi += 2.0 * std::numbers::pi;
  CHECK(std::abs(dphi - expected) < 1e-3);
}

TEST_CASE("fractional_delay: oversized delays are rejected") {
  std::vector<double> x(100, 1.0);
  CHECK_THROWS_AS(fractional_delay(x, 25.0), DelayTooLarge);
  CHECK_THROWS_AS(fractional_delay(x, -25.0), DelayTooLarge);
  CHECK_NOTHROW(fractional_delay(x, 24.9));
}

TEST_CASE("render_source: broadside two-mic scene has identical channels") {
  SceneSpec spec;
  spec.kind = SourceKind::WhiteNoise;
  spec.duration_s = 0.25;
  spec.geometry.mic_positions = {Eigen::Vector3d(0.05, 0.0, 0.0),
                                 Eigen::Vector3d(-0.05, 0.0, 0.0)};
  spec.path = DirectionPath::fixed(Direction{90.0, 0.0});  // +y, broadside
  spec.seed = 31;
  const auto rec = render_source(spec);
  REQUIRE(rec.channel_count() == 2);
  for (std::size_t t = 0; t < rec.length(); ++t)
    CHECK(std::abs(rec.samples[0][t] - rec.samples[1][t]) < 1e-6);
}

TEST_CASE("render_source: measured inter-channel delays match the geometry") {
  SceneSpec spec;
  spec.kind = SourceKind::WhiteNoise;
  spec.duration_s = 0.5;
  spec.path = DirectionPath::fixed(Direction{0.0, 0.0});
  spec.seed = 32;
  const auto rec = render_source(spec);
  REQUIRE(rec.channel_count() == 8);
  for (int k = 1; k < 8; ++k) {
    const double predicted =
        tdoa_seconds(Direction{0.0, 0.0}, spec.geometry, 0, k) *
        spec.sample_rate;
    const int measured = xcorr_argmax(rec.samples[0], rec.samples[k], 40);
    CHECK(std::abs(measured - predicted) <= 1.0);
  }
}

TEST_CASE("render_source: deterministic for a fixed seed") {
  SceneSpec spec;
  spec.duration_s = 0.3;
  spec.path = DirectionPath::fixed(Direction{25.0, -10.0});
  spec.seed = 77;
  const auto a = render_source(spec);
  const auto b = render_source(spec);
  for (int c = 0; c < a.channel_count(); ++c)
    CHECK(a.samples[c] == b.samples[c]);
}

TEST_CASE("direction path: slerp hits knots and stays on great circles") {
  DirectionPath path;
  path.knot_times_s = {0.0, 2.0};
  path.knots = {Direction{0.0, 0.0}, Direction{90.0, 0.0}};
  CHECK(great_circle_deg(path.at(-1.0), path.knots[0]) < 1e-9);
  CHECK(great_circle_deg(path.at(0.0), path.knots[0]) < 1e-9);
  CHECK(great_circle_deg(path.at(2.5), path.knots[1]) < 1e-9);
  CHECK(great_circle_deg(path.at(1.0), Direction{45.0, 0.0}) < 1e-9);
  // Quarter point: 22.5 degrees along the equator.
  CHECK(great_circle_deg(path.at(0.5), Direction{22.5, 0.0}) < 1e-9);
}

TEST_CASE("synth_ego_noise: single harmonic at 6000 rpm peaks at 100 Hz") {
  NoiseSource src;
  src.synthetic.rpm = {6000.0, 6000.0, 6000.0, 6000.0};
  src.synthetic.harmonics = 1;
  src.synthetic.rpm_jitter = 0.0;
  const auto noise = synth_ego_noise(src, 2.0, ArrayGeometry::cube(), 41);
  REQUIRE(noise.recording.length() == 88200);

  const int n = 1 << 14;
  RealFft fft(n);
  std::vector<std::complex<double>> spectrum(fft.bin_count());
  fft.forward(std::span<const double>(noise.recording.samples[0]).first(n),
              spectrum);
  std::vector<double> power(spectrum.size());
  for (std::size_t b = 0; b < spectrum.size(); ++b)
    power[b] = std::norm(spectrum[b]);
  const double bin_hz = 44100.0 / n;
  const auto peak_bin =
      std::max_element(power.begin(), power.end()) - power.begin();
  CHECK(std::abs(peak_bin * bin_hz - 100.0) < 2.0 * bin_hz);

  auto sorted = power;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  CHECK(power[peak_bin] > 100.0 * median);  // >= 20 dB above the median bin
}

TEST_CASE("synth_ego_noise: deterministic, mean rpm near nominal") {
  NoiseSource src;
  const auto a = synth_ego_noise(src, 0.5, ArrayGeometry::cube(), 99);
  const auto b = synth_ego_noise(src, 0.5, ArrayGeometry::cube(), 99);
  for (int c = 0; c < 8; ++c) CHECK(a.recording.samples[c] == b.recording.samples[c]);
  for (int m = 0; m < 4; ++m) {
    CHECK(a.profile.rpm[m] ==
          doctest::Approx(src.synthetic.rpm[m]).epsilon(0.05));
    CHECK(a.profile.rpm[m] == b.profile.rpm[m]);
  }
  const auto c = synth_ego_noise(src, 0.5, ArrayGeometry::cube(), 100);
  CHECK(a.recording.samples[0] != c.recording.samples[0]);
}

TEST_CASE("synth_ego_noise: recorded mode tiles the file") {
  const auto dir = temp_dir("recorded_noise");
  auto rec = MultichannelRecording::zeros(2, 1000, 44100.0);
  Rng rng(9003);
  for (auto& ch : rec.samples)
    for (auto& v : ch) v = static_cast<double>(static_cast<float>(rng.normal()));
  const auto path = (dir / "noise.wav").string();
  write_wav(rec, path);

  NoiseSource src;
  src.kind = NoiseSource::Kind::Recorded;
  src.recorded_path = path;
  const auto noise = synth_ego_noise(src, 0.1, ArrayGeometry::cube(), 1);
  REQUIRE(noise.recording.length() == 4410);
  for (std::size_t t = 0; t < noise.recording.length(); ++t)
    CHECK(noise.recording.samples[0][t] == rec.samples[0][t % 1000]);

  src.recorded_path = (dir / "missing.wav").string();
  CHECK_THROWS_AS(synth_ego_noise(src, 0.1, ArrayGeometry::cube(), 1),
                  FileNotFound);
}

TEST_CASE("mix_at_snr: identical inputs at snr 0 use scale 1") {
  SceneSpec spec;
  spec.duration_s = 0.2;
  spec.path = DirectionPath::fixed(Direction{10.0, 5.0});
  spec.seed = 5;
  const auto rec = render_source(spec);
  const auto mix = mix_at_snr(rec, rec, 0.0);
  CHECK(mix.noise_scale == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mix_at_snr: requested ratio is met within 0.01 dB") {
  Rng rng(9004);
  for (double snr : {-20.0, -15.0, -5.0, 0.0, 5.0, 12.5}) {
    auto clean = MultichannelRecording::zeros(3, 5000, 44100.0);
    auto noise = MultichannelRecording::zeros(3, 6000, 44100.0);
    for (auto& ch : clean.samples)
      for (auto& v : ch) v = 0.1 * rng.normal();
    for (auto& ch : noise.samples)
      for (auto& v : ch) v = 0.7 * rng.normal();
    const auto mix = mix_at_snr(clean, noise, snr);

    double pc = 0.0, pn = 0.0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t t = 0; t < clean.length(); ++t) {
        pc += clean.samples[c][t] * clean.samples[c][t];
        pn += mix.scaled_noise.samples[c][t] * mix.scaled_noise.samples[c][t];
      }
    const double measured = 10.0 * std::log10(pc / pn);
    CHECK(std::abs(measured - snr) < 0.01);
  }
}

TEST_CASE("mix_at_snr: output recomposes bit-exactly from the parts") {
  Rng rng(9005);
  auto clean = MultichannelRecording::zeros(2, 3000, 44100.0);
  auto noise = MultichannelRecording::zeros(2, 3000, 44100.0);
  for (auto& ch : clean.samples)
    for (auto& v : ch) v = rng.normal();
  for (auto& ch : noise.samples)
    for (auto& v : ch) v = rng.normal();
  const auto mix = mix_at_snr(clean, noise, -7.0);
  for (int c = 0; c < 2; ++c)
    for (std::size_t t = 0; t < clean.length(); ++t)
      CHECK(mix.mixed.samples[c][t] ==
            clean.samples[c][t] + mix.scaled_noise.samples[c][t]);
  // Clean input is untouched.
  CHECK(mix.mixed.length() == clean.length());
}

TEST_CASE("mix_at_snr: shape and degenerate errors") {
  auto a = MultichannelRecording::zeros(2, 100, 44100.0);
  auto b = MultichannelRecording::zeros(3, 100, 44100.0);
  a.samples[0][0] = 0.5;
  CHECK_THROWS_AS(mix_at_snr(a, b, 0.0), ShapeMismatch);

  auto short_noise = MultichannelRecording::zeros(2, 50, 44100.0);
  CHECK_THROWS_AS(mix_at_snr(a, short_noise, 0.0), ShapeMismatch);

  auto zero_noise = MultichannelRecording::zeros(2, 100, 44100.0);
  CHECK_THROWS_AS(mix_at_snr(a, zero_noise, 0.0), ZeroNoise);

  auto zero_clean = MultichannelRecording::zeros(2, 100, 44100.0);
  auto noise = MultichannelRecording::zeros(2, 100, 44100.0);
  noise.samples[0][0] = 1.0;
  CHECK_THROWS_AS(mix_at_snr(zero_clean, noise, 0.0), ZeroSignal);
}

TEST_CASE("random directions cover the sphere uniformly") {
  Rng rng(9006);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int i = 0; i < 10000; ++i) sum += random_direction(rng).unit_vector();
  CHECK((sum / 10000.0).norm() < 0.05);
}

TEST_CASE("flight timestamps: 15 regular points inside the recording") {
  const auto ts = flight_timestamps(4.0);
  REQUIRE(ts.size() == 15);
  CHECK(ts.front() == doctest::Approx(0.25));
  CHECK(ts.back() == doctest::Approx(3.75));
  for (std::size_t i = 1; i < ts.size(); ++i)
    CHECK(ts[i] - ts[i - 1] == doctest::Approx(0.25));
}

TEST_CASE("generate_task: static dataset layout and content") {
  const auto dir = temp_dir("static_set");
  const auto gt = generate_task(TaskKind::Static, 5, -5.0, 5.0, 4242,
                                dir.string());
  REQUIRE(gt.kind == TaskKind::Static);
  REQUIRE(gt.static_truth.size() == 5);

  for (const auto& [id, d] : gt.static_truth) {
    const auto rec = read_wav((dir / (id + ".wav")).string());
    CHECK(rec.channel_count() == 8);
    CHECK(rec.length() == 88200);
    CHECK(rec.sample_rate == 44100.0);
    CHECK(std::filesystem::exists(dir / "clean" / (id + ".wav")));
    CHECK(std::filesystem::exists(dir / "noise" / (id + ".wav")));
  }

  const auto gt_back = read_ground_truth((dir / "ground_truth.csv").string());
  REQUIRE(gt_back.static_truth.size() == 5);
  for (const auto& [id, d] : gt.static_truth)
    CHECK(great_circle_deg(gt_back.static_truth.at(id), d) < 1e-5);

  const auto speeds = read_motor_speeds((dir / "motor_speeds.csv").string());
  REQUIRE(speeds.size() == 5);
  for (const auto& [id, rpm] : speeds)
    for (int m = 0; m < 4; ++m) CHECK(rpm[m] > 4000.0);

  const auto geom = load_geometry((dir / "geometry.txt").string());
  CHECK(geom.mic_count() == 8);

  const auto bank = read_template_bank((dir / "motor_templates.csv").string());
  CHECK(bank.motor_count() == 4);
  CHECK_FALSE(bank.empty());

  // Mixed = clean + noise sidecars, up to float32 storage rounding.
  const auto& first = gt.static_truth.begin()->first;
  const auto mixed = read_wav((dir / (first + ".wav")).string());
  const auto clean = read_wav((dir / "clean" / (first + ".wav")).string());
  const auto noise = read_wav((dir / "noise" / (first + ".wav")).string());
  for (std::size_t t = 0; t < 1000; ++t)
    CHECK(std::abs(mixed.samples[0][t] - clean.samples[0][t] -
                   noise.samples[0][t]) < 1e-6);
}

TEST_CASE("generate_task: flight ground truth follows a bounded-rate path") {
  const auto dir = temp_dir("flight_set");
  const auto gt =
      generate_task(TaskKind::Flight, 2, -10.0, -10.0, 1717, dir.string());
  REQUIRE(gt.kind == TaskKind::Flight);
  REQUIRE(gt.flight_truth.size() == 2);
  for (const auto& [id, rec] : gt.flight_truth) {
    REQUIRE(rec.timestamps_s.size() == 15);
    const auto wav = read_wav((dir / (id + ".wav")).string());
    CHECK(wav.length() == 4 * 44100);
    for (int k = 1; k < 15; ++k) {
      const double dt = rec.timestamps_s[k] - rec.timestamps_s[k - 1];
      const double step =
          great_circle_deg(rec.directions[k], rec.directions[k - 1]);
      CHECK(step <= 30.0 * dt + 1e-6);
    }
  }
}

TEST_CASE("generate_task: byte-identical under a fixed seed") {
  const auto dir_a = temp_dir("det_a");
  const auto dir_b = temp_dir("det_b");
  GenerateOptions opts;
  opts.write_templates = false;
  generate_task(TaskKind::Static, 2, -3.0, 3.0, 555, dir_a.string(), opts);
  generate_task(TaskKind::Static, 2, -3.0, 3.0, 555, dir_b.string(), opts);

  for (const auto& name :
       {"rec0000.wav", "rec0001.wav", "ground_truth.csv", "motor_speeds.csv",
        "geometry.txt"})
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  CHECK(slurp(dir_a / "noise" / "rec0000.wav") ==
        slurp(dir_b / "noise" / "rec0000.wav"));
}

TEST_CASE("generate_task: clean scene closes the loop with SRP-PHAT") {
  const auto dir = temp_dir("closure");
  GenerateOptions opts;
  opts.write_templates = false;
  const auto gt = generate_task(TaskKind::Static, 1, 20.0, 20.0, 60601,
                                dir.string(), opts);
  const auto& [id, truth] = *gt.static_truth.begin();

  const auto rec = read_wav((dir / (id + ".wav")).string());
  const auto geom = load_geometry((dir / "geometry.txt").string());
  const auto blocks = stft(rec, {});
  const auto grid = build_grid(5.0, 5.0);
  const auto spectrum = srp(blocks, grid, geom,
                            PairMask(rec.channel_count()), SrpOptions{});
  const auto peak = pick_peak(spectrum);
  CHECK(great_circle_deg(peak.direction, truth) < 10.0);
}

TEST_CASE("measure_motor_templates: spectra land at the comb lines") {
  EgoNoiseConfig cfg;
  cfg.harmonics = 1;
  cfg.rpm_jitter = 0.0;
  const std::vector<double> keys = {5400.0, 6000.0, 6600.0};
  const auto bank = measure_motor_templates(cfg, keys, ArrayGeometry::cube(),
                                            StftConfig{}, 88);
  REQUIRE(bank.motor_count() == 4);
  const double bin_hz = 44100.0 / 1024.0;
  for (int m = 0; m < 4; ++m) {
    REQUIRE(bank.motors[m].size() == 3);
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto& entry = bank.motors[m][k];
      CHECK(entry.rpm == keys[k]);
      const auto peak =
          std::max_element(entry.power.begin(), entry.power.end()) -
          entry.power.begin();
      CHECK(std::abs(peak * bin_hz - keys[k] / 60.0) < 2.0 * bin_hz);
    }
  }
}
