#include "uavloc/scene_sim.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "uavloc/csv_io.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/fft.hpp"
#include "uavloc/wav.hpp"

namespace uavloc {

namespace {

constexpr int kTapsHalf = 15;  // 31-tap kernel
constexpr double kKaiserBeta = 8.6;
constexpr double kBlockSeconds = 0.01;  // direction / rpm update granularity
constexpr double kCleanRms = 0.05;

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double x, double half_width) {
  const double r = x / half_width;
  if (std::abs(r) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, kKaiserBeta);
}

struct DelayKernel {
  long base = 0;                           // integer part
  std::array<double, 2 * kTapsHalf + 1> taps{};

  explicit DelayKernel(double delay_samples) {
    base = std::lround(delay_samples);
    const double frac = delay_samples - static_cast<double>(base);
    double sum = 0.0;
    for (int j = -kTapsHalf; j <= kTapsHalf; ++j) {
      const double x = static_cast<double>(j) - frac;
      taps[j + kTapsHalf] = sinc(x) * kaiser(x, kTapsHalf + 0.5);
      sum += taps[j + kTapsHalf];
    }
    for (auto& t : taps) t /= sum;  // unit DC gain
  }

  // out[t] for t in [t0, t1) from zero-padded signal.
  void apply(std::span<const double> x, std::size_t t0, std::size_t t1,
             std::span<double> out) const {
    const long n = static_cast<long>(x.size());
    for (std::size_t t = t0; t < t1; ++t) {
      double acc = 0.0;
      for (int j = -kTapsHalf; j <= kTapsHalf; ++j) {
        const long src = static_cast<long>(t) - base - j;
        if (src >= 0 && src < n) acc += taps[j + kTapsHalf] * x[src];
      }
      out[t] = acc;
    }
  }
};

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

void scale_to_rms(std::vector<double>& x, double target) {
  const double r = rms(x);
  if (r <= 0.0) return;
  const double s = target / r;
  for (double& v : x) v *= s;
}

double mean_power(const MultichannelRecording& rec, std::size_t limit) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& ch : rec.samples) {
    const std::size_t n = std::min(limit, ch.size());
    for (std::size_t t = 0; t < n; ++t) acc += ch[t] * ch[t];
    count += n;
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

}  // namespace

DirectionPath DirectionPath::fixed(const Direction& d) {
  DirectionPath p;
  p.knot_times_s = {0.0};
  p.knots = {d};
  return p;
}

void DirectionPath::validate() const {
  if (knots.empty()) throw EmptyInput("path has no knots");
  if (knot_times_s.size() != knots.size())
    throw ShapeMismatch("path times and knots differ in length");
  for (std::size_t i = 1; i < knot_times_s.size(); ++i)
    if (!(knot_times_s[i] > knot_times_s[i - 1]))
      throw InvalidConfig("path knot times must be strictly increasing");
}

Direction DirectionPath::at(double t) const {
  validate();
  if (knots.size() == 1 || t <= knot_times_s.front()) return knots.front();
  if (t >= knot_times_s.back()) return knots.back();
  std::size_t hi = 1;
  while (knot_times_s[hi] < t) ++hi;
  const std::size_t lo = hi - 1;
  const double f =
      (t - knot_times_s[lo]) / (knot_times_s[hi] - knot_times_s[lo]);
  const Eigen::Vector3d a = knots[lo].unit_vector();
  const Eigen::Vector3d b = knots[hi].unit_vector();
  const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
  if (angle < 1e-12) return knots[lo];
  Eigen::Vector3d axis = a.cross(b);
  if (axis.norm() < 1e-12) axis = a.unitOrthogonal();
  axis.normalize();
  return Direction::from_unit_vector(Eigen::AngleAxisd(f * angle, axis) * a);
}

std::vector<double> fractional_delay(std::span<const double> signal,
                                     double delay_samples) {
  if (std::abs(delay_samples) >=
      static_cast<double>(signal.size()) / 4.0)
    throw DelayTooLarge("delay " + std::to_string(delay_samples) +
                        " samples on a signal of " +
                        std::to_string(signal.size()));
  std::vector<double> out(signal.size());
  DelayKernel(delay_samples).apply(signal, 0, signal.size(), out);
  return out;
}

std::vector<double> synth_source(SourceKind kind, double sinusoid_hz,
                                 std::size_t length, double sample_rate,
                                 Rng& rng) {
  if (length == 0) throw EmptyInput("zero-length source");
  std::vector<double> s(length);
  switch (kind) {
    case SourceKind::WhiteNoise:
      for (auto& v : s) v = rng.normal();
      break;
    case SourceKind::Sinusoid: {
      const double phase = 2.0 * std::numbers::pi * rng.uniform01();
      const double w = 2.0 * std::numbers::pi * sinusoid_hz / sample_rate;
      for (std::size_t t = 0; t < length; ++t)
        s[t] = std::sin(w * static_cast<double>(t) + phase);
      break;
    }
    case SourceKind::SpeechLike: {
      for (auto& v : s) v = rng.normal();
      RealFft fft(static_cast<int>(length));
      std::vector<std::complex<double>> spectrum(fft.bin_count());
      fft.forward(s, spectrum);
      const double bin_hz = sample_rate / static_cast<double>(length);
      for (int b = 0; b < fft.bin_count(); ++b) {
        const double f = b * bin_hz;
        double gain = 0.0;
        if (f >= 100.0 && f <= 8000.0)
          gain = f <= 500.0 ? 1.0 : 500.0 / f;  // -6 dB per octave
        spectrum[b] *= gain;
      }
      fft.inverse(spectrum, s);
      const double am_phase = 2.0 * std::numbers::pi * rng.uniform01();
      for (std::size_t t = 0; t < length; ++t) {
        const double tau = static_cast<double>(t) / sample_rate;
        s[t] *= 1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * 4.0 * tau +
                                     am_phase);
      }
      break;
    }
  }
  scale_to_rms(s, 1.0);
  return s;
}

MultichannelRecording render_source(const SceneSpec& spec) {
  spec.path.validate();
  spec.geometry.validate();
  if (!(spec.duration_s > 0.0)) throw InvalidConfig("duration must be > 0");
  if (!(spec.sample_rate > 0.0)) throw InvalidConfig("sample rate must be > 0");

  const auto length = static_cast<std::size_t>(
      std::lround(spec.duration_s * spec.sample_rate));
  Rng rng(spec.seed);
  auto source =
      synth_source(spec.kind, spec.sinusoid_hz, length, spec.sample_rate, rng);
  scale_to_rms(source, kCleanRms);

  const int mics = spec.geometry.mic_count();
  auto rec = MultichannelRecording::zeros(mics, length, spec.sample_rate);

  if (!spec.path.moving()) {
    const Direction dir = spec.path.knots.front();
    for (int k = 0; k < mics; ++k) {
      const double delay =
          tdoa_seconds(dir, spec.geometry, 0, k) * spec.sample_rate;
      DelayKernel(delay).apply(source, 0, length, rec.samples[k]);
    }
    return rec;
  }

  const auto block = static_cast<std::size_t>(
      std::lround(kBlockSeconds * spec.sample_rate));
  for (std::size_t t0 = 0; t0 < length; t0 += block) {
    const std::size_t t1 = std::min(t0 + block, length);
    const double mid =
        (static_cast<double>(t0) + static_cast<double>(t1)) / 2.0 /
        spec.sample_rate;
    const Direction dir = spec.path.at(mid);
    for (int k = 0; k < mics; ++k) {
      const double delay =
          tdoa_seconds(dir, spec.geometry, 0, k) * spec.sample_rate;
      DelayKernel(delay).apply(source, t0, t1, rec.samples[k]);
    }
  }
  return rec;
}

EgoNoise synth_ego_noise(const NoiseSource& noise, double duration_s,
                         const ArrayGeometry& geometry, std::uint64_t seed,
                         double sample_rate) {
  if (!(duration_s > 0.0)) throw InvalidConfig("duration must be > 0");
  geometry.validate();

  if (noise.kind == NoiseSource::Kind::Recorded) {
    auto rec = read_wav(noise.recorded_path);
    rec.validate();
    const auto needed = static_cast<std::size_t>(
        std::lround(duration_s * rec.sample_rate));
    if (rec.length() == 0) throw ZeroNoise("recorded noise file is empty");
    for (auto& ch : rec.samples) {
      std::vector<double> tiled(needed);
      for (std::size_t t = 0; t < needed; ++t) tiled[t] = ch[t % ch.size()];
      ch = std::move(tiled);
    }
    EgoNoise out;
    out.recording = std::move(rec);
    return out;
  }

  const EgoNoiseConfig& cfg = noise.synthetic;
  if (cfg.harmonics < 1) throw InvalidConfig("harmonics must be >= 1");
  const auto length =
      static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  const auto block =
      static_cast<std::size_t>(std::lround(kBlockSeconds * sample_rate));
  const int mics = geometry.mic_count();
  const double c = geometry.speed_of_sound;

  EgoNoise out;
  out.recording = MultichannelRecording::zeros(mics, length, sample_rate);
  Rng rng(seed);

  for (int m = 0; m < 4; ++m) {
    if (!cfg.active[m]) continue;
    if (!(cfg.rpm[m] > 0.0)) throw InvalidConfig("motor rpm must be > 0");

    // Phase-continuous comb under a bounded rpm random walk.
    std::vector<double> harmonic_phase(cfg.harmonics);
    for (auto& p : harmonic_phase) p = 2.0 * std::numbers::pi * rng.uniform01();
    std::vector<double> sig(length, 0.0);
    double walk = 0.0;
    double phase = 0.0;
    double rpm_sum = 0.0;
    std::size_t block_count = 0;
    for (std::size_t t0 = 0; t0 < length; t0 += block) {
      const std::size_t t1 = std::min(t0 + block, length);
      walk = std::clamp(walk + cfg.rpm_jitter * 0.125 * rng.normal(),
                        -cfg.rpm_jitter, cfg.rpm_jitter);
      const double rpm = cfg.rpm[m] * (1.0 + walk);
      rpm_sum += rpm;
      ++block_count;
      const double fundamental = rpm / 60.0;
      const double dphase =
          2.0 * std::numbers::pi * fundamental / sample_rate;
      for (std::size_t t = t0; t < t1; ++t) {
        double v = 0.0;
        for (int h = 1; h <= cfg.harmonics; ++h) {
          if (h * fundamental >= 0.45 * sample_rate) break;
          v += std::sin(h * phase + harmonic_phase[h - 1]) /
               static_cast<double>(h);
        }
        sig[t] = v;
        phase += dphase;
      }
    }
    out.profile.rpm[m] = rpm_sum / static_cast<double>(block_count);

    const double floor_amp =
        rms(sig) * std::pow(10.0, cfg.broadband_floor_db / 20.0);
    for (auto& v : sig) v += floor_amp * rng.normal();

    for (int k = 0; k < mics; ++k) {
      const double dist =
          (geometry.mic_positions[k] - cfg.rotor_positions[m]).norm();
      if (dist < 1e-6) throw InvalidGeometry("rotor coincides with a mic");
      const double gain = 0.01 / dist;  // ~0.05 at the nominal 0.2 m spacing
      const double delay = dist / c * sample_rate;
      std::vector<double> delayed(length);
      DelayKernel(delay).apply(sig, 0, length, delayed);
      for (std::size_t t = 0; t < length; ++t)
        out.recording.samples[k][t] += gain * delayed[t];
    }
  }
  return out;
}

TemplateBank measure_motor_templates(const EgoNoiseConfig& base,
                                     std::span<const double> rpm_keys,
                                     const ArrayGeometry& geometry,
                                     const StftConfig& stft_cfg,
                                     std::uint64_t seed, double sample_rate) {
  if (rpm_keys.empty()) throw EmptyInput("no rpm keys");
  TemplateBank bank;
  bank.bin_hz = sample_rate / stft_cfg.fft_size;
  bank.motors.resize(4);

  for (int m = 0; m < 4; ++m) {
    for (std::size_t k = 0; k < rpm_keys.size(); ++k) {
      NoiseSource single;
      single.synthetic = base;
      single.synthetic.active = {false, false, false, false};
      single.synthetic.active[m] = true;
      single.synthetic.rpm[m] = rpm_keys[k];
      single.synthetic.rpm_jitter = 0.0;
      const auto noise = synth_ego_noise(
          single, 1.0, geometry,
          Rng::derived(seed, static_cast<std::uint64_t>(m) * 1024 + k)
              .next_u64(),
          sample_rate);
      const auto blocks = stft(noise.recording, stft_cfg);
      if (blocks.empty()) throw RecordingTooShort("template render too short");

      TemplateBank::Entry entry;
      entry.rpm = rpm_keys[k];
      entry.power.assign(blocks[0].bin_count(), 0.0);
      for (const auto& b : blocks)
        for (const auto& ch : b.bins)
          for (std::size_t bin = 0; bin < ch.size(); ++bin)
            entry.power[bin] += std::norm(ch[bin]);
      const double frames =
          static_cast<double>(blocks.size() * blocks[0].channel_count());
      for (auto& p : entry.power) p /= frames;
      bank.motors[m].push_back(std::move(entry));
    }
    std::sort(bank.motors[m].begin(), bank.motors[m].end(),
              [](const auto& a, const auto& b) { return a.rpm < b.rpm; });
  }
  bank.validate();
  return bank;
}

MixResult mix_at_snr(const MultichannelRecording& clean,
                     const MultichannelRecording& noise, double snr_db) {
  clean.validate();
  noise.validate();
  if (clean.channel_count() != noise.channel_count())
    throw ShapeMismatch("clean and noise channel counts differ");
  if (clean.sample_rate != noise.sample_rate)
    throw ShapeMismatch("clean and noise sample rates differ");
  if (noise.length() < clean.length())
    throw ShapeMismatch("noise shorter than clean signal");
  if (!std::isfinite(snr_db)) throw InvalidConfig("snr must be finite");

  const std::size_t n = clean.length();
  const double p_clean = mean_power(clean, n);
  const double p_noise = mean_power(noise, n);
  if (p_noise <= 0.0) throw ZeroNoise("noise has zero power");
  if (p_clean <= 0.0) throw ZeroSignal("clean signal has zero power");

  MixResult out;
  out.noise_scale =
      std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  out.scaled_noise = MultichannelRecording::zeros(clean.channel_count(), n,
                                                  clean.sample_rate);
  out.mixed = clean;
  for (int ch = 0; ch < clean.channel_count(); ++ch)
    for (std::size_t t = 0; t < n; ++t) {
      out.scaled_noise.samples[ch][t] = noise.samples[ch][t] * out.noise_scale;
      out.mixed.samples[ch][t] += out.scaled_noise.samples[ch][t];
    }
  return out;
}

std::vector<double> flight_timestamps(double duration_s) {
  if (!(duration_s > 0.5))
    throw InvalidConfig("flight recording must exceed 0.5 s");
  std::vector<double> ts(kFlightTimestamps);
  const double step = (duration_s - 0.5) / (kFlightTimestamps - 1);
  for (int k = 0; k < kFlightTimestamps; ++k) ts[k] = 0.25 + k * step;
  return ts;
}

Direction random_direction(Rng& rng) {
  const double az = rng.uniform(-180.0, 180.0);
  const double el = std::asin(2.0 * rng.uniform01() - 1.0) * 180.0 /
                    std::numbers::pi;
  return Direction{az, el};
}

namespace {

DirectionPath random_flight_path(Rng& rng, double duration_s,
                                 double max_rate_deg_s) {
  DirectionPath path;
  Eigen::Vector3d u = random_direction(rng).unit_vector();
  for (double t = 0.0; t <= duration_s + 1e-9; t += 1.0) {
    path.knot_times_s.push_back(t);
    path.knots.push_back(Direction::from_unit_vector(u));
    const double rate = rng.uniform(5.0, max_rate_deg_s);
    const double angle = rate * std::numbers::pi / 180.0;  // over one second
    Eigen::Vector3d tangent =
        Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    tangent -= tangent.dot(u) * u;
    if (tangent.norm() < 1e-9) tangent = u.unitOrthogonal();
    tangent.normalize();
    u = (std::cos(angle) * u + std::sin(angle) * tangent).normalized();
  }
  return path;
}

}  // namespace

GroundTruth generate_task(TaskKind kind, int count, double snr_lo_db,
                          double snr_hi_db, std::uint64_t seed,
                          const std::string& out_dir,
                          const GenerateOptions& opts) {
  if (count < 1) throw InvalidConfig("count must be >= 1");
  if (!(snr_lo_db <= snr_hi_db)) throw InvalidConfig("empty snr range");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoFailure("cannot create " + out_dir + ": " + ec.message());
  if (opts.write_sidecars) {
    fs::create_directories(fs::path(out_dir) / "clean", ec);
    fs::create_directories(fs::path(out_dir) / "noise", ec);
    if (ec) throw IoFailure("cannot create sidecar directories");
  }

  const double duration = kind == TaskKind::Static ? 2.0 : 4.0;
  GroundTruth gt;
  gt.kind = kind;
  MotorSpeedTable speeds;

  for (int i = 0; i < count; ++i) {
    Rng rng = Rng::derived(seed, static_cast<std::uint64_t>(i));
    char id[16];
    if (kind == TaskKind::Static)
      std::snprintf(id, sizeof id, "rec%04d", i);
    else
      std::snprintf(id, sizeof id, "fl%03d", i);

    SceneSpec spec;
    spec.kind = opts.source;
    spec.sinusoid_hz = opts.sinusoid_hz;
    spec.duration_s = duration;
    spec.geometry = opts.geometry;
    spec.seed = rng.next_u64();
    if (kind == TaskKind::Static) {
      spec.path = DirectionPath::fixed(random_direction(rng));
    } else {
      spec.path = random_flight_path(rng, duration, opts.max_angular_rate_deg_s);
    }

    NoiseSource noise;
    noise.synthetic = opts.ego;
    for (auto& rpm : noise.synthetic.rpm) rpm *= rng.uniform(0.9, 1.1);
    const std::uint64_t noise_seed = rng.next_u64();
    const double snr = rng.uniform(snr_lo_db, snr_hi_db);

    const auto clean = render_source(spec);
    const auto ego =
        synth_ego_noise(noise, duration, opts.geometry, noise_seed);
    const auto mix = mix_at_snr(clean, ego.recording, snr);

    const fs::path base(out_dir);
    write_wav(mix.mixed, (base / (std::string(id) + ".wav")).string());
    if (opts.write_sidecars) {
      write_wav(clean, (base / "clean" / (std::string(id) + ".wav")).string());
      write_wav(mix.scaled_noise,
                (base / "noise" / (std::string(id) + ".wav")).string());
    }

    if (kind == TaskKind::Static) {
      gt.static_truth[id] = spec.path.knots.front();
    } else {
      FlightTruth truth;
      truth.timestamps_s = flight_timestamps(duration);
      for (double t : truth.timestamps_s)
        truth.directions.push_back(spec.path.at(t));
      gt.flight_truth[id] = std::move(truth);
    }
    speeds[id] = ego.profile.rpm;
  }

  const fs::path base(out_dir);
  save_geometry(opts.geometry, (base / "geometry.txt").string());
  write_ground_truth(gt, (base / "ground_truth.csv").string());
  write_motor_speeds(speeds, (base / "motor_speeds.csv").string());
  if (opts.write_templates) {
    // Keys straddle the per-recording rpm spread (base x 0.9..1.1).
    std::vector<double> keys;
    double lo = 1e12, hi = 0.0;
    for (double rpm : opts.ego.rpm) {
      lo = std::min(lo, 0.85 * rpm);
      hi = std::max(hi, 1.15 * rpm);
    }
    for (double r = lo; r <= hi + 1.0; r += (hi - lo) / 5.0) keys.push_back(r);
    const auto bank =
        measure_motor_templates(opts.ego, keys, opts.geometry, {}, seed);
    write_template_bank(bank, (base / "motor_templates.csv").string());
  }
  return gt;
}

}  // namespace uavloc
