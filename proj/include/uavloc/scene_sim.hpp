#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavloc/enhance.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/recording.hpp"
#include "uavloc/rng.hpp"
#include "uavloc/scoring.hpp"
#include "uavloc/stft.hpp"

namespace uavloc {

// Source direction over time: great-circle interpolation between knots,
// clamped to the end knots outside the covered interval.
struct DirectionPath {
  std::vector<double> knot_times_s;  // strictly increasing
  std::vector<Direction> knots;

  static DirectionPath fixed(const Direction& d);
  bool moving() const { return knots.size() > 1; }
  Direction at(double t) const;
  void validate() const;
};

enum class SourceKind { SpeechLike, WhiteNoise, Sinusoid };

struct SceneSpec {
  DirectionPath path;
  SourceKind kind = SourceKind::SpeechLike;
  double sinusoid_hz = 1000.0;
  double duration_s = 2.0;
  double sample_rate = 44100.0;
  ArrayGeometry geometry = ArrayGeometry::cube();
  std::uint64_t seed = 0;
};

// Windowed-sinc interpolation: 31 taps, Kaiser window with beta 8.6,
// unit DC gain. Samples beyond the input edges read as zero.
std::vector<double> fractional_delay(std::span<const double> signal,
                                     double delay_samples);

// Mono test signal with unit RMS. Speech-like is shaped noise: band
// 100 Hz - 8 kHz, -6 dB/octave above 500 Hz, 4 Hz amplitude modulation.
std::vector<double> synth_source(SourceKind kind, double sinusoid_hz,
                                 std::size_t length, double sample_rate,
                                 Rng& rng);

// Far-field rendering: channel k is the source delayed by the plane-wave
// TDOA of mic k against mic 0. Moving paths re-evaluate the direction every
// 10 ms. Clean output has RMS 0.05 on the reference channel.
MultichannelRecording render_source(const SceneSpec& spec);

struct EgoNoiseConfig {
  std::array<double, 4> rpm{5500.0, 5700.0, 5300.0, 5900.0};
  std::array<bool, 4> active{true, true, true, true};
  int harmonics = 20;
  double broadband_floor_db = -20.0;  // white floor relative to the comb
  double rpm_jitter = 0.05;           // random-walk bound, fraction of rpm
  // Rotor centers in the array frame, meters.
  std::array<Eigen::Vector3d, 4> rotor_positions{
      Eigen::Vector3d(0.15, 0.15, 0.05), Eigen::Vector3d(-0.15, 0.15, 0.05),
      Eigen::Vector3d(-0.15, -0.15, 0.05), Eigen::Vector3d(0.15, -0.15, 0.05)};
};

struct NoiseSource {
  enum class Kind { Synthetic, Recorded };
  Kind kind = Kind::Synthetic;
  EgoNoiseConfig synthetic;
  std::string recorded_path;  // tiled or truncated to the requested duration
};

struct EgoNoise {
  MultichannelRecording recording;
  MotorProfile profile;  // mean rpm over the rendered span; bank left empty
};

// Harmonic comb per motor at rpm/60 with 1/h amplitude decay, white floor,
// slow rpm random walk, near-field gains and delays from the rotor
// positions. Deterministic for a fixed seed.
EgoNoise synth_ego_noise(const NoiseSource& noise, double duration_s,
                         const ArrayGeometry& geometry, std::uint64_t seed,
                         double sample_rate = 44100.0);

// Per-motor spectra measured from single-rotor renders at each reference
// speed (jitter disabled); power is the per-bin squared magnitude averaged
// over frames and channels, matching what estimate_noise_motor expects.
TemplateBank measure_motor_templates(const EgoNoiseConfig& base,
                                     std::span<const double> rpm_keys,
                                     const ArrayGeometry& geometry,
                                     const StftConfig& stft_cfg,
                                     std::uint64_t seed,
                                     double sample_rate = 44100.0);

struct MixResult {
  MultichannelRecording mixed;
  MultichannelRecording scaled_noise;  // mixed - clean, exactly
  double noise_scale = 0.0;
};

// Scales the noise so the broadband power ratio equals snr_db, with power
// averaged over all channels and samples, then adds it to the clean signal.
MixResult mix_at_snr(const MultichannelRecording& clean,
                     const MultichannelRecording& noise, double snr_db);

struct GenerateOptions {
  SourceKind source = SourceKind::SpeechLike;
  double sinusoid_hz = 1000.0;
  EgoNoiseConfig ego;
  double max_angular_rate_deg_s = 30.0;  // flight path speed cap
  bool write_sidecars = true;            // clean/ and noise/ subdirectories
  bool write_templates = true;           // motor_templates.csv
  ArrayGeometry geometry = ArrayGeometry::cube();
};

// Writes a full synthetic dataset: <id>.wav recordings, ground_truth.csv,
// motor_speeds.csv, geometry.txt, and optional clean/noise sidecar WAVs.
// Static recordings last 2 s with one uniform random direction; flight
// recordings last 4 s with a piecewise-linear path and 15 ground-truth
// timestamps. SNR is drawn uniformly from [snr_lo_db, snr_hi_db].
GroundTruth generate_task(TaskKind kind, int count, double snr_lo_db,
                          double snr_hi_db, std::uint64_t seed,
                          const std::string& out_dir,
                          const GenerateOptions& opts = {});

// The 15 regularly spaced ground-truth timestamps for a flight recording.
std::vector<double> flight_timestamps(double duration_s);

// Azimuth uniform, elevation area-weighted.
Direction random_direction(Rng& rng);

}  // namespace uavloc
