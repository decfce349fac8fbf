#include "uavloc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/covariance.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/log.hpp"
#include "uavloc/scene_sim.hpp"
#include "uavloc/stft.hpp"
#include "uavloc/wav.hpp"

namespace uavloc {
namespace {

bool chain_has(const PipelineConfig& cfg, const char* stage) {
  return std::find(cfg.chain.begin(), cfg.chain.end(), stage) !=
         cfg.chain.end();
}

bool needs_noise_model(const PipelineConfig& cfg) {
  return chain_has(cfg, "select_pairs") || chain_has(cfg, "mwf") ||
         cfg.method == LocalizationMethod::GevdMusic;
}

StftConfig stft_config(const PipelineConfig& cfg) {
  StftConfig out;
  out.fft_size = cfg.fft_size;
  out.hop = cfg.hop;
  return out;
}

NoiseModel make_noise_model(const std::vector<SpectralBlock>& blocks,
                            const PipelineContext& ctx,
                            const RecordingAux& aux, int channels) {
  const PipelineConfig& cfg = ctx.config;
  switch (cfg.noise_estimator) {
    case NoiseEstimator::Vad:
      return estimate_noise_vad(blocks, cfg.vad_percentile);
    case NoiseEstimator::Recursive:
      return estimate_noise_recursive(blocks, cfg.recursive_alpha);
    case NoiseEstimator::MotorTemplate: {
      if (!aux.rpms)
        throw InvalidConfig(
            "motor noise estimator needs per-recording rotor speeds");
      if (ctx.bank.empty())
        throw InvalidConfig("motor noise estimator needs a template bank");
      MotorProfile profile;
      profile.rpm = *aux.rpms;
      profile.bank = ctx.bank;
      return estimate_noise_motor(profile, cfg.fft_size, channels);
    }
    case NoiseEstimator::Oracle: {
      if (!aux.noise_ref)
        throw InvalidConfig(
            "oracle noise estimator needs a noise-only reference");
      const bool hp = chain_has(cfg, "highpass");
      MultichannelRecording filtered;
      if (hp) filtered = highpass(*aux.noise_ref, cfg.highpass_cutoff_hz);
      const MultichannelRecording& ref = hp ? filtered : *aux.noise_ref;
      return oracle_noise(stft(ref, stft_config(cfg)));
    }
  }
  throw InvalidConfig("unknown noise estimator");
}

MultichannelRecording slice(const MultichannelRecording& rec,
                            std::size_t begin, std::size_t len) {
  MultichannelRecording out;
  out.sample_rate = rec.sample_rate;
  out.channel_map = rec.channel_map;
  out.samples.reserve(rec.channel_count());
  for (const auto& ch : rec.samples)
    out.samples.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(begin),
                             ch.begin() +
                                 static_cast<std::ptrdiff_t>(begin + len));
  return out;
}

}  // namespace

PipelineContext make_context(const PipelineConfig& config,
                             const ArrayGeometry& geometry) {
  config.validate();
  geometry.validate();
  PipelineContext ctx;
  ctx.config = config;
  ctx.geometry = geometry;
  ctx.grid = build_grid(config.az_step_deg, config.el_step_deg);
  return ctx;
}

AngularSpectrum localize_spectrum(const MultichannelRecording& recording,
                                  const PipelineContext& ctx,
                                  const RecordingAux& aux) {
  const PipelineConfig& cfg = ctx.config;
  if (!ctx.grid) throw InvalidConfig("pipeline context has no direction grid");
  recording.validate();

  const bool hp = chain_has(cfg, "highpass");
  MultichannelRecording filtered;
  if (hp) filtered = highpass(recording, cfg.highpass_cutoff_hz);
  const MultichannelRecording& input = hp ? filtered : recording;

  std::vector<SpectralBlock> blocks = stft(input, stft_config(cfg));
  if (blocks.empty())
    throw RecordingTooShort("recording shorter than one analysis frame");
  const int channels = static_cast<int>(input.channel_count());

  NoiseModel noise;
  if (needs_noise_model(cfg)) noise = make_noise_model(blocks, ctx, aux, channels);

  PairMask mask(channels);
  if (chain_has(cfg, "select_pairs"))
    mask = select_pairs(blocks, noise, cfg.pair_snr_floor_db);
  if (chain_has(cfg, "mwf")) blocks = mwf(blocks, noise, cfg.mwf_mu);

  AngularSpectrum spectrum;
  if (cfg.method == LocalizationMethod::GevdMusic) {
    const SpectralBlock& head = blocks.front();
    const BinRange band =
        bins_for_band(cfg.band_lo_hz, cfg.band_hi_hz, head.bin_hz,
                      static_cast<int>(head.bin_count()));
    const SpatialCovariance observed = accumulate_covariance(blocks, band);
    MusicOptions mopts;
    mopts.band_lo_hz = cfg.band_lo_hz;
    mopts.band_hi_hz = cfg.band_hi_hz;
    spectrum = gevd_music(observed, noise, ctx.grid, ctx.geometry,
                          cfg.music_sources, mopts);
  } else {
    SrpOptions sopts;
    sopts.gcc.weighting = cfg.method == LocalizationMethod::SrpNonlin
                              ? GccWeighting::Nonlin
                              : GccWeighting::Phat;
    sopts.gcc.gamma = cfg.gamma;
    sopts.gcc.band_lo_hz = cfg.band_lo_hz;
    sopts.gcc.band_hi_hz = cfg.band_hi_hz;
    spectrum = srp(blocks, ctx.grid, ctx.geometry, mask, sopts);
  }

  if (cfg.max_filter_radius_deg > 0.0)
    spectrum = max_filter(spectrum, cfg.max_filter_radius_deg);
  return spectrum;
}

LocalizationEstimate localize_static(const MultichannelRecording& recording,
                                     const PipelineContext& ctx,
                                     const RecordingAux& aux) {
  return pick_peak(localize_spectrum(recording, ctx, aux), ctx.config.method);
}

Trajectory localize_trajectory(const MultichannelRecording& recording,
                               const PipelineContext& ctx,
                               const RecordingAux& aux) {
  const PipelineConfig& cfg = ctx.config;

  if (cfg.tracking == TrackingMethod::CoarseToFine) {
    CoarseToFineOptions opts;
    opts.window_s = cfg.window_s;
    opts.stride_s = cfg.stride_s;
    opts.search_radius_deg = cfg.search_radius_deg;
    return coarse_to_fine(
        recording,
        [&](const MultichannelRecording& segment) {
          return localize_spectrum(segment, ctx, aux);
        },
        opts);
  }

  recording.validate();
  if (cfg.window_s <= 0.0 || cfg.stride_s <= 0.0)
    throw InvalidConfig("tracking window and stride must be positive");
  const double fs = recording.sample_rate;
  const auto window_len =
      static_cast<std::size_t>(std::llround(cfg.window_s * fs));
  const auto stride_len =
      static_cast<std::size_t>(std::llround(cfg.stride_s * fs));
  if (window_len == 0 || stride_len == 0)
    throw InvalidConfig("tracking window and stride round to zero samples");
  if (recording.length() < window_len)
    throw RecordingTooShort("recording shorter than one tracking window");

  std::vector<std::size_t> begins;
  for (std::size_t b = 0; b + window_len <= recording.length(); b += stride_len)
    begins.push_back(b);

  std::vector<double> centers(begins.size());
  std::vector<AngularSpectrum> spectra(begins.size());
  for (std::size_t i = 0; i < begins.size(); ++i) {
    centers[i] = (static_cast<double>(begins[i]) + window_len / 2.0) / fs;
    spectra[i] = localize_spectrum(slice(recording, begins[i], window_len),
                                   ctx, aux);
  }

  if (cfg.tracking == TrackingMethod::Viterbi) {
    ViterbiOptions vopts;
    vopts.prune_k = cfg.viterbi_prune_k;
    vopts.timestamps = centers;
    return viterbi_smooth(spectra, cfg.viterbi_penalty_per_deg, vopts);
  }

  Trajectory raw;
  raw.timestamps = centers;
  raw.directions.reserve(spectra.size());
  raw.confidences.reserve(spectra.size());
  for (const auto& sp : spectra) {
    const LocalizationEstimate est = pick_peak(sp, cfg.method);
    raw.directions.push_back(est.direction);
    raw.confidences.push_back(est.confidence);
  }
  if (cfg.tracking == TrackingMethod::Kalman)
    return kalman_smooth(raw, cfg.kalman);
  return raw;
}

std::map<int, Direction> localize_flight(const MultichannelRecording& recording,
                                         const PipelineContext& ctx,
                                         const RecordingAux& aux) {
  const Trajectory traj = localize_trajectory(recording, ctx, aux);
  const std::vector<double> times = flight_timestamps(recording.duration_s());
  const std::vector<Direction> dirs =
      sample_at_timestamps(traj, times, ctx.config.sample_window_s);
  std::map<int, Direction> out;
  for (std::size_t k = 0; k < dirs.size(); ++k)
    out[static_cast<int>(k)] = dirs[k];
  return out;
}

EvaluationReport evaluate_pipeline(const std::string& dataset_dir,
                                   const PipelineConfig& config,
                                   const std::string& submission_path) {
  namespace fs = std::filesystem;
  const fs::path root(dataset_dir);

  GroundTruth gt = read_ground_truth((root / "ground_truth.csv").string());
  gt.validate();

  ArrayGeometry geometry = ArrayGeometry::cube();
  if (fs::exists(root / "geometry.txt"))
    geometry = load_geometry((root / "geometry.txt").string());

  PipelineContext ctx = make_context(config, geometry);
  if (config.noise_estimator == NoiseEstimator::MotorTemplate &&
      fs::exists(root / "motor_templates.csv"))
    ctx.bank = read_template_bank((root / "motor_templates.csv").string());

  MotorSpeedTable speeds;
  if (fs::exists(root / "motor_speeds.csv"))
    speeds = read_motor_speeds((root / "motor_speeds.csv").string());

  const bool is_static = gt.kind == TaskKind::Static;
  std::vector<std::string> ids;
  if (is_static)
    for (const auto& [id, dir] : gt.static_truth) ids.push_back(id);
  else
    for (const auto& [id, truth] : gt.flight_truth) ids.push_back(id);

  struct PerFile {
    bool ok = false;
    std::string error;
    double seconds = 0.0;
    Direction static_est;
    std::map<int, Direction> flight_est;
  };
  std::vector<PerFile> results(ids.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t idx = 0;
       idx < static_cast<std::ptrdiff_t>(ids.size()); ++idx) {
    PerFile& r = results[static_cast<std::size_t>(idx)];
    const std::string& id = ids[static_cast<std::size_t>(idx)];
    const auto started = std::chrono::steady_clock::now();
    try {
      const MultichannelRecording rec =
          read_wav((root / (id + ".wav")).string());
      RecordingAux aux;
      if (auto it = speeds.find(id); it != speeds.end()) aux.rpms = it->second;
      if (config.noise_estimator == NoiseEstimator::Oracle) {
        const fs::path noise_path = root / "noise" / (id + ".wav");
        if (fs::exists(noise_path)) aux.noise_ref = read_wav(noise_path.string());
      }
      if (is_static)
        r.static_est = localize_static(rec, ctx, aux).direction;
      else
        r.flight_est = localize_flight(rec, ctx, aux);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              started)
                    .count();
  }

  EvaluationReport report;
  report.kind = gt.kind;
  report.submission.kind = gt.kind;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!results[i].ok) {
      log_warn("skipping " + ids[i] + ": " + results[i].error);
      continue;
    }
    if (is_static)
      report.submission.static_estimates[ids[i]] = results[i].static_est;
    else
      report.submission.flight_estimates[ids[i]] = results[i].flight_est;
  }

  const std::string out_path = submission_path.empty()
                                   ? (root / "submission.csv").string()
                                   : submission_path;
  write_submission(report.submission, out_path);
  report.score = score(report.submission, gt);

  for (std::size_t i = 0; i < ids.size(); ++i) {
    FileDiagnostic diag;
    diag.ok = results[i].ok;
    diag.error = results[i].error;
    diag.seconds = results[i].seconds;
    if (auto it = report.score.per_recording_points.find(ids[i]);
        it != report.score.per_recording_points.end())
      diag.points = it->second;
    if (auto it = report.score.per_recording_errors_deg.find(ids[i]);
        it != report.score.per_recording_errors_deg.end() &&
        !it->second.empty()) {
      double sum = 0.0;
      for (double e : it->second) sum += e;
      diag.error_deg = sum / static_cast<double>(it->second.size());
    }
    report.files[ids[i]] = diag;
  }
  return report;
}

}  // namespace uavloc
