#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uavloc/config.hpp"
#include "uavloc/csv_io.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/log.hpp"
#include "uavloc/pipeline.hpp"
#include "uavloc/scene_sim.hpp"
#include "uavloc/scoring.hpp"
#include "uavloc/stft.hpp"
#include "uavloc/text.hpp"
#include "uavloc/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace uavloc;

namespace {

// Collects the human-readable summary and its JSON mirror. In --json mode the
// JSON object owns stdout and the human lines move to stderr.
struct Output {
  bool as_json = false;
  json blob = json::object();
  std::vector<std::string> lines;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;

  void line(const std::string& s) { lines.push_back(s); }
  void warn(const std::string& s) { warnings.push_back(s); }

  int finish(const std::string& command, int code) {
    blob["command"] = command;
    blob["exit_code"] = code;
    blob["artifacts_written"] = artifacts;
    blob["warnings"] = warnings;
    std::ostream& human = as_json ? std::cerr : std::cout;
    for (const auto& s : lines) human << s << "\n";
    for (const auto& s : warnings) human << "warning: " << s << "\n";
    if (as_json) std::cout << blob.dump(2) << "\n";
    return code;
  }
};

std::string kind_name(TaskKind kind) {
  return kind == TaskKind::Static ? "static" : "flight";
}

std::string method_name(LocalizationMethod m) {
  switch (m) {
    case LocalizationMethod::SrpPhat: return "srp_phat";
    case LocalizationMethod::SrpNonlin: return "srp_nonlin";
    case LocalizationMethod::GevdMusic: return "gevd_music";
  }
  return "?";
}

std::pair<double, double> parse_snr_range(const std::string& text) {
  const auto sep = text.find("..");
  const auto lo = parse_double(trim(text.substr(0, sep)));
  const auto hi = sep == std::string::npos
                      ? lo
                      : parse_double(trim(text.substr(sep + 2)));
  if (!lo || !hi) throw ParseError("not a number or lo..hi range: " + text);
  return {*lo, *hi};
}

PipelineConfig load_pipeline_config(const std::string& path) {
  if (path.empty()) {
    PipelineConfig cfg;
    cfg.validate();
    return cfg;
  }
  PipelineConfig cfg = load_config(path);
  cfg.validate();
  return cfg;
}

std::vector<std::string> wav_stems(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string task = "static";
  int count = 0;
  std::string snr = "0";
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_simulate(const SimulateArgs& a, Output& out) {
  double snr_lo = 0.0, snr_hi = 0.0;
  try {
    std::tie(snr_lo, snr_hi) = parse_snr_range(a.snr);
  } catch (const Error& e) {
    out.line(std::string("bad --snr value: ") + e.what());
    return out.finish("simulate", 2);
  }
  if (snr_lo > snr_hi) {
    out.line("bad --snr range: low bound above high bound");
    return out.finish("simulate", 2);
  }
  const TaskKind kind =
      a.task == "static" ? TaskKind::Static : TaskKind::Flight;

  try {
    generate_task(kind, a.count, snr_lo, snr_hi, a.seed, a.out_dir);
  } catch (const Error& e) {
    out.line(std::string("simulation failed: ") + e.what());
    return out.finish("simulate", 3);
  }

  for (const auto& entry : fs::recursive_directory_iterator(a.out_dir))
    if (entry.is_regular_file()) out.artifacts.push_back(entry.path().string());
  std::sort(out.artifacts.begin(), out.artifacts.end());

  out.line("wrote " + std::to_string(a.count) + " " + a.task +
           " recording(s) to " + a.out_dir + " (seed " +
           std::to_string(a.seed) + ", snr " + format_fixed(snr_lo, 1) + ".." +
           format_fixed(snr_hi, 1) + " dB)");
  out.blob["simulate"] = {{"task", a.task},
                          {"count", a.count},
                          {"seed", a.seed},
                          {"snr_lo_db", snr_lo},
                          {"snr_hi_db", snr_hi},
                          {"output_dir", a.out_dir}};
  return out.finish("simulate", 0);
}

// ---------------------------------------------------------------- localize

struct LocalizeArgs {
  std::string input;
  std::string config;
  std::string out;
  std::string task = "static";
  bool task_given = false;
};

int run_localize(const LocalizeArgs& a, Output& out) {
  PipelineConfig cfg;
  try {
    cfg = load_pipeline_config(a.config);
  } catch (const Error& e) {
    out.line(std::string("config error: ") + e.what());
    return out.finish("localize", 4);
  }

  std::error_code ec;
  const bool is_dir = fs::is_directory(a.input, ec);
  if (!is_dir && !fs::is_regular_file(a.input, ec)) {
    out.line("input not found: " + a.input);
    return out.finish("localize", 3);
  }
  const fs::path dir = is_dir ? fs::path(a.input)
                              : fs::path(a.input).parent_path();

  TaskKind kind = a.task == "flight" ? TaskKind::Flight : TaskKind::Static;
  if (!a.task_given && fs::exists(dir / "ground_truth.csv")) {
    try {
      kind = read_ground_truth((dir / "ground_truth.csv").string()).kind;
    } catch (const Error& e) {
      out.warn(std::string("ground truth unreadable, assuming --task ") +
               a.task + ": " + e.what());
    }
  }

  PipelineContext ctx;
  MotorSpeedTable speeds;
  try {
    ArrayGeometry geom = ArrayGeometry::cube();
    if (fs::exists(dir / "geometry.txt"))
      geom = load_geometry((dir / "geometry.txt").string());
    ctx = make_context(cfg, geom);
    if (fs::exists(dir / "motor_templates.csv"))
      ctx.bank = read_template_bank((dir / "motor_templates.csv").string());
    if (fs::exists(dir / "motor_speeds.csv"))
      speeds = read_motor_speeds((dir / "motor_speeds.csv").string());
  } catch (const Error& e) {
    out.line(std::string("dataset side files unusable: ") + e.what());
    return out.finish("localize", 3);
  }

  std::vector<std::string> ids;
  if (is_dir)
    ids = wav_stems(dir);
  else
    ids.push_back(fs::path(a.input).stem().string());
  if (ids.empty()) {
    out.line("no wav files in " + a.input);
    return out.finish("localize", 3);
  }

  struct PerFile {
    bool ok = false;
    std::string error;
    double seconds = 0.0;
    Direction static_est;
    std::map<int, Direction> flight_est;
  };
  std::vector<PerFile> results(ids.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ids.size());
       ++i) {
    PerFile& r = results[static_cast<std::size_t>(i)];
    const std::string& id = ids[static_cast<std::size_t>(i)];
    const auto started = std::chrono::steady_clock::now();
    try {
      const MultichannelRecording rec =
          read_wav((dir / (id + ".wav")).string());
      RecordingAux aux;
      if (auto it = speeds.find(id); it != speeds.end()) aux.rpms = it->second;
      if (cfg.noise_estimator == NoiseEstimator::Oracle &&
          fs::exists(dir / "noise" / (id + ".wav")))
        aux.noise_ref = read_wav((dir / "noise" / (id + ".wav")).string());
      if (kind == TaskKind::Static)
        r.static_est = localize_static(rec, ctx, aux).direction;
      else
        r.flight_est = localize_flight(rec, ctx, aux);
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              started)
                    .count();
  }

  Submission sub;
  sub.kind = kind;
  json files = json::object();
  int failed = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const PerFile& r = results[i];
    json f = {{"ok", r.ok}, {"seconds", r.seconds}};
    if (r.ok) {
      if (kind == TaskKind::Static) {
        sub.static_estimates[ids[i]] = r.static_est;
        f["azimuth_deg"] = r.static_est.azimuth_deg;
        f["elevation_deg"] = r.static_est.elevation_deg;
        out.line(ids[i] + ": az " + format_fixed(r.static_est.azimuth_deg, 1) +
                 " el " + format_fixed(r.static_est.elevation_deg, 1) + " (" +
                 format_fixed(r.seconds, 2) + " s)");
      } else {
        sub.flight_estimates[ids[i]] = r.flight_est;
        out.line(ids[i] + ": " + std::to_string(r.flight_est.size()) +
                 " timestamps (" + format_fixed(r.seconds, 2) + " s)");
      }
    } else {
      ++failed;
      f["error"] = r.error;
      out.warn(ids[i] + " failed: " + r.error);
    }
    files[ids[i]] = f;
  }

  const std::string out_path =
      a.out.empty() ? (dir / "submission.csv").string() : a.out;
  try {
    write_submission(sub, out_path);
  } catch (const Error& e) {
    out.line(std::string("cannot write submission: ") + e.what());
    return out.finish("localize", 3);
  }
  out.artifacts.push_back(out_path);

  out.line(std::to_string(ids.size() - static_cast<std::size_t>(failed)) +
           " of " + std::to_string(ids.size()) + " recording(s) localized (" +
           method_name(cfg.method) + "), submission: " + out_path);
  out.blob["localize"] = {{"files", files},
                          {"submission", out_path},
                          {"method", method_name(cfg.method)}};
  if (!is_dir && failed > 0) return out.finish("localize", 3);
  return out.finish("localize", 0);
}

// ------------------------------------------------------------------- score

struct ScoreArgs {
  std::string submission;
  std::string truth;
  std::string task;
};

json score_to_json(const ScoreReport& rep) {
  json points = json::object(), errors = json::object();
  for (const auto& [id, p] : rep.per_recording_points) points[id] = p;
  for (const auto& [id, e] : rep.per_recording_errors_deg) errors[id] = e;
  return {{"total", rep.total},
          {"max", rep.max},
          {"per_recording_points", points},
          {"per_recording_errors_deg", errors}};
}

int run_score(const ScoreArgs& a, Output& out) {
  Submission sub;
  GroundTruth gt;
  try {
    sub = read_submission(a.submission);
  } catch (const FileNotFound& e) {
    out.line(std::string("cannot read submission: ") + e.what());
    return out.finish("score", 3);
  } catch (const IoFailure& e) {
    out.line(std::string("cannot read submission: ") + e.what());
    return out.finish("score", 3);
  } catch (const Error& e) {
    out.line(std::string("submission does not match the schema: ") + e.what());
    return out.finish("score", 5);
  }
  try {
    gt = read_ground_truth(a.truth);
    gt.validate();
  } catch (const FileNotFound& e) {
    out.line(std::string("cannot read ground truth: ") + e.what());
    return out.finish("score", 3);
  } catch (const IoFailure& e) {
    out.line(std::string("cannot read ground truth: ") + e.what());
    return out.finish("score", 3);
  } catch (const Error& e) {
    out.line(std::string("ground truth does not match the schema: ") +
             e.what());
    return out.finish("score", 5);
  }

  if (!a.task.empty()) {
    const TaskKind expected =
        a.task == "static" ? TaskKind::Static : TaskKind::Flight;
    if (gt.kind != expected) {
      out.line("ground truth is a " + kind_name(gt.kind) +
               " task, --task says " + a.task);
      return out.finish("score", 5);
    }
  }

  ScoreReport rep;
  try {
    rep = score(sub, gt);
  } catch (const TaskKindMismatch& e) {
    out.line(std::string("task kinds do not match: ") + e.what());
    return out.finish("score", 5);
  }

  out.line("score " + std::to_string(rep.total) + " / " +
           std::to_string(rep.max) + " (" + kind_name(gt.kind) + " task)");
  for (const auto& [id, p] : rep.per_recording_points) {
    std::string line = id + ": " + std::to_string(p) + " point(s)";
    const auto& errs = rep.per_recording_errors_deg.at(id);
    if (errs.size() == 1)
      line += std::isfinite(errs[0])
                  ? ", error " + format_fixed(errs[0], 2) + " deg"
                  : ", no estimate";
    out.line(line);
  }
  out.blob["score"] = score_to_json(rep);
  return out.finish("score", 0);
}

// ----------------------------------------------------------------- enhance

struct EnhanceArgs {
  std::string input;
  std::string config;
  std::string out;
  std::string noise;
  std::string clean;
};

double ratio_db(double sig, double noi) {
  if (noi <= 0.0) return std::numeric_limits<double>::infinity();
  if (sig <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / noi);
}

double energy(const MultichannelRecording& x) {
  double e = 0.0;
  for (const auto& ch : x.samples)
    for (double v : ch) e += v * v;
  return e;
}

double snr_db(const MultichannelRecording& x,
              const MultichannelRecording& clean) {
  if (x.channel_count() != clean.channel_count() || x.length() != clean.length())
    throw ShapeMismatch("clean reference shape does not match the signal");
  double sig = 0.0, noi = 0.0;
  for (int c = 0; c < x.channel_count(); ++c)
    for (std::size_t t = 0; t < x.length(); ++t) {
      const double s = clean.samples[c][t];
      const double d = x.samples[c][t] - s;
      sig += s * s;
      noi += d * d;
    }
  return ratio_db(sig, noi);
}

int run_enhance(const EnhanceArgs& a, Output& out) {
  PipelineConfig cfg;
  try {
    cfg = load_pipeline_config(a.config);
  } catch (const Error& e) {
    out.line(std::string("config error: ") + e.what());
    return out.finish("enhance", 4);
  }

  MultichannelRecording original;
  std::optional<MultichannelRecording> noise_ref, clean_ref;
  try {
    original = read_wav(a.input);
    if (!a.noise.empty()) noise_ref = read_wav(a.noise);
    if (!a.clean.empty()) clean_ref = read_wav(a.clean);
  } catch (const Error& e) {
    out.line(std::string("cannot read input: ") + e.what());
    return out.finish("enhance", 3);
  }

  MultichannelRecording rec = original;
  // With both references present the clean and noise components ride through
  // the same chain, so the reported SNR reflects what each stage does to
  // signal and noise separately rather than treating any change to the
  // waveform as error.
  std::optional<MultichannelRecording> clean_st = clean_ref;
  std::optional<MultichannelRecording> noise_st = noise_ref;
  const StftConfig scfg{cfg.fft_size, cfg.hop, WindowKind::Hann};
  try {
    for (const auto& stage : cfg.chain) {
      if (stage == "highpass") {
        rec = highpass(rec, cfg.highpass_cutoff_hz);
        if (noise_st) *noise_st = highpass(*noise_st, cfg.highpass_cutoff_hz);
        if (clean_st) *clean_st = highpass(*clean_st, cfg.highpass_cutoff_hz);
      } else if (stage == "select_pairs") {
        out.warn("select_pairs does not change waveforms; stage skipped");
      } else if (stage == "mwf") {
        std::vector<SpectralBlock> blocks = stft(rec, scfg);
        NoiseModel noise;
        switch (cfg.noise_estimator) {
          case NoiseEstimator::Vad:
            noise = estimate_noise_vad(blocks, cfg.vad_percentile);
            break;
          case NoiseEstimator::Recursive:
            noise = estimate_noise_recursive(blocks, cfg.recursive_alpha);
            break;
          case NoiseEstimator::Oracle: {
            if (!noise_st) {
              out.line("the oracle noise estimator needs --noise");
              return out.finish("enhance", 4);
            }
            noise = oracle_noise(stft(*noise_st, scfg));
            break;
          }
          case NoiseEstimator::MotorTemplate: {
            const fs::path dir = fs::path(a.input).parent_path();
            const std::string id = fs::path(a.input).stem().string();
            if (!fs::exists(dir / "motor_templates.csv") ||
                !fs::exists(dir / "motor_speeds.csv")) {
              out.line(
                  "the motor noise estimator needs motor_templates.csv and "
                  "motor_speeds.csv next to the input");
              return out.finish("enhance", 4);
            }
            MotorProfile profile;
            profile.bank =
                read_template_bank((dir / "motor_templates.csv").string());
            const auto speeds =
                read_motor_speeds((dir / "motor_speeds.csv").string());
            const auto it = speeds.find(id);
            if (it == speeds.end()) {
              out.line("motor_speeds.csv has no row for " + id);
              return out.finish("enhance", 4);
            }
            profile.rpm = it->second;
            noise = estimate_noise_motor(
                profile, cfg.fft_size,
                static_cast<int>(rec.channel_count()));
            break;
          }
        }
        const MwfFilters filters = mwf_design(blocks, noise, cfg.mwf_mu);
        const auto filter_stream = [&](MultichannelRecording& r,
                                       std::vector<SpectralBlock> b) {
          MultichannelRecording f = istft(mwf_apply(b, filters), scfg);
          f.channel_map = r.channel_map;
          for (auto& ch : f.samples) ch.resize(r.length(), 0.0);
          r = std::move(f);
        };
        filter_stream(rec, std::move(blocks));
        if (clean_st) filter_stream(*clean_st, stft(*clean_st, scfg));
        if (noise_st) filter_stream(*noise_st, stft(*noise_st, scfg));
      } else {
        out.line("unknown chain stage: " + stage);
        return out.finish("enhance", 4);
      }
    }
  } catch (const Error& e) {
    out.line(std::string("enhancement failed: ") + e.what());
    return out.finish("enhance", 3);
  }

  try {
    write_wav(rec, a.out, WavFormat::Float32);
  } catch (const Error& e) {
    out.line(std::string("cannot write output: ") + e.what());
    return out.finish("enhance", 3);
  }
  out.artifacts.push_back(a.out);

  json block = {{"chain", cfg.chain}, {"input", a.input}, {"output", a.out}};
  out.line("wrote " + a.out + " (" + std::to_string(rec.channel_count()) +
           " channel(s), " + std::to_string(rec.length()) + " samples)");
  if (clean_ref && noise_ref) {
    const double in_db = ratio_db(energy(*clean_ref), energy(*noise_ref));
    const double out_db = ratio_db(energy(*clean_st), energy(*noise_st));
    out.line("snr " + format_fixed(in_db, 2) + " dB -> " +
             format_fixed(out_db, 2) + " dB (gain " +
             format_fixed(out_db - in_db, 2) + " dB)");
    block["snr_in_db"] = in_db;
    block["snr_out_db"] = out_db;
    block["snr_gain_db"] = out_db - in_db;
  } else if (clean_ref) {
    try {
      const double in_db = snr_db(original, *clean_ref);
      const double out_db = snr_db(rec, *clean_ref);
      out.line("snr " + format_fixed(in_db, 2) + " dB -> " +
               format_fixed(out_db, 2) + " dB (gain " +
               format_fixed(out_db - in_db, 2) + " dB)");
      block["snr_in_db"] = in_db;
      block["snr_out_db"] = out_db;
      block["snr_gain_db"] = out_db - in_db;
    } catch (const Error& e) {
      out.line(std::string("cannot compare against the clean reference: ") +
               e.what());
      return out.finish("enhance", 3);
    }
  }
  out.blob["enhance"] = block;
  return out.finish("enhance", 0);
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string dataset;
  std::string config;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a, Output& out) {
  PipelineConfig cfg;
  try {
    cfg = load_pipeline_config(a.config);
  } catch (const Error& e) {
    out.line(std::string("config error: ") + e.what());
    return out.finish("evaluate", 4);
  }

  EvaluationReport report;
  try {
    report = evaluate_pipeline(a.dataset, cfg, a.out);
  } catch (const Error& e) {
    out.line(std::string("evaluation failed: ") + e.what());
    return out.finish("evaluate", 3);
  }

  const std::string sub_path =
      a.out.empty() ? (fs::path(a.dataset) / "submission.csv").string() : a.out;
  out.artifacts.push_back(sub_path);

  json files = json::object();
  for (const auto& [id, diag] : report.files) {
    json f = {{"ok", diag.ok},
              {"seconds", diag.seconds},
              {"points", diag.points},
              {"error_deg", diag.error_deg}};
    if (diag.ok) {
      out.line(id + ": " + std::to_string(diag.points) + " point(s), error " +
               (std::isfinite(diag.error_deg)
                    ? format_fixed(diag.error_deg, 2) + " deg"
                    : "inf") +
               " (" + format_fixed(diag.seconds, 2) + " s)");
    } else {
      f["error"] = diag.error;
      out.warn(id + " failed: " + diag.error);
    }
    files[id] = f;
  }
  out.line("score " + std::to_string(report.score.total) + " / " +
           std::to_string(report.score.max) + " (" + kind_name(report.kind) +
           " task), submission: " + sub_path);
  out.blob["score"] = score_to_json(report.score);
  out.blob["evaluate"] = {{"files", files}, {"submission", sub_path}};
  return out.finish("evaluate", 0);
}

}  // namespace

int main(int argc, char** argv) {
  init_log_from_env();

  CLI::App app{"UAV-borne sound source localization toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "uavloc 0.1.0");

  bool as_json = false;
  int threads = 0;
  app.add_flag("--json", as_json,
               "print the summary as JSON on stdout (human lines move to "
               "stderr); schema: docs/summary.schema.json");
  app.add_option("--threads", threads,
                 "cap worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "synthesize a labeled dataset");
  c_sim->fallthrough();
  c_sim->add_option("--task", sim.task, "static or flight")
      ->check(CLI::IsMember({"static", "flight"}));
  c_sim->add_option("--count", sim.count, "number of recordings")
      ->required()
      ->check(CLI::Range(1, 1000000));
  c_sim->add_option("--snr", sim.snr, "SNR in dB, a value or a lo..hi range");
  c_sim->add_option("--seed", sim.seed, "master random seed")->required();
  c_sim->add_option("--out", sim.out_dir, "output dataset directory")
      ->required();

  LocalizeArgs loc;
  auto* c_loc = app.add_subcommand(
      "localize", "estimate source directions and write a submission");
  c_loc->fallthrough();
  c_loc->add_option("--input", loc.input, "dataset directory or one wav file")
      ->required();
  c_loc->add_option("--config", loc.config, "pipeline config file");
  c_loc->add_option("--out", loc.out,
                    "submission path (default: <dir>/submission.csv)");
  auto* task_opt =
      c_loc->add_option("--task", loc.task,
                        "task kind when no ground truth is present")
          ->check(CLI::IsMember({"static", "flight"}));

  ScoreArgs sc;
  auto* c_score =
      app.add_subcommand("score", "score a submission against ground truth");
  c_score->fallthrough();
  c_score->add_option("--submission", sc.submission, "submission csv")
      ->required();
  c_score->add_option("--truth", sc.truth, "ground truth csv")->required();
  c_score->add_option("--task", sc.task, "require this task kind")
      ->check(CLI::IsMember({"static", "flight"}));

  EnhanceArgs enh;
  auto* c_enh = app.add_subcommand(
      "enhance", "run the enhancement chain over one recording");
  c_enh->fallthrough();
  c_enh->add_option("--input", enh.input, "input wav")->required();
  c_enh->add_option("--config", enh.config, "pipeline config file");
  c_enh->add_option("--out", enh.out, "output wav (32-bit float)")->required();
  c_enh->add_option("--noise", enh.noise,
                    "noise-only wav for the oracle estimator");
  c_enh->add_option("--clean", enh.clean,
                    "clean reference wav; reports the SNR gain");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand(
      "evaluate", "localize a labeled dataset and score the result");
  c_ev->fallthrough();
  c_ev->add_option("--dataset", ev.dataset, "dataset directory")->required();
  c_ev->add_option("--config", ev.config, "pipeline config file");
  c_ev->add_option("--out", ev.out,
                   "submission path (default: <dataset>/submission.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (threads > 0) omp_set_num_threads(threads);
  loc.task_given = task_opt->count() > 0;

  Output out;
  out.as_json = as_json;
  if (app.got_subcommand(c_sim)) return run_simulate(sim, out);
  if (app.got_subcommand(c_loc)) return run_localize(loc, out);
  if (app.got_subcommand(c_score)) return run_score(sc, out);
  if (app.got_subcommand(c_enh)) return run_enhance(enh, out);
  return run_evaluate(ev, out);
}
