#include "uavloc/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "uavloc/errors.hpp"
#include "uavloc/text.hpp"

namespace uavloc {

namespace {

std::string_view strip_comment(std::string_view line) {
  const auto hash = line.find_first_of("#;");
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

struct Setter {
  std::function<bool(PipelineConfig&, std::string_view)> apply;  // false: bad value
};

bool set_double(double& slot, std::string_view value) {
  const auto v = parse_double(value);
  if (!v) return false;
  slot = *v;
  return true;
}

bool set_int(int& slot, std::string_view value) {
  const auto v = parse_long(value);
  if (!v) return false;
  slot = static_cast<int>(*v);
  return true;
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"grid.az_step_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.az_step_deg, v); }}},
      {"grid.el_step_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.el_step_deg, v); }}},
      {"stft.fft_size",
       {[](PipelineConfig& c, std::string_view v) { return set_int(c.fft_size, v); }}},
      {"stft.hop",
       {[](PipelineConfig& c, std::string_view v) { return set_int(c.hop, v); }}},
      {"enhance.chain",
       {[](PipelineConfig& c, std::string_view v) {
         c.chain.clear();
         for (const auto& step : split(v, ',')) {
           const auto name = trim(step);
           if (!name.empty()) c.chain.emplace_back(name);
         }
         return true;
       }}},
      {"enhance.highpass_cutoff_hz",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.highpass_cutoff_hz, v); }}},
      {"enhance.noise_estimator",
       {[](PipelineConfig& c, std::string_view v) {
         if (v == "vad") c.noise_estimator = NoiseEstimator::Vad;
         else if (v == "motor") c.noise_estimator = NoiseEstimator::MotorTemplate;
         else if (v == "recursive") c.noise_estimator = NoiseEstimator::Recursive;
         else if (v == "oracle") c.noise_estimator = NoiseEstimator::Oracle;
         else return false;
         return true;
       }}},
      {"enhance.vad_percentile",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.vad_percentile, v); }}},
      {"enhance.recursive_alpha",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.recursive_alpha, v); }}},
      {"enhance.mwf_mu",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.mwf_mu, v); }}},
      {"enhance.pair_snr_floor_db",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.pair_snr_floor_db, v); }}},
      {"localize.method",
       {[](PipelineConfig& c, std::string_view v) {
         if (v == "srp_phat") c.method = LocalizationMethod::SrpPhat;
         else if (v == "srp_nonlin") c.method = LocalizationMethod::SrpNonlin;
         else if (v == "gevd_music") c.method = LocalizationMethod::GevdMusic;
         else return false;
         return true;
       }}},
      {"localize.gamma",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.gamma, v); }}},
      {"localize.band_lo_hz",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.band_lo_hz, v); }}},
      {"localize.band_hi_hz",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.band_hi_hz, v); }}},
      {"localize.music_sources",
       {[](PipelineConfig& c, std::string_view v) { return set_int(c.music_sources, v); }}},
      {"localize.max_filter_radius_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.max_filter_radius_deg, v); }}},
      {"track.method",
       {[](PipelineConfig& c, std::string_view v) {
         if (v == "none") c.tracking = TrackingMethod::None;
         else if (v == "kalman") c.tracking = TrackingMethod::Kalman;
         else if (v == "viterbi") c.tracking = TrackingMethod::Viterbi;
         else if (v == "coarse_to_fine") c.tracking = TrackingMethod::CoarseToFine;
         else return false;
         return true;
       }}},
      {"track.process_noise_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.kalman.process_noise_deg, v); }}},
      {"track.measurement_noise_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.kalman.measurement_noise_deg, v); }}},
      {"track.initial_std_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.kalman.initial_std_deg, v); }}},
      {"track.viterbi_penalty_per_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.viterbi_penalty_per_deg, v); }}},
      {"track.viterbi_prune_k",
       {[](PipelineConfig& c, std::string_view v) { return set_int(c.viterbi_prune_k, v); }}},
      {"track.window_s",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.window_s, v); }}},
      {"track.stride_s",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.stride_s, v); }}},
      {"track.search_radius_deg",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.search_radius_deg, v); }}},
      {"track.sample_window_s",
       {[](PipelineConfig& c, std::string_view v) { return set_double(c.sample_window_s, v); }}},
  };
  return table;
}

bool is_pow2(int v) { return v >= 2 && (v & (v - 1)) == 0; }

}  // namespace

void PipelineConfig::validate() const {
  std::vector<std::string> problems;
  const auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };

  check(az_step_deg > 0.0 && az_step_deg <= 90.0,
        "grid.az_step_deg must be in (0, 90]");
  check(el_step_deg > 0.0 && el_step_deg <= 90.0,
        "grid.el_step_deg must be in (0, 90]");
  check(is_pow2(fft_size) && fft_size >= 16,
        "stft.fft_size must be a power of two >= 16");
  check(hop > 0 && hop <= fft_size, "stft.hop must be in [1, fft_size]");
  for (const auto& step : chain)
    check(step == "highpass" || step == "select_pairs" || step == "mwf",
          "enhance.chain: unknown step '" + step + "'");
  check(highpass_cutoff_hz > 0.0, "enhance.highpass_cutoff_hz must be > 0");
  check(vad_percentile > 0.0 && vad_percentile <= 1.0,
        "enhance.vad_percentile must be in (0, 1]");
  check(recursive_alpha >= 0.0 && recursive_alpha < 1.0,
        "enhance.recursive_alpha must be in [0, 1)");
  check(mwf_mu > 0.0, "enhance.mwf_mu must be > 0");
  check(gamma > 0.0 && gamma <= 1.0, "localize.gamma must be in (0, 1]");
  check(band_lo_hz >= 0.0 && band_hi_hz > band_lo_hz,
        "localize band must satisfy 0 <= lo < hi");
  check(music_sources >= 1, "localize.music_sources must be >= 1");
  check(max_filter_radius_deg >= 0.0,
        "localize.max_filter_radius_deg must be >= 0");
  check(kalman.process_noise_deg > 0.0 && kalman.measurement_noise_deg > 0.0 &&
            kalman.initial_std_deg > 0.0,
        "track noise parameters must be > 0");
  check(viterbi_penalty_per_deg >= 0.0,
        "track.viterbi_penalty_per_deg must be >= 0");
  check(window_s > 0.0, "track.window_s must be > 0");
  check(stride_s > 0.0, "track.stride_s must be > 0");
  check(search_radius_deg > 0.0, "track.search_radius_deg must be > 0");
  check(sample_window_s >= 0.0, "track.sample_window_s must be >= 0");

  if (!problems.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    throw ValidationError(joined);
  }
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig config;
  std::vector<std::string> problems;
  std::string section;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(strip_comment(line));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']' || text.size() < 3)
        throw ParseError("line " + std::to_string(number) +
                         ": malformed section header");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("line " + std::to_string(number) + ": expected key = value");
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ParseError("line " + std::to_string(number) + ": empty key");

    const std::string full = section + "." + std::string(key);
    const auto it = setters().find(full);
    if (it == setters().end()) {
      problems.push_back("unknown option '" + full + "'");
      continue;
    }
    if (!it->second.apply(config, value))
      problems.push_back("bad value '" + std::string(value) + "' for '" +
                         full + "'");
  }

  if (!problems.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) joined += "; ";
      joined += problems[i];
    }
    throw ValidationError(joined);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  return parse_config(in);
}

}  // namespace uavloc
