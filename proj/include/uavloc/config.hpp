#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/tracking.hpp"

namespace uavloc {

enum class TrackingMethod { None, Kalman, Viterbi, CoarseToFine };

// Every knob of the batch pipeline. Defaults are the baseline setup:
// SRP-PHAT on a 5 degree grid, empty enhancement chain, Kalman tracking.
struct PipelineConfig {
  // [grid]
  double az_step_deg = 5.0;
  double el_step_deg = 5.0;

  // [stft]
  int fft_size = 1024;
  int hop = 512;

  // [enhance] chain entries run in order; valid names:
  // highpass, select_pairs, mwf.
  std::vector<std::string> chain;
  double highpass_cutoff_hz = 100.0;
  NoiseEstimator noise_estimator = NoiseEstimator::Vad;
  double vad_percentile = 0.3;
  double recursive_alpha = 0.9;
  double mwf_mu = 1.0;
  double pair_snr_floor_db = -10.0;

  // [localize]
  LocalizationMethod method = LocalizationMethod::SrpPhat;
  double gamma = 0.3;
  double band_lo_hz = 100.0;
  double band_hi_hz = 8000.0;
  int music_sources = 1;
  double max_filter_radius_deg = 0.0;

  // [track] flight-task smoothing; static tasks ignore this section.
  TrackingMethod tracking = TrackingMethod::Kalman;
  KalmanConfig kalman;
  double viterbi_penalty_per_deg = 0.02;
  int viterbi_prune_k = 50;
  double window_s = 0.5;
  double stride_s = 0.25;
  double search_radius_deg = 20.0;
  double sample_window_s = 0.5;

  // Throws ValidationError aggregating every violated rule.
  void validate() const;
};

// Sectioned key=value text:
//   [localize]
//   method = srp_phat   # comment
// ParseError on broken syntax; ValidationError lists every bad name or
// out-of-range value at once.
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::string& path);

}  // namespace uavloc
