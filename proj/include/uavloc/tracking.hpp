#pragma once

#include <functional>
#include <span>
#include <vector>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/recording.hpp"

namespace uavloc {

struct Trajectory {
  std::vector<double> timestamps;  // seconds, strictly increasing
  std::vector<Direction> directions;
  std::vector<double> confidences;

  std::size_t size() const { return timestamps.size(); }
  void validate() const;
};

struct KalmanConfig {
  double process_noise_deg = 10.0;     // per step
  double measurement_noise_deg = 15.0;
  double initial_std_deg = 30.0;
};

// Constant-position filter on the unit sphere: the state is a direction, the
// update rotates it toward each measurement along the great circle by the
// Kalman gain times the angular error. The vector state makes azimuth
// wraparound and the poles non-issues.
Trajectory kalman_smooth(const Trajectory& raw, const KalmanConfig& cfg);

struct ViterbiOptions {
  // Candidate states kept per frame; <= 0 disables pruning and makes the
  // dynamic program exact.
  int prune_k = 50;
  // Timestamps for the output trajectory; defaults to 0, 1, 2, ...
  std::vector<double> timestamps;
};

// Best path through the per-frame angular spectra, scoring
// sum(scores) - penalty * sum(great-circle step lengths in degrees).
Trajectory viterbi_smooth(std::span<const AngularSpectrum> spectra,
                          double transition_penalty_per_deg,
                          const ViterbiOptions& opts = {});

// Produces an angular spectrum for a stretch of a recording.
using SpectrumFn = std::function<AngularSpectrum(const MultichannelRecording&)>;

struct CoarseToFineOptions {
  double window_s = 1.0;
  double stride_s = 0.25;
  double search_radius_deg = 20.0;
};

// Two-stage search: one spectrum over the whole recording fixes a global
// direction, then sliding windows re-localize on the grid subset within the
// search radius of it. Window timestamps are the window centers.
Trajectory coarse_to_fine(const MultichannelRecording& recording,
                          const SpectrumFn& localize,
                          const CoarseToFineOptions& opts = {});

// Spherical mean of the trajectory points inside [t - window/2, t + window/2]
// per query; an empty window falls back to the nearest point in time.
std::vector<Direction> sample_at_timestamps(const Trajectory& traj,
                                            std::span<const double> query_times,
                                            double window_s);

}  // namespace uavloc
