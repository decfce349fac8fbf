#include "uavloc/tracking.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "uavloc/errors.hpp"

namespace uavloc {

void Trajectory::validate() const {
  if (directions.size() != timestamps.size() ||
      confidences.size() != timestamps.size())
    throw ShapeMismatch("trajectory fields differ in length");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw InvalidConfig("trajectory timestamps must be strictly increasing");
}

namespace {

// Rotates u toward z along their great circle by fraction of the angle
// between them; fraction 1 lands on z.
Eigen::Vector3d rotate_toward(const Eigen::Vector3d& u,
                              const Eigen::Vector3d& z, double fraction) {
  const double angle = std::atan2(u.cross(z).norm(), u.dot(z));
  if (angle < 1e-12) return u;
  Eigen::Vector3d axis = u.cross(z);
  if (axis.norm() < 1e-12) {
    // Antipodal measurement: rotate around any perpendicular axis.
    axis = u.unitOrthogonal();
  } else {
    axis.normalize();
  }
  return (Eigen::AngleAxisd(fraction * angle, axis) * u).normalized();
}

}  // namespace

Trajectory kalman_smooth(const Trajectory& raw, const KalmanConfig& cfg) {
  raw.validate();
  if (raw.size() == 0) throw EmptyTrajectory("nothing to smooth");
  if (!(cfg.process_noise_deg > 0.0 && cfg.measurement_noise_deg > 0.0 &&
        cfg.initial_std_deg > 0.0))
    throw InvalidConfig("Kalman noise parameters must be positive");

  const double q2 = cfg.process_noise_deg * cfg.process_noise_deg;
  const double r2 = cfg.measurement_noise_deg * cfg.measurement_noise_deg;

  Trajectory out = raw;
  Eigen::Vector3d state = raw.directions[0].unit_vector();
  double var = cfg.initial_std_deg * cfg.initial_std_deg;
  out.directions[0] = Direction::from_unit_vector(state);

  for (std::size_t t = 1; t < raw.size(); ++t) {
    var += q2;
    const double gain = var / (var + r2);
    state = rotate_toward(state, raw.directions[t].unit_vector(), gain);
    var *= 1.0 - gain;
    out.directions[t] = Direction::from_unit_vector(state);
  }
  return out;
}

Trajectory viterbi_smooth(std::span<const AngularSpectrum> spectra,
                          double transition_penalty_per_deg,
                          const ViterbiOptions& opts) {
  if (spectra.empty()) throw EmptyInput("no spectra to smooth");
  const auto grid = spectra[0].grid;
  if (!grid || grid->size() == 0) throw EmptyInput("empty direction grid");
  for (const auto& s : spectra)
    if (s.grid != grid || s.scores.size() != grid->size())
      throw ShapeMismatch("spectra must share one grid");
  if (!opts.timestamps.empty() && opts.timestamps.size() != spectra.size())
    throw ShapeMismatch("timestamp count does not match spectrum count");

  const long n = static_cast<long>(grid->size());
  const int frames = static_cast<int>(spectra.size());
  const double minus_inf = -std::numeric_limits<double>::infinity();

  std::vector<std::vector<double>> cost(frames, std::vector<double>(n));
  std::vector<std::vector<long>> from(frames, std::vector<long>(n, -1));

  for (long s = 0; s < n; ++s)
    cost[0][s] = spectra[0].scores[s] == masked_score() ? minus_inf
                                                        : spectra[0].scores[s];

  std::vector<long> candidates;
  for (int t = 1; t < frames; ++t) {
    // Predecessors restricted to the strongest states of the previous frame;
    // prune_k <= 0 keeps them all and the program stays exact.
    candidates.clear();
    for (long s = 0; s < n; ++s)
      if (cost[t - 1][s] != minus_inf) candidates.push_back(s);
    if (candidates.empty()) throw AllMasked("no reachable state left");
    if (opts.prune_k > 0 &&
        static_cast<long>(candidates.size()) > opts.prune_k) {
      std::nth_element(candidates.begin(), candidates.begin() + opts.prune_k,
                       candidates.end(), [&](long a, long b) {
                         return cost[t - 1][a] != cost[t - 1][b]
                                    ? cost[t - 1][a] > cost[t - 1][b]
                                    : a < b;
                       });
      candidates.resize(opts.prune_k);
      std::sort(candidates.begin(), candidates.end());
    }

#pragma omp parallel for schedule(static)
    for (long s = 0; s < n; ++s) {
      if (spectra[t].scores[s] == masked_score()) {
        cost[t][s] = minus_inf;
        continue;
      }
      double best = minus_inf;
      long best_from = -1;
      for (long p : candidates) {
        const double step =
            great_circle_deg(grid->units[p], grid->units[s]);
        const double c =
            cost[t - 1][p] - transition_penalty_per_deg * step;
        if (c > best) {
          best = c;
          best_from = p;
        }
      }
      cost[t][s] = best + spectra[t].scores[s];
      from[t][s] = best_from;
    }
  }

  long tail = -1;
  double tail_cost = minus_inf;
  for (long s = 0; s < n; ++s)
    if (cost[frames - 1][s] > tail_cost) {
      tail_cost = cost[frames - 1][s];
      tail = s;
    }
  if (tail < 0) throw AllMasked("no reachable state left");

  std::vector<long> path(frames);
  path[frames - 1] = tail;
  for (int t = frames - 1; t > 0; --t) path[t - 1] = from[t][path[t]];

  Trajectory out;
  out.timestamps.resize(frames);
  out.directions.resize(frames);
  out.confidences.resize(frames);
  for (int t = 0; t < frames; ++t) {
    out.timestamps[t] =
        opts.timestamps.empty() ? static_cast<double>(t) : opts.timestamps[t];
    out.directions[t] = grid->directions[path[t]];
    out.confidences[t] = spectra[t].scores[path[t]];
  }
  return out;
}

Trajectory coarse_to_fine(const MultichannelRecording& recording,
                          const SpectrumFn& localize,
                          const CoarseToFineOptions& opts) {
  recording.validate();
  if (!(opts.window_s > 0.0 && opts.stride_s > 0.0))
    throw InvalidConfig("window and stride must be positive");
  const double duration = recording.duration_s();
  if (duration + 1e-9 < opts.window_s)
    throw RecordingTooShort("recording shorter than one analysis window");

  const auto global = localize(recording);
  const auto anchor = pick_peak(global);
  const Eigen::Vector3d g = anchor.direction.unit_vector();
  const double cos_radius =
      opts.search_radius_deg >= 180.0
          ? -2.0
          : std::cos(opts.search_radius_deg * std::numbers::pi / 180.0);

  Trajectory out;
  const std::size_t window_len = static_cast<std::size_t>(
      std::lround(opts.window_s * recording.sample_rate));
  for (double start = 0.0; start <= duration - opts.window_s + 1e-9;
       start += opts.stride_s) {
    const std::size_t begin = static_cast<std::size_t>(
        std::lround(start * recording.sample_rate));
    MultichannelRecording segment;
    segment.sample_rate = recording.sample_rate;
    segment.channel_map = recording.channel_map;
    for (const auto& ch : recording.samples)
      segment.samples.emplace_back(ch.begin() + begin,
                                   ch.begin() + std::min(begin + window_len,
                                                         ch.size()));

    auto spectrum = localize(segment);
    for (std::size_t d = 0; d < spectrum.scores.size(); ++d)
      if (spectrum.grid->units[d].dot(g) < cos_radius - 1e-12)
        spectrum.scores[d] = masked_score();
    const auto peak = pick_peak(spectrum);

    out.timestamps.push_back(start + opts.window_s / 2.0);
    out.directions.push_back(peak.direction);
    out.confidences.push_back(peak.confidence);
  }
  return out;
}

std::vector<Direction> sample_at_timestamps(const Trajectory& traj,
                                            std::span<const double> query_times,
                                            double window_s) {
  traj.validate();
  if (traj.size() == 0) throw EmptyTrajectory("empty trajectory");
  if (window_s < 0.0) throw InvalidConfig("window must be >= 0");

  std::vector<Direction> out;
  out.reserve(query_times.size());
  for (double q : query_times) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (std::abs(traj.timestamps[i] - q) <= window_s / 2.0 + 1e-12) {
        sum += traj.directions[i].unit_vector();
        ++count;
      }
    }
    if (count > 0 && sum.norm() >= 1e-12) {
      out.push_back(Direction::from_unit_vector(sum.normalized()));
      continue;
    }
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < traj.size(); ++i)
      if (std::abs(traj.timestamps[i] - q) <
          std::abs(traj.timestamps[nearest] - q))
        nearest = i;
    out.push_back(traj.directions[nearest]);
  }
  return out;
}

}  // namespace uavloc
