#include "uavloc/scoring.hpp"

#include <cmath>
#include <limits>

#include "uavloc/errors.hpp"

namespace uavloc {

bool is_correct(const Direction& estimate, const Direction& truth) {
  if (!std::isfinite(estimate.azimuth_deg) ||
      !std::isfinite(estimate.elevation_deg))
    return false;
  return great_circle_deg(estimate, truth) < kCorrectThresholdDeg;
}

void GroundTruth::validate() const {
  if (kind == TaskKind::Static) {
    if (!flight_truth.empty())
      throw TaskKindMismatch("static ground truth carries flight records");
    return;
  }
  if (!static_truth.empty())
    throw TaskKindMismatch("flight ground truth carries static records");
  for (const auto& [id, rec] : flight_truth) {
    if (rec.timestamps_s.size() != kFlightTimestamps ||
        rec.directions.size() != kFlightTimestamps)
      throw ValidationError(id + ": flight record needs exactly " +
                            std::to_string(kFlightTimestamps) + " timestamps");
    for (std::size_t i = 1; i < rec.timestamps_s.size(); ++i)
      if (!(rec.timestamps_s[i] > rec.timestamps_s[i - 1]))
        throw ValidationError(id + ": timestamps must be strictly increasing");
  }
}

ScoreReport score_static(const Submission& sub, const GroundTruth& gt) {
  if (gt.kind != TaskKind::Static || sub.kind != TaskKind::Static)
    throw TaskKindMismatch("score_static needs static submission and truth");
  gt.validate();

  ScoreReport report;
  report.max = static_cast<int>(gt.static_truth.size());
  for (const auto& [id, truth] : gt.static_truth) {
    const auto it = sub.static_estimates.find(id);
    double err = std::numeric_limits<double>::infinity();
    int points = 0;
    if (it != sub.static_estimates.end()) {
      err = great_circle_deg(it->second, truth);
      points = is_correct(it->second, truth) ? 1 : 0;
    }
    report.per_recording_points[id] = points;
    report.per_recording_errors_deg[id] = {err};
    report.total += points;
  }
  return report;
}

ScoreReport score_flight(const Submission& sub, const GroundTruth& gt) {
  if (gt.kind != TaskKind::Flight || sub.kind != TaskKind::Flight)
    throw TaskKindMismatch("score_flight needs flight submission and truth");
  gt.validate();

  ScoreReport report;
  report.max = static_cast<int>(gt.flight_truth.size()) * kFlightTimestamps;
  for (const auto& [id, rec] : gt.flight_truth) {
    const auto sub_it = sub.flight_estimates.find(id);
    int points = 0;
    std::vector<double> errors(kFlightTimestamps,
                               std::numeric_limits<double>::infinity());
    for (int k = 0; k < kFlightTimestamps; ++k) {
      if (sub_it == sub.flight_estimates.end()) continue;
      const auto est = sub_it->second.find(k);
      if (est == sub_it->second.end()) continue;
      errors[k] = great_circle_deg(est->second, rec.directions[k]);
      if (is_correct(est->second, rec.directions[k])) ++points;
    }
    report.per_recording_points[id] = points;
    report.per_recording_errors_deg[id] = std::move(errors);
    report.total += points;
  }
  return report;
}

ScoreReport score(const Submission& sub, const GroundTruth& gt) {
  if (sub.kind != gt.kind)
    throw TaskKindMismatch("submission and ground truth are different tasks");
  return gt.kind == TaskKind::Static ? score_static(sub, gt)
                                     : score_flight(sub, gt);
}

}  // namespace uavloc
