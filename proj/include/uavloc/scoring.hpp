#pragma once

#include <map>
#include <string>
#include <vector>

#include "uavloc/geometry.hpp"

namespace uavloc {

enum class TaskKind { Static, Flight };

// One point per correctly localized file (static) or timestamp (flight);
// correct means great-circle error strictly below this threshold.
inline constexpr double kCorrectThresholdDeg = 10.0;
inline constexpr int kFlightTimestamps = 15;

bool is_correct(const Direction& estimate, const Direction& truth);

struct FlightTruth {
  std::vector<double> timestamps_s;   // indexed by timestamp_index
  std::vector<Direction> directions;
};

struct GroundTruth {
  TaskKind kind = TaskKind::Static;
  std::map<std::string, Direction> static_truth;
  std::map<std::string, FlightTruth> flight_truth;

  std::size_t recording_count() const {
    return kind == TaskKind::Static ? static_truth.size()
                                    : flight_truth.size();
  }
  // Flight records must carry exactly 15 strictly increasing timestamps.
  void validate() const;
};

// Estimates in the same shape; entries may be missing and score zero.
struct Submission {
  TaskKind kind = TaskKind::Static;
  std::map<std::string, Direction> static_estimates;
  std::map<std::string, std::map<int, Direction>> flight_estimates;
};

struct ScoreReport {
  int total = 0;
  int max = 0;
  std::map<std::string, int> per_recording_points;
  // Great-circle error per scored entry; one value for static recordings,
  // one per timestamp for flight. Missing estimates record infinity.
  std::map<std::string, std::vector<double>> per_recording_errors_deg;
};

ScoreReport score_static(const Submission& sub, const GroundTruth& gt);
ScoreReport score_flight(const Submission& sub, const GroundTruth& gt);

// Dispatches on gt.kind after checking sub.kind matches.
ScoreReport score(const Submission& sub, const GroundTruth& gt);

}  // namespace uavloc
