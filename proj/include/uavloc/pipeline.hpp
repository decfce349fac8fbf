#pragma once

#include <array>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "uavloc/config.hpp"
#include "uavloc/csv_io.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/recording.hpp"
#include "uavloc/scoring.hpp"
#include "uavloc/tracking.hpp"

namespace uavloc {

// Shared state for a localization run: the validated configuration, the
// microphone layout, the direction grid built from the grid section, and the
// motor template bank (only consulted by the motor noise estimator).
struct PipelineContext {
  PipelineConfig config;
  ArrayGeometry geometry = ArrayGeometry::cube();
  std::shared_ptr<const DirectionGrid> grid;
  TemplateBank bank;
};

// Validates the config and builds the grid. Throws ValidationError on a bad
// config, InvalidStep/InvalidGeometry on bad grid or layout parameters.
PipelineContext make_context(const PipelineConfig& config,
                             const ArrayGeometry& geometry =
                                 ArrayGeometry::cube());

// Side information for one recording. The motor noise estimator needs rpms;
// the oracle estimator needs a noise-only reference aligned with the mix.
struct RecordingAux {
  std::optional<std::array<double, 4>> rpms;
  std::optional<MultichannelRecording> noise_ref;
};

// Full single-shot chain: enhancement per config.chain, then SRP or MUSIC
// over the whole recording. Throws InvalidConfig when the configured noise
// estimator needs side information the aux does not carry.
AngularSpectrum localize_spectrum(const MultichannelRecording& recording,
                                  const PipelineContext& ctx,
                                  const RecordingAux& aux = {});

// Grid peak of localize_spectrum.
LocalizationEstimate localize_static(const MultichannelRecording& recording,
                                     const PipelineContext& ctx,
                                     const RecordingAux& aux = {});

// Sliding-window direction track smoothed per config.tracking. Window
// centers become the trajectory timestamps.
Trajectory localize_trajectory(const MultichannelRecording& recording,
                               const PipelineContext& ctx,
                               const RecordingAux& aux = {});

// The trajectory resampled at the fifteen flight ground-truth instants,
// keyed by timestamp index.
std::map<int, Direction> localize_flight(const MultichannelRecording& recording,
                                         const PipelineContext& ctx,
                                         const RecordingAux& aux = {});

struct FileDiagnostic {
  bool ok = false;
  std::string error;    // empty when ok
  double seconds = 0.0; // wall clock spent reading and localizing
  int points = 0;
  // Static: the single great-circle error. Flight: mean over the fifteen
  // scored instants. Infinity when the file produced no estimate.
  double error_deg = std::numeric_limits<double>::infinity();
};

struct EvaluationReport {
  TaskKind kind = TaskKind::Static;
  ScoreReport score;
  Submission submission;
  std::map<std::string, FileDiagnostic> files;
};

// Runs the pipeline over every recording listed in <dataset_dir>/
// ground_truth.csv, writes the submission CSV (to submission_path, or
// <dataset_dir>/submission.csv when empty), and scores it. geometry.txt,
// motor_speeds.csv, motor_templates.csv and noise/<id>.wav are picked up
// from the dataset when present. A recording that fails to read or localize
// is reported in its diagnostic and scores zero; the rest are unaffected.
EvaluationReport evaluate_pipeline(const std::string& dataset_dir,
                                   const PipelineConfig& config,
                                   const std::string& submission_path = "");

}  // namespace uavloc
