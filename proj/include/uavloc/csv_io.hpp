#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>

#include "uavloc/enhance.hpp"
#include "uavloc/scoring.hpp"

namespace uavloc {

// CSV conventions shared by every format here: UTF-8, comma separator,
// mandatory header row, '.' decimal point, 6-decimal fixed formatting on
// output; CRLF tolerated on input. Task kind is recognized from the header:
//   static submission   recording_id,azimuth_deg,elevation_deg
//   flight submission   recording_id,timestamp_index,azimuth_deg,elevation_deg
//   ground truth        the matching submission columns plus timestamp_s

GroundTruth parse_ground_truth(std::istream& in);
GroundTruth read_ground_truth(const std::string& path);
std::string format_ground_truth(const GroundTruth& gt);
void write_ground_truth(const GroundTruth& gt, const std::string& path);

Submission parse_submission(std::istream& in);
Submission read_submission(const std::string& path);
std::string format_submission(const Submission& sub);
void write_submission(const Submission& sub, const std::string& path);

// Mean rotor speeds per recording:
// recording_id,motor1_rpm,motor2_rpm,motor3_rpm,motor4_rpm
using MotorSpeedTable = std::map<std::string, std::array<double, 4>>;
MotorSpeedTable parse_motor_speeds(std::istream& in);
MotorSpeedTable read_motor_speeds(const std::string& path);
std::string format_motor_speeds(const MotorSpeedTable& table);
void write_motor_speeds(const MotorSpeedTable& table, const std::string& path);

// Per-motor noise templates, one row per (motor, reference speed):
// motor_id,rpm,bin_hz,power0,power1,...  All rows must agree on bin_hz and
// on the power column count.
TemplateBank parse_template_bank(std::istream& in);
TemplateBank read_template_bank(const std::string& path);
std::string format_template_bank(const TemplateBank& bank);
void write_template_bank(const TemplateBank& bank, const std::string& path);

}  // namespace uavloc
