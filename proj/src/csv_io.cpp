#include "uavloc/csv_io.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include "uavloc/errors.hpp"
#include "uavloc/text.hpp"

namespace uavloc {

namespace {

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

// Reads all non-blank rows; fields are trimmed, so CRLF endings are harmless.
std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    Row row;
    row.line = number;
    for (const auto& field : split(line, ','))
      row.fields.emplace_back(trim(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

[[noreturn]] void bad_row(const Row& row, const std::string& what) {
  throw MalformedRow("line " + std::to_string(row.line) + ": " + what);
}

double field_double(const Row& row, std::size_t idx, const char* name) {
  const auto v = parse_double(row.fields[idx]);
  if (!v) bad_row(row, std::string("bad ") + name + " '" + row.fields[idx] + "'");
  return *v;
}

long field_long(const Row& row, std::size_t idx, const char* name) {
  const auto v = parse_long(row.fields[idx]);
  if (!v) bad_row(row, std::string("bad ") + name + " '" + row.fields[idx] + "'");
  return *v;
}

void require_id(const Row& row) {
  if (row.fields[0].empty()) bad_row(row, "empty recording_id");
}

const std::vector<std::string> kStaticSubHeader = {
    "recording_id", "azimuth_deg", "elevation_deg"};
const std::vector<std::string> kFlightSubHeader = {
    "recording_id", "timestamp_index", "azimuth_deg", "elevation_deg"};
const std::vector<std::string> kStaticGtHeader = {
    "recording_id", "azimuth_deg", "elevation_deg", "timestamp_s"};
const std::vector<std::string> kFlightGtHeader = {
    "recording_id", "timestamp_index", "azimuth_deg", "elevation_deg",
    "timestamp_s"};

int flight_index(const Row& row, std::size_t idx) {
  const long k = field_long(row, idx, "timestamp_index");
  if (k < 0 || k >= kFlightTimestamps)
    bad_row(row, "timestamp_index " + std::to_string(k) + " out of 0.." +
                     std::to_string(kFlightTimestamps - 1));
  return static_cast<int>(k);
}

}  // namespace

GroundTruth parse_ground_truth(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw ParseError("empty ground-truth file");

  GroundTruth gt;
  // Builders tolerate any row order; completeness is checked afterwards.
  struct PartialFlight {
    std::array<bool, kFlightTimestamps> seen{};
    FlightTruth rec;
  };
  std::map<std::string, PartialFlight> flights;

  if (rows[0].fields == kStaticGtHeader ||
      rows[0].fields == kStaticSubHeader) {
    gt.kind = TaskKind::Static;
    const bool with_ts = rows[0].fields == kStaticGtHeader;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Row& row = rows[r];
      if (row.fields.size() != (with_ts ? 4u : 3u))
        bad_row(row, "expected " + std::to_string(with_ts ? 4 : 3) + " columns");
      require_id(row);
      const Direction d{field_double(row, 1, "azimuth_deg"),
                        field_double(row, 2, "elevation_deg")};
      if (with_ts) field_double(row, 3, "timestamp_s");
      if (!gt.static_truth.emplace(row.fields[0], d).second)
        throw DuplicateId(row.fields[0]);
    }
  } else if (rows[0].fields == kFlightGtHeader) {
    gt.kind = TaskKind::Flight;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Row& row = rows[r];
      if (row.fields.size() != 5) bad_row(row, "expected 5 columns");
      require_id(row);
      const int k = flight_index(row, 1);
      auto& partial = flights[row.fields[0]];
      if (partial.rec.timestamps_s.empty()) {
        partial.rec.timestamps_s.resize(kFlightTimestamps, 0.0);
        partial.rec.directions.resize(kFlightTimestamps);
      }
      if (partial.seen[k])
        throw DuplicateId(row.fields[0] + " timestamp " + std::to_string(k));
      partial.seen[k] = true;
      partial.rec.directions[k] = Direction{field_double(row, 2, "azimuth_deg"),
                                            field_double(row, 3, "elevation_deg")};
      partial.rec.timestamps_s[k] = field_double(row, 4, "timestamp_s");
    }
    for (auto& [id, partial] : flights) {
      for (int k = 0; k < kFlightTimestamps; ++k)
        if (!partial.seen[k])
          throw ValidationError(id + ": missing timestamp_index " +
                                std::to_string(k));
      gt.flight_truth.emplace(id, std::move(partial.rec));
    }
  } else {
    throw ParseError("unrecognized ground-truth header '" +
                     join(rows[0].fields) + "'");
  }
  gt.validate();
  return gt;
}

std::string format_ground_truth(const GroundTruth& gt) {
  gt.validate();
  std::string out;
  if (gt.kind == TaskKind::Static) {
    out = join(kStaticGtHeader) + "\n";
    for (const auto& [id, d] : gt.static_truth)
      out += id + ',' + format_fixed(d.azimuth_deg) + ',' +
             format_fixed(d.elevation_deg) + ',' + format_fixed(0.0) + "\n";
  } else {
    out = join(kFlightGtHeader) + "\n";
    for (const auto& [id, rec] : gt.flight_truth)
      for (int k = 0; k < kFlightTimestamps; ++k)
        out += id + ',' + std::to_string(k) + ',' +
               format_fixed(rec.directions[k].azimuth_deg) + ',' +
               format_fixed(rec.directions[k].elevation_deg) + ',' +
               format_fixed(rec.timestamps_s[k]) + "\n";
  }
  return out;
}

Submission parse_submission(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw ParseError("empty submission file");

  Submission sub;
  if (rows[0].fields == kStaticSubHeader) {
    sub.kind = TaskKind::Static;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Row& row = rows[r];
      if (row.fields.size() != 3) bad_row(row, "expected 3 columns");
      require_id(row);
      const Direction d{field_double(row, 1, "azimuth_deg"),
                        field_double(row, 2, "elevation_deg")};
      if (!sub.static_estimates.emplace(row.fields[0], d).second)
        throw DuplicateId(row.fields[0]);
    }
  } else if (rows[0].fields == kFlightSubHeader) {
    sub.kind = TaskKind::Flight;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const Row& row = rows[r];
      if (row.fields.size() != 4) bad_row(row, "expected 4 columns");
      require_id(row);
      const int k = flight_index(row, 1);
      const Direction d{field_double(row, 2, "azimuth_deg"),
                        field_double(row, 3, "elevation_deg")};
      if (!sub.flight_estimates[row.fields[0]].emplace(k, d).second)
        throw DuplicateId(row.fields[0] + " timestamp " + std::to_string(k));
    }
  } else {
    throw ParseError("unrecognized submission header '" +
                     join(rows[0].fields) + "'");
  }
  return sub;
}

std::string format_submission(const Submission& sub) {
  std::string out;
  if (sub.kind == TaskKind::Static) {
    out = join(kStaticSubHeader) + "\n";
    for (const auto& [id, d] : sub.static_estimates)
      out += id + ',' + format_fixed(d.azimuth_deg) + ',' +
             format_fixed(d.elevation_deg) + "\n";
  } else {
    out = join(kFlightSubHeader) + "\n";
    for (const auto& [id, points] : sub.flight_estimates)
      for (const auto& [k, d] : points)
        out += id + ',' + std::to_string(k) + ',' +
               format_fixed(d.azimuth_deg) + ',' +
               format_fixed(d.elevation_deg) + "\n";
  }
  return out;
}

MotorSpeedTable parse_motor_speeds(std::istream& in) {
  const auto rows = read_rows(in);
  const std::vector<std::string> header = {"recording_id", "motor1_rpm",
                                           "motor2_rpm", "motor3_rpm",
                                           "motor4_rpm"};
  if (rows.empty() || rows[0].fields != header)
    throw ParseError("missing motor-speed header");

  MotorSpeedTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.fields.size() != 5) bad_row(row, "expected 5 columns");
    require_id(row);
    std::array<double, 4> speeds;
    for (int m = 0; m < 4; ++m)
      speeds[m] = field_double(row, m + 1, "rpm");
    if (!table.emplace(row.fields[0], speeds).second)
      throw DuplicateId(row.fields[0]);
  }
  return table;
}

std::string format_motor_speeds(const MotorSpeedTable& table) {
  std::string out = "recording_id,motor1_rpm,motor2_rpm,motor3_rpm,motor4_rpm\n";
  for (const auto& [id, speeds] : table) {
    out += id;
    for (double rpm : speeds) out += ',' + format_fixed(rpm);
    out += '\n';
  }
  return out;
}

TemplateBank parse_template_bank(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty() || rows[0].fields.size() < 4 ||
      rows[0].fields[0] != "motor_id" || rows[0].fields[1] != "rpm" ||
      rows[0].fields[2] != "bin_hz")
    throw ParseError("missing template-bank header");
  const std::size_t columns = rows[0].fields.size();
  const std::size_t bins = columns - 3;

  TemplateBank bank;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.fields.size() != columns)
      bad_row(row, "expected " + std::to_string(columns) + " columns");
    const long motor = field_long(row, 0, "motor_id");
    if (motor < 0 || motor > 64) bad_row(row, "motor_id out of range");
    TemplateBank::Entry entry;
    entry.rpm = field_double(row, 1, "rpm");
    const double bin_hz = field_double(row, 2, "bin_hz");
    if (bank.motors.empty()) {
      bank.bin_hz = bin_hz;
    } else if (bin_hz != bank.bin_hz) {
      bad_row(row, "bin_hz differs from earlier rows");
    }
    entry.power.resize(bins);
    for (std::size_t b = 0; b < bins; ++b)
      entry.power[b] = field_double(row, b + 3, "power");
    if (static_cast<std::size_t>(motor) >= bank.motors.size())
      bank.motors.resize(motor + 1);
    bank.motors[motor].push_back(std::move(entry));
  }
  for (auto& entries : bank.motors)
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.rpm < b.rpm; });
  bank.validate();
  return bank;
}

std::string format_template_bank(const TemplateBank& bank) {
  bank.validate();
  std::size_t bins = 0;
  for (const auto& entries : bank.motors)
    for (const auto& e : entries) bins = std::max(bins, e.power.size());

  std::string out = "motor_id,rpm,bin_hz";
  for (std::size_t b = 0; b < bins; ++b) out += ",power" + std::to_string(b);
  out += '\n';
  for (std::size_t m = 0; m < bank.motors.size(); ++m)
    for (const auto& e : bank.motors[m]) {
      out += std::to_string(m) + ',' + format_fixed(e.rpm) + ',' +
             format_fixed(bank.bin_hz);
      for (double p : e.power) out += ',' + format_fixed(p, 9);
      out += '\n';
    }
  return out;
}

namespace {

template <typename Parser>
auto from_file(const std::string& path, Parser parse) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  return parse(in);
}

void to_file(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoFailure("short write: " + path);
}

}  // namespace

GroundTruth read_ground_truth(const std::string& path) {
  return from_file(path, [](std::istream& in) { return parse_ground_truth(in); });
}
void write_ground_truth(const GroundTruth& gt, const std::string& path) {
  to_file(format_ground_truth(gt), path);
}

Submission read_submission(const std::string& path) {
  return from_file(path, [](std::istream& in) { return parse_submission(in); });
}
void write_submission(const Submission& sub, const std::string& path) {
  to_file(format_submission(sub), path);
}

MotorSpeedTable read_motor_speeds(const std::string& path) {
  return from_file(path, [](std::istream& in) { return parse_motor_speeds(in); });
}
void write_motor_speeds(const MotorSpeedTable& table, const std::string& path) {
  to_file(format_motor_speeds(table), path);
}

TemplateBank read_template_bank(const std::string& path) {
  return from_file(path, [](std::istream& in) { return parse_template_bank(in); });
}
void write_template_bank(const TemplateBank& bank, const std::string& path) {
  to_file(format_template_bank(bank), path);
}

}  // namespace uavloc
