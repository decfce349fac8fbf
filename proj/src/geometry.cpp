#include "uavloc/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "uavloc/errors.hpp"
#include "uavloc/text.hpp"

namespace uavloc {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

double normalize_azimuth_deg(double az) {
  double a = std::fmod(az + 180.0, 360.0);
  if (a < 0.0) a += 360.0;
  return a - 180.0;
}

Eigen::Vector3d Direction::unit_vector() const {
  const double az = azimuth_deg * kDegToRad;
  const double el = elevation_deg * kDegToRad;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

Direction Direction::from_unit_vector(const Eigen::Vector3d& u) {
  const Eigen::Vector3d v = u.normalized();
  Direction d;
  d.elevation_deg = std::asin(std::clamp(v.z(), -1.0, 1.0)) * kRadToDeg;
  d.azimuth_deg = normalize_azimuth_deg(std::atan2(v.y(), v.x()) * kRadToDeg);
  return d;
}

Direction Direction::normalized(double azimuth_deg, double elevation_deg) {
  Direction d;
  d.azimuth_deg = normalize_azimuth_deg(azimuth_deg);
  d.elevation_deg = elevation_deg;
  return d;
}

double great_circle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const double cross = u.cross(v).norm();
  const double dot = u.dot(v);
  return std::atan2(cross, dot) * kRadToDeg;
}

double great_circle_deg(const Direction& a, const Direction& b) {
  return great_circle_deg(a.unit_vector(), b.unit_vector());
}

double ArrayGeometry::pair_distance(int i, int j) const {
  return (mic_positions[i] - mic_positions[j]).norm();
}

void ArrayGeometry::validate() const {
  if (mic_count() < 2) throw InvalidGeometry("need at least 2 microphones");
  if (speed_of_sound <= 0.0)
    throw InvalidGeometry("speed of sound must be > 0");
  for (int i = 0; i < mic_count(); ++i)
    for (int j = i + 1; j < mic_count(); ++j)
      if (pair_distance(i, j) < 1e-9)
        throw InvalidGeometry("microphones " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
}

ArrayGeometry ArrayGeometry::cube(double edge_m) {
  ArrayGeometry g;
  const double h = edge_m / 2.0;
  for (int sz : {-1, 1})
    for (int sy : {-1, 1})
      for (int sx : {-1, 1})
        g.mic_positions.emplace_back(sx * h, sy * h, sz * h);
  return g;
}

double tdoa_seconds(const Direction& dir, const ArrayGeometry& geom, int i,
                    int j) {
  if (i < 0 || j < 0 || i >= geom.mic_count() || j >= geom.mic_count())
    throw InvalidMicIndex("microphone index out of range");
  const Eigen::Vector3d u = dir.unit_vector();
  return u.dot(geom.mic_positions[i] - geom.mic_positions[j]) /
         geom.speed_of_sound;
}

Eigen::VectorXcd steering_vector(const Direction& dir,
                                 const ArrayGeometry& geom, double freq_hz) {
  if (freq_hz < 0.0) throw InvalidConfig("steering frequency must be >= 0");
  const Eigen::Vector3d u = dir.unit_vector();
  const int m = geom.mic_count();
  Eigen::VectorXcd v(m);
  const Eigen::Vector3d ref = geom.mic_positions[0];
  for (int k = 0; k < m; ++k) {
    const double tau =
        u.dot(ref - geom.mic_positions[k]) / geom.speed_of_sound;
    const double phase = -2.0 * std::numbers::pi * freq_hz * tau;
    v(k) = std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return v;
}

int DirectionGrid::azimuth_count() const {
  return static_cast<int>(std::lround(360.0 / az_step_deg));
}

int DirectionGrid::elevation_count() const {
  return static_cast<int>(std::lround((el_max_deg - el_min_deg) / el_step_deg)) +
         1;
}

std::shared_ptr<const DirectionGrid> build_grid(double az_step_deg,
                                                double el_step_deg,
                                                double el_min_deg,
                                                double el_max_deg) {
  if (az_step_deg <= 0.0 || el_step_deg <= 0.0)
    throw InvalidStep("grid steps must be > 0");
  if (el_max_deg < el_min_deg || el_min_deg < -90.0 || el_max_deg > 90.0)
    throw InvalidStep("elevation range must lie inside [-90, 90]");
  const double n_az = 360.0 / az_step_deg;
  const double n_el = (el_max_deg - el_min_deg) / el_step_deg;
  if (std::abs(n_az - std::round(n_az)) > 1e-9)
    throw InvalidStep("azimuth step must divide 360 evenly");
  if (std::abs(n_el - std::round(n_el)) > 1e-9)
    throw InvalidStep("elevation step must divide the elevation span evenly");

  auto grid = std::make_shared<DirectionGrid>();
  grid->az_step_deg = az_step_deg;
  grid->el_step_deg = el_step_deg;
  grid->el_min_deg = el_min_deg;
  grid->el_max_deg = el_max_deg;

  const int az_count = static_cast<int>(std::lround(n_az));
  const int el_count = static_cast<int>(std::lround(n_el)) + 1;
  grid->directions.reserve(static_cast<std::size_t>(az_count) * el_count);
  for (int e = 0; e < el_count; ++e) {
    const double el = el_min_deg + e * el_step_deg;
    for (int a = 0; a < az_count; ++a) {
      const double az = normalize_azimuth_deg(-180.0 + a * az_step_deg);
      grid->directions.push_back(Direction{az, el});
    }
  }
  grid->units.reserve(grid->directions.size());
  for (const Direction& d : grid->directions)
    grid->units.push_back(d.unit_vector());
  return grid;
}

ArrayGeometry parse_geometry(std::istream& in) {
  ArrayGeometry g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank line
    if (first == "c") {
      if (!(ls >> g.speed_of_sound))
        throw MalformedRow("geometry line " + std::to_string(line_no) +
                           ": expected speed of sound after 'c'");
      continue;
    }
    double x, y, z;
    std::istringstream vs(line);
    if (!(vs >> x >> y >> z))
      throw MalformedRow("geometry line " + std::to_string(line_no) +
                         ": expected 'x y z' in meters");
    std::string extra;
    if (vs >> extra)
      throw MalformedRow("geometry line " + std::to_string(line_no) +
                         ": trailing content '" + extra + "'");
    g.mic_positions.emplace_back(x, y, z);
  }
  g.validate();
  return g;
}

ArrayGeometry load_geometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("geometry file not found: " + path);
  return parse_geometry(in);
}

void save_geometry(const ArrayGeometry& geom, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write geometry file: " + path);
  out << "# microphone positions, meters\n";
  for (const Eigen::Vector3d& m : geom.mic_positions)
    out << format_fixed(m.x()) << ' ' << format_fixed(m.y()) << ' '
        << format_fixed(m.z()) << '\n';
  out << "c " << format_fixed(geom.speed_of_sound) << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace uavloc
