#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace uavloc {

// Direction on the unit sphere in the array frame. Azimuth is measured
// counterclockwise from +x (viewed from +z) in [-180, 180); elevation is
// positive toward +z in [-90, 90].
struct Direction {
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;

  Eigen::Vector3d unit_vector() const;
  static Direction from_unit_vector(const Eigen::Vector3d& u);
  static Direction normalized(double azimuth_deg, double elevation_deg);
};

double normalize_azimuth_deg(double az);

// Shortest angle between two directions, degrees in [0, 180]. Uses the
// atan2 form, which stays accurate near 0 and 180 where acos loses digits.
double great_circle_deg(const Direction& a, const Direction& b);
double great_circle_deg(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> mic_positions;  // meters, array frame
  double speed_of_sound = 343.0;

  int mic_count() const { return static_cast<int>(mic_positions.size()); }
  double pair_distance(int i, int j) const;
  void validate() const;

  // 8 microphones at the corners of an axis-aligned cube centered at the
  // origin. Stand-in for the competition array; the real geometry ships with
  // the dataset and is loaded from a geometry file.
  static ArrayGeometry cube(double edge_m = 0.10);
};

// Far-field plane-wave TDOA of mic i relative to mic j, seconds:
// tau_ij = u . (m_i - m_j) / c. Antisymmetric in (i, j).
double tdoa_seconds(const Direction& dir, const ArrayGeometry& geom, int i,
                    int j);

// Element k = exp(-i 2 pi f tau(dir, 0, k)), phase-referenced to mic 0.
Eigen::VectorXcd steering_vector(const Direction& dir,
                                 const ArrayGeometry& geom, double freq_hz);

// Full-azimuth search grid, elevation-outer row-major ordering.
struct DirectionGrid {
  std::vector<Direction> directions;
  std::vector<Eigen::Vector3d> units;  // cached unit vectors, same order
  double az_step_deg = 0.0;
  double el_step_deg = 0.0;
  double el_min_deg = -90.0;
  double el_max_deg = 90.0;

  std::size_t size() const { return directions.size(); }
  int azimuth_count() const;
  int elevation_count() const;
};

std::shared_ptr<const DirectionGrid> build_grid(double az_step_deg,
                                                double el_step_deg,
                                                double el_min_deg = -90.0,
                                                double el_max_deg = 90.0);

// Geometry file: one microphone per line "x y z" (meters), optional line
// "c <value>" for the speed of sound. '#' starts a comment.
ArrayGeometry parse_geometry(std::istream& in);
ArrayGeometry load_geometry(const std::string& path);
void save_geometry(const ArrayGeometry& geom, const std::string& path);

}  // namespace uavloc
