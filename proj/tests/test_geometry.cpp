#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <sstream>

#include "support/oracles.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/rng.hpp"

using namespace uavloc;

namespace {

Direction random_direction(Rng& rng) {
  // Uniform over the sphere: azimuth uniform, sin(elevation) uniform.
  const double az = rng.uniform(-180.0, 180.0);
  const double el = std::asin(rng.uniform(-1.0, 1.0)) * 180.0 / std::numbers::pi;
  return Direction{normalize_azimuth_deg(az), el};
}

ArrayGeometry two_mic_x() {
  ArrayGeometry g;
  g.mic_positions = {{0.05, 0.0, 0.0}, {-0.05, 0.0, 0.0}};
  return g;
}

}  // namespace

TEST_CASE("great-circle distance on pinned pairs") {
  CHECK(great_circle_deg(Direction{30.0, 20.0}, Direction{30.0, 20.0}) ==
        doctest::Approx(0.0));
  CHECK(great_circle_deg(Direction{0.0, 0.0}, Direction{0.0, 90.0}) ==
        doctest::Approx(90.0));
  CHECK(great_circle_deg(Direction{45.0, 10.0}, Direction{-135.0, -10.0}) ==
        doctest::Approx(180.0));
}

TEST_CASE("great-circle distance is a metric") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const Direction a = random_direction(rng);
    const Direction b = random_direction(rng);
    const Direction c = random_direction(rng);
    const double ab = great_circle_deg(a, b);
    const double ba = great_circle_deg(b, a);
    const double bc = great_circle_deg(b, c);
    const double ac = great_circle_deg(a, c);
    CHECK(ab >= 0.0);
    CHECK(ab <= 180.0);
    CHECK(great_circle_deg(a, a) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(ab - ba) < 1e-9);
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("direction unit vectors are unit norm") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const Direction d = random_direction(rng);
    CHECK(std::abs(d.unit_vector().norm() - 1.0) < 1e-12);
    const Direction back = Direction::from_unit_vector(d.unit_vector());
    CHECK(great_circle_deg(d, back) < 1e-9);
  }
}

TEST_CASE("tdoa on the two-mic axis pair") {
  const ArrayGeometry g = two_mic_x();

  SUBCASE("broadside gives zero") {
    CHECK(tdoa_seconds({90.0, 0.0}, g, 0, 1) == doctest::Approx(0.0));
  }

  SUBCASE("endfire matches 0.1/343 and the point-source oracle") {
    const double tau = tdoa_seconds({0.0, 0.0}, g, 0, 1);
    CHECK(tau == doctest::Approx(0.1 / 343.0).epsilon(1e-12));
    const double geo = oracle::point_source_tdoa({0.0, 0.0}, g, 0, 1, 100.0);
    CHECK(std::abs(tau - geo) < 1e-7);
  }

  SUBCASE("antisymmetry") {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
      const Direction d = random_direction(rng);
      CHECK(std::abs(tdoa_seconds(d, g, 0, 1) + tdoa_seconds(d, g, 1, 0)) ==
            doctest::Approx(0.0));
    }
  }

  SUBCASE("same mic twice has zero delay") {
    CHECK(tdoa_seconds({0.0, 0.0}, g, 1, 1) == 0.0);
  }

  SUBCASE("invalid indices throw") {
    CHECK_THROWS_AS(tdoa_seconds({0.0, 0.0}, g, 0, 2), InvalidMicIndex);
    CHECK_THROWS_AS(tdoa_seconds({0.0, 0.0}, g, -1, 1), InvalidMicIndex);
  }
}

TEST_CASE("tdoa respects the pairwise distance bound") {
  const ArrayGeometry g = ArrayGeometry::cube(0.1);
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const Direction d = random_direction(rng);
    const int i = rng.uniform_int(0, 7);
    int j = rng.uniform_int(0, 7);
    if (j == i) j = (j + 1) % 8;
    const double bound = g.pair_distance(i, j) / g.speed_of_sound;
    CHECK(std::abs(tdoa_seconds(d, g, i, j)) <= bound + 1e-15);
  }
}

TEST_CASE("tdoa is invariant under a common rotation") {
  const ArrayGeometry g = ArrayGeometry::cube(0.1);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Direction d = random_direction(rng);
    const Eigen::Vector3d axis =
        Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const Eigen::AngleAxisd rot(rng.uniform(0.0, 2.0 * std::numbers::pi), axis);

    ArrayGeometry rotated = g;
    for (auto& m : rotated.mic_positions) m = rot * m;
    const Direction rd = Direction::from_unit_vector(rot * d.unit_vector());

    CHECK(std::abs(tdoa_seconds(d, g, 2, 5) - tdoa_seconds(rd, rotated, 2, 5)) <
          1e-12);
  }
}

TEST_CASE("steering vectors") {
  const ArrayGeometry g = two_mic_x();

  SUBCASE("zero frequency gives all ones") {
    const auto v = steering_vector({37.0, -12.0}, g, 0.0);
    for (int k = 0; k < v.size(); ++k)
      CHECK(std::abs(v(k) - std::complex<double>(1.0, 0.0)) < 1e-15);
  }

  SUBCASE("reference element is one and moduli are unit") {
    Rng rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
      const Direction d = random_direction(rng);
      const double f = rng.uniform(0.0, 8000.0);
      const auto v = steering_vector(d, ArrayGeometry::cube(0.1), f);
      CHECK(std::abs(v(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
      for (int k = 0; k < v.size(); ++k)
        CHECK(std::abs(std::abs(v(k)) - 1.0) < 1e-12);
    }
  }

  SUBCASE("phase difference matches -2 pi f tau") {
    const auto v = steering_vector({0.0, 0.0}, g, 1000.0);
    const double phase = std::arg(v(1) / v(0));
    const double tau = tdoa_seconds({0.0, 0.0}, g, 0, 1);
    const double expected = -2.0 * std::numbers::pi * 1000.0 * tau;
    CHECK(std::abs(phase - expected) < 1e-9);
  }
}

TEST_CASE("grid construction counts and ordering") {
  CHECK(build_grid(90.0, 45.0)->size() == 20);
  CHECK(build_grid(5.0, 5.0)->size() == 2664);
  CHECK(build_grid(1.0, 1.0)->size() == 65160);

  auto grid = build_grid(90.0, 45.0);
  // Elevation-outer ordering: first row is the lowest elevation.
  CHECK(grid->directions[0].elevation_deg == doctest::Approx(-90.0));
  CHECK(grid->directions[0].azimuth_deg == doctest::Approx(-180.0));
  CHECK(grid->directions[4].elevation_deg == doctest::Approx(-45.0));

  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Direction& d = grid->directions[i];
    CHECK(d.azimuth_deg >= -180.0);
    CHECK(d.azimuth_deg < 180.0);
    CHECK(std::abs(d.elevation_deg) <= 90.0);
    CHECK(std::abs(grid->units[i].norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("grid rejects bad steps") {
  CHECK_THROWS_AS(build_grid(0.0, 5.0), InvalidStep);
  CHECK_THROWS_AS(build_grid(7.0, 5.0), InvalidStep);
  CHECK_THROWS_AS(build_grid(5.0, 7.0), InvalidStep);
  CHECK_THROWS_AS(build_grid(5.0, 5.0, -10.0, 100.0), InvalidStep);
}

TEST_CASE("geometry file round trip and errors") {
  SUBCASE("parse a well-formed file") {
    std::istringstream in(
        "# cube corners\n"
        "0.05 0.05 0.05\n"
        "-0.05 0.05 0.05\n"
        "c 340.5\n");
    const ArrayGeometry g = parse_geometry(in);
    CHECK(g.mic_count() == 2);
    CHECK(g.speed_of_sound == doctest::Approx(340.5));
    CHECK(g.mic_positions[1].x() == doctest::Approx(-0.05));
  }

  SUBCASE("save and reload") {
    const ArrayGeometry g = ArrayGeometry::cube(0.1);
    const std::string path = "geometry_roundtrip_test.txt";
    save_geometry(g, path);
    const ArrayGeometry back = load_geometry(path);
    REQUIRE(back.mic_count() == g.mic_count());
    for (int i = 0; i < g.mic_count(); ++i)
      CHECK((back.mic_positions[i] - g.mic_positions[i]).norm() < 1e-6);
    CHECK(back.speed_of_sound == doctest::Approx(g.speed_of_sound));
    std::remove(path.c_str());
  }

  SUBCASE("malformed rows throw") {
    std::istringstream bad1("0.05 0.05\n0 0 0\n");
    CHECK_THROWS_AS(parse_geometry(bad1), MalformedRow);
    std::istringstream bad2("a b c\n");
    CHECK_THROWS_AS(parse_geometry(bad2), MalformedRow);
    std::istringstream one_mic("0 0 0\n");
    CHECK_THROWS_AS(parse_geometry(one_mic), InvalidGeometry);
    CHECK_THROWS_AS(load_geometry("missing_file.txt"), FileNotFound);
  }
}
