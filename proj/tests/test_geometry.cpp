#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "vlcsim/geometry.hpp"

using namespace vlcsim;
using Catch::Approx;

TEST_CASE("direction from azimuth and elevation hits the reference axes") {
  const Vec3 up = direction_from_az_el(Orientation(0, 90));
  CHECK(up.x == Approx(0.0).margin(1e-15));
  CHECK(up.y == Approx(0.0).margin(1e-15));
  CHECK(up.z == Approx(1.0).margin(1e-15));

  const Vec3 north = direction_from_az_el(Orientation(90, 0));
  CHECK(north.x == Approx(0.0).margin(1e-15));
  CHECK(north.y == Approx(1.0).margin(1e-15));
  CHECK(north.z == Approx(0.0).margin(1e-15));

  const Vec3 branch = direction_from_az_el(Orientation(45, -70));
  CHECK(branch.x == Approx(0.24184476264797533).margin(1e-12));
  CHECK(branch.y == Approx(0.24184476264797533).margin(1e-12));
  CHECK(branch.z == Approx(-0.9396926207859083).margin(1e-12));
}

TEST_CASE("orientation validates its angle ranges") {
  CHECK_THROWS_AS(Orientation(360.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Orientation(-1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Orientation(0.0, 91.0), std::invalid_argument);
  CHECK_THROWS_AS(Orientation(0.0, -91.0), std::invalid_argument);
  CHECK_NOTHROW(Orientation(359.999, 90.0));
}

TEST_CASE("direction vectors are unit length for random orientations") {
  std::mt19937_64 rng(20260822);
  std::uniform_real_distribution<double> az(0.0, 359.999999);
  std::uniform_real_distribution<double> el(-90.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 dir = direction_from_az_el(Orientation(az(rng), el(rng)));
    REQUIRE(dir.norm() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("azimuth and elevation round-trip through a direction") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> az(0.0, 359.999);
  std::uniform_real_distribution<double> el(-89.0, 89.0);
  for (int i = 0; i < 200; ++i) {
    const Orientation o(az(rng), el(rng));
    const Orientation back = az_el_from_direction(direction_from_az_el(o));
    REQUIRE(back.azimuth_deg == Approx(o.azimuth_deg).margin(1e-9));
    REQUIRE(back.elevation_deg == Approx(o.elevation_deg).margin(1e-9));
  }
  const Orientation pole = az_el_from_direction({0, 0, 1});
  CHECK(pole.azimuth_deg == 0.0);
  CHECK(pole.elevation_deg == Approx(90.0).margin(1e-12));
}

namespace {

Surface default_ceiling() {
  return {"ceiling", {0, 0, 3}, {0, 8, 0}, {4, 0, 0}, 0.8};
}

}  // namespace

TEST_CASE("mesh counts match the default pitches") {
  CHECK(mesh_surface(default_ceiling(), 0.05).size() == 12800);
  CHECK(mesh_surface(default_ceiling(), 0.20).size() == 800);
  CHECK_THROWS_AS(mesh_surface(default_ceiling(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mesh_surface(default_ceiling(), -0.1), std::invalid_argument);
}

TEST_CASE("mesh elements tile the surface area exactly with unique interior centers") {
  const Surface ceiling = default_ceiling();
  const auto elements = mesh_surface(ceiling, 0.20);
  double total = 0.0;
  std::set<std::pair<double, double>> centers;
  for (const SurfaceElement& e : elements) {
    total += e.area;
    CHECK(e.position.x > 0.0);
    CHECK(e.position.x < 4.0);
    CHECK(e.position.y > 0.0);
    CHECK(e.position.y < 8.0);
    CHECK(e.position.z == 3.0);
    CHECK(e.reflectivity == 0.8);
    centers.insert({e.position.x, e.position.y});
  }
  CHECK(centers.size() == elements.size());
  CHECK(total == Approx(ceiling.area()).epsilon(1e-9));
}

TEST_CASE("mesh stretches a non-dividing pitch and still conserves area") {
  const Surface patch{"patch", {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, 0.5};
  const auto elements = mesh_surface(patch, 0.3);
  REQUIRE(elements.size() == 9);  // floor(1/0.3) = 3 per axis, stretched to fit
  double total = 0.0;
  for (const SurfaceElement& e : elements) total += e.area;
  CHECK(total == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mesh ordering is row-major with the first edge index slowest") {
  const Surface patch{"patch", {0, 0, 0}, {2, 0, 0}, {0, 1, 0}, 0.5};
  const auto elements = mesh_surface(patch, 0.5);
  REQUIRE(elements.size() == 8);  // 4 x 2
  CHECK(elements[0].position.x == Approx(0.25));
  CHECK(elements[0].position.y == Approx(0.25));
  CHECK(elements[1].position.x == Approx(0.25));
  CHECK(elements[1].position.y == Approx(0.75));
  CHECK(elements[2].position.x == Approx(0.75));
  CHECK(elements[2].position.y == Approx(0.25));
}

TEST_CASE("default room carries six inward surfaces and both meshes") {
  const Room room = build_room({});
  REQUIRE(room.surfaces.size() == 6);
  CHECK(room.fine_elements.size() == 54400);
  CHECK(room.coarse_elements.size() == 3400);

  const Vec3 floor_n = room.surfaces[0].normal();
  CHECK(floor_n.z == Approx(1.0));
  const Vec3 ceiling_n = room.surfaces[1].normal();
  CHECK(ceiling_n.z == Approx(-1.0));
  CHECK(room.surfaces[2].normal().x == Approx(1.0));   // wall at x = 0
  CHECK(room.surfaces[3].normal().x == Approx(-1.0));  // wall at x = width
  CHECK(room.surfaces[4].normal().y == Approx(1.0));   // wall at y = 0
  CHECK(room.surfaces[5].normal().y == Approx(-1.0));  // wall at y = length

  CHECK(room.surfaces[0].reflectivity == 0.3);
  CHECK(room.surfaces[1].reflectivity == 0.8);
  CHECK(room.surfaces[2].reflectivity == 0.8);

  CHECK(room.contains({2, 4, 1}));
  CHECK(room.contains({0, 0, 0}));
  CHECK(room.contains({4, 8, 3}));
  CHECK_FALSE(room.contains({4.001, 4, 1}));
  CHECK_FALSE(room.contains({2, -0.001, 1}));
}

TEST_CASE("unit cube at half-meter pitch meshes into 24 elements") {
  RoomConfig cfg;
  cfg.width = cfg.length = cfg.height = 1.0;
  cfg.fine_element_size = 0.5;
  cfg.coarse_element_size = 0.5;
  const Room room = build_room(cfg);
  CHECK(room.fine_elements.size() == 24);
  CHECK(room.coarse_elements.size() == 24);
}

TEST_CASE("room mesh normals point inward everywhere") {
  const Room room = build_room({});
  const Vec3 center{2, 4, 1.5};
  for (std::size_t i = 0; i < room.coarse_elements.size(); ++i) {
    const SurfaceElement& e = room.coarse_elements[i];
    REQUIRE(dot(e.normal, center - e.position) > 0.0);
  }
}

TEST_CASE("room construction rejects bad dimensions and reflectivities") {
  RoomConfig bad_dim;
  bad_dim.width = 0.0;
  CHECK_THROWS_AS(build_room(bad_dim), std::invalid_argument);

  RoomConfig bad_rho;
  bad_rho.rho_walls = 1.3;
  CHECK_THROWS_AS(build_room(bad_rho), std::invalid_argument);

  RoomConfig negative_rho;
  negative_rho.rho_floor = -0.1;
  CHECK_THROWS_AS(build_room(negative_rho), std::invalid_argument);
}
