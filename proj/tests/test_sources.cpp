#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vlcsim/sources.hpp"

using namespace vlcsim;
using Catch::Approx;

TEST_CASE("lambertian order from half-power angle") {
  CHECK(lambertian_order_from_half_angle(60.0) == Approx(1.0).margin(1e-12));
  CHECK(lambertian_order_from_half_angle(21.0) == Approx(10.084).margin(0.01));
  CHECK(lambertian_order_from_half_angle(21.0) ==
        Approx(10.085344082193478).epsilon(1e-12));
  CHECK(lambertian_order_from_half_angle(70.0) == Approx(0.6463).margin(0.001));
  CHECK(lambertian_order_from_half_angle(70.0) == Approx(0.646058770348734).epsilon(1e-12));
  CHECK(lambertian_order_from_half_angle(1.75) == Approx(1485.788825436765).epsilon(1e-9));
  CHECK_THROWS_AS(lambertian_order_from_half_angle(0.0), std::invalid_argument);
  CHECK_THROWS_AS(lambertian_order_from_half_angle(90.0), std::invalid_argument);
  CHECK_THROWS_AS(lambertian_order_from_half_angle(-5.0), std::invalid_argument);
}

TEST_CASE("half angle and order are inverse maps") {
  for (double angle : {1.75, 10.0, 21.0, 45.0, 60.0, 70.0, 85.0}) {
    const double n = lambertian_order_from_half_angle(angle);
    REQUIRE(half_angle_from_lambertian_order(n) == Approx(angle).epsilon(1e-12));
  }
  CHECK_THROWS_AS(half_angle_from_lambertian_order(0.0), std::invalid_argument);
}

namespace {

Beam axis_beam(double n, double power_w) {
  Beam b;
  b.position = {0, 0, 0};
  b.pointing = {0, 0, 1};
  b.lambertian_order_n = n;
  b.optical_power_w = power_w;
  return b;
}

Vec3 tilted(double phi_deg) {
  const double phi = deg_to_rad(phi_deg);
  return {std::sin(phi), 0, std::cos(phi)};
}

}  // namespace

TEST_CASE("radiant intensity follows the generalized Lambertian pattern") {
  CHECK(radiant_intensity(axis_beam(1.0, 1.0), {0, 0, 1}) ==
        Approx(1.0 / kPi).margin(1e-12));
  // Exactly tangent (dot is exactly zero); tilted(90) would carry the
  // rounded cosine 6.1e-17 and a denormal-sized intensity with it.
  CHECK(radiant_intensity(axis_beam(5.0, 2.0), {1, 0, 0}) == 0.0);
  CHECK(radiant_intensity(axis_beam(5.0, 2.0), {0, 0, -1}) == 0.0);

  const double n21 = lambertian_order_from_half_angle(21.0);
  const double at_half = radiant_intensity(axis_beam(n21, 1.0), tilted(21.0));
  CHECK(at_half == Approx(0.8819).margin(1e-3));
  const double on_axis = radiant_intensity(axis_beam(n21, 1.0), {0, 0, 1});
  CHECK(at_half / on_axis == Approx(0.5).epsilon(1e-9));
}

TEST_CASE("radiant intensity is non-increasing in the off-axis angle") {
  for (double n : {0.65, 1.0, 10.08}) {
    const Beam b = axis_beam(n, 1.0);
    double prev = radiant_intensity(b, tilted(0.0));
    for (double phi = 0.5; phi <= 90.0; phi += 0.5) {
      const double cur = radiant_intensity(b, tilted(phi));
      REQUIRE(cur <= prev + 1e-15);
      prev = cur;
    }
  }
}

TEST_CASE("hemisphere integral of the intensity recovers the optical power") {
  // Midpoint rule over the polar angle; the azimuthal integral is 2 pi by
  // symmetry, giving integral of I(phi) 2 pi sin(phi) d phi.
  for (double n : {0.65, 1.0, 10.08}) {
    const Beam b = axis_beam(n, 1.0);
    const int steps = 10000;
    const double h = (kPi / 2.0) / steps;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double phi = (i + 0.5) * h;
      const Vec3 dir{std::sin(phi), 0, std::cos(phi)};
      integral += radiant_intensity(b, dir) * 2.0 * kPi * std::sin(phi) * h;
    }
    REQUIRE(integral == Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("luminous intensity scales with flux, not power") {
  Beam b = axis_beam(1.0, 0.0);
  b.luminous_flux_lm = 100.0;
  CHECK(luminous_intensity(b, {0, 0, 1}) == Approx(100.0 / kPi).epsilon(1e-12));
  CHECK(radiant_intensity(b, {0, 0, 1}) == 0.0);
}

TEST_CASE("communication units form the 2x4 ceiling grid with four branches each") {
  const auto units = build_adt_units(0.5, 100.0);
  REQUIRE(units.size() == 8);
  int branch_count = 0;
  double total_power = 0.0;
  for (const LightUnit& unit : units) {
    REQUIRE(unit.branches.size() == 4);
    branch_count += static_cast<int>(unit.branches.size());
    for (const Branch& branch : unit.branches) {
      REQUIRE(branch.beams.size() == 3);
      total_power += branch.optical_power_w();
    }
  }
  CHECK(branch_count == 32);
  CHECK(total_power == Approx(48.0).epsilon(1e-12));

  CHECK(units[0].position.x == 1.0);
  CHECK(units[0].position.y == 1.0);
  CHECK(units[3].position.y == 7.0);
  CHECK(units[4].position.x == 3.0);
  CHECK(units[4].position.y == 1.0);
  CHECK(units[7].position.x == 3.0);
  CHECK(units[7].position.y == 7.0);
  for (const LightUnit& unit : units) CHECK(unit.position.z == 3.0);
}

TEST_CASE("communication branches tilt 70 degrees below the horizontal") {
  const auto units = build_adt_units(0.5, 100.0);
  const LightUnit& unit = units[0];
  double sum_x = 0.0, sum_y = 0.0;
  for (const Branch& branch : unit.branches) {
    const Vec3 p = branch.beams[0].pointing;
    REQUIRE(p.z == Approx(-0.9396926207859083).margin(1e-12));
    sum_x += p.x;
    sum_y += p.y;
  }
  CHECK(sum_x == Approx(0.0).margin(1e-12));
  CHECK(sum_y == Approx(0.0).margin(1e-12));
  CHECK(unit.branches[0].orientation.azimuth_deg == 45.0);
  CHECK(unit.branches[3].orientation.azimuth_deg == 315.0);
}

TEST_CASE("branch combines its modules into one source") {
  const auto units = build_adt_units(0.5, 100.0);
  const Branch& branch = units[2].branches[1];
  CHECK(branch.optical_power_w() == Approx(1.5).epsilon(1e-15));
  CHECK(branch.luminous_flux_lm() == Approx(300.0).epsilon(1e-15));
  const Beam combined = branch.combined();
  CHECK(combined.optical_power_w == Approx(1.5).epsilon(1e-15));
  CHECK(combined.lambertian_order_n == branch.beams[0].lambertian_order_n);
  CHECK(combined.position.x == units[2].position.x);
}

TEST_CASE("illumination units sit on the x = 2 line pointing straight down") {
  const auto units = build_illum_units(100.0);
  REQUIRE(units.size() == 5);
  int beams = 0;
  for (const LightUnit& unit : units) {
    REQUIRE(unit.branches.empty());
    beams += static_cast<int>(unit.beams.size());
    for (const Beam& b : unit.beams) {
      REQUIRE(b.pointing.z == -1.0);
      REQUIRE(b.lambertian_order_n == Approx(0.6463).margin(0.001));
      REQUIRE(b.optical_power_w == 0.0);  // lighting only by default
    }
  }
  CHECK(beams == 45);
  CHECK(units[3].position.x == 2.0);
  CHECK(units[3].position.y == 5.5);
  CHECK(units[2].position.y == 4.0);
}

TEST_CASE("beam listings expand or collapse unit structure") {
  const auto adt = build_adt_units(0.5, 100.0);
  CHECK(all_beams(adt).size() == 96);        // 8 units x 4 branches x 3 modules
  CHECK(collapsed_beams(adt).size() == 32);  // one beam per branch

  std::vector<LightUnit> wide{make_wide_unit(0, {1, 1, 3}, 9, 2.0 / 3.0, 100.0, 70.0)};
  CHECK(all_beams(wide).size() == 9);
  const auto collapsed = collapsed_beams(wide);
  REQUIRE(collapsed.size() == 1);
  CHECK(collapsed[0].optical_power_w == Approx(6.0).epsilon(1e-12));
}

TEST_CASE("negative unit parameters are rejected") {
  CHECK_THROWS_AS(build_adt_units(-0.5, 100.0), std::invalid_argument);
  CHECK_THROWS_AS(build_adt_units(0.5, -1.0), std::invalid_argument);
}
