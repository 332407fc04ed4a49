#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "vlcsim/metrics.hpp"

using namespace vlcsim;
using Catch::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ArrivalList taps(std::initializer_list<std::pair<double, double>> time_power) {
  ArrivalList list;
  for (const auto& [t, p] : time_power) list.arrivals.push_back({t, p, 0});
  return list;
}

NoiseModel preamp_only_noise() {
  NoiseModel noise;
  noise.electron_charge_c = 0.0;
  return noise;
}

}  // namespace

TEST_CASE("delay spread matches hand-computed two-tap profiles") {
  const ArrivalList two = taps({{1e-9, 1e-6}, {2e-9, 3e-6}});
  CHECK(delay_spread(two) == Approx(4.3301270189221936e-10).epsilon(1e-9));
  CHECK(delay_spread(two, DelayWeighting::PowerSquared) == Approx(3e-10).epsilon(1e-9));
  CHECK(delay_spread(taps({{0, 1e-6}, {1e-9, 1e-6}})) == Approx(5e-10).epsilon(1e-9));
  CHECK(delay_spread(taps({{4e-9, 2e-6}})) == 0.0);
}

TEST_CASE("delay spread is invariant under power scaling and time translation") {
  const ArrivalList base = taps({{1e-9, 1e-6}, {1.3e-9, 5e-7}, {2.2e-9, 3e-6}});
  const double ds = delay_spread(base);

  // Power-of-two scaling changes every intermediate double by an exponent
  // bump only, so the result is bit-identical.
  ArrivalList scaled = base;
  for (Arrival& a : scaled.arrivals) a.power_w *= 4.0;
  CHECK(delay_spread(scaled) == ds);

  ArrivalList shifted = base;
  for (Arrival& a : shifted.arrivals) a.time_s += 1e-6;
  CHECK(delay_spread(shifted) == Approx(ds).epsilon(1e-9));
}

TEST_CASE("delay spread rejects profiles with no usable power") {
  CHECK_THROWS_AS(delay_spread(ArrivalList{}), UndefinedMetricError);
  CHECK_THROWS_AS(delay_spread(taps({{1e-9, 0.0}, {2e-9, 0.0}})), UndefinedMetricError);
}

TEST_CASE("eye powers split at one bit period after the first arrival") {
  const double rate = 1e9;  // period 1 ns
  SECTION("single tap is all signal") {
    const auto [p1, p0] = p1_p0_from_arrivals(taps({{5e-9, 2e-6}}), rate);
    CHECK(p1 == 2e-6);
    CHECK(p0 == 0.0);
  }
  SECTION("taps inside the period stay in p1") {
    const auto [p1, p0] = p1_p0_from_arrivals(taps({{0, 1e-6}, {0.99e-9, 1e-6}}), rate);
    CHECK(p1 == 2e-6);
    CHECK(p0 == 0.0);
  }
  SECTION("a tap exactly one period late is interference") {
    const auto [p1, p0] = p1_p0_from_arrivals(taps({{0, 1e-6}, {1e-9, 5e-7}}), rate);
    CHECK(p1 == 1e-6);
    CHECK(p0 == 5e-7);
  }
  SECTION("degenerate inputs") {
    CHECK_THROWS_AS(p1_p0_from_arrivals(ArrivalList{}, rate), UndefinedMetricError);
    CHECK_THROWS_AS(p1_p0_from_arrivals(taps({{0, 1e-6}}), 0.0), std::invalid_argument);
  }
}

TEST_CASE("OOK SNR matches the frozen reference point") {
  const NoiseModel noise;
  CHECK(snr_ook(1e-6, 0.0, 0.4, noise, 1e10) ==
        Approx(-5.508341267444791).margin(1e-6));
}

TEST_CASE("OOK SNR gains 6 dB per doubled eye opening at fixed noise") {
  const NoiseModel noise = preamp_only_noise();
  const double lo = snr_ook(1e-6, 0.0, 0.4, noise, 1e9);
  const double hi = snr_ook(2e-6, 0.0, 0.4, noise, 1e9);
  CHECK(hi - lo == Approx(6.020599913279624).margin(1e-9));
}

TEST_CASE("OOK SNR is monotone in the eye opening and in the noise floor") {
  const NoiseModel noise;
  double prev = -kInf;
  for (double p1 : {1e-7, 3e-7, 1e-6, 3e-6, 1e-5}) {
    const double cur = snr_ook(p1, 0.0, 0.4, noise, 2e9);
    REQUIRE(cur > prev);
    prev = cur;
  }
  // Raising p0 at fixed p1 closes the eye and adds shot noise.
  REQUIRE(snr_ook(1e-6, 2e-7, 0.4, noise, 2e9) < snr_ook(1e-6, 1e-7, 0.4, noise, 2e9));
}

TEST_CASE("OOK SNR covers the degenerate corners") {
  const NoiseModel noise;
  CHECK(snr_ook(1e-6, 1e-6, 0.4, noise, 1e9) == -kInf);

  NoiseModel zero;
  zero.preamp_density_a_hz = 0.0;
  zero.electron_charge_c = 0.0;
  CHECK(snr_ook(1e-6, 0.0, 0.4, zero, 1e9) == kInf);
  CHECK_THROWS_AS(snr_ook(1e-6, 1e-6, 0.4, zero, 1e9), UndefinedMetricError);

  CHECK_THROWS_AS(snr_ook(1e-6, 2e-6, 0.4, noise, 1e9), std::invalid_argument);
  CHECK_THROWS_AS(snr_ook(-1e-6, 0.0, 0.4, noise, 1e9), std::invalid_argument);
  CHECK_THROWS_AS(snr_ook(1e-6, 0.0, 0.4, noise, 0.0), std::invalid_argument);
}

TEST_CASE("Gaussian tail BER behaves like Q of the root SNR") {
  CHECK(q_to_ber(-kInf) == 0.5);
  CHECK(q_to_ber(15.56) == Approx(9.993614932711492e-10).epsilon(1e-9));
  double prev = 1.0;
  for (double snr_db = 0.0; snr_db <= 20.0; snr_db += 0.5) {
    const double ber = q_to_ber(snr_db);
    REQUIRE(ber > 0.0);
    REQUIRE(ber <= 0.5);
    REQUIRE(ber < prev);
    prev = ber;
  }
}

TEST_CASE("maximum data rate picks the largest passing grid point") {
  const std::vector<double> grid = {5e8, 1e9, 1.5e9};
  auto step_snr = [](double rate) { return rate <= 1e9 ? 20.0 : 10.0; };
  auto rate = max_data_rate(step_snr, grid, 15.6);
  REQUIRE(rate.has_value());
  CHECK(*rate == 1e9);

  CHECK_FALSE(max_data_rate([](double) { return 3.0; }, grid, 15.6).has_value());
  CHECK(*max_data_rate([](double) { return 20.0; }, grid, 0.0) == 1.5e9);
  // Threshold is inclusive.
  CHECK(*max_data_rate([](double) { return 15.6; }, grid, 15.6) == 1.5e9);
  // A dip in the middle must not hide a passing higher rate.
  auto notch = [](double rate) { return rate == 1e9 ? 0.0 : 20.0; };
  CHECK(*max_data_rate(notch, grid, 15.6) == 1.5e9);
}

TEST_CASE("default rate grid spans half to thirty gigabit in tenth steps") {
  const std::vector<double> grid = default_rate_grid();
  REQUIRE(grid.size() == 296);
  CHECK(grid.front() == 5e8);
  CHECK(grid.back() == 3e10);
  for (std::size_t k : {std::size_t{1}, std::size_t{100}, std::size_t{295}})
    REQUIRE(grid[k] == 5e8 + static_cast<double>(k) * 1e8);
  CHECK_THROWS_AS(default_rate_grid(5e8, 3e10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(default_rate_grid(0.0, 3e10, 1e8), std::invalid_argument);
  CHECK_THROWS_AS(default_rate_grid(3e10, 5e8, 1e8), std::invalid_argument);
}

TEST_CASE("illuminance from one downward source matches the closed form") {
  const Room room = build_room({});
  const std::vector<LightUnit> units = {make_wide_unit(0, {2, 4, 3}, 1, 0.0, 100.0, 70.0)};
  // Straight below at height 2: E = flux (n + 1) / (2 pi h^2).
  CHECK(illuminance_at({2, 4, 1}, units, room) == Approx(6.5494597480192).epsilon(1e-9));

  const std::vector<LightUnit> dark = {make_wide_unit(0, {2, 4, 3}, 1, 0.0, 0.0, 70.0)};
  CHECK(illuminance_at({2, 4, 1}, dark, room) == 0.0);
  CHECK_THROWS_AS(illuminance_at({5, 4, 0}, units, room), std::invalid_argument);
}

TEST_CASE("illuminance grid covers the floor edge to edge") {
  const Room room = build_room({});
  const std::vector<LightUnit> units = build_illum_units(100.0);
  const IlluminanceGrid grid = compute_illuminance_grid(units, room, 0.1);
  REQUIRE(grid.nx == 41);
  REQUIRE(grid.ny == 81);
  REQUIRE(grid.values_lx.size() == grid.nx * grid.ny);
  CHECK(grid.min_lx == *std::min_element(grid.values_lx.begin(), grid.values_lx.end()));
  CHECK(grid.max_lx == *std::max_element(grid.values_lx.begin(), grid.values_lx.end()));
  REQUIRE(grid.min_lx > 0.0);

  // Spot values come from the same pure function on the same grid points.
  const Vec3 p{static_cast<double>(5) * grid.step_m, static_cast<double>(17) * grid.step_m,
               0.0};
  CHECK(grid.value(5, 17) == illuminance_at(p, units, room));
  CHECK_THROWS_AS(compute_illuminance_grid(units, room, 0.0), std::invalid_argument);
}

TEST_CASE("flux calibration scales the grid minimum onto the target") {
  IlluminanceGrid g;
  g.min_lx = 156.85;
  CHECK(calibrate_flux(313.7, g) == 2.0);
  CHECK_THROWS_AS(calibrate_flux(0.0, g), std::invalid_argument);
  g.min_lx = 0.0;
  CHECK_THROWS_AS(calibrate_flux(313.7, g), UndefinedMetricError);
}

TEST_CASE("flux scaling is exactly linear in the illuminance") {
  const Room room = build_room({});
  std::vector<LightUnit> units = build_illum_units(100.0);
  const double before = illuminance_at({1.3, 2.7, 0}, units, room);
  scale_flux(units, 2.0);
  CHECK(illuminance_at({1.3, 2.7, 0}, units, room) == 2.0 * before);
  CHECK_THROWS_AS(scale_flux(units, 0.0), std::invalid_argument);
}

TEST_CASE("calibrated lighting hits the illuminance floor target") {
  const Room room = build_room({});
  std::vector<LightUnit> units = build_illum_units(100.0);
  const IlluminanceGrid before = compute_illuminance_grid(units, room, 0.1);
  const double scale = calibrate_flux(313.7, before);
  scale_flux(units, scale);
  const IlluminanceGrid after = compute_illuminance_grid(units, room, 0.1);
  CHECK(after.min_lx == Approx(313.7).epsilon(1e-9));
}

TEST_CASE("branch selection takes the highest SNR and breaks ties low") {
  const NoiseModel noise;
  const double rate = 1e9;
  std::array<ArrivalList, 4> responses;
  responses[0] = taps({{0, 4e-6}});
  responses[1] = taps({{0, 1e-5}});
  responses[2] = ArrivalList{};
  responses[3] = taps({{0, 1e-5}});

  const BranchLink best = best_branch_link(responses, 0.4, noise, rate);
  CHECK(best.branch_index == 1);
  CHECK(best.p1_w == 1e-5);
  CHECK(best.p0_w == 0.0);
  CHECK(best.snr_db == snr_ook(1e-5, 0.0, 0.4, noise, rate));
}

TEST_CASE("branch selection treats dead and closed-eye branches alike") {
  const NoiseModel noise;
  std::array<ArrivalList, 4> empty{};
  CHECK(best_branch_link(empty, 0.4, noise, 1e9).snr_db == -kInf);

  // Tail heavier than the first bit: the eye is closed.
  std::array<ArrivalList, 4> closed{};
  closed[2] = taps({{0, 1e-6}, {1.0, 2e-6}});
  CHECK(best_branch_link(closed, 0.4, noise, 1e9).snr_db == -kInf);
}

TEST_CASE("maximal ratio combining adds branch SNRs linearly") {
  const NoiseModel noise = preamp_only_noise();
  const double rate = 1e9;
  std::array<ArrivalList, 4> responses;
  for (auto& r : responses) r = taps({{0, 1e-6}});

  const double single = best_branch_link(responses, 0.4, noise, rate).snr_db;
  const double combined = mrc_snr_db(responses, 0.4, noise, rate);
  CHECK(combined - single == Approx(6.020599913279624).margin(1e-9));

  // Combining never loses to selection.
  responses[1] = taps({{0, 3e-6}});
  responses[2] = ArrivalList{};
  CHECK(mrc_snr_db(responses, 0.4, noise, rate) >=
        best_branch_link(responses, 0.4, noise, rate).snr_db);

  std::array<ArrivalList, 4> empty{};
  CHECK(mrc_snr_db(empty, 0.4, noise, rate) == -kInf);
}
