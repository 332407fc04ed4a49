#pragma once

#include <array>
#include <vector>

#include "vlcsim/core.hpp"

namespace vlcsim {

// Generalized Lambertian emitter. Radiant intensity falls off as cos^n of
// the angle from the pointing axis; n sets the beam width. The same pattern
// carries an optical power (for link budgets) and a luminous flux (for
// illuminance), which scale independently.
struct Beam {
  Vec3 position;
  Vec3 pointing;  // unit vector
  double lambertian_order_n{1};
  double optical_power_w{0};
  double luminous_flux_lm{0};
};

// Order n with half-power angle phi_half: cos^n(phi_half) = 1/2.
inline double lambertian_order_from_half_angle(double phi_half_deg) {
  if (!(phi_half_deg > 0.0 && phi_half_deg < 90.0))
    throw std::invalid_argument("lambertian_order_from_half_angle: angle " +
                                std::to_string(phi_half_deg) + " outside (0, 90)");
  return -std::log(2.0) / std::log(std::cos(deg_to_rad(phi_half_deg)));
}

// Half-power angle back from the order, the inverse of the above.
inline double half_angle_from_lambertian_order(double n) {
  if (!(n > 0.0))
    throw std::invalid_argument("half_angle_from_lambertian_order: order must be positive");
  return rad_to_deg(std::acos(std::pow(0.5, 1.0 / n)));
}

// I(phi) = P (n+1)/(2 pi) cos^n(phi) [W/sr], zero outside the forward
// hemisphere. Integrates to the optical power over the hemisphere.
inline double radiant_intensity(const Beam& b, const Vec3& direction) {
  const double cos_phi = dot(b.pointing, direction);
  if (cos_phi <= 0.0) return 0.0;
  return b.optical_power_w * (b.lambertian_order_n + 1.0) / (2.0 * kPi) *
         std::pow(cos_phi, b.lambertian_order_n);
}

// Same pattern in photometric units [cd], driven by the luminous flux.
inline double luminous_intensity(const Beam& b, const Vec3& direction) {
  const double cos_phi = dot(b.pointing, direction);
  if (cos_phi <= 0.0) return 0.0;
  return b.luminous_flux_lm * (b.lambertian_order_n + 1.0) / (2.0 * kPi) *
         std::pow(cos_phi, b.lambertian_order_n);
}

// One transmitter branch: three collocated, co-pointed laser-diode modules.
// Radiometrically the branch behaves as a single source of the summed power,
// which combined() exposes for channel computations.
struct Branch {
  std::array<Beam, 3> beams;
  Orientation orientation;
  int unit_id{0};
  int branch_id{0};

  double optical_power_w() const {
    return beams[0].optical_power_w + beams[1].optical_power_w + beams[2].optical_power_w;
  }
  double luminous_flux_lm() const {
    return beams[0].luminous_flux_lm + beams[1].luminous_flux_lm + beams[2].luminous_flux_lm;
  }
  Beam combined() const {
    Beam b = beams[0];
    b.optical_power_w = optical_power_w();
    b.luminous_flux_lm = luminous_flux_lm();
    return b;
  }
};

enum class UnitKind { Adt, Illum };

// Ceiling light unit. Adt units group four down-tilted branches covering the
// four diagonal directions; Illum units hold collocated wide beams pointing
// straight down.
struct LightUnit {
  UnitKind kind{UnitKind::Adt};
  int id{0};
  Vec3 position;
  std::vector<Branch> branches;  // Adt: 4
  std::vector<Beam> beams;       // Illum: 9
};

inline constexpr double kAdtElevationDeg = -70.0;

namespace detail {

inline Branch make_branch(const Vec3& position, const Orientation& orientation, double order_n,
                          double per_ld_power_w, double per_ld_flux_lm, int unit_id,
                          int branch_id) {
  Beam beam;
  beam.position = position;
  beam.pointing = direction_from_az_el(orientation);
  beam.lambertian_order_n = order_n;
  beam.optical_power_w = per_ld_power_w;
  beam.luminous_flux_lm = per_ld_flux_lm;
  Branch branch;
  branch.beams = {beam, beam, beam};
  branch.orientation = orientation;
  branch.unit_id = unit_id;
  branch.branch_id = branch_id;
  return branch;
}

}  // namespace detail

// Communication units: a 2 x 4 ceiling grid (x in {1, 3}, y in {1, 3, 5, 7}),
// each with four branches at azimuths 45/135/225/315 tilted 70 degrees below
// the horizontal. Unit ids run x-major in that position order.
inline std::vector<LightUnit> build_adt_units(double per_ld_power_w, double per_ld_flux_lm,
                                              double half_angle_deg = 21.0,
                                              double ceiling_z = 3.0) {
  if (per_ld_power_w < 0.0 || per_ld_flux_lm < 0.0)
    throw std::invalid_argument("build_adt_units: power and flux must be non-negative");
  const double order_n = lambertian_order_from_half_angle(half_angle_deg);
  std::vector<LightUnit> units;
  int id = 0;
  for (double x : {1.0, 3.0}) {
    for (double y : {1.0, 3.0, 5.0, 7.0}) {
      LightUnit unit;
      unit.kind = UnitKind::Adt;
      unit.id = id;
      unit.position = {x, y, ceiling_z};
      for (int b = 0; b < 4; ++b) {
        unit.branches.push_back(detail::make_branch(
            unit.position, Orientation(kBranchAzimuthsDeg[static_cast<std::size_t>(b)],
                                       kAdtElevationDeg),
            order_n, per_ld_power_w, per_ld_flux_lm, id, b));
      }
      units.push_back(std::move(unit));
      ++id;
    }
  }
  return units;
}

// A wide-angle unit: beam_count collocated modules pointing straight down
// with the given semi-angle. Used for the ceiling illumination row and for
// non-diversity comparison layouts.
inline LightUnit make_wide_unit(int id, const Vec3& position, int beam_count,
                                double per_ld_power_w, double per_ld_flux_lm,
                                double semi_angle_deg) {
  if (beam_count < 1) throw std::invalid_argument("make_wide_unit: beam count must be >= 1");
  const double order_n = lambertian_order_from_half_angle(semi_angle_deg);
  LightUnit unit;
  unit.kind = UnitKind::Illum;
  unit.id = id;
  unit.position = position;
  Beam beam;
  beam.position = position;
  beam.pointing = {0.0, 0.0, -1.0};
  beam.lambertian_order_n = order_n;
  beam.optical_power_w = per_ld_power_w;
  beam.luminous_flux_lm = per_ld_flux_lm;
  unit.beams.assign(static_cast<std::size_t>(beam_count), beam);
  return unit;
}

// Illumination-only units: five 9-module units along the room centreline
// x = 2, y in {1, 2.5, 4, 5.5, 7}. They carry luminous flux for lighting and
// by default no modulated optical power.
inline std::vector<LightUnit> build_illum_units(double per_ld_flux_lm,
                                                double per_ld_power_w = 0.0,
                                                double semi_angle_deg = 70.0,
                                                double ceiling_z = 3.0) {
  if (per_ld_flux_lm < 0.0 || per_ld_power_w < 0.0)
    throw std::invalid_argument("build_illum_units: power and flux must be non-negative");
  std::vector<LightUnit> units;
  int id = 0;
  for (double y : {1.0, 2.5, 4.0, 5.5, 7.0}) {
    units.push_back(
        make_wide_unit(id, {2.0, y, ceiling_z}, 9, per_ld_power_w, per_ld_flux_lm,
                       semi_angle_deg));
    ++id;
  }
  return units;
}

// Flattens units into the individual beams, units by list order, branches by
// id, beams by slot. Illuminance and whole-scene power sums iterate this.
inline std::vector<Beam> all_beams(const std::vector<LightUnit>& units) {
  std::vector<Beam> beams;
  for (const LightUnit& unit : units) {
    for (const Branch& branch : unit.branches)
      for (const Beam& beam : branch.beams) beams.push_back(beam);
    for (const Beam& beam : unit.beams) beams.push_back(beam);
  }
  return beams;
}

// One beam per branch (summed power) and per wide unit, in unit/branch id
// order. This is the source list channel computations consume; collapsing
// collocated co-pointed modules changes no physics, only the bookkeeping.
inline std::vector<Beam> collapsed_beams(const std::vector<LightUnit>& units) {
  std::vector<Beam> beams;
  for (const LightUnit& unit : units) {
    for (const Branch& branch : unit.branches) beams.push_back(branch.combined());
    if (!unit.beams.empty()) {
      Beam b = unit.beams[0];
      for (std::size_t i = 1; i < unit.beams.size(); ++i) {
        b.optical_power_w += unit.beams[i].optical_power_w;
        b.luminous_flux_lm += unit.beams[i].luminous_flux_lm;
      }
      beams.push_back(b);
    }
  }
  return beams;
}

}  // namespace vlcsim
