#pragma once

#include <array>

#include "vlcsim/core.hpp"
#include "vlcsim/geometry.hpp"

namespace vlcsim {

// Narrow field-of-view photodetector. Light inside the FOV cone sees the
// projected area A cos(delta); light outside is rejected outright. There is
// no concentrator, so the gain never exceeds the bare detector area.
struct DetectorBranch {
  Orientation orientation;
  Vec3 normal;  // unit vector
  double area_m2{4e-6};
  double responsivity_a_per_w{0.4};
  double fov_deg{21.0};
  double cos_fov{0.0};  // cached acceptance threshold, cos(fov)
};

inline DetectorBranch make_detector_branch(const Orientation& orientation, double area_m2,
                                           double responsivity_a_per_w, double fov_deg) {
  if (!(area_m2 > 0.0))
    throw std::invalid_argument("make_detector_branch: area must be positive");
  if (!(fov_deg > 0.0 && fov_deg <= 90.0))
    throw std::invalid_argument("make_detector_branch: FOV outside (0, 90]");
  if (responsivity_a_per_w < 0.0)
    throw std::invalid_argument("make_detector_branch: responsivity must be non-negative");
  DetectorBranch d;
  d.orientation = orientation;
  d.normal = direction_from_az_el(orientation);
  d.area_m2 = area_m2;
  d.responsivity_a_per_w = responsivity_a_per_w;
  d.fov_deg = fov_deg;
  d.cos_fov = std::cos(deg_to_rad(fov_deg));
  return d;
}

// Effective collection area [m^2] for light travelling along
// arrival_direction (source toward detector). delta is measured between the
// detector normal and the reversed arrival direction; beyond the FOV the
// detector collects nothing.
inline double incidence_gain(const DetectorBranch& d, const Vec3& arrival_direction) {
  const double cos_delta = -dot(d.normal, arrival_direction);
  if (cos_delta < d.cos_fov) return 0.0;
  return d.area_m2 * cos_delta;
}

// Angle-diversity receiver: four branches sharing one position, tilted up at
// the same elevation and spread over the four diagonal azimuths.
struct ADR {
  Vec3 position;
  std::array<DetectorBranch, 4> branches;
};

struct AdrParams {
  double area_m2{4e-6};
  double responsivity_a_per_w{0.4};
  double fov_deg{21.0};
  double elevation_deg{70.0};
};

inline ADR place_adr(const Vec3& position, const Room& room, const AdrParams& params = {}) {
  if (!room.contains(position))
    throw std::invalid_argument("place_adr: position outside the room");
  ADR adr;
  adr.position = position;
  for (std::size_t b = 0; b < 4; ++b) {
    adr.branches[b] =
        make_detector_branch(Orientation(kBranchAzimuthsDeg[b], params.elevation_deg),
                             params.area_m2, params.responsivity_a_per_w, params.fov_deg);
  }
  return adr;
}

}  // namespace vlcsim
