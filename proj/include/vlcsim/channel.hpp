#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <vector>

#include "vlcsim/core.hpp"
#include "vlcsim/geometry.hpp"
#include "vlcsim/receivers.hpp"
#include "vlcsim/sources.hpp"

namespace vlcsim {

// One ray path from a source beam to a detector: propagation delay, power
// delivered, and how many reflections the path took (0 = line of sight).
struct Arrival {
  double time_s{0};
  double power_w{0};
  int order{0};
};

// Arrivals in canonical order: reflection order first, then source index,
// then mesh element indices. The ordering fixes the floating-point summation
// sequence, which keeps every downstream metric bit-reproducible.
struct ArrivalList {
  std::vector<Arrival> arrivals;

  double total_power() const {
    double sum = 0.0;
    for (const Arrival& a : arrivals) sum += a.power_w;
    return sum;
  }
};

// Power histogram of an arrival list, for export and plotting only; metrics
// always consume the exact arrival times.
struct ImpulseResponse {
  double bin_width_s{0};
  double t0_s{0};
  std::vector<double> bins_w;
};

namespace detail {

// Power incident on a surface element from a beam, with the travel distance.
// Zero when the element is behind the beam or lit from behind.
inline double incident_power_on_element(const Beam& b, const SurfaceElement& e,
                                        double& distance_out) {
  const Vec3 diff = e.position - b.position;
  const double d2 = diff.norm2();
  const double d = std::sqrt(d2);
  const Vec3 dir = diff / d;
  const double cos_theta = -dot(e.normal, dir);
  if (cos_theta <= 0.0) return 0.0;
  const double intensity = radiant_intensity(b, dir);
  if (intensity <= 0.0) return 0.0;
  distance_out = d;
  return intensity * e.area * cos_theta / d2;
}

// Fraction of power incident on an element that reaches the detector after
// the element re-emits diffusely (Lambertian order 1) with its reflectivity.
inline double element_to_detector_factor(const SurfaceElement& e, const DetectorBranch& d,
                                         const Vec3& detector_position, double& distance_out) {
  const Vec3 diff = detector_position - e.position;
  const double d2 = diff.norm2();
  const double dist = std::sqrt(d2);
  const Vec3 dir = diff / dist;
  const double cos_out = dot(e.normal, dir);
  if (cos_out <= 0.0) return 0.0;
  const double a_eff = incidence_gain(d, dir);
  if (a_eff <= 0.0) return 0.0;
  distance_out = dist;
  return e.reflectivity * (cos_out / kPi) * a_eff / d2;
}

// Fraction of power incident on e1 that lands on e2 after e1's diffuse
// re-emission. Coplanar elements see each other edge-on, so the cosine gates
// make same-surface pairs contribute exactly zero.
inline double element_transfer_factor(const SurfaceElement& e1, const SurfaceElement& e2,
                                      double& distance_out) {
  const Vec3 diff = e2.position - e1.position;
  const double d2 = diff.norm2();
  const double dist = std::sqrt(d2);
  const Vec3 dir = diff / dist;
  const double cos_out = dot(e1.normal, dir);
  if (cos_out <= 0.0) return 0.0;
  const double cos_in = -dot(e2.normal, dir);
  if (cos_in <= 0.0) return 0.0;
  distance_out = dist;
  return e1.reflectivity * (cos_out / kPi) * cos_in * e2.area / d2;
}

}  // namespace detail

// Line-of-sight arrival, or nothing when the geometry delivers no power
// (detector outside the beam hemisphere or beam outside the detector FOV).
inline std::optional<Arrival> los_arrival(const Beam& b, const DetectorBranch& d,
                                          const Vec3& detector_position) {
  const Vec3 diff = detector_position - b.position;
  const double d2 = diff.norm2();
  if (d2 <= 0.0)
    throw std::invalid_argument("los_arrival: beam and detector positions coincide");
  const double dist = std::sqrt(d2);
  const Vec3 dir = diff / dist;
  const double intensity = radiant_intensity(b, dir);
  if (intensity <= 0.0) return std::nullopt;
  const double a_eff = incidence_gain(d, dir);
  if (a_eff <= 0.0) return std::nullopt;
  const double power = intensity * a_eff / d2;
  if (power <= 0.0) return std::nullopt;
  return Arrival{dist / kSpeedOfLight, power, 0};
}

namespace detail {

// Shared first-reflection kernel: beam -> element -> detector over a given
// subset of element indices (ascending). Appends only nonzero arrivals.
inline void first_order_into(const Beam& b, const DetectorBranch& d,
                             const Vec3& detector_position,
                             const std::vector<SurfaceElement>& mesh,
                             const std::uint32_t* indices, std::size_t index_count,
                             std::vector<Arrival>& out) {
  for (std::size_t k = 0; k < index_count; ++k) {
    const SurfaceElement& e = mesh[indices ? indices[k] : k];
    double d1 = 0.0, d2 = 0.0;
    const double incident = incident_power_on_element(b, e, d1);
    if (incident <= 0.0) continue;
    const double factor = element_to_detector_factor(e, d, detector_position, d2);
    if (factor <= 0.0) continue;
    const double power = incident * factor;
    if (power <= 0.0) continue;
    out.push_back(Arrival{(d1 + d2) / kSpeedOfLight, power, 1});
  }
}

// Shared second-reflection kernel: beam -> e1 -> e2 -> detector, e2 drawn
// from a subset (ascending). e1 == e2 is skipped; other same-surface pairs
// die on the cosine gates.
inline void second_order_into(const Beam& b, const DetectorBranch& d,
                              const Vec3& detector_position,
                              const std::vector<SurfaceElement>& mesh,
                              const std::uint32_t* e2_indices, std::size_t e2_count,
                              std::vector<Arrival>& out) {
  const std::size_t n = mesh.size();
  // Cache the beam -> e1 leg; it is independent of e2 and the detector.
  std::vector<double> incident(n, 0.0), dist1(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    incident[i] = incident_power_on_element(b, mesh[i], dist1[i]);
  // Cache the e2 -> detector leg over the subset.
  std::vector<double> to_det(e2_count, 0.0), dist3(e2_count, 0.0);
  for (std::size_t k = 0; k < e2_count; ++k) {
    const std::size_t j = e2_indices ? e2_indices[k] : k;
    to_det[k] = element_to_detector_factor(mesh[j], d, detector_position, dist3[k]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (incident[i] <= 0.0) continue;
    const SurfaceElement& e1 = mesh[i];
    for (std::size_t k = 0; k < e2_count; ++k) {
      const std::size_t j = e2_indices ? e2_indices[k] : k;
      if (j == i || to_det[k] <= 0.0) continue;
      double d12 = 0.0;
      const double transfer = element_transfer_factor(e1, mesh[j], d12);
      if (transfer <= 0.0) continue;
      const double power = incident[i] * transfer * to_det[k];
      if (power <= 0.0) continue;
      out.push_back(Arrival{(dist1[i] + d12 + dist3[k]) / kSpeedOfLight, power, 2});
    }
  }
}

}  // namespace detail

// All single-reflection arrivals for one beam and one detector branch.
// Elements delivering zero power are omitted.
inline ArrivalList first_order_arrivals(const Beam& b, const DetectorBranch& d,
                                        const Vec3& detector_position,
                                        const std::vector<SurfaceElement>& mesh) {
  ArrivalList list;
  detail::first_order_into(b, d, detector_position, mesh, nullptr, mesh.size(),
                           list.arrivals);
  return list;
}

// All double-reflection arrivals for one beam and one detector branch. Both
// bounces run over the same (coarse) mesh.
inline ArrivalList second_order_arrivals(const Beam& b, const DetectorBranch& d,
                                         const Vec3& detector_position,
                                         const std::vector<SurfaceElement>& mesh) {
  ArrivalList list;
  detail::second_order_into(b, d, detector_position, mesh, nullptr, mesh.size(),
                            list.arrivals);
  return list;
}

// Per-branch tables of the mesh elements that can deliver any power to the
// detector (inside the FOV cone and facing it). Narrow FOVs leave only a few
// percent of elements live, which is what makes full-room channel runs cheap.
// Valid for one receiver placement in one room.
struct DetectorElementTable {
  std::array<std::vector<std::uint32_t>, 4> fine;
  std::array<std::vector<std::uint32_t>, 4> coarse;
};

inline DetectorElementTable build_detector_tables(const Room& room, const ADR& adr) {
  DetectorElementTable table;
  for (std::size_t b = 0; b < 4; ++b) {
    const DetectorBranch& det = adr.branches[b];
    for (std::size_t i = 0; i < room.fine_elements.size(); ++i) {
      double d = 0.0;
      if (detail::element_to_detector_factor(room.fine_elements[i], det, adr.position, d) > 0.0)
        table.fine[b].push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < room.coarse_elements.size(); ++i) {
      double d = 0.0;
      if (detail::element_to_detector_factor(room.coarse_elements[i], det, adr.position, d) >
          0.0)
        table.coarse[b].push_back(static_cast<std::uint32_t>(i));
    }
  }
  return table;
}

// Full channel: LOS plus first and second reflections from every source to
// each of the four receiver branches. Within a branch the arrivals are in
// canonical order (reflection order, source index, element indices), so the
// result is bit-identical for identical inputs. Passing a prebuilt table
// skips elements the FOV rejects without changing the output.
inline std::array<ArrivalList, 4> channel_response(const std::vector<Beam>& sources,
                                                   const ADR& adr, const Room& room,
                                                   const DetectorElementTable* table = nullptr) {
  std::array<ArrivalList, 4> responses;
  for (std::size_t b = 0; b < 4; ++b) {
    const DetectorBranch& det = adr.branches[b];
    std::vector<Arrival>& out = responses[b].arrivals;
    for (const Beam& s : sources) {
      if (auto a = los_arrival(s, det, adr.position)) out.push_back(*a);
    }
    const std::uint32_t* fine_idx = table ? table->fine[b].data() : nullptr;
    const std::size_t fine_count = table ? table->fine[b].size() : room.fine_elements.size();
    for (const Beam& s : sources)
      detail::first_order_into(s, det, adr.position, room.fine_elements, fine_idx, fine_count,
                               out);
    const std::uint32_t* coarse_idx = table ? table->coarse[b].data() : nullptr;
    const std::size_t coarse_count =
        table ? table->coarse[b].size() : room.coarse_elements.size();
    for (const Beam& s : sources)
      detail::second_order_into(s, det, adr.position, room.coarse_elements, coarse_idx,
                                coarse_count, out);
  }
  return responses;
}

// Power-preserving histogram with t0 at the earliest arrival. An empty list
// yields an empty response.
inline ImpulseResponse bin_arrivals(const ArrivalList& list, double bin_width_s) {
  if (!(bin_width_s > 0.0))
    throw std::invalid_argument("bin_arrivals: bin width must be positive");
  ImpulseResponse ir;
  ir.bin_width_s = bin_width_s;
  if (list.arrivals.empty()) return ir;
  double t0 = list.arrivals[0].time_s;
  for (const Arrival& a : list.arrivals) t0 = std::min(t0, a.time_s);
  ir.t0_s = t0;
  // The nudge keeps an arrival exactly on a bin boundary in the upper bin
  // despite floating-point residue in the division.
  auto bin_of = [&](double t) {
    return static_cast<std::size_t>(std::floor((t - t0) / bin_width_s + 1e-9));
  };
  std::size_t max_bin = 0;
  for (const Arrival& a : list.arrivals) max_bin = std::max(max_bin, bin_of(a.time_s));
  ir.bins_w.assign(max_bin + 1, 0.0);
  for (const Arrival& a : list.arrivals) ir.bins_w[bin_of(a.time_s)] += a.power_w;
  return ir;
}

// Two-column export of a binned response: bin start time and bin power.
inline void write_impulse_response(std::ostream& os, const ImpulseResponse& ir) {
  char buf[64];
  for (std::size_t i = 0; i < ir.bins_w.size(); ++i) {
    const double t = ir.t0_s + static_cast<double>(i) * ir.bin_width_s;
    std::snprintf(buf, sizeof(buf), "%.9g %.9g\n", t, ir.bins_w[i]);
    os << buf;
  }
}

}  // namespace vlcsim
