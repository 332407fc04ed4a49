#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "vlcsim/channel.hpp"
#include "vlcsim/core.hpp"
#include "vlcsim/geometry.hpp"
#include "vlcsim/metrics.hpp"
#include "vlcsim/receivers.hpp"
#include "vlcsim/sources.hpp"

namespace vlcsim {

// Raised when no transmitter branch delivers any power to the receiver.
class NoCoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Axis-aligned rectangle on the communication-floor plane that the search is
// currently narrowing down. center.z carries the plane height.
struct CoverageCell {
  Vec3 center;
  double half_width_x{0};
  double half_width_y{0};
};

// One row of the search trace: the cell chosen at this iteration.
struct SearchTraceRow {
  int iteration{0};
  double cell_center_x{0};
  double cell_center_y{0};
  double half_width{0};  // max of the two half-widths after the split
  int chosen_quadrant{0};
  double snr_db{0};
};

// Quadrant indices follow the probe order: north = +y, west = -x.
inline const char* quadrant_name(int quadrant) {
  switch (quadrant) {
    case 0: return "NW";
    case 1: return "NE";
    case 2: return "SW";
    case 3: return "SE";
    default: throw std::invalid_argument("quadrant_name: index out of range");
  }
}

// Outcome of branch selection plus the quadrant search: the winning branch,
// the final cell, and the narrow beam that carries half the branch power
// toward the final cell center.
struct SteeringState {
  int unit_id{0};
  int branch_id{0};
  CoverageCell cell;
  int iterations{0};
  Beam steered_beam;
  std::vector<SearchTraceRow> trace;
};

// Knobs of the steering subsystem. The redirected fraction and the steered
// beam divergence are published configuration, not physical constants.
struct SteerParams {
  double power_fraction{0.5};           // share of branch power the hologram redirects
  double beam_half_angle_deg{1.75};     // steered/probe beam half-power semi-angle
  double stop_half_width_m{0.05};       // search stops when both half-widths reach this
  double pilot_bit_rate_bps{2.28e10};   // rate at which pilot/probe SNR is evaluated
  double cf_height_m{1.0};              // receiver plane height
};

// The narrow beam aimed from the branch position at a target point, carrying
// the given fraction of the branch's power and flux.
inline Beam make_aimed_beam(const Branch& branch, const Vec3& target,
                            const SteerParams& params) {
  if (!(params.power_fraction > 0.0 && params.power_fraction < 1.0))
    throw std::invalid_argument("make_aimed_beam: power fraction outside (0, 1)");
  const Vec3 origin = branch.beams[0].position;
  const Vec3 diff = target - origin;
  if (diff.norm2() <= 0.0)
    throw std::invalid_argument("make_aimed_beam: target coincides with the branch");
  Beam beam;
  beam.position = origin;
  beam.pointing = diff.normalized();
  beam.lambertian_order_n = lambertian_order_from_half_angle(params.beam_half_angle_deg);
  beam.optical_power_w = branch.optical_power_w() * params.power_fraction;
  beam.luminous_flux_lm = branch.luminous_flux_lm() * params.power_fraction;
  return beam;
}

// What remains of the branch after the hologram peels off the steered share:
// the original wide pattern at the complementary power. Computed by exact
// subtraction so residual + steered always reproduces the branch total.
inline Beam residual_beam(const Branch& branch, const Beam& steered) {
  Beam beam = branch.combined();
  beam.optical_power_w -= steered.optical_power_w;
  beam.luminous_flux_lm -= steered.luminous_flux_lm;
  return beam;
}

// Best-receiver-branch SNR for a source set, used to rank pilots and probes.
// No received power ranks as -inf rather than an error.
inline double probe_snr_db(const std::vector<Beam>& sources, const ADR& adr, const Room& room,
                           const NoiseModel& noise, double bit_rate,
                           const DetectorElementTable* table = nullptr) {
  const auto responses = channel_response(sources, adr, room, table);
  const BranchLink link = best_branch_link(
      responses, adr.branches[0].responsivity_a_per_w, noise, bit_rate);
  return link.snr_db;
}

// SNR the receiver reports when one branch alone transmits at full power.
// The feedback path is modeled as instantaneous and error-free.
inline double pilot_snr(const Branch& branch, const ADR& adr, const Room& room,
                        const NoiseModel& noise, double bit_rate,
                        const DetectorElementTable* table = nullptr) {
  return probe_snr_db({branch.combined()}, adr, room, noise, bit_rate, table);
}

// Argmax of pilot SNR over every branch of every unit, scanning units in
// list order and branches in id order so exact ties keep the lowest ids.
inline std::pair<int, int> select_best_branch(const ADR& adr,
                                              const std::vector<LightUnit>& units,
                                              const Room& room, const NoiseModel& noise,
                                              double bit_rate,
                                              const DetectorElementTable* table = nullptr) {
  double best_snr = -std::numeric_limits<double>::infinity();
  int best_unit = -1, best_branch = -1;
  for (const LightUnit& unit : units) {
    for (const Branch& branch : unit.branches) {
      const double snr = pilot_snr(branch, adr, room, noise, bit_rate, table);
      if (snr > best_snr) {
        best_snr = snr;
        best_unit = unit.id;
        best_branch = branch.branch_id;
      }
    }
  }
  if (best_unit < 0 || best_snr == -std::numeric_limits<double>::infinity())
    throw NoCoverageError("select_best_branch: no branch reaches the receiver");
  return {best_unit, best_branch};
}

namespace detail {

// Clips [lo, hi] to [bound_lo, bound_hi], keeping a positive width.
inline void clip_interval(double& lo, double& hi, double bound_lo, double bound_hi) {
  lo = std::max(lo, bound_lo);
  hi = std::min(hi, bound_hi);
  if (!(hi > lo)) throw std::invalid_argument("coverage cell degenerates after clipping");
}

}  // namespace detail

// Bounding box, on the receiver plane, of the branch's half-power cone
// footprint, clipped to the room. The cone cut by a horizontal plane is a
// conic; for a branch steep enough that the whole cone crosses the plane it
// is an ellipse whose axis-aligned extremes come from the implicit quadric.
inline CoverageCell initial_coverage_cell(const Branch& branch, double cf_height_m,
                                          const Room& room) {
  const Beam beam = branch.combined();
  const Vec3& apex = beam.position;
  const Vec3& axis = beam.pointing;
  if (!(axis.z < 0.0))
    throw std::invalid_argument("initial_coverage_cell: branch does not point downward");
  if (!(apex.z > cf_height_m))
    throw std::invalid_argument("initial_coverage_cell: branch below the receiver plane");

  const double alpha_deg = half_angle_from_lambertian_order(beam.lambertian_order_n);
  const double cos2 = std::pow(std::cos(deg_to_rad(alpha_deg)), 2);
  const double k = cf_height_m - apex.z;  // negative: plane below the apex

  // Footprint points m = (x', y', k) relative to the apex satisfy
  // (m . axis)^2 = cos^2(alpha) |m|^2, a conic A x'^2 + B x'y' + C y'^2
  // + D x' + E y' + F = 0 in the plane.
  const double A = axis.x * axis.x - cos2;
  const double B = 2.0 * axis.x * axis.y;
  const double C = axis.y * axis.y - cos2;
  const double D = 2.0 * axis.x * axis.z * k;
  const double E = 2.0 * axis.y * axis.z * k;
  const double F = (axis.z * axis.z - cos2) * k * k;

  double x_lo, x_hi, y_lo, y_hi;
  const double disc = 4.0 * A * C - B * B;
  if (disc > 0.0) {
    // Ellipse. Extremes in x solve disc x^2 + (4CD - 2BE) x + (4CF - E^2) = 0,
    // and symmetrically for y.
    auto extremes = [&](double p, double q, double& lo, double& hi) {
      const double root = std::sqrt(std::max(0.0, p * p - 4.0 * disc * q));
      lo = (-p - root) / (2.0 * disc);
      hi = (-p + root) / (2.0 * disc);
    };
    extremes(4.0 * C * D - 2.0 * B * E, 4.0 * C * F - E * E, x_lo, x_hi);
    extremes(4.0 * A * E - 2.0 * B * D, 4.0 * A * F - D * D, y_lo, y_hi);
    x_lo += apex.x;
    x_hi += apex.x;
    y_lo += apex.y;
    y_hi += apex.y;
  } else {
    // The cone grazes or straddles the horizon; the footprint is unbounded,
    // so fall back to the whole room.
    x_lo = 0.0;
    x_hi = room.config.width;
    y_lo = 0.0;
    y_hi = room.config.length;
  }
  detail::clip_interval(x_lo, x_hi, 0.0, room.config.width);
  detail::clip_interval(y_lo, y_hi, 0.0, room.config.length);

  CoverageCell cell;
  cell.center = {(x_lo + x_hi) / 2.0, (y_lo + y_hi) / 2.0, cf_height_m};
  cell.half_width_x = (x_hi - x_lo) / 2.0;
  cell.half_width_y = (y_hi - y_lo) / 2.0;
  return cell;
}

// Recursive four-way refinement against an arbitrary SNR evaluator
// snr_at(x, y) -> dB for a probe aimed at (x, y) on the plane. Each round
// probes the four quadrant centers (NW, NE, SW, SE; north = +y, west = -x),
// keeps the best (ties to the earliest), and halves the cell, stopping once
// both half-widths are within stop_half_width.
template <typename SnrFn>
inline std::pair<CoverageCell, std::vector<SearchTraceRow>> quadrant_search_core(
    CoverageCell cell, double stop_half_width_m, SnrFn&& snr_at) {
  if (!(stop_half_width_m > 0.0))
    throw std::invalid_argument("quadrant_search_core: stop width must be positive");
  std::vector<SearchTraceRow> trace;
  int iteration = 0;
  while (cell.half_width_x > stop_half_width_m || cell.half_width_y > stop_half_width_m) {
    ++iteration;
    const double qx = cell.half_width_x / 2.0;
    const double qy = cell.half_width_y / 2.0;
    const double cx[4] = {cell.center.x - qx, cell.center.x + qx, cell.center.x - qx,
                          cell.center.x + qx};
    const double cy[4] = {cell.center.y + qy, cell.center.y + qy, cell.center.y - qy,
                          cell.center.y - qy};
    int best = 0;
    double best_snr = snr_at(cx[0], cy[0]);
    for (int q = 1; q < 4; ++q) {
      const double snr = snr_at(cx[q], cy[q]);
      if (snr > best_snr) {
        best_snr = snr;
        best = q;
      }
    }
    cell.center.x = cx[best];
    cell.center.y = cy[best];
    cell.half_width_x = qx;
    cell.half_width_y = qy;
    trace.push_back(SearchTraceRow{iteration, cell.center.x, cell.center.y,
                                   std::max(qx, qy), best, best_snr});
  }
  return {cell, std::move(trace)};
}

// Full quadrant search against the simulated channel. Each probe redirects
// the configured power share into a narrow beam at the candidate point while
// the branch keeps emitting the remainder in its original pattern; the probe
// score is the best receiver branch's SNR at the pilot rate.
inline SteeringState quadrant_search(const Branch& branch, const ADR& adr, const Room& room,
                                     const NoiseModel& noise, const SteerParams& params = {},
                                     const DetectorElementTable* table = nullptr) {
  const CoverageCell initial = initial_coverage_cell(branch, params.cf_height_m, room);
  auto snr_at = [&](double x, double y) {
    const Beam probe = make_aimed_beam(branch, {x, y, params.cf_height_m}, params);
    const Beam residual = residual_beam(branch, probe);
    return probe_snr_db({residual, probe}, adr, room, noise, params.pilot_bit_rate_bps,
                        table);
  };
  auto [cell, trace] = quadrant_search_core(initial, params.stop_half_width_m, snr_at);

  SteeringState state;
  state.unit_id = branch.unit_id;
  state.branch_id = branch.branch_id;
  state.cell = cell;
  state.iterations = static_cast<int>(trace.size());
  state.trace = std::move(trace);
  state.steered_beam = make_aimed_beam(branch, cell.center, params);
  return state;
}

// The scene's full source set after steering: every unit as built, except
// the selected branch is replaced by its residual plus the steered beam.
// Total emitted optical power and flux are unchanged.
inline std::vector<Beam> steered_scenario(const SteeringState& state,
                                          const std::vector<LightUnit>& units) {
  std::vector<Beam> beams;
  for (const LightUnit& unit : units) {
    for (const Branch& branch : unit.branches) {
      if (unit.id == state.unit_id && branch.branch_id == state.branch_id) {
        beams.push_back(residual_beam(branch, state.steered_beam));
        beams.push_back(state.steered_beam);
      } else {
        beams.push_back(branch.combined());
      }
    }
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
