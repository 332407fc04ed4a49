#pragma once

#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "vlcsim/channel.hpp"
#include "vlcsim/core.hpp"
#include "vlcsim/sources.hpp"

namespace vlcsim {

// Raised when a metric has no defined value, e.g. delay spread of an empty
// arrival list or SNR with zero noise and zero eye opening.
class UndefinedMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Receiver noise parameterization for OOK SNR. The receiver bandwidth is
// bandwidth_factor times the bit rate. These are configuration values, not
// measured constants.
struct NoiseModel {
  double preamp_density_a_hz{4.5e-12};  // input-referred current density [A/sqrt(Hz)]
  double background_current_a{0.0};     // ambient-light photocurrent [A]
  double electron_charge_c{1.602e-19};
  double bandwidth_factor{0.7};
};

// Weighting of the arrival powers in the RMS delay-spread sums. Power is the
// plain profile-weighted definition; PowerSquared weights each tap by its
// squared power, which sharply discounts energy spread over many weak taps.
enum class DelayWeighting { Power, PowerSquared };

// RMS spread of arrival times about their weighted mean. Two-pass form: the
// mean is computed first so the variance accumulation stays well conditioned
// when the spread is orders of magnitude below the absolute times.
inline double delay_spread(const ArrivalList& list,
                           DelayWeighting weighting = DelayWeighting::Power) {
  double wsum = 0.0, tsum = 0.0;
  for (const Arrival& a : list.arrivals) {
    const double w =
        weighting == DelayWeighting::Power ? a.power_w : a.power_w * a.power_w;
    wsum += w;
    tsum += w * a.time_s;
  }
  if (list.arrivals.empty() || !(wsum > 0.0))
    throw UndefinedMetricError("delay_spread: no arrivals with positive power");
  const double mean = tsum / wsum;
  double var = 0.0;
  for (const Arrival& a : list.arrivals) {
    const double w =
        weighting == DelayWeighting::Power ? a.power_w : a.power_w * a.power_w;
    const double dt = a.time_s - mean;
    var += w * dt * dt;
  }
  return std::sqrt(var / wsum);
}

// Worst-case one-bit eye split: with T = 1/bit_rate and t* the earliest
// arrival, power landing within the first bit period counts toward p1 and
// everything at t - t* >= T spills into p0 (inter-symbol interference).
inline std::pair<double, double> p1_p0_from_arrivals(const ArrivalList& list,
                                                     double bit_rate) {
  if (list.arrivals.empty())
    throw UndefinedMetricError("p1_p0_from_arrivals: empty arrival list");
  if (!(bit_rate > 0.0))
    throw std::invalid_argument("p1_p0_from_arrivals: bit rate must be positive");
  double t0 = list.arrivals[0].time_s;
  for (const Arrival& a : list.arrivals) t0 = std::min(t0, a.time_s);
  const double period = 1.0 / bit_rate;
  double p1 = 0.0, p0 = 0.0;
  for (const Arrival& a : list.arrivals) {
    if (a.time_s - t0 < period)
      p1 += a.power_w;
    else
      p0 += a.power_w;
  }
  return {p1, p0};
}

// OOK signal-to-noise ratio in dB: [R (p1 - p0) / (sigma1 + sigma0)]^2 with
// per-level noise sigma_i^2 = 2 q R p_i BW + 2 q I_bg BW + density^2 BW.
// Returns -inf for a closed eye and +inf for a noiseless open eye.
inline double snr_ook(double p1, double p0, double responsivity_a_per_w,
                      const NoiseModel& noise, double bit_rate) {
  if (!(p1 >= 0.0) || !(p0 >= 0.0) || p1 < p0)
    throw std::invalid_argument("snr_ook: requires p1 >= p0 >= 0");
  if (!(bit_rate > 0.0)) throw std::invalid_argument("snr_ook: bit rate must be positive");
  const double bw = noise.bandwidth_factor * bit_rate;
  auto sigma = [&](double level_w) {
    const double shot = 2.0 * noise.electron_charge_c * responsivity_a_per_w * level_w * bw;
    const double ambient = 2.0 * noise.electron_charge_c * noise.background_current_a * bw;
    const double preamp = noise.preamp_density_a_hz * noise.preamp_density_a_hz * bw;
    return std::sqrt(shot + ambient + preamp);
  };
  const double signal = responsivity_a_per_w * (p1 - p0);
  const double denom = sigma(p1) + sigma(p0);
  if (denom <= 0.0) {
    if (signal <= 0.0)
      throw UndefinedMetricError("snr_ook: zero noise and zero eye opening");
    return std::numeric_limits<double>::infinity();  // saturated, noiseless link
  }
  const double ratio = signal / denom;
  if (ratio <= 0.0) return -std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(ratio);
}

// Gaussian tail BER for an OOK link at the given SNR: Q(sqrt(SNR)).
inline double q_to_ber(double snr_db) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  const double q_arg = std::sqrt(snr);
  return 0.5 * std::erfc(q_arg / std::numbers::sqrt2);
}

// Largest rate on the grid whose worst-case SNR still clears the target.
// Every grid point is evaluated; SNR is not assumed monotone in rate.
inline std::optional<double> max_data_rate(
    const std::function<double(double)>& worst_case_snr_db,
    const std::vector<double>& rates_bps, double target_snr_db = 15.6) {
  std::optional<double> best;
  for (double rate : rates_bps) {
    if (worst_case_snr_db(rate) >= target_snr_db && (!best || rate > *best)) best = rate;
  }
  return best;
}

// Default evaluation grid: 0.5 to 30 Gb/s in 0.1 Gb/s steps.
inline std::vector<double> default_rate_grid(double min_bps = 5e8, double max_bps = 3e10,
                                             double step_bps = 1e8) {
  if (!(step_bps > 0.0) || !(min_bps > 0.0) || max_bps < min_bps)
    throw std::invalid_argument("default_rate_grid: invalid grid bounds");
  std::vector<double> rates;
  for (std::size_t k = 0;; ++k) {
    const double r = min_bps + static_cast<double>(k) * step_bps;
    if (r > max_bps * (1.0 + 1e-12)) break;
    rates.push_back(r);
  }
  return rates;
}

// Direct-component illuminance [lx] at a point on a horizontal plane from
// every beam of every unit: E = sum I_v(phi) cos(theta) / d^2 with theta
// measured from the plane's upward normal.
inline double illuminance_at(const Vec3& point, const std::vector<LightUnit>& units,
                             const Room& room) {
  if (!room.contains(point))
    throw std::invalid_argument("illuminance_at: point outside the room");
  double lux = 0.0;
  for (const LightUnit& unit : units) {
    auto add_beam = [&](const Beam& beam) {
      const Vec3 diff = point - beam.position;
      const double d2 = diff.norm2();
      if (d2 <= 0.0) return;
      const double d = std::sqrt(d2);
      const Vec3 dir = diff / d;
      const double cos_theta = -dir.z;  // incidence measured from +z
      if (cos_theta <= 0.0) return;
      const double intensity = luminous_intensity(beam, dir);
      if (intensity <= 0.0) return;
      lux += intensity * cos_theta / d2;
    };
    for (const Branch& branch : unit.branches)
      for (const Beam& beam : branch.beams) add_beam(beam);
    for (const Beam& beam : unit.beams) add_beam(beam);
  }
  return lux;
}

// Illuminance sampled on the floor over a regular grid (step pitch, both
// axes, edges included). Values are stored x-major: index ix * ny + iy.
struct IlluminanceGrid {
  double step_m{0.1};
  std::size_t nx{0}, ny{0};
  std::vector<double> values_lx;
  double min_lx{0}, max_lx{0};

  double value(std::size_t ix, std::size_t iy) const { return values_lx[ix * ny + iy]; }
};

inline IlluminanceGrid compute_illuminance_grid(const std::vector<LightUnit>& units,
                                                const Room& room, double step_m = 0.1) {
  if (!(step_m > 0.0))
    throw std::invalid_argument("compute_illuminance_grid: step must be positive");
  IlluminanceGrid grid;
  grid.step_m = step_m;
  grid.nx = static_cast<std::size_t>(std::floor(room.config.width / step_m + 1e-9)) + 1;
  grid.ny = static_cast<std::size_t>(std::floor(room.config.length / step_m + 1e-9)) + 1;
  grid.values_lx.reserve(grid.nx * grid.ny);
  for (std::size_t ix = 0; ix < grid.nx; ++ix) {
    for (std::size_t iy = 0; iy < grid.ny; ++iy) {
      const Vec3 p{static_cast<double>(ix) * step_m, static_cast<double>(iy) * step_m, 0.0};
      grid.values_lx.push_back(illuminance_at(p, units, room));
    }
  }
  grid.min_lx = grid.values_lx[0];
  grid.max_lx = grid.values_lx[0];
  for (double v : grid.values_lx) {
    grid.min_lx = std::min(grid.min_lx, v);
    grid.max_lx = std::max(grid.max_lx, v);
  }
  return grid;
}

// Multiplicative flux scale that raises the current grid minimum to the
// target. Illuminance is linear in flux, so applying the scale to every
// beam's flux makes the minimum hit the target exactly.
inline double calibrate_flux(double target_min_lux, const IlluminanceGrid& grid) {
  if (!(target_min_lux > 0.0))
    throw std::invalid_argument("calibrate_flux: target must be positive");
  if (!(grid.min_lx > 0.0))
    throw UndefinedMetricError("calibrate_flux: grid minimum is zero, cannot calibrate");
  return target_min_lux / grid.min_lx;
}

inline void scale_flux(std::vector<LightUnit>& units, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("scale_flux: scale must be positive");
  for (LightUnit& unit : units) {
    for (Branch& branch : unit.branches)
      for (Beam& beam : branch.beams) beam.luminous_flux_lm *= scale;
    for (Beam& beam : unit.beams) beam.luminous_flux_lm *= scale;
  }
}

// Per-link outcome at one receiver position.
struct LinkMetrics {
  double received_power_p1_w{0};
  double received_power_p0_w{0};
  double delay_spread_s{0};
  double snr_db{0};
  int best_branch_index{0};
};

// Best receiver branch by OOK SNR at the given bit rate, with its eye powers.
// Branches with no arrivals rank at -inf. Ties keep the lowest branch index.
struct BranchLink {
  double snr_db{-std::numeric_limits<double>::infinity()};
  double p1_w{0};
  double p0_w{0};
  int branch_index{0};
};

inline BranchLink best_branch_link(const std::array<ArrivalList, 4>& responses,
                                   double responsivity_a_per_w, const NoiseModel& noise,
                                   double bit_rate) {
  BranchLink best;
  for (int b = 0; b < 4; ++b) {
    const ArrivalList& list = responses[static_cast<std::size_t>(b)];
    if (list.arrivals.empty()) continue;
    const auto [p1, p0] = p1_p0_from_arrivals(list, bit_rate);
    // A tail heavier than the first bit means a fully closed eye; rank it
    // like a dead branch instead of feeding snr_ook an inverted pair.
    double snr = -std::numeric_limits<double>::infinity();
    if (p1 > p0) {
      try {
        snr = snr_ook(p1, p0, responsivity_a_per_w, noise, bit_rate);
      } catch (const UndefinedMetricError&) {
        snr = -std::numeric_limits<double>::infinity();
      }
    }
    if (snr > best.snr_db) best = BranchLink{snr, p1, p0, b};
  }
  return best;
}

// Maximal-ratio combining across the four branches: electrical SNRs add.
// Optional alternative to select-best; not used by the default pipeline.
inline double mrc_snr_db(const std::array<ArrivalList, 4>& responses,
                         double responsivity_a_per_w, const NoiseModel& noise,
                         double bit_rate) {
  double total = 0.0;
  bool any = false;
  for (const ArrivalList& list : responses) {
    if (list.arrivals.empty()) continue;
    const auto [p1, p0] = p1_p0_from_arrivals(list, bit_rate);
    if (p1 <= p0) continue;
    double snr;
    try {
      snr = snr_ook(p1, p0, responsivity_a_per_w, noise, bit_rate);
    } catch (const UndefinedMetricError&) {
      continue;
    }
    if (snr == -std::numeric_limits<double>::infinity()) continue;
    total += std::pow(10.0, snr / 10.0);
    any = true;
  }
  if (!any || total <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(total);
}

}  // namespace vlcsim
