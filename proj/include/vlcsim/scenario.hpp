#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vlcsim/channel.hpp"
#include "vlcsim/core.hpp"
#include "vlcsim/geometry.hpp"
#include "vlcsim/metrics.hpp"
#include "vlcsim/receivers.hpp"
#include "vlcsim/sources.hpp"
#include "vlcsim/steering.hpp"

namespace vlcsim {

inline constexpr const char* kArtifactVersion = "1.0.0";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message) {}
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

enum class RunMode { Steered, Baseline };
enum class Combining { SelectBest, Mrc };

// Fully resolved scenario. Defaults reproduce the reference setup: the
// 4 x 8 x 3 room, eight 4-branch communication units, five ceiling
// illumination units, and the seven-point test line at x = 2 on the
// communication floor.
struct ScenarioConfig {
  RunMode mode{RunMode::Steered};
  int threads{1};
  RoomConfig room;
  double cf_height_m{1.0};

  double adt_ld_power_w{0.5};
  double adt_ld_flux_lm{100.0};
  double adt_half_angle_deg{21.0};

  double illum_ld_power_w{0.0};
  double illum_ld_flux_lm{100.0};
  double illum_semi_angle_deg{70.0};

  AdrParams receiver;
  std::vector<Vec3> receiver_positions;  // filled with the default line when empty

  NoiseModel noise;
  double snr_threshold_db{15.6};
  double report_bit_rate_bps{2.28e10};
  double rates_min_bps{5e8};
  double rates_max_bps{3e10};
  double rates_step_bps{1e8};

  SteerParams steer;
  DelayWeighting delay_weighting{DelayWeighting::PowerSquared};
  Combining combining{Combining::SelectBest};

  double illuminance_grid_step_m{0.1};
  double illuminance_target_min_lux{313.7};
  bool illuminance_calibrate{true};
  double illuminance_max_warn_lux{1000.0};
};

namespace detail {

inline std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError(key, "expected an integer");
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

inline std::vector<Vec3> parse_positions(const std::string& key, const std::string& value) {
  std::vector<Vec3> positions;
  std::stringstream groups(value);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    std::stringstream coords(group);
    std::string coord;
    std::vector<double> v;
    while (std::getline(coords, coord, ',')) v.push_back(parse_double(key, trim(coord)));
    if (v.size() != 3) throw ConfigError(key, "positions need three coordinates: " + group);
    positions.push_back({v[0], v[1], v[2]});
  }
  if (positions.empty()) throw ConfigError(key, "no positions given");
  return positions;
}

inline void require(bool condition, const std::string& key, const std::string& message) {
  if (!condition) throw ConfigError(key, message);
}

inline void require_divides(double dim, double element, const std::string& key) {
  const double ratio = dim / element;
  const double nearest = std::round(ratio);
  require(nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio), key,
          "element size " + fmt_g9(element) + " m does not divide the " + fmt_g9(dim) +
              " m room dimension");
}

}  // namespace detail

inline void validate_config(const ScenarioConfig& cfg) {
  using detail::require;
  require(cfg.threads >= 1 && cfg.threads <= 256, "threads", "must be in [1, 256]");
  require(cfg.room.width > 0 && cfg.room.length > 0 && cfg.room.height > 0, "room",
          "dimensions must be positive");
  for (auto [rho, key] : {std::pair{cfg.room.rho_ceiling, "room.reflectivity_ceiling"},
                          {cfg.room.rho_walls, "room.reflectivity_walls"},
                          {cfg.room.rho_floor, "room.reflectivity_floor"}})
    require(rho >= 0.0 && rho <= 1.0, key, "must be in [0, 1]");
  require(cfg.room.fine_element_size > 0, "mesh.first_order_m", "must be positive");
  require(cfg.room.coarse_element_size > 0, "mesh.second_order_m", "must be positive");
  for (double dim : {cfg.room.width, cfg.room.length, cfg.room.height}) {
    detail::require_divides(dim, cfg.room.fine_element_size, "mesh.first_order_m");
    detail::require_divides(dim, cfg.room.coarse_element_size, "mesh.second_order_m");
  }
  require(cfg.cf_height_m > 0 && cfg.cf_height_m < cfg.room.height, "cf.height_m",
          "must lie strictly inside the room height");
  require(cfg.adt_ld_power_w >= 0, "adt.ld_power_w", "must be non-negative");
  require(cfg.adt_ld_flux_lm >= 0, "adt.ld_flux_lm", "must be non-negative");
  require(cfg.adt_half_angle_deg > 0 && cfg.adt_half_angle_deg < 90, "adt.half_angle_deg",
          "must be in (0, 90)");
  require(cfg.illum_ld_power_w >= 0, "illum.ld_power_w", "must be non-negative");
  require(cfg.illum_ld_flux_lm >= 0, "illum.ld_flux_lm", "must be non-negative");
  require(cfg.illum_semi_angle_deg > 0 && cfg.illum_semi_angle_deg < 90,
          "illum.semi_angle_deg", "must be in (0, 90)");
  require(cfg.receiver.area_m2 > 0, "receiver.area_m2", "must be positive");
  require(cfg.receiver.responsivity_a_per_w >= 0, "receiver.responsivity_a_per_w",
          "must be non-negative");
  require(cfg.receiver.fov_deg > 0 && cfg.receiver.fov_deg <= 90, "receiver.fov_deg",
          "must be in (0, 90]");
  require(cfg.receiver.elevation_deg >= -90 && cfg.receiver.elevation_deg <= 90,
          "receiver.elevation_deg", "must be in [-90, 90]");
  for (const Vec3& p : cfg.receiver_positions)
    require(p.x >= 0 && p.x <= cfg.room.width && p.y >= 0 && p.y <= cfg.room.length &&
                p.z >= 0 && p.z <= cfg.room.height,
            "receiver.positions", "position outside the room");
  require(cfg.noise.preamp_density_a_hz >= 0, "noise.preamp_density_a_hz",
          "must be non-negative");
  require(cfg.noise.background_current_a >= 0, "noise.background_current_a",
          "must be non-negative");
  require(cfg.noise.bandwidth_factor > 0, "noise.bandwidth_factor", "must be positive");
  require(cfg.report_bit_rate_bps > 0, "snr.report_bit_rate_bps", "must be positive");
  require(cfg.rates_min_bps > 0 && cfg.rates_max_bps >= cfg.rates_min_bps &&
              cfg.rates_step_bps > 0,
          "rates", "grid needs 0 < min <= max and a positive step");
  require(cfg.steer.power_fraction > 0 && cfg.steer.power_fraction < 1,
          "steer.power_fraction", "must be in (0, 1)");
  require(cfg.steer.beam_half_angle_deg > 0 && cfg.steer.beam_half_angle_deg < 90,
          "steer.beam_half_angle_deg", "must be in (0, 90)");
  require(cfg.steer.stop_half_width_m > 0, "steer.stop_half_width_m", "must be positive");
  require(cfg.steer.pilot_bit_rate_bps > 0, "steer.pilot_bit_rate_bps", "must be positive");
  require(cfg.illuminance_grid_step_m > 0, "illuminance.grid_step_m", "must be positive");
  require(cfg.illuminance_target_min_lux > 0, "illuminance.target_min_lux",
          "must be positive");
  require(cfg.illuminance_max_warn_lux > 0, "illuminance.max_warn_lux", "must be positive");
}

// Parses the flat key = value scenario format: one assignment per line,
// '#' starts a comment, blank lines are skipped. Unknown and duplicate keys
// are rejected; missing keys keep the documented defaults. An empty text
// therefore yields the full default scenario.
inline ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, std::string> seen;
  std::stringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }

  bool positions_given = false;
  for (const auto& [key, value] : seen) {
    using detail::parse_bool;
    using detail::parse_double;
    using detail::parse_int;
    if (key == "mode") {
      if (value == "steered")
        cfg.mode = RunMode::Steered;
      else if (value == "baseline")
        cfg.mode = RunMode::Baseline;
      else
        throw ConfigError(key, "expected steered or baseline, got '" + value + "'");
    } else if (key == "threads") {
      cfg.threads = parse_int(key, value);
    } else if (key == "room.width_m") {
      cfg.room.width = parse_double(key, value);
    } else if (key == "room.length_m") {
      cfg.room.length = parse_double(key, value);
    } else if (key == "room.height_m") {
      cfg.room.height = parse_double(key, value);
    } else if (key == "room.reflectivity_ceiling") {
      cfg.room.rho_ceiling = parse_double(key, value);
    } else if (key == "room.reflectivity_walls") {
      cfg.room.rho_walls = parse_double(key, value);
    } else if (key == "room.reflectivity_floor") {
      cfg.room.rho_floor = parse_double(key, value);
    } else if (key == "mesh.first_order_m") {
      cfg.room.fine_element_size = parse_double(key, value);
    } else if (key == "mesh.second_order_m") {
      cfg.room.coarse_element_size = parse_double(key, value);
    } else if (key == "cf.height_m") {
      cfg.cf_height_m = parse_double(key, value);
    } else if (key == "adt.ld_power_w") {
      cfg.adt_ld_power_w = parse_double(key, value);
    } else if (key == "adt.ld_flux_lm") {
      cfg.adt_ld_flux_lm = parse_double(key, value);
    } else if (key == "adt.half_angle_deg") {
      cfg.adt_half_angle_deg = parse_double(key, value);
    } else if (key == "illum.ld_power_w") {
      cfg.illum_ld_power_w = parse_double(key, value);
    } else if (key == "illum.ld_flux_lm") {
      cfg.illum_ld_flux_lm = parse_double(key, value);
    } else if (key == "illum.semi_angle_deg") {
      cfg.illum_semi_angle_deg = parse_double(key, value);
    } else if (key == "receiver.area_m2") {
      cfg.receiver.area_m2 = parse_double(key, value);
    } else if (key == "receiver.responsivity_a_per_w") {
      cfg.receiver.responsivity_a_per_w = parse_double(key, value);
    } else if (key == "receiver.fov_deg") {
      cfg.receiver.fov_deg = parse_double(key, value);
    } else if (key == "receiver.elevation_deg") {
      cfg.receiver.elevation_deg = parse_double(key, value);
    } else if (key == "receiver.positions") {
      cfg.receiver_positions = detail::parse_positions(key, value);
      positions_given = true;
    } else if (key == "noise.preamp_density_a_hz") {
      cfg.noise.preamp_density_a_hz = parse_double(key, value);
    } else if (key == "noise.background_current_a") {
      cfg.noise.background_current_a = parse_double(key, value);
    } else if (key == "noise.bandwidth_factor") {
      cfg.noise.bandwidth_factor = parse_double(key, value);
    } else if (key == "snr.threshold_db") {
      cfg.snr_threshold_db = parse_double(key, value);
    } else if (key == "snr.report_bit_rate_bps") {
      cfg.report_bit_rate_bps = parse_double(key, value);
    } else if (key == "rates.min_bps") {
      cfg.rates_min_bps = parse_double(key, value);
    } else if (key == "rates.max_bps") {
      cfg.rates_max_bps = parse_double(key, value);
    } else if (key == "rates.step_bps") {
      cfg.rates_step_bps = parse_double(key, value);
    } else if (key == "steer.power_fraction") {
      cfg.steer.power_fraction = parse_double(key, value);
    } else if (key == "steer.beam_half_angle_deg") {
      cfg.steer.beam_half_angle_deg = parse_double(key, value);
    } else if (key == "steer.stop_half_width_m") {
      cfg.steer.stop_half_width_m = parse_double(key, value);
    } else if (key == "steer.pilot_bit_rate_bps") {
      cfg.steer.pilot_bit_rate_bps = parse_double(key, value);
    } else if (key == "metrics.delay_weighting") {
      if (value == "power")
        cfg.delay_weighting = DelayWeighting::Power;
      else if (value == "power_squared")
        cfg.delay_weighting = DelayWeighting::PowerSquared;
      else
        throw ConfigError(key, "expected power or power_squared, got '" + value + "'");
    } else if (key == "combining") {
      if (value == "select_best")
        cfg.combining = Combining::SelectBest;
      else if (value == "mrc")
        cfg.combining = Combining::Mrc;
      else
        throw ConfigError(key, "expected select_best or mrc, got '" + value + "'");
    } else if (key == "illuminance.grid_step_m") {
      cfg.illuminance_grid_step_m = parse_double(key, value);
    } else if (key == "illuminance.target_min_lux") {
      cfg.illuminance_target_min_lux = parse_double(key, value);
    } else if (key == "illuminance.calibrate") {
      cfg.illuminance_calibrate = parse_bool(key, value);
    } else if (key == "illuminance.max_warn_lux") {
      cfg.illuminance_max_warn_lux = parse_double(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  if (!positions_given) {
    cfg.receiver_positions.clear();
    for (int y = 1; y <= 7; ++y)
      cfg.receiver_positions.push_back({2.0, static_cast<double>(y), cfg.cf_height_m});
  }
  cfg.steer.cf_height_m = cfg.cf_height_m;
  validate_config(cfg);
  return cfg;
}

// Canonical text form of a resolved config; parse_config(serialize_config(c))
// reproduces c. Written next to the result files for auditability.
inline std::string serialize_config(const ScenarioConfig& cfg) {
  using detail::fmt_g9;
  std::ostringstream os;
  os << "mode = " << (cfg.mode == RunMode::Steered ? "steered" : "baseline") << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "room.width_m = " << fmt_g9(cfg.room.width) << "\n";
  os << "room.length_m = " << fmt_g9(cfg.room.length) << "\n";
  os << "room.height_m = " << fmt_g9(cfg.room.height) << "\n";
  os << "room.reflectivity_ceiling = " << fmt_g9(cfg.room.rho_ceiling) << "\n";
  os << "room.reflectivity_walls = " << fmt_g9(cfg.room.rho_walls) << "\n";
  os << "room.reflectivity_floor = " << fmt_g9(cfg.room.rho_floor) << "\n";
  os << "mesh.first_order_m = " << fmt_g9(cfg.room.fine_element_size) << "\n";
  os << "mesh.second_order_m = " << fmt_g9(cfg.room.coarse_element_size) << "\n";
  os << "cf.height_m = " << fmt_g9(cfg.cf_height_m) << "\n";
  os << "adt.ld_power_w = " << fmt_g9(cfg.adt_ld_power_w) << "\n";
  os << "adt.ld_flux_lm = " << fmt_g9(cfg.adt_ld_flux_lm) << "\n";
  os << "adt.half_angle_deg = " << fmt_g9(cfg.adt_half_angle_deg) << "\n";
  os << "illum.ld_power_w = " << fmt_g9(cfg.illum_ld_power_w) << "\n";
  os << "illum.ld_flux_lm = " << fmt_g9(cfg.illum_ld_flux_lm) << "\n";
  os << "illum.semi_angle_deg = " << fmt_g9(cfg.illum_semi_angle_deg) << "\n";
  os << "receiver.area_m2 = " << fmt_g9(cfg.receiver.area_m2) << "\n";
  os << "receiver.responsivity_a_per_w = " << fmt_g9(cfg.receiver.responsivity_a_per_w)
     << "\n";
  os << "receiver.fov_deg = " << fmt_g9(cfg.receiver.fov_deg) << "\n";
  os << "receiver.elevation_deg = " << fmt_g9(cfg.receiver.elevation_deg) << "\n";
  os << "receiver.positions = ";
  for (std::size_t i = 0; i < cfg.receiver_positions.size(); ++i) {
    const Vec3& p = cfg.receiver_positions[i];
    if (i) os << "; ";
    os << fmt_g9(p.x) << "," << fmt_g9(p.y) << "," << fmt_g9(p.z);
  }
  os << "\n";
  os << "noise.preamp_density_a_hz = " << fmt_g9(cfg.noise.preamp_density_a_hz) << "\n";
  os << "noise.background_current_a = " << fmt_g9(cfg.noise.background_current_a) << "\n";
  os << "noise.bandwidth_factor = " << fmt_g9(cfg.noise.bandwidth_factor) << "\n";
  os << "snr.threshold_db = " << fmt_g9(cfg.snr_threshold_db) << "\n";
  os << "snr.report_bit_rate_bps = " << fmt_g9(cfg.report_bit_rate_bps) << "\n";
  os << "rates.min_bps = " << fmt_g9(cfg.rates_min_bps) << "\n";
  os << "rates.max_bps = " << fmt_g9(cfg.rates_max_bps) << "\n";
  os << "rates.step_bps = " << fmt_g9(cfg.rates_step_bps) << "\n";
  os << "steer.power_fraction = " << fmt_g9(cfg.steer.power_fraction) << "\n";
  os << "steer.beam_half_angle_deg = " << fmt_g9(cfg.steer.beam_half_angle_deg) << "\n";
  os << "steer.stop_half_width_m = " << fmt_g9(cfg.steer.stop_half_width_m) << "\n";
  os << "steer.pilot_bit_rate_bps = " << fmt_g9(cfg.steer.pilot_bit_rate_bps) << "\n";
  os << "metrics.delay_weighting = "
     << (cfg.delay_weighting == DelayWeighting::Power ? "power" : "power_squared") << "\n";
  os << "combining = " << (cfg.combining == Combining::SelectBest ? "select_best" : "mrc")
     << "\n";
  os << "illuminance.grid_step_m = " << fmt_g9(cfg.illuminance_grid_step_m) << "\n";
  os << "illuminance.target_min_lux = " << fmt_g9(cfg.illuminance_target_min_lux) << "\n";
  os << "illuminance.calibrate = " << (cfg.illuminance_calibrate ? "true" : "false") << "\n";
  os << "illuminance.max_warn_lux = " << fmt_g9(cfg.illuminance_max_warn_lux) << "\n";
  return os.str();
}

// Everything a single receiver position produced. A failed position records
// its error and leaves the metrics zeroed; other positions are unaffected.
struct PositionOutcome {
  Vec3 position;
  bool ok{false};
  std::string error;
  LinkMetrics metrics;
  std::optional<SteeringState> steering;
  std::vector<double> snr_by_rate_db;  // aligned with RunResult::rate_grid
};

struct IlluminanceSummary {
  double flux_scale{1.0};
  double min_lx{0};
  double max_lx{0};
  bool max_warning{false};
};

struct RunResult {
  ScenarioConfig config;
  std::vector<PositionOutcome> positions;
  std::vector<double> rate_grid_bps;
  std::optional<double> max_data_rate_bps;  // worst case across positions
  IlluminanceGrid illuminance;
  IlluminanceSummary illuminance_summary;
  std::string version{kArtifactVersion};
};

namespace detail {

// Per-branch arrival taps sorted by time with prefix power sums, so the eye
// split at any bit period costs one binary search. Used only for the rate
// sweep; the reported metrics go through p1_p0_from_arrivals unchanged.
struct RateTable {
  struct Taps {
    std::vector<double> times;
    std::vector<double> prefix;  // prefix[i] = power of the first i taps
    double total{0};
  };
  std::array<Taps, 4> branch;

  static RateTable build(const std::array<ArrivalList, 4>& responses) {
    RateTable table;
    for (std::size_t b = 0; b < 4; ++b) {
      const auto& arrivals = responses[b].arrivals;
      std::vector<std::size_t> idx(arrivals.size());
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return arrivals[i].time_s < arrivals[j].time_s;
      });
      Taps& taps = table.branch[b];
      taps.times.reserve(arrivals.size());
      taps.prefix.reserve(arrivals.size() + 1);
      taps.prefix.push_back(0.0);
      for (std::size_t i : idx) {
        taps.times.push_back(arrivals[i].time_s);
        taps.prefix.push_back(taps.prefix.back() + arrivals[i].power_w);
      }
      taps.total = taps.prefix.back();
    }
    return table;
  }

  double best_snr_db(double bit_rate, double responsivity, const NoiseModel& noise,
                     Combining combining) const {
    const double period = 1.0 / bit_rate;
    double best = -std::numeric_limits<double>::infinity();
    double mrc_total = 0.0;
    bool mrc_any = false;
    for (const Taps& taps : branch) {
      if (taps.times.empty() || !(taps.total > 0.0)) continue;
      const double t0 = taps.times.front();
      const auto it = std::partition_point(taps.times.begin(), taps.times.end(),
                                           [&](double t) { return t - t0 < period; });
      const auto split = static_cast<std::size_t>(it - taps.times.begin());
      const double p1 = taps.prefix[split];
      const double p0 = taps.total - p1;
      if (!(p1 > p0)) continue;
      double snr;
      try {
        snr = snr_ook(p1, p0, responsivity, noise, bit_rate);
      } catch (const UndefinedMetricError&) {
        continue;
      }
      if (combining == Combining::Mrc) {
        if (snr != -std::numeric_limits<double>::infinity()) {
          mrc_total += std::pow(10.0, snr / 10.0);
          mrc_any = true;
        }
      } else if (snr > best) {
        best = snr;
      }
    }
    if (combining == Combining::Mrc)
      return mrc_any ? 10.0 * std::log10(mrc_total)
                     : -std::numeric_limits<double>::infinity();
    return best;
  }
};

// Simple deterministic work splitter: results land in caller-indexed slots,
// so the output is identical for any thread count.
template <typename Fn>
inline void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

// Link evaluation shared verbatim by the steered and baseline modes: the two
// differ only in the source list that reaches this point.
inline void evaluate_link(const ScenarioConfig& cfg, const std::vector<Beam>& signal,
                          const ADR& adr, const Room& room, const DetectorElementTable& table,
                          const std::vector<double>& rate_grid, PositionOutcome& out) {
  const auto responses = channel_response(signal, adr, room, &table);
  const double responsivity = cfg.receiver.responsivity_a_per_w;
  const BranchLink link =
      best_branch_link(responses, responsivity, cfg.noise, cfg.report_bit_rate_bps);
  out.metrics.received_power_p1_w = link.p1_w;
  out.metrics.received_power_p0_w = link.p0_w;
  out.metrics.best_branch_index = link.branch_index;
  out.metrics.snr_db =
      cfg.combining == Combining::Mrc
          ? mrc_snr_db(responses, responsivity, cfg.noise, cfg.report_bit_rate_bps)
          : link.snr_db;
  const auto& best_list = responses[static_cast<std::size_t>(link.branch_index)];
  out.metrics.delay_spread_s =
      best_list.arrivals.empty() ? 0.0 : delay_spread(best_list, cfg.delay_weighting);

  const RateTable table_by_rate = RateTable::build(responses);
  out.snr_by_rate_db.reserve(rate_grid.size());
  for (double rate : rate_grid)
    out.snr_by_rate_db.push_back(
        table_by_rate.best_snr_db(rate, responsivity, cfg.noise, cfg.combining));
  out.ok = true;
}

inline IlluminanceSummary summarize_illuminance(const ScenarioConfig& cfg,
                                                std::vector<LightUnit>& units,
                                                IlluminanceGrid& grid, const Room& room) {
  IlluminanceSummary summary;
  grid = compute_illuminance_grid(units, room, cfg.illuminance_grid_step_m);
  if (cfg.illuminance_calibrate) {
    summary.flux_scale = calibrate_flux(cfg.illuminance_target_min_lux, grid);
    scale_flux(units, summary.flux_scale);
    grid = compute_illuminance_grid(units, room, cfg.illuminance_grid_step_m);
  }
  summary.min_lx = grid.min_lx;
  summary.max_lx = grid.max_lx;
  summary.max_warning = grid.max_lx > cfg.illuminance_max_warn_lux;
  return summary;
}

// Highest grid rate whose worst-position SNR clears the threshold. Failed
// positions are excluded; with no successful position there is no rate.
inline std::optional<double> worst_case_max_rate(const RunResult& result,
                                                 double threshold_db) {
  const auto& grid = result.rate_grid_bps;
  auto worst_snr_at = [&](double rate) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), rate);
    const auto idx = static_cast<std::size_t>(it - grid.begin());
    double min_snr = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const PositionOutcome& out : result.positions) {
      if (!out.ok) continue;
      min_snr = std::min(min_snr, out.snr_by_rate_db[idx]);
      any = true;
    }
    return any ? min_snr : -std::numeric_limits<double>::infinity();
  };
  return max_data_rate(worst_snr_at, grid, threshold_db);
}

}  // namespace detail

// Units of the non-diversity comparison system: wide downward 9-module units
// at the communication-unit positions, per-module power chosen so the total
// transmit power matches the steered system's total.
inline std::vector<LightUnit> build_baseline_units(const ScenarioConfig& cfg) {
  const double adt_total_w = 8.0 * 4.0 * 3.0 * cfg.adt_ld_power_w;
  const double per_ld_power_w = adt_total_w / (8.0 * 9.0);
  std::vector<LightUnit> units;
  int id = 0;
  for (double x : {1.0, 3.0}) {
    for (double y : {1.0, 3.0, 5.0, 7.0}) {
      units.push_back(make_wide_unit(id, {x, y, cfg.room.height}, 9, per_ld_power_w,
                                     cfg.illum_ld_flux_lm, cfg.illum_semi_angle_deg));
      ++id;
    }
  }
  return units;
}

// The units that light the room in the configured mode: communication units
// in their native patterns plus the illumination row, or the wide baseline
// units. Steering never enters the lighting figures; the steered/residual
// split conserves each branch's flux exactly.
inline std::vector<LightUnit> lighting_units(const ScenarioConfig& cfg) {
  if (cfg.mode == RunMode::Baseline) return build_baseline_units(cfg);
  std::vector<LightUnit> units = build_adt_units(cfg.adt_ld_power_w, cfg.adt_ld_flux_lm,
                                                 cfg.adt_half_angle_deg, cfg.room.height);
  const auto illum = build_illum_units(cfg.illum_ld_flux_lm, cfg.illum_ld_power_w,
                                       cfg.illum_semi_angle_deg, cfg.room.height);
  units.insert(units.end(), illum.begin(), illum.end());
  return units;
}

// Steered-system run: per position, pick the best branch by pilot SNR, run
// the quadrant search, then evaluate the link carried by that branch's
// residual-plus-steered pair. The remaining branches keep radiating in the
// scene (and in the illuminance figures) but carry no data for this link, so
// they stay out of the link's arrival list.
inline RunResult run_proposed(const ScenarioConfig& cfg) {
  if (cfg.mode != RunMode::Steered)
    throw std::invalid_argument("run_proposed: config mode is not steered");
  RunResult result;
  result.config = cfg;
  const Room room = build_room(cfg.room);
  const auto adt_units = build_adt_units(cfg.adt_ld_power_w, cfg.adt_ld_flux_lm,
                                         cfg.adt_half_angle_deg, cfg.room.height);
  result.rate_grid_bps =
      default_rate_grid(cfg.rates_min_bps, cfg.rates_max_bps, cfg.rates_step_bps);

  result.positions.resize(cfg.receiver_positions.size());
  detail::parallel_for(
      cfg.receiver_positions.size(), cfg.threads, [&](std::size_t i) {
        PositionOutcome& out = result.positions[i];
        out.position = cfg.receiver_positions[i];
        try {
          const ADR adr = place_adr(out.position, room, cfg.receiver);
          const DetectorElementTable table = build_detector_tables(room, adr);
          const auto [unit_id, branch_id] = select_best_branch(
              adr, adt_units, room, cfg.noise, cfg.steer.pilot_bit_rate_bps, &table);
          const Branch& branch =
              adt_units[static_cast<std::size_t>(unit_id)].branches[static_cast<std::size_t>(
                  branch_id)];
          SteeringState state =
              quadrant_search(branch, adr, room, cfg.noise, cfg.steer, &table);
          const std::vector<Beam> signal = {residual_beam(branch, state.steered_beam),
                                            state.steered_beam};
          detail::evaluate_link(cfg, signal, adr, room, table, result.rate_grid_bps, out);
          out.steering = std::move(state);
        } catch (const std::exception& e) {
          out.ok = false;
          out.error = e.what();
        }
      });

  result.max_data_rate_bps = detail::worst_case_max_rate(result, cfg.snr_threshold_db);

  std::vector<LightUnit> lighting = lighting_units(cfg);
  result.illuminance_summary =
      detail::summarize_illuminance(cfg, lighting, result.illuminance, room);
  return result;
}

// Comparison run: all eight wide units broadcast the same stream; the
// receiver and every link computation are shared with the steered mode.
inline RunResult run_baseline(const ScenarioConfig& cfg) {
  if (cfg.mode != RunMode::Baseline)
    throw std::invalid_argument("run_baseline: config mode is not baseline");
  RunResult result;
  result.config = cfg;
  const Room room = build_room(cfg.room);
  std::vector<LightUnit> units = build_baseline_units(cfg);
  const std::vector<Beam> signal = collapsed_beams(units);
  result.rate_grid_bps =
      default_rate_grid(cfg.rates_min_bps, cfg.rates_max_bps, cfg.rates_step_bps);

  result.positions.resize(cfg.receiver_positions.size());
  detail::parallel_for(
      cfg.receiver_positions.size(), cfg.threads, [&](std::size_t i) {
        PositionOutcome& out = result.positions[i];
        out.position = cfg.receiver_positions[i];
        try {
          const ADR adr = place_adr(out.position, room, cfg.receiver);
          const DetectorElementTable table = build_detector_tables(room, adr);
          detail::evaluate_link(cfg, signal, adr, room, table, result.rate_grid_bps, out);
        } catch (const std::exception& e) {
          out.ok = false;
          out.error = e.what();
        }
      });

  result.max_data_rate_bps = detail::worst_case_max_rate(result, cfg.snr_threshold_db);

  result.illuminance_summary =
      detail::summarize_illuminance(cfg, units, result.illuminance, room);
  return result;
}

inline RunResult run_scenario(const ScenarioConfig& cfg) {
  return cfg.mode == RunMode::Steered ? run_proposed(cfg) : run_baseline(cfg);
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open output file: " + path.string());
  return os;
}

}  // namespace detail

// Writes metrics.csv, per-position search traces, the illuminance grid, and
// the resolved config echo. Fixed column order and 9-significant-digit
// formatting make re-exports byte-identical.
inline void export_results(const RunResult& result, const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory: " + dir.string());
  using detail::fmt_g9;

  {
    auto os = detail::open_output(dir / "metrics.csv");
    os << "x_m,y_m,p1_w,p0_w,delay_spread_s,snr_db\n";
    for (const PositionOutcome& out : result.positions) {
      const LinkMetrics& m = out.metrics;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      os << fmt_g9(out.position.x) << "," << fmt_g9(out.position.y) << ","
         << fmt_g9(out.ok ? m.received_power_p1_w : nan) << ","
         << fmt_g9(out.ok ? m.received_power_p0_w : nan) << ","
         << fmt_g9(out.ok ? m.delay_spread_s : nan) << "," << fmt_g9(out.ok ? m.snr_db : nan)
         << "\n";
    }
  }

  for (std::size_t i = 0; i < result.positions.size(); ++i) {
    const PositionOutcome& out = result.positions[i];
    if (!out.steering) continue;
    auto os = detail::open_output(dir / ("trace_" + std::to_string(i) + ".csv"));
    os << "iteration,cell_center_x_m,cell_center_y_m,half_width_m,chosen_quadrant,snr_db\n";
    for (const SearchTraceRow& row : out.steering->trace) {
      os << row.iteration << "," << fmt_g9(row.cell_center_x) << ","
         << fmt_g9(row.cell_center_y) << "," << fmt_g9(row.half_width) << ","
         << quadrant_name(row.chosen_quadrant) << "," << fmt_g9(row.snr_db) << "\n";
    }
  }

  {
    auto os = detail::open_output(dir / "illuminance.csv");
    os << "x_m,y_m,illuminance_lx\n";
    const IlluminanceGrid& grid = result.illuminance;
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      for (std::size_t iy = 0; iy < grid.ny; ++iy) {
        os << fmt_g9(static_cast<double>(ix) * grid.step_m) << ","
           << fmt_g9(static_cast<double>(iy) * grid.step_m) << ","
           << fmt_g9(grid.value(ix, iy)) << "\n";
      }
    }
  }

  {
    auto os = detail::open_output(dir / "config_echo.cfg");
    os << "# artifact version " << result.version << "\n";
    os << serialize_config(result.config);
  }
}

}  // namespace vlcsim
