// Command-line front end for the room simulator. Subcommands cover the
// steered run, the wide-beam baseline, a single-position steering trace, the
// illuminance grid, and a side-by-side comparison of the two systems.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vlcsim/vlcsim.hpp"

namespace {

using namespace vlcsim;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int threads = 0;  // 0 keeps the config value
};

ScenarioConfig load_config(const CommonOpts& opts, RunMode mode) {
  ScenarioConfig cfg =
      parse_config(opts.config_path.empty() ? std::string{} : read_file(opts.config_path));
  cfg.mode = mode;
  if (opts.threads > 0) cfg.threads = opts.threads;
  validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "scenario config file (key = value lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "directory for result files");
  cmd->add_option("--threads", opts.threads, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);
}

void print_run(const RunResult& result) {
  std::printf("%-10s %-12s %-14s %-10s\n", "x_m", "y_m", "delay_s", "snr_db");
  for (const PositionOutcome& out : result.positions) {
    if (!out.ok) {
      std::printf("%-10g %-12g failed: %s\n", out.position.x, out.position.y,
                  out.error.c_str());
      continue;
    }
    std::printf("%-10g %-12g %-14.6g %-10.4g\n", out.position.x, out.position.y,
                out.metrics.delay_spread_s, out.metrics.snr_db);
  }
  if (result.max_data_rate_bps)
    std::printf("worst-case max data rate: %.4g Gb/s\n", *result.max_data_rate_bps / 1e9);
  else
    std::printf("worst-case max data rate: none within the configured grid\n");
  const IlluminanceSummary& s = result.illuminance_summary;
  std::printf("illuminance: min %.4g lx, max %.4g lx, flux scale %.6g\n", s.min_lx, s.max_lx,
              s.flux_scale);
  if (s.max_warning)
    std::fprintf(stderr, "warning: peak illuminance %.4g lx exceeds the configured limit\n",
                 s.max_lx);
}

int run_mode_command(const CommonOpts& opts, RunMode mode) {
  const ScenarioConfig cfg = load_config(opts, mode);
  const RunResult result = run_scenario(cfg);
  print_run(result);
  if (!opts.out_dir.empty()) {
    export_results(result, opts.out_dir);
    std::printf("results written to %s\n", opts.out_dir.c_str());
  }
  for (const PositionOutcome& out : result.positions)
    if (!out.ok) return 2;
  return 0;
}

int run_steer(const CommonOpts& opts, const std::string& pos_text,
              const std::string& ir_path, double ir_bin_s) {
  ScenarioConfig cfg = load_config(opts, RunMode::Steered);
  const auto positions = detail::parse_positions("--pos", pos_text);
  if (positions.size() != 1) throw ConfigError("--pos", "expected a single x,y,z triple");
  cfg.receiver_positions = positions;
  validate_config(cfg);

  const Room room = build_room(cfg.room);
  const auto units = build_adt_units(cfg.adt_ld_power_w, cfg.adt_ld_flux_lm,
                                     cfg.adt_half_angle_deg, cfg.room.height);
  const ADR adr = place_adr(positions[0], room, cfg.receiver);
  const auto table = build_detector_tables(room, adr);
  const auto [unit_id, branch_id] = select_best_branch(
      adr, units, room, cfg.noise, cfg.steer.pilot_bit_rate_bps, &table);
  const Branch& branch =
      units[static_cast<std::size_t>(unit_id)].branches[static_cast<std::size_t>(branch_id)];
  const SteeringState state = quadrant_search(branch, adr, room, cfg.noise, cfg.steer, &table);

  std::printf("selected unit %d branch %d\n", unit_id, branch_id);
  std::printf("%-10s %-14s %-14s %-12s %-9s %-10s\n", "iteration", "cell_x_m", "cell_y_m",
              "half_width", "quadrant", "snr_db");
  for (const SearchTraceRow& row : state.trace)
    std::printf("%-10d %-14.6g %-14.6g %-12.6g %-9s %-10.4g\n", row.iteration,
                row.cell_center_x, row.cell_center_y, row.half_width,
                quadrant_name(row.chosen_quadrant), row.snr_db);
  std::printf("steered spot: (%.6g, %.6g) after %d iterations\n", state.cell.center.x,
              state.cell.center.y, state.iterations);

  const std::vector<Beam> signal = {residual_beam(branch, state.steered_beam),
                                    state.steered_beam};
  const auto responses = channel_response(signal, adr, room, &table);
  const auto link = best_branch_link(responses, cfg.receiver.responsivity_a_per_w, cfg.noise,
                                     cfg.report_bit_rate_bps);
  const auto& best = responses[static_cast<std::size_t>(link.branch_index)];
  std::printf("link: branch %d, p1 %.6g W, p0 %.6g W, snr %.4g dB, delay %.6g s\n",
              link.branch_index, link.p1_w, link.p0_w, link.snr_db,
              best.arrivals.empty() ? 0.0 : delay_spread(best, cfg.delay_weighting));

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/trace.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << "iteration,cell_center_x_m,cell_center_y_m,half_width_m,chosen_quadrant,snr_db\n";
    for (const SearchTraceRow& row : state.trace)
      os << row.iteration << "," << detail::fmt_g9(row.cell_center_x) << ","
         << detail::fmt_g9(row.cell_center_y) << "," << detail::fmt_g9(row.half_width) << ","
         << quadrant_name(row.chosen_quadrant) << "," << detail::fmt_g9(row.snr_db) << "\n";
    std::printf("trace written to %s\n", path.c_str());
  }
  if (!ir_path.empty()) {
    const ImpulseResponse ir = bin_arrivals(best, ir_bin_s);
    std::ofstream os(ir_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + ir_path);
    write_impulse_response(os, ir);
    std::printf("impulse response written to %s\n", ir_path.c_str());
  }
  return 0;
}

int run_illuminance(const CommonOpts& opts, bool baseline_mode, double calibrate_target) {
  ScenarioConfig cfg =
      load_config(opts, baseline_mode ? RunMode::Baseline : RunMode::Steered);
  if (calibrate_target > 0) {
    cfg.illuminance_calibrate = true;
    cfg.illuminance_target_min_lux = calibrate_target;
  }
  const Room room = build_room(cfg.room);
  std::vector<LightUnit> units = lighting_units(cfg);
  IlluminanceGrid grid;
  const IlluminanceSummary summary = detail::summarize_illuminance(cfg, units, grid, room);
  std::printf("grid %zux%zu step %.3g m\n", grid.nx, grid.ny, grid.step_m);
  std::printf("min %.6g lx, max %.6g lx, flux scale %.6g\n", summary.min_lx, summary.max_lx,
              summary.flux_scale);
  if (summary.max_warning)
    std::fprintf(stderr, "warning: peak illuminance %.4g lx exceeds the configured limit\n",
                 summary.max_lx);
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/illuminance.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << "x_m,y_m,illuminance_lx\n";
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      for (std::size_t iy = 0; iy < grid.ny; ++iy)
        os << detail::fmt_g9(static_cast<double>(ix) * grid.step_m) << ","
           << detail::fmt_g9(static_cast<double>(iy) * grid.step_m) << ","
           << detail::fmt_g9(grid.value(ix, iy)) << "\n";
    std::printf("grid written to %s\n", path.c_str());
  }
  return 0;
}

int run_compare(const CommonOpts& opts) {
  const ScenarioConfig steered_cfg = load_config(opts, RunMode::Steered);
  ScenarioConfig baseline_cfg = steered_cfg;
  baseline_cfg.mode = RunMode::Baseline;
  const RunResult steered = run_proposed(steered_cfg);
  const RunResult baseline = run_baseline(baseline_cfg);

  std::printf("%-8s %-8s %-14s %-14s %-12s %-12s %-12s\n", "x_m", "y_m", "base_delay_s",
              "steer_delay_s", "delay_ratio", "base_snr_db", "steer_snr_db");
  std::ostringstream csv;
  csv << "x_m,y_m,delay_spread_baseline_s,delay_spread_steered_s,delay_ratio,"
         "snr_baseline_db,snr_steered_db\n";
  for (std::size_t i = 0; i < steered.positions.size(); ++i) {
    const PositionOutcome& s = steered.positions[i];
    const PositionOutcome& b = baseline.positions[i];
    if (!s.ok || !b.ok) {
      std::printf("%-8g %-8g failed: %s\n", s.position.x, s.position.y,
                  (!s.ok ? s.error : b.error).c_str());
      continue;
    }
    const double ratio = b.metrics.delay_spread_s / s.metrics.delay_spread_s;
    std::printf("%-8g %-8g %-14.6g %-14.6g %-12.4g %-12.4g %-12.4g\n", s.position.x,
                s.position.y, b.metrics.delay_spread_s, s.metrics.delay_spread_s, ratio,
                b.metrics.snr_db, s.metrics.snr_db);
    csv << detail::fmt_g9(s.position.x) << "," << detail::fmt_g9(s.position.y) << ","
        << detail::fmt_g9(b.metrics.delay_spread_s) << ","
        << detail::fmt_g9(s.metrics.delay_spread_s) << "," << detail::fmt_g9(ratio) << ","
        << detail::fmt_g9(b.metrics.snr_db) << "," << detail::fmt_g9(s.metrics.snr_db)
        << "\n";
  }
  auto print_rate = [](const char* label, const std::optional<double>& rate) {
    if (rate)
      std::printf("%s worst-case max data rate: %.4g Gb/s\n", label, *rate / 1e9);
    else
      std::printf("%s worst-case max data rate: none within the configured grid\n", label);
  };
  print_rate("steered ", steered.max_data_rate_bps);
  print_rate("baseline", baseline.max_data_rate_bps);

  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    const std::string path = opts.out_dir + "/compare.csv";
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << csv.str();
    export_results(steered, opts.out_dir + "/steered");
    export_results(baseline, opts.out_dir + "/baseline");
    std::printf("results written to %s\n", opts.out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"indoor optical wireless link simulator"};
  app.require_subcommand(1);

  CommonOpts sim_opts, base_opts, steer_opts, illum_opts, cmp_opts;

  CLI::App* simulate =
      app.add_subcommand("simulate", "steered run over the configured positions");
  add_common(simulate, sim_opts);

  CLI::App* baseline =
      app.add_subcommand("baseline", "wide-beam comparison system over the same positions");
  add_common(baseline, base_opts);

  CLI::App* steer = app.add_subcommand("steer", "single-position steering trace");
  add_common(steer, steer_opts);
  std::string pos_text;
  std::string ir_path;
  double ir_bin_s = 1e-10;
  steer->add_option("--pos", pos_text, "receiver position as x,y,z")->required();
  steer->add_option("--ir", ir_path, "write the binned impulse response to this CSV file");
  steer->add_option("--ir-bin", ir_bin_s, "impulse-response bin width in seconds")
      ->check(CLI::PositiveNumber);

  CLI::App* illuminance =
      app.add_subcommand("illuminance", "floor illuminance grid and calibration");
  add_common(illuminance, illum_opts);
  bool illum_baseline = false;
  double calibrate_target = 0;
  illuminance->add_flag("--baseline", illum_baseline, "light the room with baseline units");
  illuminance->add_option("--calibrate", calibrate_target,
                          "scale the flux so the grid minimum hits this lux target")
      ->check(CLI::PositiveNumber);

  CLI::App* compare =
      app.add_subcommand("compare", "steered and baseline systems side by side");
  add_common(compare, cmp_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_mode_command(sim_opts, RunMode::Steered);
    if (baseline->parsed()) return run_mode_command(base_opts, RunMode::Baseline);
    if (steer->parsed()) return run_steer(steer_opts, pos_text, ir_path, ir_bin_s);
    if (illuminance->parsed())
      return run_illuminance(illum_opts, illum_baseline, calibrate_target);
    if (compare->parsed()) return run_compare(cmp_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
