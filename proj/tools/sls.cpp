#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sls/analysis.hpp"
#include "sls/config.hpp"
#include "sls/dynamics.hpp"
#include "sls/trace_io.hpp"
#include "sls/two_mode.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
  std::string config_path;
  std::string summary_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string snapshots;
  bool no_filter = false;
  int workers = 0;
};

sls::RunConfig load_config(const CommonArgs& args) {
  sls::RunConfig config;
  if (!args.summary_path.empty()) {
    config = sls::config_from_summary_file(args.summary_path);
  } else if (!args.config_path.empty()) {
    config = sls::parse_config_file(args.config_path);
  } else {
    throw sls::ConfigError("provide --config or --from-summary");
  }
  for (const auto& assignment : args.overrides) {
    sls::apply_override(config, assignment);
  }
  if (!args.out_dir.empty()) config.output.out_dir = args.out_dir;
  if (!args.snapshots.empty()) {
    config.output.snapshot_times.clear();
    std::istringstream stream(args.snapshots);
    std::string item;
    while (std::getline(stream, item, ',')) {
      config.output.snapshot_times.push_back(std::stod(item));
    }
  }
  if (args.no_filter) config.output.filter = false;
  if (args.workers > 0) config.sweep.workers = args.workers;
  return config;
}

void ensure_writable_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = fs::path(dir) / ".write_probe";
  std::ofstream test(probe);
  if (!test) throw sls::IoError("output directory is not writable: " + dir);
  test.close();
  fs::remove(probe, ec);
}

std::string suffixed(const std::string& name, const std::string& suffix) {
  if (suffix.empty()) return name;
  const size_t dot = name.rfind('.');
  if (dot == std::string::npos) return name + suffix;
  return name.substr(0, dot) + suffix + name.substr(dot);
}

struct RunResult {
  sls::SimulationTrace trace;
  sls::ScaledModel model;
  json summary;
};

RunResult execute(const sls::RunConfig& config) {
  RunResult result;
  result.model = config.build_model();
  sls::RunOptions options;
  options.snapshot_times = config.output.snapshot_times;
  options.apply_filter = config.output.filter;
  if (config.numerics.model == "two_mode") {
    result.trace = sls::run_two_mode(result.model, config.physical, options);
  } else {
    result.trace = sls::run_simulation(result.model, config.physical, options);
  }
  result.summary = sls::summary_json(config, result.model, result.trace,
                                     config.numerics.model);
  return result;
}

void write_outputs(const sls::RunConfig& config, RunResult& result,
                   const std::string& suffix) {
  const fs::path dir(config.output.out_dir);
  const std::string trace_name = suffixed(config.output.trace_file, suffix);
  sls::write_trace_csv((dir / trace_name).string(), result.trace);

  json snapshot_files = json::array();
  for (size_t i = 0; i < result.trace.snapshots.size(); ++i) {
    const std::string matter =
        config.output.snapshot_prefix + suffix + "_matter_" +
        std::to_string(i) + ".csv";
    const std::string light =
        config.output.snapshot_prefix + suffix + "_light_" +
        std::to_string(i) + ".csv";
    sls::write_matter_snapshot_csv((dir / matter).string(),
                                   result.trace.snapshots[i], result.model);
    sls::write_light_snapshot_csv((dir / light).string(),
                                  result.trace.snapshots[i], result.model);
    snapshot_files.push_back(
        {{"matter", matter},
         {"light", light},
         {"time_s", result.trace.snapshots[i].time},
         {"requested_time_s", result.trace.snapshots[i].requested_time}});
  }
  result.summary["outputs"] = {{"trace", trace_name},
                               {"snapshots", snapshot_files}};

  const std::string summary_name =
      suffixed(config.output.summary_file, suffix);
  std::ofstream out(dir / summary_name);
  if (!out) throw sls::IoError("cannot write summary: " + summary_name);
  out << result.summary.dump(2) << "\n";
}

int cmd_run(const CommonArgs& args) {
  const sls::RunConfig config = load_config(args);
  ensure_writable_dir(config.output.out_dir);
  RunResult result = execute(config);
  write_outputs(config, result, "");
  std::cout << "wrote " << config.output.out_dir << "/"
            << config.output.trace_file << " ("
            << result.trace.diagnostics.steps << " steps, max flux residual "
            << result.trace.diagnostics.max_flux_residual << ")\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args) {
  const sls::RunConfig base = load_config(args);
  if (base.sweep.parameter.empty() || base.sweep.values.empty()) {
    throw sls::ConfigError("sweep requires sweep.parameter and a non-empty "
                           "sweep.values list");
  }
  ensure_writable_dir(base.output.out_dir);

  const size_t n_points = base.sweep.values.size();
  std::vector<sls::SweepPointResult> rows(n_points);
  std::atomic<size_t> cursor{0};
  const int n_workers = std::max(
      1, std::min<int>(base.sweep.workers, static_cast<int>(n_points)));

  auto worker = [&]() {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= n_points) return;
      sls::RunConfig point = base;
      const double value = base.sweep.values[i];
      if (base.sweep.parameter == "pump_power") {
        point.physical.pump_power = value;
      } else {
        point.physical.atom_number = value;
      }
      auto& row = rows[i];
      row.index = static_cast<int>(i);
      row.value = value;
      row.atom_number = point.physical.atom_number;
      row.pump_power = point.physical.pump_power;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_%03zu", i);
      try {
        row.scattering_rate = sls::scattering_rate(
            sls::peak_intensity(point.physical.pump_power,
                                point.physical.pump_waist),
            sls::resolved_saturation_intensity(point.physical),
            point.physical.linewidth, point.physical.detuning);
        RunResult result = execute(point);
        write_outputs(point, result, suffix);
        row.raw = sls::fit_gaussian_pulse(result.trace, false);
        row.filtered = result.trace.filtered
                           ? sls::fit_gaussian_pulse(result.trace, true)
                           : row.raw;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  const fs::path dir(base.output.out_dir);
  sls::write_sweep_metrics_csv((dir / "sweep_metrics.csv").string(), rows);

  json fits = json::object();
  fits["parameter"] = base.sweep.parameter;
  std::vector<std::pair<double, double>> amp_pts, width_pts, width_filt_pts,
      n_pts;
  size_t ok = 0;
  for (const auto& row : rows) {
    if (!row.error.empty()) continue;
    ++ok;
    if (!row.raw.converged) continue;
    if (base.sweep.parameter == "pump_power") {
      amp_pts.emplace_back(row.scattering_rate, row.raw.amplitude);
      width_pts.emplace_back(row.scattering_rate, row.raw.width);
      width_filt_pts.emplace_back(row.scattering_rate, row.filtered.width);
    } else {
      n_pts.emplace_back(row.atom_number, row.raw.amplitude);
    }
  }
  auto try_fit = [&fits](const char* name, auto&& fn) {
    try {
      fits[name] = sls::scaling_fit_json(fn());
    } catch (const std::exception& e) {
      fits[name] = {{"error", e.what()}};
    }
  };
  if (base.sweep.parameter == "pump_power") {
    try_fit("amplitude_vs_R", [&] { return sls::fit_amplitude_vs_R(amp_pts); });
    try_fit("width_vs_R", [&] { return sls::fit_width_vs_R(width_pts); });
    try_fit("width_vs_R_filtered",
            [&] { return sls::fit_width_vs_R(width_filt_pts); });
  } else {
    try_fit("amplitude_vs_N", [&] { return sls::fit_amplitude_vs_N(n_pts); });
  }
  std::ofstream out(dir / "sweep_fits.json");
  if (!out) throw sls::IoError("cannot write sweep_fits.json");
  out << fits.dump(2) << "\n";

  std::cout << "sweep finished: " << ok << "/" << n_points
            << " points succeeded\n";
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      std::cout << "  point " << row.index << " failed: " << row.error << "\n";
    }
  }
  return ok > 0 ? 0 : kExitSolver;
}

int cmd_analyze(const std::string& trace_path) {
  const sls::SimulationTrace trace = sls::read_trace_csv(trace_path);
  json out;
  out["trace"] = trace_path;
  out["metrics_raw"] = sls::metrics_json(sls::fit_gaussian_pulse(trace, false));
  out["metrics_filtered"] =
      sls::metrics_json(sls::fit_gaussian_pulse(trace, true));
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1D coupled-wave simulator for superradiant Rayleigh "
               "scattering in an end-pumped condensate"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string trace_path;

  auto add_common = [&](CLI::App* sub, bool with_sweep) {
    sub->add_option("--config", args.config_path, "configuration file (INI)");
    sub->add_option("--from-summary", args.summary_path,
                    "re-run from a summary.json written by a previous run");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--set", args.overrides,
                    "override a config value, section.key=value");
    sub->add_option("--snapshots", args.snapshots,
                    "comma-separated snapshot times in seconds");
    sub->add_flag("--no-filter", args.no_filter,
                  "disable the detector low-pass model");
    if (with_sweep) {
      sub->add_option("--workers", args.workers, "concurrent sweep workers");
    }
  };

  CLI::App* run = app.add_subcommand("run", "run one simulation");
  add_common(run, false);
  CLI::App* sweep =
      app.add_subcommand("sweep", "run a pump_power or atom_number sweep");
  add_common(sweep, true);
  CLI::App* analyze =
      app.add_subcommand("analyze", "fit pulse metrics from a trace CSV");
  analyze->add_option("trace", trace_path, "trace CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(args);
    if (sweep->parsed()) return cmd_sweep(args);
    return cmd_analyze(trace_path);
  } catch (const sls::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sls::SaturationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const sls::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    // LadderOverflow, NonFiniteError, SolverSingular, EmptyTrace.
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
