#include "sls/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sls {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// The trace CSV stores microsecond-scaled columns; fitting the summary
// metrics on values pushed through the same store/load scaling keeps
// `analyze` on a written trace bit-identical to the run's own summary.
std::vector<double> csv_round_trip(const std::vector<double>& v,
                                   double store_scale, double load_scale) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = (v[i] * store_scale) * load_scale;
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string item;
  std::istringstream stream(line);
  while (std::getline(stream, item, ',')) fields.push_back(item);
  return fields;
}

double parse_field(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(path + ": malformed numeric field '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
  auto out = open_out(path);
  out << "t_us,flux_per_us,filtered_flux_per_us";
  for (int m : trace.orders) out << ",N_" << m;
  out << "\n";
  for (size_t i = 0; i < trace.times.size(); ++i) {
    out << fmt(trace.times[i] * 1e6) << ',' << fmt(trace.flux[i] * 1e-6)
        << ',' << fmt(trace.filtered_flux[i] * 1e-6);
    for (double n : trace.populations[i]) out << ',' << fmt(n);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

SimulationTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");

  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "t_us" ||
      header[1] != "flux_per_us" || header[2] != "filtered_flux_per_us") {
    throw ConfigError(path + ": unexpected trace header");
  }
  SimulationTrace trace;
  for (size_t c = 3; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name.rfind("N_", 0) != 0) {
      throw ConfigError(path + ": unexpected column '" + name + "'");
    }
    trace.orders.push_back(
        static_cast<int>(parse_field(name.substr(2), path)));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ConfigError(path + ": truncated row with " +
                        std::to_string(fields.size()) + " fields");
    }
    trace.times.push_back(parse_field(fields[0], path) * 1e-6);
    trace.flux.push_back(parse_field(fields[1], path) * 1e6);
    trace.filtered_flux.push_back(parse_field(fields[2], path) * 1e6);
    std::vector<double> pops;
    for (size_t c = 3; c < fields.size(); ++c) {
      pops.push_back(parse_field(fields[c], path));
    }
    trace.populations.push_back(std::move(pops));
  }
  if (trace.times.size() < 2) {
    throw ConfigError(path + ": trace needs at least two samples");
  }
  trace.dt = trace.times[1] - trace.times[0];
  return trace;
}

void write_matter_snapshot_csv(const std::string& path, const Snapshot& snap,
                               const ScaledModel& model) {
  auto out = open_out(path);
  const auto orders = model.orders();
  out << "z_um";
  for (size_t j = 0; j < snap.order_density.size(); ++j) {
    out << ",n_" << (j < orders.size() ? orders[j] : static_cast<int>(j));
  }
  out << "\n";
  const double to_um = 1e-6 * model.wavenumber;  // atoms/xi -> atoms/um
  const auto xi = model.grid.inner_positions();
  for (size_t i = 0; i < xi.size(); ++i) {
    out << fmt(xi[i] / model.wavenumber * 1e6);
    for (const auto& density : snap.order_density) {
      out << ',' << fmt(density[static_cast<Eigen::Index>(i)] * to_um);
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_light_snapshot_csv(const std::string& path, const Snapshot& snap,
                              const ScaledModel& model) {
  auto out = open_out(path);
  out << "z_um,I_plus,I_minus\n";  // photons/us
  const auto xi = model.grid.inner_positions();
  for (size_t i = 0; i < xi.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out << fmt(xi[i] / model.wavenumber * 1e6) << ','
        << fmt(snap.intensity_plus[idx] * 1e-6) << ','
        << fmt(snap.intensity_minus[idx] * 1e-6) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

json metrics_json(const PulseMetrics& m) {
  return json{{"amplitude_per_s", m.amplitude},
              {"center_s", m.center},
              {"sigma_s", m.width},
              {"residual", m.residual},
              {"converged", m.converged}};
}

json scaling_fit_json(const ScalingFit& fit) {
  json j;
  switch (fit.kind) {
    case ScalingFit::Kind::linear_R:
      j["kind"] = "linear_R";
      j["slope"] = fit.p1;
      j["intercept"] = fit.p2;
      if (fit.threshold) j["threshold_rate_per_s"] = *fit.threshold;
      break;
    case ScalingFit::Kind::width_R:
      j["kind"] = "width_R";
      j["p1"] = fit.p1;
      j["p2"] = fit.p2;
      break;
    case ScalingFit::Kind::power_N:
      j["kind"] = "power_N";
      j["exponent"] = fit.p1;
      j["prefactor"] = fit.p2;
      break;
  }
  j["goodness"] = fit.goodness;
  return j;
}

json summary_json(const RunConfig& config, const ScaledModel& model,
                  const SimulationTrace& trace,
                  const std::string& model_kind) {
  const PhysicalParams& p = config.physical;
  const double intensity = peak_intensity(p.pump_power, p.pump_waist);
  const double i_sat = resolved_saturation_intensity(p);

  json j;
  j["model"] = model_kind;
  j["physical"] = {
      {"atom_number", p.atom_number},
      {"tf_radius_axial", p.tf_radius_axial},
      {"tf_radius_radial", p.tf_radius_radial},
      {"wavelength", p.wavelength},
      {"detuning", p.detuning},
      {"linewidth", p.linewidth},
      {"saturation_intensity", i_sat},
      {"pump_power", p.pump_power},
      {"pump_waist", p.pump_waist},
      {"recoil_frequency", p.recoil_frequency},
      {"pulse_duration", p.pulse_duration},
      {"seed_calibration_factor", p.seed_calibration_factor},
      {"detector_time_constant", p.detector_time_constant},
      {"trap_frequency_axial", p.trap_frequency_axial},
  };
  j["numerics"] = {
      {"grid_points", config.numerics.grid_points},
      {"n_orders", config.numerics.n_orders},
      {"dtau", config.resolved_dtau()},
      {"pad_fraction", config.numerics.pad_fraction},
      {"model", config.numerics.model},
  };
  j["output"] = {{"filter", config.output.filter}};
  j["derived"] = {
      {"lambda", model.lambda},
      {"chi", model.chi},
      {"e_i", model.e_i},
      {"cross_section_m2", model.cross_section},
      {"wavenumber_per_m", model.wavenumber},
      {"flux_norm_per_s", model.flux_norm},
      {"xi_max", model.grid.xi_max()},
      {"dt_s", trace.dt},
      {"scattering_rate_per_s",
       scattering_rate(intensity, i_sat, p.linewidth, p.detuning)},
      {"peak_intensity_W_m2", intensity},
      {"overlap_fraction",
       pump_overlap_fraction(p.pump_waist, p.tf_radius_radial)},
      {"saturation_parameter", saturation_parameter(p)},
      {"fresnel_number", fresnel_number(p.tf_radius_radial, p.wavelength,
                                        p.condensate_length())},
  };
  j["diagnostics"] = {
      {"max_flux_residual", trace.diagnostics.max_flux_residual},
      {"max_boundary_defect", trace.diagnostics.max_boundary_defect},
      {"atom_number_drift", trace.diagnostics.atom_number_drift},
      {"max_outermost_fraction", trace.diagnostics.max_outermost_fraction},
      {"steps", trace.diagnostics.steps},
  };
  const std::vector<double> times = csv_round_trip(trace.times, 1e6, 1e-6);
  try {
    j["metrics_raw"] = metrics_json(
        fit_gaussian_pulse(times, csv_round_trip(trace.flux, 1e-6, 1e6)));
  } catch (const EmptyTrace&) {
    j["metrics_raw"] = nullptr;
  }
  if (trace.filtered) {
    try {
      j["metrics_filtered"] = metrics_json(fit_gaussian_pulse(
          times, csv_round_trip(trace.filtered_flux, 1e-6, 1e6)));
    } catch (const EmptyTrace&) {
      j["metrics_filtered"] = nullptr;
    }
  }
  return j;
}

RunConfig config_from_summary(const json& summary) {
  RunConfig c = default_config();
  try {
    const json& p = summary.at("physical");
    c.physical.atom_number = p.at("atom_number");
    c.physical.tf_radius_axial = p.at("tf_radius_axial");
    c.physical.tf_radius_radial = p.at("tf_radius_radial");
    c.physical.wavelength = p.at("wavelength");
    c.physical.detuning = p.at("detuning");
    c.physical.linewidth = p.at("linewidth");
    c.physical.saturation_intensity = p.at("saturation_intensity");
    c.physical.pump_power = p.at("pump_power");
    c.physical.pump_waist = p.at("pump_waist");
    c.physical.recoil_frequency = p.at("recoil_frequency");
    c.physical.pulse_duration = p.at("pulse_duration");
    c.physical.seed_calibration_factor = p.at("seed_calibration_factor");
    c.physical.detector_time_constant = p.at("detector_time_constant");
    c.physical.trap_frequency_axial = p.at("trap_frequency_axial");
    const json& n = summary.at("numerics");
    c.numerics.grid_points = n.at("grid_points");
    c.numerics.n_orders = n.at("n_orders");
    c.numerics.dtau = n.at("dtau");
    c.numerics.pad_fraction = n.at("pad_fraction");
    c.numerics.model = n.at("model");
    if (summary.contains("output")) {
      c.output.filter = summary.at("output").value("filter", true);
    }
    c.sweep = SweepConfig{};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary is missing fields: ") + e.what());
  }
  return c;
}

RunConfig config_from_summary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_summary(j);
}

void write_sweep_metrics_csv(const std::string& path,
                             const std::vector<SweepPointResult>& rows) {
  auto out = open_out(path);
  out << "index,value,R_per_s,atom_number,pump_power_W,"
         "amplitude_per_us,center_us,sigma_us,converged,"
         "amplitude_filtered_per_us,center_filtered_us,sigma_filtered_us,"
         "converged_filtered,status\n";
  for (const auto& r : rows) {
    out << r.index << ',' << fmt(r.value) << ',' << fmt(r.scattering_rate)
        << ',' << fmt(r.atom_number) << ',' << fmt(r.pump_power) << ','
        << fmt(r.raw.amplitude * 1e-6) << ',' << fmt(r.raw.center * 1e6)
        << ',' << fmt(r.raw.width * 1e6) << ',' << (r.raw.converged ? 1 : 0)
        << ',' << fmt(r.filtered.amplitude * 1e-6) << ','
        << fmt(r.filtered.center * 1e6) << ',' << fmt(r.filtered.width * 1e6)
        << ',' << (r.filtered.converged ? 1 : 0) << ','
        << (r.error.empty() ? "ok" : r.error) << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sls
