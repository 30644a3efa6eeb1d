#include "sls/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sls/constants.hpp"

namespace sls {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
    throw ConfigError("invalid number for " + key + ": '" + value + "'");
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const double d = parse_double(key, value);
  const int i = static_cast<int>(std::llround(d));
  if (d != i) {
    throw ConfigError("expected an integer for " + key + ": '" + value + "'");
  }
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

void apply_entry(RunConfig& c, const std::string& section,
                 const std::string& key, const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "physical") {
    auto& p = c.physical;
    if (key == "atom_number") p.atom_number = parse_double(full, value);
    else if (key == "tf_radius_axial") p.tf_radius_axial = parse_double(full, value);
    else if (key == "tf_radius_radial") p.tf_radius_radial = parse_double(full, value);
    else if (key == "wavelength") p.wavelength = parse_double(full, value);
    else if (key == "detuning") p.detuning = parse_double(full, value);
    else if (key == "linewidth") p.linewidth = parse_double(full, value);
    else if (key == "saturation_intensity") p.saturation_intensity = parse_double(full, value);
    else if (key == "pump_power") p.pump_power = parse_double(full, value);
    else if (key == "pump_waist") p.pump_waist = parse_double(full, value);
    else if (key == "recoil_frequency") p.recoil_frequency = parse_double(full, value);
    else if (key == "pulse_duration") p.pulse_duration = parse_double(full, value);
    else if (key == "seed_calibration_factor") p.seed_calibration_factor = parse_double(full, value);
    else if (key == "detector_time_constant") p.detector_time_constant = parse_double(full, value);
    else if (key == "trap_frequency_axial") p.trap_frequency_axial = parse_double(full, value);
    else throw ConfigError("unknown key " + full);
  } else if (section == "numerics") {
    auto& n = c.numerics;
    if (key == "grid_points") n.grid_points = parse_int(full, value);
    else if (key == "n_orders") n.n_orders = parse_int(full, value);
    else if (key == "dtau") n.dtau = parse_double(full, value);
    else if (key == "pad_fraction") n.pad_fraction = parse_double(full, value);
    else if (key == "model") {
      const std::string v = trim(value);
      if (v != "full" && v != "two_mode") {
        throw ConfigError("numerics.model must be 'full' or 'two_mode'");
      }
      n.model = v;
    } else throw ConfigError("unknown key " + full);
  } else if (section == "output") {
    auto& o = c.output;
    if (key == "out_dir") o.out_dir = trim(value);
    else if (key == "trace_file") o.trace_file = trim(value);
    else if (key == "summary_file") o.summary_file = trim(value);
    else if (key == "snapshot_prefix") o.snapshot_prefix = trim(value);
    else if (key == "snapshot_times") o.snapshot_times = parse_list(full, value);
    else if (key == "filter") o.filter = parse_bool(full, value);
    else throw ConfigError("unknown key " + full);
  } else if (section == "sweep") {
    auto& s = c.sweep;
    if (key == "parameter") {
      const std::string v = trim(value);
      if (v != "pump_power" && v != "atom_number") {
        throw ConfigError("sweep.parameter must be pump_power or atom_number");
      }
      s.parameter = v;
    } else if (key == "values") s.values = parse_list(full, value);
    else if (key == "workers") s.workers = parse_int(full, value);
    else throw ConfigError("unknown key " + full);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

}  // namespace

double RunConfig::resolved_dtau() const {
  if (numerics.dtau > 0) return numerics.dtau;
  return 2.0 * physical.recoil_frequency * 1e-7;
}

ScaledModel RunConfig::build_model() const {
  return build_scaled_model(physical, numerics.grid_points, numerics.n_orders,
                            resolved_dtau(), numerics.pad_fraction);
}

RunConfig default_config() {
  using namespace constants;
  RunConfig c;
  auto& p = c.physical;
  p.atom_number = 1.35e6;
  p.tf_radius_axial = 65e-6;
  p.tf_radius_radial = 6.4e-6;
  p.wavelength = 795e-9;
  p.detuning = -two_pi * 2.6e9;
  p.linewidth = two_pi * 5.75e6;  // Rb D1 literature value
  p.saturation_intensity = 0;     // derived two-level value
  p.pump_waist = 13.2e-6;
  p.recoil_frequency = two_pi * 3.6e3;
  p.pulse_duration = 200e-6;
  p.seed_calibration_factor = 0.105;
  p.detector_time_constant = 2.6e-6;
  p.trap_frequency_axial = 0;
  // R = 0.447e3 1/s at the defaults above.
  p.pump_power = pump_power_for_scattering_rate(0.447e3, p);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config = default_config();
  std::istringstream stream(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("malformed section header at line " +
                          std::to_string(line_no));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at line " +
                        std::to_string(line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      throw ConfigError("key '" + key + "' appears before any section");
    }
    apply_entry(config, section, key, value);
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value: " +
                      assignment);
  }
  const std::string path = trim(assignment.substr(0, eq));
  const size_t dot = path.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("override key must be section.key: " + assignment);
  }
  apply_entry(config, path.substr(0, dot), path.substr(dot + 1),
              assignment.substr(eq + 1));
}

}  // namespace sls
