#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sls/analysis.hpp"
#include "sls/config.hpp"
#include "sls/dynamics.hpp"

namespace sls {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trace CSV schema: t_us, flux_per_us, filtered_flux_per_us, then one
// population column N_<m> per momentum order.
void write_trace_csv(const std::string& path, const SimulationTrace& trace);
SimulationTrace read_trace_csv(const std::string& path);

// Snapshot CSVs: z_um plus per-order atom density (atoms/um), and
// z_um, I_plus, I_minus (photons/us).
void write_matter_snapshot_csv(const std::string& path, const Snapshot& snap,
                               const ScaledModel& model);
void write_light_snapshot_csv(const std::string& path, const Snapshot& snap,
                              const ScaledModel& model);

nlohmann::json metrics_json(const PulseMetrics& m);
nlohmann::json scaling_fit_json(const ScalingFit& fit);

// Run summary with every resolved parameter; a run restarted from this
// document alone reproduces the trace bit for bit.
nlohmann::json summary_json(const RunConfig& config, const ScaledModel& model,
                            const SimulationTrace& trace,
                            const std::string& model_kind);

RunConfig config_from_summary(const nlohmann::json& summary);
RunConfig config_from_summary_file(const std::string& path);

struct SweepPointResult {
  int index = 0;
  double value = 0;            // swept parameter value
  double scattering_rate = 0;  // 1/s
  double atom_number = 0;
  double pump_power = 0;       // W
  PulseMetrics raw;
  PulseMetrics filtered;
  std::string error;           // empty on success
};

void write_sweep_metrics_csv(const std::string& path,
                             const std::vector<SweepPointResult>& rows);

}  // namespace sls
