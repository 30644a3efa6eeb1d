#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "sls/matter.hpp"
#include "sls/optical.hpp"
#include "sls/units.hpp"

namespace sls {

// Outermost momentum order grew past the truncation guard.
struct LadderOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Snapshot {
  double time = 0;            // s, midpoint of the step actually captured
  double requested_time = 0;  // s
  std::vector<Eigen::ArrayXd> order_density;  // |psi_m|^2 on the inner grid
  Eigen::ArrayXd intensity_plus;              // photons/s
  Eigen::ArrayXd intensity_minus;             // photons/s
};

struct TraceDiagnostics {
  double max_flux_residual = 0;
  double max_boundary_defect = 0;
  double atom_number_drift = 0;      // relative
  double max_outermost_fraction = 0; // of N_at
  int steps = 0;
};

struct SimulationTrace {
  std::vector<double> times;  // s, uniform spacing dt
  std::vector<double> flux;   // photons/s
  std::vector<double> filtered_flux;
  std::vector<std::complex<double>> e_minus_boundary;  // e_-(0) per sample
  std::vector<int> orders;
  std::vector<std::vector<double>> populations;  // [sample][order], atoms
  std::vector<Snapshot> snapshots;
  TraceDiagnostics diagnostics;
  double dt = 0;          // s
  bool filtered = false;  // detector model applied to filtered_flux
};

struct RunOptions {
  std::vector<double> snapshot_times;  // s
  bool apply_filter = true;
  bool kinetic_enabled = true;   // validation switch, see two_mode.hpp
  bool ladder_guard = true;
  double seed_atoms = 1.0;
  std::vector<int> order_override;  // empty: symmetric set from the model
};

// Alternating update loop: kinetic half step, light solve at the step
// midpoint, coupling step with that light, kinetic half step. The pump is
// rectangular: constant e_i for params.pulse_duration, then the run ends.
// Throws LadderOverflow / NonFiniteError on guard violations.
SimulationTrace run_simulation(const ScaledModel& model,
                               const PhysicalParams& params,
                               const RunOptions& options = {});

// Causal single-pole low-pass of the flux trace, initialized at zero.
SimulationTrace detector_filter(const SimulationTrace& trace,
                                double time_constant);

struct KapitzaDiracReport {
  double fraction_m_minus2 = 0;  // of N_at at the end of the pulse
  double fraction_m_plus4 = 0;
  bool flag_minus2 = false;      // exceeds 1% of N_at
  bool flag_plus4 = false;
  SimulationTrace trace;
};

// Runs the simulation and reports whether the backscattering-dominated
// (Kapitza-Dirac) orders m = -2 and m = +4 reach macroscopic population.
KapitzaDiracReport run_kapitza_dirac_check(const ScaledModel& model,
                                           const PhysicalParams& params,
                                           const RunOptions& options = {});

}  // namespace sls
