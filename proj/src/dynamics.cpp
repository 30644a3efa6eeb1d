#include "sls/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace sls {

namespace {

Eigen::ArrayXd trap_potential(const ScaledModel& model,
                              const PhysicalParams& params) {
  // 0.5 M w_z^2 z^2 in units of 2 hbar omega_r, with M = hbar k^2/(2 omega_r):
  // V(xi) = (w_z / omega_r)^2 (xi - xi_c)^2 / 8.
  const SpatialGrid& g = model.grid;
  Eigen::ArrayXd v(g.total());
  const double ratio = params.trap_frequency_axial / params.recoil_frequency;
  const double centre = g.xi_max() / 2.0;
  for (int i = 0; i < g.total(); ++i) {
    const double rel = g.xi(i) - centre;
    v[i] = ratio * ratio * rel * rel / 8.0;
  }
  return v;
}

}  // namespace

SimulationTrace run_simulation(const ScaledModel& model,
                               const PhysicalParams& params,
                               const RunOptions& options) {
  const double dt = model.dtau / (2.0 * params.recoil_frequency);
  const int n_steps =
      std::max(1, static_cast<int>(std::llround(params.pulse_duration / dt)));

  MatterState state =
      options.order_override.empty()
          ? initial_state(params.atom_number, model.grid, model.n_orders,
                          options.seed_atoms)
          : initial_state(params.atom_number, model.grid,
                          options.order_override, options.seed_atoms);
  SpectralKinetic kinetic(model.grid);

  Eigen::ArrayXd trap;
  const Eigen::ArrayXd* extra = nullptr;
  if (params.trap_frequency_axial > 0) {
    trap = trap_potential(model, params);
    extra = &trap;
  }

  SimulationTrace trace;
  trace.dt = dt;
  trace.orders = state.orders;
  trace.times.reserve(n_steps);
  trace.flux.reserve(n_steps);
  trace.e_minus_boundary.reserve(n_steps);
  trace.populations.reserve(n_steps);

  // Snapshot step indices (nearest midpoint to each requested time).
  std::vector<std::pair<int, double>> wanted;
  for (double t : options.snapshot_times) {
    int idx = static_cast<int>(std::llround(t / dt - 0.5));
    wanted.emplace_back(std::clamp(idx, 0, n_steps - 1), t);
  }

  const double atoms_initial = atom_number_total(state);
  const double guard_level = 1e-3 * params.atom_number;

  for (int step = 0; step < n_steps; ++step) {
    if (options.kinetic_enabled) kinetic.half_step(state, model.dtau);

    const double tau_mid = (step + 0.5) * model.dtau;
    const LightState light =
        propagate_light(state, tau_mid, model.e_i, model.lambda, model.chi);

    trace.times.push_back((step + 0.5) * dt);
    trace.flux.push_back(backscattered_flux(light, model.flux_norm));
    trace.e_minus_boundary.push_back(light.e_minus[0]);
    trace.populations.push_back(momentum_populations(state));
    trace.diagnostics.max_flux_residual =
        std::max(trace.diagnostics.max_flux_residual, flux_residual(light));
    trace.diagnostics.max_boundary_defect =
        std::max(trace.diagnostics.max_boundary_defect,
                 boundary_flux_defect(light));

    for (const auto& [idx, requested] : wanted) {
      if (idx != step) continue;
      Snapshot snap;
      snap.time = trace.times.back();
      snap.requested_time = requested;
      for (size_t j = 0; j < state.orders.size(); ++j) {
        snap.order_density.push_back(
            state.envelopes[j].segment(model.grid.pad, model.grid.n_inner)
                .abs2());
      }
      snap.intensity_plus = model.flux_norm * light.e_plus.abs2();
      snap.intensity_minus = model.flux_norm * light.e_minus.abs2();
      trace.snapshots.push_back(std::move(snap));
    }

    coupling_step(state, light, model.lambda, model.dtau, extra);
    if (options.kinetic_enabled) kinetic.half_step(state, model.dtau);
    state.tau = (step + 1) * model.dtau;

    const auto& pops = trace.populations.back();
    const double outermost = std::max(pops.front(), pops.back());
    trace.diagnostics.max_outermost_fraction =
        std::max(trace.diagnostics.max_outermost_fraction,
                 outermost / params.atom_number);
    if (options.ladder_guard && state.orders.size() > 2 &&
        outermost > guard_level) {
      throw LadderOverflow(
          "outermost momentum order holds " + std::to_string(outermost) +
          " atoms (> 1e-3 N_at) at step " + std::to_string(step) +
          "; increase n_orders");
    }
    const double atoms = atom_number_total(state);
    if (!std::isfinite(atoms) || !std::isfinite(trace.flux.back())) {
      throw NonFiniteError("state became non-finite at step " +
                           std::to_string(step));
    }
    trace.diagnostics.atom_number_drift =
        std::max(trace.diagnostics.atom_number_drift,
                 std::abs(atoms - atoms_initial) / atoms_initial);
  }
  trace.diagnostics.steps = n_steps;

  if (options.apply_filter) {
    trace = detector_filter(trace, params.detector_time_constant);
  } else {
    trace.filtered_flux = trace.flux;
    trace.filtered = false;
  }
  return trace;
}

SimulationTrace detector_filter(const SimulationTrace& trace,
                                double time_constant) {
  if (time_constant <= 0) {
    throw std::invalid_argument("time_constant must be positive");
  }
  SimulationTrace out = trace;
  out.filtered_flux.resize(trace.flux.size());
  const double keep = std::exp(-trace.dt / time_constant);
  double y = 0;
  for (size_t i = 0; i < trace.flux.size(); ++i) {
    y = keep * y + (1.0 - keep) * trace.flux[i];
    out.filtered_flux[i] = y;
  }
  out.filtered = true;
  return out;
}

KapitzaDiracReport run_kapitza_dirac_check(const ScaledModel& model,
                                           const PhysicalParams& params,
                                           const RunOptions& options) {
  KapitzaDiracReport report;
  report.trace = run_simulation(model, params, options);
  const auto& pops = report.trace.populations.back();
  const auto& orders = report.trace.orders;
  for (size_t j = 0; j < orders.size(); ++j) {
    if (orders[j] == -2) report.fraction_m_minus2 = pops[j] / params.atom_number;
    if (orders[j] == 4) report.fraction_m_plus4 = pops[j] / params.atom_number;
  }
  report.flag_minus2 = report.fraction_m_minus2 > 0.01;
  report.flag_plus4 = report.fraction_m_plus4 > 0.01;
  return report;
}

}  // namespace sls
