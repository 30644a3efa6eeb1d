#pragma once

#include <complex>

#include <Eigen/Core>

#include "sls/dynamics.hpp"
#include "sls/units.hpp"

namespace sls {

// Reduced model keeping only the m = 0 and m = 2 orders with kinetic and
// displacement terms dropped. Used as a cross-check oracle for the full
// solver, so it deliberately shares no stepping code with it: the matter
// step uses the closed-form 2x2 unitary and the light BVP is integrated
// with Lobatto IIIA collocation instead of explicit RK4.
struct TwoModeState {
  Eigen::ArrayXcd psi0;     // inner grid
  Eigen::ArrayXcd psi2;
  Eigen::ArrayXcd e_plus;   // light solution at tau
  Eigen::ArrayXcd e_minus;
  double tau = 0;
  double dxi = 0;
};

TwoModeState initial_two_mode_state(const ScaledModel& model,
                                    const PhysicalParams& params,
                                    double seed_atoms = 1.0);

// One step: light re-solved at tau + dtau/2, matter advanced by the exact
// 2x2 exponential with coupling phases at that midpoint.
void step_two_mode(TwoModeState& s, const ScaledModel& model);

// Right-hand side of the coherence equation,
// d(psi2 conj(psi0))/dtau = i Lambda conj(e-) e+ exp(+2i tau)
//                           (|psi2|^2 - |psi0|^2),
// evaluated pointwise with the state's current light fields.
Eigen::ArrayXcd coherence_rate(const TwoModeState& s, double lambda);

double two_mode_atom_total(const TwoModeState& s);

// Full run with the same trace schema as run_simulation (orders {0, 2}).
SimulationTrace run_two_mode(const ScaledModel& model,
                             const PhysicalParams& params,
                             const RunOptions& options = {});

}  // namespace sls
