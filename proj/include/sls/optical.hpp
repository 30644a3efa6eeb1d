#pragma once

#include <complex>

#include <Eigen/Core>

#include "sls/matter.hpp"
#include "sls/units.hpp"

namespace sls {

// Counter-propagating envelopes on the inner grid at one instant.
// e_plus(0) carries the boundary amplitude, e_minus vanishes at the far end,
// and |e+|^2 - |e-|^2 is constant along xi up to solver tolerance.
struct LightState {
  Eigen::ArrayXcd e_plus;
  Eigen::ArrayXcd e_minus;
  double tau = 0;
};

struct SolverSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coefficients of the linear light system, sampled on the inner nodes and at
// cell midpoints. The midpoint values are defined by the four-point stencil
// (-f0 + 9 f1 + 9 f2 - f3)/16 (one-sided quadratic in the first and last
// cell); this interpolation is part of the semi-discrete model shared by
// every light solver in the project.
struct LightSources {
  Eigen::ArrayXd density_node;    // n(xi) = sum_m |psi_m|^2
  Eigen::ArrayXcd coupling_node;  // g(xi) = sum_m psi_m conj(psi_{m-2})
                                  //         exp(-2i (m-1) tau)
  Eigen::ArrayXd density_mid;
  Eigen::ArrayXcd coupling_mid;
};

Eigen::ArrayXd midpoint_refine(const Eigen::ArrayXd& nodes);
Eigen::ArrayXcd midpoint_refine(const Eigen::ArrayXcd& nodes);

LightSources build_light_sources(const MatterState& s, double tau);

// Solves d/dxi (e+, e-) = M(xi) (e+, e-) with
//   M = -i (Lambda/chi) [[n, g], [-conj(g), -n]]
// and boundary conditions e+(0) = e_i, e-(xi_max) = 0, by integrating two
// fundamental solutions with classical RK4 and combining them. Basis
// solutions are renormalized mid-integration (common log-scale bookkeeping)
// if they grow beyond the representable range.
LightState solve_light_bvp(const LightSources& src, std::complex<double> e_i,
                           double lambda_over_chi, double dxi, double tau);

// build_light_sources + solve_light_bvp for a matter state.
LightState propagate_light(const MatterState& s, double tau,
                           std::complex<double> e_i, double lambda,
                           double chi);

// max_xi | (|e+|^2 - |e-|^2) - (|e+(0)|^2 - |e-(0)|^2) | / |e+(0)|^2.
double flux_residual(const LightState& l);

// | |e+(0)|^2 - |e-(0)|^2 - |e+(end)|^2 | / |e+(0)|^2.
double boundary_flux_defect(const LightState& l);

// N_ph = flux_norm * |e-(0)|^2, photons per second.
double backscattered_flux(const LightState& l, double flux_norm);

}  // namespace sls
