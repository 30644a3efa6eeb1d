#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sls {

// Laboratory inputs in SI units. Defaults live in the configuration layer
// (config.hpp), not here.
struct PhysicalParams {
  double atom_number = 0;              // N_at
  double tf_radius_axial = 0;          // z0 [m]; condensate length L = 2 z0
  double tf_radius_radial = 0;         // rho0 [m]
  double wavelength = 0;               // lambda [m]
  double detuning = 0;                 // delta [rad/s], negative = red
  double linewidth = 0;                // Gamma [rad/s]
  double saturation_intensity = 0;     // I_s [W/m^2]; <=0 selects the
                                       // two-level value pi*h*c*Gamma/(3 lambda^3)
  double pump_power = 0;               // [W]
  double pump_waist = 0;               // w_p [m], 1/e^2 intensity radius
  double recoil_frequency = 0;         // omega_r [rad/s]
  double pulse_duration = 0;           // rectangular pump length [s]
  double seed_calibration_factor = 0;  // global scaling of e_i, see build_scaled_model
  double detector_time_constant = 0;   // [s]
  double trap_frequency_axial = 0;     // [rad/s]; 0 disables the trap term

  double condensate_length() const { return 2.0 * tf_radius_axial; }
  double wavenumber() const;  // k_l = 2 pi / lambda

  // Throws std::invalid_argument on non-finite or sign-violating fields.
  void validate() const;
};

// Uniform spatial grid in the dimensionless coordinate xi = k_l z.
// The "inner" nodes cover the condensate, xi in [0, xi_max]; `pad` extra
// nodes on each side give the spectral kinetic step room so the periodic
// wrap-around never touches occupied regions.
struct SpatialGrid {
  int n_inner = 0;
  int pad = 0;
  double dxi = 0;

  int total() const { return n_inner + 2 * pad; }
  double xi_max() const { return dxi * (n_inner - 1); }
  double xi(int idx) const { return dxi * (idx - pad); }  // idx over [0, total)
  std::vector<double> inner_positions() const;
};

// Dimensionless model derived from PhysicalParams.
struct ScaledModel {
  double lambda = 0;         // coupling Lambda (sign follows detuning)
  double chi = 0;            // c k_l / (2 omega_r)
  double dtau = 0;           // time step in tau = 2 omega_r t
  int n_orders = 0;          // odd count of even momentum orders centred on 0
  double e_i = 0;            // boundary amplitude for e_plus(0)
  double cross_section = 0;  // A = pi rho0^2 [m^2]
  double wavenumber = 0;     // k_l [1/m]
  double flux_norm = 0;      // photons/s per unit |e|^2: C = c k_l
  SpatialGrid grid;

  std::vector<double> xi_grid() const { return grid.inner_positions(); }
  std::vector<int> orders() const;  // {-(n-1), ..., -2, 0, 2, ..., n-1}
};

// Configuration rejected because the pump would saturate the transition.
struct SaturationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-particle spontaneous scattering rate of a driven two-level atom,
// R = Gamma I / (2 I_s [1 + I/I_s + (2 delta/Gamma)^2]).
double scattering_rate(double intensity, double saturation_intensity,
                       double linewidth, double detuning);

// Pump power that produces scattering rate R at the given parameters
// (peak intensity of a Gaussian beam of waist p.pump_waist).
double pump_power_for_scattering_rate(double rate, const PhysicalParams& p);

// F = pi w^2 / (lambda L).
double fresnel_number(double radius, double wavelength, double length);

// Fraction of a Gaussian beam's power enclosed within radius rho0:
// 1 - exp(-2 rho0^2 / w_p^2).
double pump_overlap_fraction(double pump_waist, double sample_radius);

// Peak (on-axis) intensity of a Gaussian beam, 2 P / (pi w^2).
double peak_intensity(double power, double waist);

// Two-level saturation intensity pi h c Gamma / (3 lambda^3).
double two_level_saturation_intensity(double linewidth, double wavelength);

// Resolved I_s: the explicit value if positive, otherwise twice the
// two-level value (the pumped hyperfine transition carries half the line
// strength).
double resolved_saturation_intensity(const PhysicalParams& p);

// On-resonance saturation parameter at the detuned drive,
// s = (I/I_s) (Gamma / 2 delta)^2; build_scaled_model rejects s > 0.1.
double saturation_parameter(const PhysicalParams& p);

// Builds the dimensionless model.
//
// Lambda = |d|^2 omega_l k_l / (4 omega_r hbar delta eps0 A) with the dipole
// moment tied to the spontaneous width by the two-level relation
// |d|^2 = 3 pi eps0 hbar Gamma / k_l^3, which collapses to
// Lambda = 3 pi Gamma c / (4 k_l omega_r delta A).
//
// With the field scaling used here, |e|^2 is photon flux through the sample
// cross-section in units of c k_l photons per second, so the boundary value
// follows from the pump photon flux restricted to the sample:
// |e_i|^2 = P * overlap / (hbar omega_l c k_l), scaled by the calibration
// factor described in config.hpp.
ScaledModel build_scaled_model(const PhysicalParams& p, int grid_points,
                               int n_orders, double dtau,
                               double pad_fraction = 0.1);

}  // namespace sls
