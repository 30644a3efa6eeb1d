#include "sls/units.hpp"

#include <cmath>

#include "sls/constants.hpp"

namespace sls {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (v <= 0) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

}  // namespace

double PhysicalParams::wavenumber() const {
  return constants::two_pi / wavelength;
}

void PhysicalParams::validate() const {
  require_positive(atom_number, "atom_number");
  require_positive(tf_radius_axial, "tf_radius_axial");
  require_positive(tf_radius_radial, "tf_radius_radial");
  require_positive(wavelength, "wavelength");
  require_finite(detuning, "detuning");
  if (detuning == 0) {
    throw std::invalid_argument("detuning must be nonzero");
  }
  require_positive(linewidth, "linewidth");
  require_finite(saturation_intensity, "saturation_intensity");
  require_finite(pump_power, "pump_power");
  if (pump_power < 0) {
    throw std::invalid_argument("pump_power must be non-negative");
  }
  require_positive(pump_waist, "pump_waist");
  require_positive(recoil_frequency, "recoil_frequency");
  require_positive(pulse_duration, "pulse_duration");
  require_finite(seed_calibration_factor, "seed_calibration_factor");
  if (seed_calibration_factor < 0 || seed_calibration_factor >= 1) {
    throw std::invalid_argument("seed_calibration_factor must lie in [0, 1)");
  }
  require_positive(detector_time_constant, "detector_time_constant");
  require_finite(trap_frequency_axial, "trap_frequency_axial");
  if (trap_frequency_axial < 0) {
    throw std::invalid_argument("trap_frequency_axial must be non-negative");
  }
}

std::vector<double> SpatialGrid::inner_positions() const {
  std::vector<double> xi(n_inner);
  for (int i = 0; i < n_inner; ++i) xi[i] = dxi * i;
  return xi;
}

std::vector<int> ScaledModel::orders() const {
  std::vector<int> m(n_orders);
  const int half = n_orders / 2;
  for (int j = 0; j < n_orders; ++j) m[j] = 2 * (j - half);
  return m;
}

double scattering_rate(double intensity, double saturation_intensity,
                       double linewidth, double detuning) {
  require_finite(intensity, "intensity");
  if (intensity < 0) {
    throw std::invalid_argument("intensity must be non-negative");
  }
  require_positive(saturation_intensity, "saturation_intensity");
  require_positive(linewidth, "linewidth");
  require_finite(detuning, "detuning");

  const double s = intensity / saturation_intensity;
  const double d = 2.0 * detuning / linewidth;
  return linewidth * s / (2.0 * (1.0 + s + d * d));
}

double pump_power_for_scattering_rate(double rate, const PhysicalParams& p) {
  require_finite(rate, "rate");
  if (rate < 0) throw std::invalid_argument("rate must be non-negative");
  if (rate >= p.linewidth / 2) {
    throw std::invalid_argument("rate exceeds the saturated limit Gamma/2");
  }
  const double d = 2.0 * p.detuning / p.linewidth;
  const double s = 2.0 * rate * (1.0 + d * d) / (p.linewidth - 2.0 * rate);
  const double intensity = s * resolved_saturation_intensity(p);
  return intensity * constants::pi * p.pump_waist * p.pump_waist / 2.0;
}

double fresnel_number(double radius, double wavelength, double length) {
  require_positive(radius, "radius");
  require_positive(wavelength, "wavelength");
  require_positive(length, "length");
  return constants::pi * radius * radius / (wavelength * length);
}

double pump_overlap_fraction(double pump_waist, double sample_radius) {
  require_positive(pump_waist, "pump_waist");
  require_positive(sample_radius, "sample_radius");
  const double r = sample_radius / pump_waist;
  return 1.0 - std::exp(-2.0 * r * r);
}

double peak_intensity(double power, double waist) {
  return 2.0 * power / (constants::pi * waist * waist);
}

double two_level_saturation_intensity(double linewidth, double wavelength) {
  using namespace constants;
  return pi * planck_h * speed_of_light * linewidth /
         (3.0 * wavelength * wavelength * wavelength);
}

double resolved_saturation_intensity(const PhysicalParams& p) {
  if (p.saturation_intensity > 0) return p.saturation_intensity;
  // The pumped sigma hyperfine transition carries half of the D1 line
  // strength (the excited state decays back to the initial state with
  // probability 1/2), so its saturation intensity is twice the two-level
  // value.
  return 2.0 * two_level_saturation_intensity(p.linewidth, p.wavelength);
}

double saturation_parameter(const PhysicalParams& p) {
  const double intensity = peak_intensity(p.pump_power, p.pump_waist);
  const double ratio = p.linewidth / (2.0 * p.detuning);
  return intensity / resolved_saturation_intensity(p) * ratio * ratio;
}

ScaledModel build_scaled_model(const PhysicalParams& p, int grid_points,
                               int n_orders, double dtau,
                               double pad_fraction) {
  using namespace constants;
  p.validate();
  if (grid_points < 64) {
    throw std::invalid_argument("grid_points must be at least 64");
  }
  if (n_orders < 3 || n_orders % 2 == 0) {
    throw std::invalid_argument("n_orders must be odd and at least 3");
  }
  require_positive(dtau, "dtau");
  if (pad_fraction < 0.1) {
    throw std::invalid_argument("pad_fraction must be at least 0.1");
  }

  const double sat = saturation_parameter(p);
  if (sat > 0.1) {
    throw SaturationError(
        "pump saturates the transition: I/I_s (Gamma/2 delta)^2 = " +
        std::to_string(sat) + " > 0.1; the linear-polarizability model "
        "does not apply");
  }

  ScaledModel m;
  m.wavenumber = p.wavenumber();
  m.cross_section = pi * p.tf_radius_radial * p.tf_radius_radial;
  const double omega_l = speed_of_light * m.wavenumber;

  // Two-level dipole relation |d|^2 = 3 pi eps0 hbar Gamma / k^3 folded in.
  m.lambda = 3.0 * pi * p.linewidth * speed_of_light /
             (4.0 * m.wavenumber * p.recoil_frequency * p.detuning *
              m.cross_section);
  m.chi = speed_of_light * m.wavenumber / (2.0 * p.recoil_frequency);
  m.flux_norm = speed_of_light * m.wavenumber;
  m.dtau = dtau;
  m.n_orders = n_orders;

  const double overlap =
      pump_overlap_fraction(p.pump_waist, p.tf_radius_radial);
  const double photon_flux = p.pump_power * overlap / (hbar * omega_l);
  // |e_i|^2 is the in-mode photon flux in units of c k_l; the global
  // calibration enters as a fractional reduction of the amplitude (the
  // default 0.105 reduces e_i to 89.5% of the raw value, see config.hpp).
  m.e_i = (1.0 - p.seed_calibration_factor) *
          std::sqrt(photon_flux / m.flux_norm);

  m.grid.n_inner = grid_points;
  m.grid.dxi = m.wavenumber * p.condensate_length() / (grid_points - 1);
  m.grid.pad = static_cast<int>(std::ceil(pad_fraction * (grid_points - 1)));
  return m;
}

}  // namespace sls
