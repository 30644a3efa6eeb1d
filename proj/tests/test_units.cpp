#include <doctest.h>

#include <cmath>
#include <cstring>

#include "sls/config.hpp"
#include "sls/constants.hpp"
#include "sls/units.hpp"

using namespace sls;

TEST_CASE("scattering rate limits") {
  const double gamma = constants::two_pi * 5.75e6;
  CHECK(scattering_rate(0.0, 30.0, gamma, -1e10) == 0.0);
  // I = I_s on resonance: R = Gamma/4.
  CHECK(scattering_rate(30.0, 30.0, gamma, 0.0) ==
        doctest::Approx(gamma / 4.0).epsilon(1e-12));
  CHECK_THROWS_AS(scattering_rate(std::nan(""), 30.0, gamma, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(scattering_rate(1.0, -1.0, gamma, 0.0),
                  std::invalid_argument);
}

TEST_CASE("scattering rate covers the experimental range") {
  const PhysicalParams p = default_config().physical;
  for (double target : {0.5e3, 1.0e3, 3.2e3}) {
    const double power = pump_power_for_scattering_rate(target, p);
    CHECK(power > 0);
    const double rate =
        scattering_rate(peak_intensity(power, p.pump_waist),
                        resolved_saturation_intensity(p), p.linewidth,
                        p.detuning);
    CHECK(rate == doctest::Approx(target).epsilon(1e-10));
  }
}

TEST_CASE("scattering rate monotonicity properties") {
  const double gamma = constants::two_pi * 5.75e6;
  const double i_s = 29.9;
  double previous = 0;
  for (double intensity = 10; intensity < 1e4; intensity *= 2) {
    const double r = scattering_rate(intensity, i_s, gamma, -1e10);
    CHECK(r > previous);
    previous = r;
  }
  for (double detuning : {1e9, 3e9, 1e10}) {
    CHECK(scattering_rate(100.0, i_s, gamma, detuning) ==
          scattering_rate(100.0, i_s, gamma, -detuning));
    CHECK(scattering_rate(100.0, i_s, gamma, detuning) >
          scattering_rate(100.0, i_s, gamma, 2 * detuning));
  }
}

TEST_CASE("fresnel number") {
  // rho0 = 6.4 um, lambda = 795 nm, L = 130 um -> F close to one.
  const double f = fresnel_number(6.4e-6, 795e-9, 130e-6);
  CHECK(f == doctest::Approx(1.2451).epsilon(1e-3));
  CHECK(fresnel_number(6.4e-6 * std::sqrt(2.0), 795e-9, 130e-6) ==
        doctest::Approx(2 * f).epsilon(1e-12));
  CHECK(fresnel_number(6.4e-6, 2 * 795e-9, 130e-6) ==
        doctest::Approx(f / 2).epsilon(1e-12));
  CHECK_THROWS_AS(fresnel_number(-1.0, 795e-9, 130e-6),
                  std::invalid_argument);
}

TEST_CASE("pump overlap fraction") {
  CHECK(pump_overlap_fraction(13.2e-6, 1.0) == doctest::Approx(1.0));
  CHECK(pump_overlap_fraction(13.2e-6, 13.2e-6) ==
        doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK(pump_overlap_fraction(13.2e-6, 6.4e-6) ==
        doctest::Approx(0.375095).epsilon(1e-5));
}

TEST_CASE("scaled model grids and constants") {
  const RunConfig c = default_config();
  const ScaledModel m = c.build_model();

  // tau = 2 w_r t and xi = k_l z at the reference numbers.
  CHECK(2.0 * c.physical.recoil_frequency * 65e-6 ==
        doctest::Approx(2.9405).epsilon(1e-4));
  CHECK(m.grid.xi_max() == doctest::Approx(1027.44).epsilon(1e-4));

  CHECK(m.chi > 0);
  CHECK(m.lambda < 0);  // red detuning
  CHECK(m.flux_norm ==
        doctest::Approx(constants::speed_of_light * m.wavenumber));

  const auto xi = m.xi_grid();
  CHECK(xi.front() == 0.0);
  CHECK(xi.back() == doctest::Approx(m.grid.xi_max()));
  for (size_t i = 1; i < xi.size(); ++i) CHECK(xi[i] > xi[i - 1]);

  const auto orders = m.orders();
  REQUIRE(orders.size() == 9);
  CHECK(orders.front() == -8);
  CHECK(orders[4] == 0);
  CHECK(orders.back() == 8);
}

TEST_CASE("boundary amplitude calibration") {
  RunConfig c = default_config();

  c.physical.seed_calibration_factor = 0;
  const double raw = c.build_model().e_i;
  CHECK(raw > 0);

  // The global calibration reduces the amplitude by the given fraction.
  c.physical.seed_calibration_factor = 0.105;
  CHECK(c.build_model().e_i == doctest::Approx(0.895 * raw).epsilon(1e-12));

  c.physical.seed_calibration_factor = 0;
  c.physical.pump_power = 0;
  CHECK(c.build_model().e_i == 0.0);

  // |e_i|^2 is linear in pump power.
  c = default_config();
  const double e1 = c.build_model().e_i;
  c.physical.pump_power *= 2;
  const double e2 = c.build_model().e_i;
  CHECK(e2 * e2 == doctest::Approx(2.0 * e1 * e1).epsilon(1e-12));
}

TEST_CASE("scaled model is deterministic") {
  const RunConfig c = default_config();
  const ScaledModel a = c.build_model();
  const ScaledModel b = c.build_model();
  CHECK(std::memcmp(&a.lambda, &b.lambda, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.chi, &b.chi, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.e_i, &b.e_i, sizeof(double)) == 0);
  CHECK(a.grid.dxi == b.grid.dxi);
}

TEST_CASE("saturation guard") {
  RunConfig c = default_config();
  c.physical.pump_power = 10.0;  // absurd drive
  CHECK(saturation_parameter(c.physical) > 0.1);
  CHECK_THROWS_AS(c.build_model(), SaturationError);
}

TEST_CASE("model construction preconditions") {
  const RunConfig c = default_config();
  CHECK_THROWS_AS(
      build_scaled_model(c.physical, 32, 9, c.resolved_dtau()),
      std::invalid_argument);
  CHECK_THROWS_AS(
      build_scaled_model(c.physical, 512, 4, c.resolved_dtau()),
      std::invalid_argument);
  CHECK_THROWS_AS(build_scaled_model(c.physical, 512, 9, -1.0),
                  std::invalid_argument);
  PhysicalParams bad = c.physical;
  bad.tf_radius_radial = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c.physical;
  bad.detuning = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
