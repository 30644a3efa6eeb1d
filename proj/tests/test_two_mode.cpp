#include <doctest.h>

#include <cmath>
#include <complex>

#include "sls/config.hpp"
#include "sls/dynamics.hpp"
#include "sls/two_mode.hpp"

using namespace sls;
using std::complex;

namespace {

RunConfig oracle_config(double duration = 60e-6) {
  RunConfig c = default_config();
  c.numerics.grid_points = 256;
  c.physical.pulse_duration = duration;
  return c;
}

}  // namespace

TEST_CASE("dark oracle is stationary") {
  RunConfig c = oracle_config();
  c.physical.pump_power = 0;
  const ScaledModel m = c.build_model();
  TwoModeState s = initial_two_mode_state(m, c.physical, 0.0);
  CHECK(s.e_minus.abs().maxCoeff() == 0.0);

  const Eigen::ArrayXcd psi0_before = s.psi0;
  for (int k = 0; k < 10; ++k) step_two_mode(s, m);
  CHECK((s.psi0 - psi0_before).abs().maxCoeff() == 0.0);
  CHECK(s.psi2.abs().maxCoeff() == 0.0);
  CHECK(s.e_minus.abs().maxCoeff() == 0.0);
}

TEST_CASE("oracle conserves atoms") {
  const RunConfig c = oracle_config();
  const ScaledModel m = c.build_model();
  TwoModeState s = initial_two_mode_state(m, c.physical);
  const double before = two_mode_atom_total(s);
  for (int k = 0; k < 200; ++k) step_two_mode(s, m);
  CHECK(two_mode_atom_total(s) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("coherence rate formula") {
  const RunConfig c = oracle_config();
  const ScaledModel m = c.build_model();
  TwoModeState s = initial_two_mode_state(m, c.physical, 0.0);
  s.e_plus = Eigen::ArrayXcd::Constant(s.psi0.size(), complex<double>(0.6, 0.1));
  s.e_minus = Eigen::ArrayXcd::Constant(s.psi0.size(), complex<double>(0.2, -0.3));
  s.tau = 0.7;

  SUBCASE("balanced populations give zero rate") {
    s.psi2 = s.psi0 * std::exp(complex<double>(0.0, 0.4));
    // Zero up to roundoff of ||exp(i phi)|^2 - 1| times the natural scale.
    const double scale = std::abs(m.lambda) * 0.7 * 0.7 *
                         s.psi0.abs2().maxCoeff();
    CHECK(coherence_rate(s, m.lambda).abs().maxCoeff() < 1e-14 * scale);
  }

  SUBCASE("all atoms in psi0 give the maximal rate") {
    const Eigen::ArrayXcd rate = coherence_rate(s, m.lambda);
    for (Eigen::Index i = 0; i < rate.size(); ++i) {
      const double expected = std::abs(m.lambda) * std::abs(s.e_minus[i]) *
                              std::abs(s.e_plus[i]) * std::norm(s.psi0[i]);
      CHECK(std::abs(rate[i]) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  SUBCASE("rate doubles when both amplitudes scale by sqrt(2)") {
    const double base = coherence_rate(s, m.lambda).abs().maxCoeff();
    s.psi0 *= std::sqrt(2.0);
    s.psi2 *= std::sqrt(2.0);
    CHECK(coherence_rate(s, m.lambda).abs().maxCoeff() ==
          doctest::Approx(2.0 * base).epsilon(1e-12));
  }
}

TEST_CASE("balanced populations freeze the coherence magnitude") {
  RunConfig c = oracle_config();
  c.numerics.dtau = 1e-3;
  const ScaledModel m = c.build_model();
  TwoModeState s = initial_two_mode_state(m, c.physical);
  s.psi2 = s.psi0 * std::exp(complex<double>(0.0, 0.25));

  const Eigen::ArrayXd mag_before = (s.psi2 * s.psi0.conjugate()).abs();
  step_two_mode(s, m);
  const Eigen::ArrayXd mag_after = (s.psi2 * s.psi0.conjugate()).abs();
  const double scale = mag_before.maxCoeff();
  CHECK((mag_after - mag_before).abs().maxCoeff() <
        10.0 * m.dtau * m.dtau * scale);
}

TEST_CASE("finite differences of the coherence match coherence_rate") {
  const RunConfig c = oracle_config();

  auto fd_error = [&](double dtau) {
    RunConfig cc = c;
    cc.numerics.dtau = dtau;
    const ScaledModel mm = cc.build_model();
    TwoModeState s = initial_two_mode_state(mm, cc.physical);
    // Walk into a regime with appreciable coupling first.
    const int warm = static_cast<int>(std::llround(1.5 / dtau));
    for (int k = 0; k < warm; ++k) step_two_mode(s, mm);

    const Eigen::ArrayXcd before = s.psi2 * s.psi0.conjugate();
    step_two_mode(s, mm);
    const Eigen::ArrayXcd after = s.psi2 * s.psi0.conjugate();
    const Eigen::ArrayXcd fd = (after - before) / dtau;
    const Eigen::ArrayXcd rate = coherence_rate(s, mm.lambda);
    return (fd - rate).abs().maxCoeff() / rate.abs().maxCoeff();
  };

  const double err1 = fd_error(8e-3);
  const double err2 = fd_error(4e-3);
  CHECK(err1 < 0.1);
  // First-order agreement: the mismatch shrinks roughly linearly in dtau.
  CHECK(err2 < 0.65 * err1);
}

TEST_CASE("oracle matches the restricted full solver") {
  RunConfig c = oracle_config(80e-6);
  const ScaledModel m = c.build_model();

  RunOptions full_opt;
  full_opt.kinetic_enabled = false;
  full_opt.ladder_guard = false;
  full_opt.order_override = {0, 2};
  full_opt.apply_filter = false;
  const SimulationTrace full = run_simulation(m, c.physical, full_opt);

  RunOptions oracle_opt;
  oracle_opt.apply_filter = false;
  const SimulationTrace oracle = run_two_mode(m, c.physical, oracle_opt);

  REQUIRE(full.e_minus_boundary.size() == oracle.e_minus_boundary.size());
  double sup = 0;
  for (const auto& e : full.e_minus_boundary) {
    sup = std::max(sup, std::abs(e));
  }
  double worst = 0;
  for (size_t i = 0; i < full.e_minus_boundary.size(); ++i) {
    const double diff =
        std::abs(full.e_minus_boundary[i] - oracle.e_minus_boundary[i]);
    const double denom = std::max({std::abs(full.e_minus_boundary[i]),
                                   std::abs(oracle.e_minus_boundary[i]),
                                   1e-3 * sup});
    worst = std::max(worst, diff / denom);
  }
  CHECK(worst <= 1e-6);
}
