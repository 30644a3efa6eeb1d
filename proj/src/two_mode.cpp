#include "sls/two_mode.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sls/optical.hpp"

namespace sls {

namespace {

using std::complex;
constexpr complex<double> kImag{0.0, 1.0};

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

Mat2 system_matrix(double density, complex<double> coupling, double c0) {
  Mat2 m;
  m(0, 0) = -kImag * c0 * density;
  m(0, 1) = -kImag * c0 * coupling;
  m(1, 0) = kImag * c0 * std::conj(coupling);
  m(1, 1) = kImag * c0 * density;
  return m;
}

// Transfer matrix of one cell for y' = M(x) y via the three-stage Lobatto
// IIIA (order 4) collocation scheme; stages sit at the two nodes and the
// cell midpoint.
Mat2 lobatto_cell(const Mat2& m0, const Mat2& mq, const Mat2& m1, double h) {
  Eigen::Matrix<complex<double>, 4, 4> a =
      Eigen::Matrix<complex<double>, 4, 4>::Identity();
  a.block<2, 2>(0, 0) -= (h / 3.0) * mq;
  a.block<2, 2>(0, 2) += (h / 24.0) * m1;
  a.block<2, 2>(2, 0) -= (2.0 * h / 3.0) * mq;
  a.block<2, 2>(2, 2) -= (h / 6.0) * m1;

  Eigen::Matrix<complex<double>, 4, 2> rhs;
  rhs.block<2, 2>(0, 0) = Mat2::Identity() + (5.0 * h / 24.0) * m0;
  rhs.block<2, 2>(2, 0) = Mat2::Identity() + (h / 6.0) * m0;

  const Eigen::Matrix<complex<double>, 4, 2> stages =
      a.partialPivLu().solve(rhs);
  return stages.block<2, 2>(2, 0);
}

// Solves the two-point boundary value problem on the current matter state
// and writes the light fields into the state.
void solve_light(TwoModeState& s, const ScaledModel& model, double tau) {
  const Eigen::Index n = s.psi0.size();
  const double c0 = model.lambda / model.chi;
  const complex<double> rot = std::exp(-kImag * (2.0 * tau));

  Eigen::ArrayXd density = s.psi0.abs2() + s.psi2.abs2();
  Eigen::ArrayXcd coupling = rot * (s.psi2 * s.psi0.conjugate());
  Eigen::ArrayXd density_mid = midpoint_refine(density);
  Eigen::ArrayXcd coupling_mid = midpoint_refine(coupling);

  Vec2 u(1.0, 0.0);
  Vec2 v(0.0, 1.0);
  std::vector<Vec2> us(n), vs(n);
  us[0] = u;
  vs[0] = v;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const Mat2 cell = lobatto_cell(
        system_matrix(density[i], coupling[i], c0),
        system_matrix(density_mid[i], coupling_mid[i], c0),
        system_matrix(density[i + 1], coupling[i + 1], c0), s.dxi);
    us[i + 1] = cell * us[i];
    vs[i + 1] = cell * vs[i];
  }

  const complex<double> denom = vs[n - 1][1];
  if (std::abs(denom) < 1e-10) {
    throw SolverSingular("two-mode light solve degenerate");
  }
  const complex<double> f = us[n - 1][1] / denom;
  s.e_plus.resize(n);
  s.e_minus.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 e = model.e_i * (us[i] - f * vs[i]);
    s.e_plus[i] = e[0];
    s.e_minus[i] = e[1];
  }
  if (!s.e_plus.isFinite().all() || !s.e_minus.isFinite().all()) {
    throw NonFiniteError("two-mode light solution is non-finite");
  }
}

}  // namespace

TwoModeState initial_two_mode_state(const ScaledModel& model,
                                    const PhysicalParams& params,
                                    double seed_atoms) {
  const SpatialGrid& g = model.grid;
  TwoModeState s;
  s.dxi = g.dxi;
  s.tau = 0;

  Eigen::ArrayXd density(g.n_inner);
  const double half_span = g.xi_max() / 2.0;
  for (int i = 0; i < g.n_inner; ++i) {
    const double u = (i * g.dxi - half_span) / half_span;
    density[i] = std::max(0.0, 1.0 - u * u);
  }
  const double raw =
      (density.sum() - 0.5 * (density[0] + density[g.n_inner - 1])) * g.dxi;
  density *= params.atom_number / raw;
  s.psi0 = density.sqrt().cast<complex<double>>();
  s.psi2 = std::sqrt(seed_atoms / params.atom_number) * s.psi0;
  solve_light(s, model, 0.0);
  return s;
}

void step_two_mode(TwoModeState& s, const ScaledModel& model) {
  const double dtau = model.dtau;
  if (dtau <= 0) throw std::invalid_argument("dtau must be positive");
  const double tau_mid = s.tau + dtau / 2.0;
  solve_light(s, model, tau_mid);

  const complex<double> rot = std::exp(kImag * (2.0 * tau_mid));
  for (Eigen::Index i = 0; i < s.psi0.size(); ++i) {
    const complex<double> ep = s.e_plus[i];
    const complex<double> em = s.e_minus[i];
    const double alpha = model.lambda * (std::norm(ep) + std::norm(em));
    const complex<double> t = model.lambda * std::conj(em) * ep * rot;
    const double tmag = std::abs(t);

    const complex<double> phase = std::exp(-kImag * (alpha * dtau));
    if (tmag == 0.0) {
      s.psi0[i] *= phase;
      s.psi2[i] *= phase;
      continue;
    }
    const double c = std::cos(tmag * dtau);
    const complex<double> lower =
        -kImag * std::sin(tmag * dtau) * (t / tmag);
    const complex<double> upper = -std::conj(lower);
    const complex<double> p0 = s.psi0[i];
    const complex<double> p2 = s.psi2[i];
    s.psi0[i] = phase * (c * p0 + upper * p2);
    s.psi2[i] = phase * (c * p2 + lower * p0);
  }
  s.tau += dtau;
}

Eigen::ArrayXcd coherence_rate(const TwoModeState& s, double lambda) {
  const complex<double> rot = std::exp(kImag * (2.0 * s.tau));
  return (kImag * lambda * rot) *
         (s.e_minus.conjugate() * s.e_plus * (s.psi2.abs2() - s.psi0.abs2()));
}

double two_mode_atom_total(const TwoModeState& s) {
  const Eigen::Index n = s.psi0.size();
  double sum = (s.psi0.abs2() + s.psi2.abs2()).sum();
  sum -= 0.5 * (std::norm(s.psi0[0]) + std::norm(s.psi0[n - 1]) +
                std::norm(s.psi2[0]) + std::norm(s.psi2[n - 1]));
  return sum * s.dxi;
}

SimulationTrace run_two_mode(const ScaledModel& model,
                             const PhysicalParams& params,
                             const RunOptions& options) {
  const double dt = model.dtau / (2.0 * params.recoil_frequency);
  const int n_steps =
      std::max(1, static_cast<int>(std::llround(params.pulse_duration / dt)));

  TwoModeState state = initial_two_mode_state(model, params, options.seed_atoms);
  const double atoms_initial = two_mode_atom_total(state);

  SimulationTrace trace;
  trace.dt = dt;
  trace.orders = {0, 2};

  for (int step = 0; step < n_steps; ++step) {
    step_two_mode(state, model);

    LightState light{state.e_plus, state.e_minus, state.tau - model.dtau / 2};
    trace.times.push_back((step + 0.5) * dt);
    trace.flux.push_back(backscattered_flux(light, model.flux_norm));
    trace.e_minus_boundary.push_back(light.e_minus[0]);

    const Eigen::Index n = state.psi0.size();
    const double n0 =
        (state.psi0.abs2().sum() -
         0.5 * (std::norm(state.psi0[0]) + std::norm(state.psi0[n - 1]))) *
        state.dxi;
    const double n2 =
        (state.psi2.abs2().sum() -
         0.5 * (std::norm(state.psi2[0]) + std::norm(state.psi2[n - 1]))) *
        state.dxi;
    trace.populations.push_back({n0, n2});

    trace.diagnostics.max_flux_residual =
        std::max(trace.diagnostics.max_flux_residual, flux_residual(light));
    trace.diagnostics.max_boundary_defect =
        std::max(trace.diagnostics.max_boundary_defect,
                 boundary_flux_defect(light));
    const double atoms = n0 + n2;
    if (!std::isfinite(atoms)) {
      throw NonFiniteError("two-mode state became non-finite at step " +
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
  }
  return trace;
}

}  // namespace sls
