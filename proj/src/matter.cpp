#include "sls/matter.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "sls/constants.hpp"
#include "sls/optical.hpp"

namespace sls {

namespace {

using std::complex;
constexpr complex<double> kImag{0.0, 1.0};

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double trapezoid_norm(const Eigen::ArrayXcd& env, double dxi) {
  const Eigen::Index n = env.size();
  double sum = env.abs2().sum();
  sum -= 0.5 * (std::norm(env[0]) + std::norm(env[n - 1]));
  return sum * dxi;
}

// Eigensystem of the n x n symmetric tridiagonal matrix with zero diagonal
// and unit off-diagonal: lambda_k = 2 cos(k pi / (n+1)),
// Q(j,k) = sqrt(2/(n+1)) sin((j+1)(k+1) pi / (n+1)).
struct LadderBasis {
  Eigen::ArrayXd eigenvalues;
  Eigen::MatrixXd q;

  explicit LadderBasis(int n) : eigenvalues(n), q(n, n) {
    const double step = constants::pi / (n + 1);
    const double scale = std::sqrt(2.0 / (n + 1));
    for (int k = 0; k < n; ++k) {
      eigenvalues[k] = 2.0 * std::cos((k + 1) * step);
      for (int j = 0; j < n; ++j) {
        q(j, k) = scale * std::sin((j + 1) * (k + 1) * step);
      }
    }
  }
};

}  // namespace

int MatterState::order_index(int m) const {
  auto it = std::find(orders.begin(), orders.end(), m);
  return it == orders.end() ? -1 : static_cast<int>(it - orders.begin());
}

MatterState initial_state(double atom_number, const SpatialGrid& grid,
                          int n_orders, double seed_atoms) {
  if (n_orders < 3 || n_orders % 2 == 0) {
    throw std::invalid_argument("n_orders must be odd and at least 3");
  }
  std::vector<int> orders(n_orders);
  const int half = n_orders / 2;
  for (int j = 0; j < n_orders; ++j) orders[j] = 2 * (j - half);
  return initial_state(atom_number, grid, std::move(orders), seed_atoms);
}

MatterState initial_state(double atom_number, const SpatialGrid& grid,
                          std::vector<int> orders, double seed_atoms) {
  if (atom_number < 1) {
    throw std::invalid_argument("atom_number must be at least 1");
  }
  if (seed_atoms < 0) {
    throw std::invalid_argument("seed_atoms must be non-negative");
  }
  for (size_t j = 0; j + 1 < orders.size(); ++j) {
    if (orders[j + 1] != orders[j] + 2) {
      throw std::invalid_argument("orders must be contiguous even integers");
    }
  }

  MatterState s;
  s.grid = grid;
  s.orders = std::move(orders);
  s.tau = 0;
  const int total = grid.total();
  s.envelopes.assign(s.orders.size(), Eigen::ArrayXcd::Zero(total));

  const int i0 = s.order_index(0);
  if (i0 < 0) throw std::invalid_argument("orders must contain m = 0");

  // Inverted parabola over the full inner span, normalized so that the
  // trapezoidal integral equals atom_number exactly.
  Eigen::ArrayXd density = Eigen::ArrayXd::Zero(total);
  const double half_span = grid.xi_max() / 2.0;
  const double centre = grid.xi_max() / 2.0;
  for (int i = grid.pad; i < grid.pad + grid.n_inner; ++i) {
    const double u = (grid.xi(i) - centre) / half_span;
    density[i] = std::max(0.0, 1.0 - u * u);
  }
  double raw = density.sum() - 0.5 * (density[0] + density[total - 1]);
  raw *= grid.dxi;
  density *= atom_number / raw;
  s.envelopes[i0] = density.sqrt().cast<complex<double>>();

  if (seed_atoms > 0) {
    const int i2 = s.order_index(2);
    if (i2 < 0) throw std::invalid_argument("orders must contain m = 2");
    s.envelopes[i2] =
        std::sqrt(seed_atoms / atom_number) * s.envelopes[i0];
  }
  return s;
}

SpectralKinetic::SpectralKinetic(const SpatialGrid& grid)
    : n_(grid.total()), k_(grid.total()) {
  const double dk = constants::two_pi / (n_ * grid.dxi);
  for (int j = 0; j < n_; ++j) {
    const int f = j < (n_ + 1) / 2 ? j : j - n_;
    k_[j] = dk * f;
  }
  buf_ = fftw_alloc_complex(static_cast<size_t>(n_));
  if (!buf_) throw std::bad_alloc();
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  forward_ = fftw_plan_dft_1d(n_, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(n_, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

SpectralKinetic::~SpectralKinetic() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
  fftw_free(buf_);
}

void SpectralKinetic::half_step(MatterState& s, double dtau) {
  if (dtau <= 0) throw std::invalid_argument("dtau must be positive");
  auto* buf = reinterpret_cast<complex<double>*>(buf_);
  for (size_t jo = 0; jo < s.orders.size(); ++jo) {
    const double m = s.orders[jo];
    Eigen::ArrayXcd& env = s.envelopes[jo];
    std::copy(env.data(), env.data() + n_, buf);
    fftw_execute(forward_);
    for (int j = 0; j < n_; ++j) {
      const double phase = (0.5 * k_[j] * k_[j] + m * k_[j]) * dtau / 2.0;
      buf[j] *= std::exp(-kImag * phase);
    }
    fftw_execute(backward_);
    const double inv_n = 1.0 / n_;
    for (int j = 0; j < n_; ++j) env[j] = buf[j] * inv_n;
  }
}

void coupling_step(MatterState& s, const LightState& light, double lambda,
                   double dtau, const Eigen::ArrayXd* extra_potential) {
  const int n = static_cast<int>(s.orders.size());
  const int total = s.grid.total();
  const int pad = s.grid.pad;
  const int n_inner = s.grid.n_inner;
  if (light.e_plus.size() != n_inner || light.e_minus.size() != n_inner) {
    throw std::invalid_argument("light state does not match the grid");
  }
  if (extra_potential && extra_potential->size() != total) {
    throw std::invalid_argument("extra potential does not match the grid");
  }

  // Interaction-picture phases exp(+2i (m_j - 1) tau*) for the j-1 -> j
  // coupling; identical at every grid point.
  std::vector<complex<double>> rot(n);
  for (int j = 1; j < n; ++j) {
    rot[j] = std::exp(kImag * (2.0 * (s.orders[j] - 1) * light.tau));
  }
  const LadderBasis basis(n);

  std::vector<complex<double>> v(n), w(n), y(n), gauge(n);
  for (int i = 0; i < total; ++i) {
    // Outside the sample the envelopes see freely propagating light, i.e.
    // the boundary values of the inner solve.
    const int ii = std::clamp(i - pad, 0, n_inner - 1);
    const complex<double> ep = light.e_plus[ii];
    const complex<double> em = light.e_minus[ii];

    double diag = lambda * (std::norm(ep) + std::norm(em));
    if (extra_potential) diag += (*extra_potential)[i];
    const complex<double> t = lambda * std::conj(em) * ep;
    const double tmag = std::abs(t);

    for (int j = 0; j < n; ++j) v[j] = s.envelopes[j][i];

    if (tmag == 0.0) {
      const complex<double> ph = std::exp(-kImag * (diag * dtau));
      for (int j = 0; j < n; ++j) s.envelopes[j][i] = v[j] * ph;
      continue;
    }

    const complex<double> dir = t / tmag;
    gauge[0] = 1.0;
    for (int j = 1; j < n; ++j) gauge[j] = gauge[j - 1] * (dir * rot[j]);

    for (int j = 0; j < n; ++j) w[j] = std::conj(gauge[j]) * v[j];
    for (int k = 0; k < n; ++k) {
      complex<double> acc = 0;
      for (int j = 0; j < n; ++j) acc += basis.q(j, k) * w[j];
      y[k] = acc * std::exp(-kImag *
                            ((diag + tmag * basis.eigenvalues[k]) * dtau));
    }
    for (int j = 0; j < n; ++j) {
      complex<double> acc = 0;
      for (int k = 0; k < n; ++k) acc += basis.q(j, k) * y[k];
      s.envelopes[j][i] = gauge[j] * acc;
    }
  }
}

std::vector<double> momentum_populations(const MatterState& s) {
  std::vector<double> pops(s.orders.size());
  for (size_t j = 0; j < s.orders.size(); ++j) {
    pops[j] = trapezoid_norm(s.envelopes[j], s.grid.dxi);
  }
  return pops;
}

double atom_number_total(const MatterState& s) {
  double total = 0;
  for (const auto& env : s.envelopes) total += trapezoid_norm(env, s.grid.dxi);
  return total;
}

Eigen::ArrayXcd coherence_profile(const MatterState& s, int m) {
  const int jl = s.order_index(m);
  const int ju = s.order_index(m + 2);
  if (jl < 0 || ju < 0) {
    throw std::invalid_argument("orders m and m+2 must both be present");
  }
  return s.envelopes[ju].segment(s.grid.pad, s.grid.n_inner) *
         s.envelopes[jl].segment(s.grid.pad, s.grid.n_inner).conjugate();
}

}  // namespace sls
