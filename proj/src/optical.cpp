#include "sls/optical.hpp"

#include <cmath>

namespace sls {

namespace {

using std::complex;
constexpr complex<double> kImag{0.0, 1.0};

using Vec2 = Eigen::Vector2cd;

// Rescale threshold for the fundamental solutions.
constexpr double kRescaleLimit = 1e140;

template <typename Array>
Array midpoint_refine_impl(const Array& f) {
  const Eigen::Index n = f.size();
  if (n < 3) throw std::invalid_argument("midpoint_refine needs >= 3 nodes");
  Array mid(n - 1);
  mid[0] = (3.0 * f[0] + 6.0 * f[1] - f[2]) / 8.0;
  for (Eigen::Index i = 1; i + 2 < n; ++i) {
    mid[i] = (-f[i - 1] + 9.0 * f[i] + 9.0 * f[i + 1] - f[i + 2]) / 16.0;
  }
  mid[n - 2] = (-f[n - 3] + 6.0 * f[n - 2] + 3.0 * f[n - 1]) / 8.0;
  return mid;
}

struct CellMatrix {
  double density;
  complex<double> coupling;
  double c0;  // Lambda / chi

  Vec2 apply(const Vec2& y) const {
    Vec2 out;
    out[0] = -kImag * c0 * (density * y[0] + coupling * y[1]);
    out[1] = -kImag * c0 * (-std::conj(coupling) * y[0] - density * y[1]);
    return out;
  }
};

Vec2 rk4_cell(const CellMatrix& m0, const CellMatrix& mq,
              const CellMatrix& m1, const Vec2& y, double h) {
  const Vec2 k1 = m0.apply(y);
  const Vec2 k2 = mq.apply(y + (h / 2.0) * k1);
  const Vec2 k3 = mq.apply(y + (h / 2.0) * k2);
  const Vec2 k4 = m1.apply(y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Eigen::ArrayXd midpoint_refine(const Eigen::ArrayXd& nodes) {
  return midpoint_refine_impl(nodes);
}

Eigen::ArrayXcd midpoint_refine(const Eigen::ArrayXcd& nodes) {
  return midpoint_refine_impl(nodes);
}

LightSources build_light_sources(const MatterState& s, double tau) {
  const int n = s.grid.n_inner;
  const int pad = s.grid.pad;
  LightSources src;
  src.density_node = Eigen::ArrayXd::Zero(n);
  src.coupling_node = Eigen::ArrayXcd::Zero(n);

  for (size_t j = 0; j < s.orders.size(); ++j) {
    const auto inner = s.envelopes[j].segment(pad, n);
    src.density_node += inner.abs2();
    if (j > 0) {
      const double m = s.orders[j];
      const complex<double> rot = std::exp(-kImag * (2.0 * (m - 1) * tau));
      src.coupling_node +=
          rot * (inner * s.envelopes[j - 1].segment(pad, n).conjugate());
    }
  }
  if (!src.density_node.isFinite().all() ||
      !src.coupling_node.isFinite().all()) {
    throw NonFiniteError("matter state contains non-finite envelopes");
  }
  src.density_mid = midpoint_refine(src.density_node);
  src.coupling_mid = midpoint_refine(src.coupling_node);
  return src;
}

LightState solve_light_bvp(const LightSources& src, complex<double> e_i,
                           double lambda_over_chi, double dxi, double tau) {
  const Eigen::Index n = src.density_node.size();
  if (n < 3) throw std::invalid_argument("light grid too small");

  std::vector<Vec2> us(n), vs(n);
  std::vector<double> log_scale(n, 0.0);
  us[0] = Vec2(1.0, 0.0);
  vs[0] = Vec2(0.0, 1.0);
  double accumulated = 0.0;

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const CellMatrix m0{src.density_node[i], src.coupling_node[i],
                        lambda_over_chi};
    const CellMatrix mq{src.density_mid[i], src.coupling_mid[i],
                        lambda_over_chi};
    const CellMatrix m1{src.density_node[i + 1], src.coupling_node[i + 1],
                        lambda_over_chi};
    us[i + 1] = rk4_cell(m0, mq, m1, us[i], dxi);
    vs[i + 1] = rk4_cell(m0, mq, m1, vs[i], dxi);

    const double mag =
        std::max(us[i + 1].cwiseAbs().maxCoeff(), vs[i + 1].cwiseAbs().maxCoeff());
    if (!std::isfinite(mag)) {
      throw NonFiniteError("light solve diverged at cell " + std::to_string(i));
    }
    if (mag > kRescaleLimit) {
      us[i + 1] /= mag;
      vs[i + 1] /= mag;
      accumulated += std::log(mag);
    }
    log_scale[i + 1] = accumulated;
  }

  // Enforce e-(xi_max) = 0: e = e_i (u - f v) with f = u2(L)/v2(L).
  // The common rescaling exponents cancel in the ratio.
  const complex<double> denom = vs[n - 1][1];
  const complex<double> numer = us[n - 1][1];
  if (std::abs(denom) < 1e-10 * std::max(std::abs(numer), 1.0)) {
    throw SolverSingular(
        "fundamental-matrix combination is degenerate: |T22| = " +
        std::to_string(std::abs(denom)) + ", |T21| = " +
        std::to_string(std::abs(numer)));
  }
  const complex<double> f = numer / denom;

  LightState l;
  l.tau = tau;
  l.e_plus.resize(n);
  l.e_minus.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double scale = std::exp(log_scale[i]);
    const Vec2 e = (e_i * scale) * (us[i] - f * vs[i]);
    l.e_plus[i] = e[0];
    l.e_minus[i] = e[1];
  }
  if (!l.e_plus.isFinite().all() || !l.e_minus.isFinite().all()) {
    throw NonFiniteError("light solution is non-finite");
  }
  return l;
}

LightState propagate_light(const MatterState& s, double tau,
                           complex<double> e_i, double lambda, double chi) {
  if (chi <= 0) throw std::invalid_argument("chi must be positive");
  const LightSources src = build_light_sources(s, tau);
  return solve_light_bvp(src, e_i, lambda / chi, s.grid.dxi, tau);
}

double flux_residual(const LightState& l) {
  const Eigen::Index n = l.e_plus.size();
  const double ref = std::norm(l.e_plus[0]) - std::norm(l.e_minus[0]);
  double worst = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double flux = std::norm(l.e_plus[i]) - std::norm(l.e_minus[i]);
    worst = std::max(worst, std::abs(flux - ref));
  }
  const double denom = std::norm(l.e_plus[0]);
  if (denom == 0) return worst == 0 ? 0 : std::numeric_limits<double>::infinity();
  return worst / denom;
}

double boundary_flux_defect(const LightState& l) {
  const Eigen::Index n = l.e_plus.size();
  const double in = std::norm(l.e_plus[0]);
  const double out = std::norm(l.e_minus[0]) + std::norm(l.e_plus[n - 1]);
  if (in == 0) return out == 0 ? 0 : std::numeric_limits<double>::infinity();
  return std::abs(in - out) / in;
}

double backscattered_flux(const LightState& l, double flux_norm) {
  return flux_norm * std::norm(l.e_minus[0]);
}

}  // namespace sls
