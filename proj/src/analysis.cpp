#include "sls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

namespace sls {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LmResult {
  VectorXd p;
  bool converged = false;
  double rms = 0;
};

// Damped least squares with analytic Jacobians. eval fills residuals and the
// Jacobian at p; convergence when the relative step drops below 1e-10.
LmResult levenberg_marquardt(
    const std::function<void(const VectorXd&, VectorXd&, MatrixXd&)>& eval,
    VectorXd p, int max_iter = 200) {
  const auto n_params = p.size();
  VectorXd r;
  MatrixXd j;
  eval(p, r, j);
  double cost = r.squaredNorm();
  double damping = 1e-3;
  bool converged = false;

  for (int iter = 0; iter < max_iter; ++iter) {
    const MatrixXd jtj = j.transpose() * j;
    const VectorXd g = j.transpose() * r;
    MatrixXd a = jtj;
    for (Eigen::Index k = 0; k < n_params; ++k) {
      const double d = jtj(k, k);
      a(k, k) += damping * (d > 0 ? d : 1.0);
    }
    const VectorXd delta = a.ldlt().solve(-g);
    if (!delta.allFinite()) break;

    const VectorXd p_new = p + delta;
    VectorXd r_new;
    MatrixXd j_new;
    eval(p_new, r_new, j_new);
    const double cost_new = r_new.squaredNorm();

    if (cost_new <= cost) {
      double rel_step = 0;
      for (Eigen::Index k = 0; k < n_params; ++k) {
        rel_step = std::max(rel_step,
                            std::abs(delta[k]) / (std::abs(p[k]) + 1e-300));
      }
      p = p_new;
      r = r_new;
      j = j_new;
      cost = cost_new;
      damping = std::max(damping * 0.3, 1e-14);
      if (rel_step < 1e-10) {
        converged = true;
        break;
      }
    } else {
      damping *= 3.0;
      if (damping > 1e14) break;
    }
  }
  LmResult out;
  out.p = p;
  out.converged = converged;
  out.rms = r.size() ? std::sqrt(cost / r.size()) : 0.0;
  return out;
}

double r_squared(const VectorXd& y, const VectorXd& model) {
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  const double ss_res = (y - model).squaredNorm();
  if (ss_tot <= 0) return ss_res <= 0 ? 1.0 : 0.0;
  return std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
}

}  // namespace

PulseMetrics fit_gaussian_pulse(const std::vector<double>& times,
                                const std::vector<double>& flux) {
  if (times.size() != flux.size() || times.empty()) {
    throw std::invalid_argument("times and flux must be non-empty and match");
  }
  const size_t n = flux.size();
  size_t nonzero = 0;
  for (double f : flux) {
    if (f != 0) ++nonzero;
  }
  if (nonzero == 0) throw EmptyTrace("flux trace is identically zero");

  PulseMetrics metrics;
  if (nonzero < 10) return metrics;  // too sparse, report non-convergence

  const size_t peak =
      std::max_element(flux.begin(), flux.end()) - flux.begin();
  const double peak_value = flux[peak];
  if (peak_value <= 0) return metrics;

  // First-pulse window.
  size_t start = 0;
  for (size_t i = peak; i-- > 0;) {
    if (flux[i] < 0.05 * peak_value) {
      start = i;
      break;
    }
  }
  size_t end = n - 1;
  for (size_t i = peak; i + 1 < n; ++i) {
    if (flux[i + 1] > flux[i]) {
      end = i;
      break;
    }
  }
  if (end - start + 1 < 5) return metrics;

  // Half-maximum crossings for the width estimate.
  double t_left = times[start];
  for (size_t i = peak; i-- > start;) {
    if (flux[i] < 0.5 * peak_value) {
      const double frac = (0.5 * peak_value - flux[i]) / (flux[i + 1] - flux[i]);
      t_left = times[i] + frac * (times[i + 1] - times[i]);
      break;
    }
  }
  double t_right = times[end];
  for (size_t i = peak; i < end; ++i) {
    if (flux[i + 1] < 0.5 * peak_value) {
      const double frac = (flux[i] - 0.5 * peak_value) / (flux[i] - flux[i + 1]);
      t_right = times[i] + frac * (times[i + 1] - times[i]);
      break;
    }
  }
  double sigma0 = (t_right - t_left) / 2.355;
  if (sigma0 <= 0) sigma0 = (times[end] - times[start]) / 4.0;

  const Eigen::Index m = static_cast<Eigen::Index>(end - start + 1);
  VectorXd t(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    t[i] = times[start + i];
    y[i] = flux[start + i];
  }

  auto eval = [&](const VectorXd& p, VectorXd& r, MatrixXd& j) {
    const double a = p[0], mu = p[1], sigma = p[2];
    r.resize(m);
    j.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double dt = t[i] - mu;
      const double g = std::exp(-dt * dt / (2.0 * sigma * sigma));
      r[i] = a * g - y[i];
      j(i, 0) = g;
      j(i, 1) = a * g * dt / (sigma * sigma);
      j(i, 2) = a * g * dt * dt / (sigma * sigma * sigma);
    }
  };

  VectorXd p0(3);
  p0 << peak_value, times[peak], sigma0;
  const LmResult fit = levenberg_marquardt(eval, p0);

  metrics.amplitude = std::abs(fit.p[0]);
  metrics.center = fit.p[1];
  metrics.width = std::abs(fit.p[2]);
  metrics.residual = metrics.amplitude > 0 ? fit.rms / metrics.amplitude : 0;
  metrics.converged = fit.converged && metrics.width > 0 &&
                      std::isfinite(metrics.amplitude) &&
                      std::isfinite(metrics.center);
  return metrics;
}

PulseMetrics fit_gaussian_pulse(const SimulationTrace& trace,
                                bool use_filtered) {
  return fit_gaussian_pulse(trace.times,
                            use_filtered ? trace.filtered_flux : trace.flux);
}

ScalingFit fit_amplitude_vs_R(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw DegenerateFit("need at least 3 (R, A) points");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = points[i].first;
    y[i] = points[i].second;
  }
  const double sxx = (x.array() - x.mean()).square().sum();
  if (sxx <= 0) throw DegenerateFit("all R values are identical");
  const double sxy =
      ((x.array() - x.mean()) * (y.array() - y.mean())).sum();

  ScalingFit fit;
  fit.kind = ScalingFit::Kind::linear_R;
  fit.p1 = sxy / sxx;
  fit.p2 = y.mean() - fit.p1 * x.mean();
  fit.goodness = r_squared(y, fit.p1 * x.array() + fit.p2);
  if (fit.p2 < 0 && fit.p1 > 0) fit.threshold = -fit.p2 / fit.p1;
  return fit;
}

ScalingFit fit_width_vs_R(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw DegenerateFit("need at least 3 (R, sigma) points");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  VectorXd rate(n), width(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rate[i] = points[i].first;
    width[i] = points[i].second;
    if (rate[i] <= 0) throw DegenerateFit("R values must be positive");
  }
  if ((rate.array() - rate.mean()).square().sum() <= 0) {
    throw DegenerateFit("all R values are identical");
  }

  auto eval = [&](const VectorXd& p, VectorXd& r, MatrixXd& j) {
    r.resize(n);
    j.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = p[0] / rate[i];
      const double model = std::hypot(a, p[1]);
      const double safe = std::max(model, 1e-300);
      r[i] = model - width[i];
      j(i, 0) = a / (rate[i] * safe);
      j(i, 1) = p[1] / safe;
    }
  };

  std::vector<double> scaled(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    scaled[i] = points[i].first * points[i].second;
  }
  std::nth_element(scaled.begin(), scaled.begin() + scaled.size() / 2,
                   scaled.end());
  VectorXd p0(2);
  p0 << scaled[scaled.size() / 2], 0.5 * width.minCoeff();

  const LmResult fit = levenberg_marquardt(eval, p0);
  ScalingFit out;
  out.kind = ScalingFit::Kind::width_R;
  out.p1 = std::abs(fit.p[0]);
  out.p2 = std::abs(fit.p[1]);
  VectorXd model(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    model[i] = std::hypot(out.p1 / rate[i], out.p2);
  }
  out.goodness = r_squared(width, model);
  return out;
}

ScalingFit fit_amplitude_vs_N(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw DegenerateFit("need at least 3 (N, A) points");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (points[i].first <= 0 || points[i].second <= 0) {
      throw DegenerateFit("N and A must be positive for the power-law fit");
    }
    x[i] = std::log(points[i].first);
    y[i] = std::log(points[i].second);
  }
  const double sxx = (x.array() - x.mean()).square().sum();
  if (sxx <= 0) throw DegenerateFit("all N values are identical");
  const double sxy = ((x.array() - x.mean()) * (y.array() - y.mean())).sum();

  ScalingFit fit;
  fit.kind = ScalingFit::Kind::power_N;
  fit.p1 = sxy / sxx;                                 // exponent
  const double intercept = y.mean() - fit.p1 * x.mean();
  fit.p2 = std::exp(intercept);                       // prefactor
  fit.goodness = r_squared(y, fit.p1 * x.array() + intercept);
  return fit;
}

}  // namespace sls
