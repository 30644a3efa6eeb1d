#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sls/dynamics.hpp"

namespace sls {

struct EmptyTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gaussian A exp(-(t - mu)^2 / (2 sigma^2)) fitted to the first pulse.
struct PulseMetrics {
  double amplitude = 0;  // photons/s
  double center = 0;     // s
  double width = 0;      // s
  double residual = 0;   // rms misfit relative to the amplitude
  bool converged = false;
};

struct ScalingFit {
  enum class Kind { linear_R, width_R, power_N };
  Kind kind = Kind::linear_R;
  // linear_R: p1 = slope, p2 = intercept.
  // width_R:  sigma(R) = sqrt((p1/R)^2 + p2^2).
  // power_N:  A = p2 * N^p1 (p1 = exponent, p2 = prefactor).
  double p1 = 0;
  double p2 = 0;
  double goodness = 0;  // coefficient of determination, clipped to [0, 1]
  std::optional<double> threshold;  // -intercept/slope when intercept < 0
};

// Fits the first pulse: the window runs from the last sample below 5% of the
// peak before the peak to the first local minimum after it. Pathological
// traces come back with converged = false; an identically zero trace throws
// EmptyTrace.
PulseMetrics fit_gaussian_pulse(const std::vector<double>& times,
                                const std::vector<double>& flux);
PulseMetrics fit_gaussian_pulse(const SimulationTrace& trace,
                                bool use_filtered = false);

// Ordinary least squares A = p1 R + p2; reports the threshold rate -p2/p1
// when the intercept is negative.
ScalingFit fit_amplitude_vs_R(const std::vector<std::pair<double, double>>& points);

// Nonlinear fit of sigma(R) = sqrt((p1/R)^2 + p2^2), p1 and p2 >= 0.
ScalingFit fit_width_vs_R(const std::vector<std::pair<double, double>>& points);

// Log-log linear fit returning exponent and prefactor.
ScalingFit fit_amplitude_vs_N(const std::vector<std::pair<double, double>>& points);

}  // namespace sls
