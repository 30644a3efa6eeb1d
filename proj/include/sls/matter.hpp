#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>
#include <fftw3.h>

#include "sls/units.hpp"

namespace sls {

struct LightState;

// Per-momentum-order complex envelopes psi_m(xi) at one instant. Envelopes
// live on the extended grid (inner + padding); all light coupling happens on
// the inner nodes.
struct MatterState {
  std::vector<int> orders;                // even, ascending, step 2
  std::vector<Eigen::ArrayXcd> envelopes; // one per order, grid.total() long
  double tau = 0;
  SpatialGrid grid;

  int order_index(int m) const;  // -1 when absent
};

// Thomas-Fermi ground state normalized to atom_number plus seed_atoms worth
// of population in the m = +2 order (psi_2 = sqrt(seed/N) psi_0).
MatterState initial_state(double atom_number, const SpatialGrid& grid,
                          int n_orders, double seed_atoms = 1.0);
MatterState initial_state(double atom_number, const SpatialGrid& grid,
                          std::vector<int> orders, double seed_atoms = 1.0);

// exp(-i (k^2/2 + m k) dtau/2) applied per order in spatial-frequency space.
// Owns the FFTW plans; one instance per concurrent run.
class SpectralKinetic {
 public:
  explicit SpectralKinetic(const SpatialGrid& grid);
  ~SpectralKinetic();
  SpectralKinetic(const SpectralKinetic&) = delete;
  SpectralKinetic& operator=(const SpectralKinetic&) = delete;

  void half_step(MatterState& s, double dtau);

 private:
  int n_;
  Eigen::ArrayXd k_;
  fftw_complex* buf_;
  fftw_plan forward_;
  fftw_plan backward_;
};

// Advances the matter state through the light-coupling part of the step:
// at every grid point the order vector is multiplied by exp(-i dtau H) with
// H the Hermitian tridiagonal matrix
//   H[j][j]   = Lambda (|e+|^2 + |e-|^2)  (+ optional extra potential)
//   H[j][j-1] = Lambda conj(e-) e+ exp(+2i (m_j - 1) tau*)
// evaluated at the phase time tau* = light.tau. The exponential is exact:
// a phase gauge maps H onto a real symmetric tridiagonal matrix with
// constant off-diagonal whose eigensystem is known in closed form.
void coupling_step(MatterState& s, const LightState& light, double lambda,
                   double dtau,
                   const Eigen::ArrayXd* extra_potential = nullptr);

// Trapezoidal N_m = integral |psi_m|^2 dxi per order.
std::vector<double> momentum_populations(const MatterState& s);

// Sum of momentum_populations.
double atom_number_total(const MatterState& s);

// Matter-wave grating amplitude psi_{m+2} conj(psi_m) on the inner grid.
Eigen::ArrayXcd coherence_profile(const MatterState& s, int m);

}  // namespace sls
