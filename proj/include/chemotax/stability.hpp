#pragma once

// Linear stability of the homogeneous steady state (u*, c*). A perturbation proportional
// to exp(sigma t) times a Laplacian eigenfunction with eigenvalue -k^2 grows at the roots of
//   sigma^2 + B sigma + C = 0,
//   B = k^2 (beta_u D(u*) + beta_c) + kappa,
//   C = k^4 beta_u beta_c D(u*) + k^2 (kappa beta_u D(u*) - alpha chi u* psi(u*)).

#include <complex>
#include <cstddef>
#include <vector>

#include "chemotax/params.hpp"

namespace chemotax {

struct DispersionResult {
  double k2 = 0.0;
  std::complex<double> sigma[2];  // sigma[0] has the larger real part
  double b = 0.0, c = 0.0;        // quadratic coefficients
  bool unstable = false;          // max Re sigma > 0

  double max_real() const { return sigma[0].real(); }
};

DispersionResult dispersion(double k2, double u_star, const ParamSet& p,
                            const DerivedCoefficients& coef);

// kappa beta_u (1 + u*/u_max) / (alpha u*); kappa beta_u / (alpha u*) for the classical variant.
double chi_threshold(double u_star, const ParamSet& p, const DerivedCoefficients& coef);

struct UnstableWindow {
  double k2_max = 0.0;
  bool stable = true;  // chi at or below the threshold; k2_max is then 0
};

UnstableWindow k2_max(double u_star, const ParamSet& p, const DerivedCoefficients& coef);

// Number of Neumann modes m >= 1 on (0, L) with (m pi / L)^2 < k2max.
std::size_t unstable_mode_count(double length, double k2max);

struct StabilityReport {
  double u_star = 0.0;
  double chi = 0.0;
  double chi_crit = 0.0;
  UnstableWindow window;
  std::size_t mode_count = 0;
  double fastest_k2 = 0.0;  // argmax of Re sigma over the scanned range
  double fastest_rate = 0.0;
  std::vector<DispersionResult> curve;
};

// Evaluates the dispersion curve on n_points uniform k^2 values in [0, k2_hi]; k2_hi <= 0
// picks 2 k2_max (or (10 pi / L)^2 when stable).
StabilityReport stability_report(double u_star, double length, const ParamSet& p,
                                 const DerivedCoefficients& coef, std::size_t n_points = 401,
                                 double k2_hi = 0.0);

}  // namespace chemotax
