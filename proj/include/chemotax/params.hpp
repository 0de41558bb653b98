#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "chemotax/errors.hpp"

namespace chemotax {

// generalised: volume-filling closure psi(u) = exp(-u/u_max).
// classical:   psi == 1, D == 1 (no volume filling).
enum class Variant { generalised, classical };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

// Physical and numerical constants shared by the lattice model and the PDE.
struct ParamSet {
  double eta = 0.0;     // chemotactic step weight
  double theta = 1.0;   // probability of an undirected move attempt, in (0, 1]
  double u_max = 1.0;   // critical density, cells / length^dim
  double zeta = 1.0;    // unit scaling in c_bar = max(max c0, zeta u_max)
  double c_bar = 1.0;   // chemoattractant normalisation
  double beta_c = 1.0;  // chemoattractant diffusivity
  double alpha = 1.0;   // production rate
  double kappa = 1.0;   // decay rate
  double h = 1.0;       // lattice step
  double tau = 1.0;     // time step
  int dim = 1;
  Variant variant = Variant::generalised;

  // Throws ValidationError naming the first violated constraint.
  void validate() const;
};

struct DerivedCoefficients {
  double chi = 0.0;
  double beta_u = 0.0;
  double nu = 0.0;  // chi / beta_u
};

/// Volume-filling weight. Throws DomainError for u < 0.
inline double psi(double u, const ParamSet& p) {
  if (!(u >= 0.0)) throw DomainError("psi: density must be non-negative, got " + std::to_string(u));
  if (p.variant == Variant::classical) return 1.0;
  return std::exp(-u / p.u_max);
}

/// psi'(u); zero for the classical variant.
inline double psi_prime(double u, const ParamSet& p) {
  if (p.variant == Variant::classical) return 0.0;
  return -std::exp(-u / p.u_max) / p.u_max;
}

/// Diffusivity factor D(u) = psi(u) - u psi'(u) = exp(-u/u_max)(1 + u/u_max).
inline double big_d(double u, const ParamSet& p) {
  if (!(u >= 0.0)) throw DomainError("big_d: density must be non-negative, got " + std::to_string(u));
  if (p.variant == Variant::classical) return 1.0;
  const double s = u / p.u_max;
  return std::exp(-s) * (1.0 + s);
}

// Diffusion-limit scaling: chi = eta h^2 / (2 dim tau c_bar), beta_u = theta h^2 / (2 dim tau).
DerivedCoefficients derive_coefficients(const ParamSet& p);

// c_bar = max(c0_max, zeta * u_max).
double c_bar_from_initial(double c0_max, const ParamSet& p);

}  // namespace chemotax
