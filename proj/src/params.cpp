#include "chemotax/params.hpp"

#include <algorithm>

namespace chemotax {

std::string_view to_string(Variant v) {
  return v == Variant::classical ? "classical" : "generalised";
}

Variant variant_from_string(std::string_view name) {
  if (name == "generalised" || name == "generalized") return Variant::generalised;
  if (name == "classical") return Variant::classical;
  throw ValidationError("unknown model variant '" + std::string(name) + "'");
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string("parameter ") + name + " must be positive and finite, got " +
                          std::to_string(v));
}

}  // namespace

void ParamSet::validate() const {
  require_positive(h, "h");
  require_positive(tau, "tau");
  require_positive(u_max, "u_max");
  require_positive(c_bar, "c_bar");
  require_positive(beta_c, "beta_c");
  require_positive(alpha, "alpha");
  require_positive(kappa, "kappa");
  if (!(theta > 0.0 && theta <= 1.0))
    throw ValidationError("parameter theta must lie in (0, 1], got " + std::to_string(theta));
  if (dim != 1 && dim != 2) throw ValidationError("dim must be 1 or 2, got " + std::to_string(dim));
  // eta > 1 is allowed; overflowing move probabilities are caught per step by the lattice model.
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw ValidationError("parameter eta must be non-negative, got " + std::to_string(eta));
  if (!(zeta > 0.0)) throw ValidationError("parameter zeta must be positive");
}

DerivedCoefficients derive_coefficients(const ParamSet& p) {
  p.validate();
  const double denom = 2.0 * p.dim * p.tau;
  DerivedCoefficients d;
  d.chi = p.eta * p.h * p.h / (denom * p.c_bar);
  d.beta_u = p.theta * p.h * p.h / denom;
  d.nu = d.chi / d.beta_u;
  return d;
}

double c_bar_from_initial(double c0_max, const ParamSet& p) {
  return std::max(c0_max, p.zeta * p.u_max);
}

}  // namespace chemotax
