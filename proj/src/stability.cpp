#include "chemotax/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace chemotax {

namespace {

// D(u*) / psi(u*)
double filling_factor(double u_star, const ParamSet& p) {
  return p.variant == Variant::classical ? 1.0 : 1.0 + u_star / p.u_max;
}

}  // namespace

DispersionResult dispersion(double k2, double u_star, const ParamSet& p,
                            const DerivedCoefficients& coef) {
  if (!(k2 >= 0.0)) throw ValidationError("dispersion: k2 must be non-negative");
  if (!(u_star > 0.0)) throw ValidationError("dispersion: u_star must be positive");
  const double d = big_d(u_star, p);
  const double ps = psi(u_star, p);
  DispersionResult r;
  r.k2 = k2;
  r.b = k2 * (coef.beta_u * d + p.beta_c) + p.kappa;
  r.c = k2 * k2 * coef.beta_u * p.beta_c * d +
        k2 * (p.kappa * coef.beta_u * d - p.alpha * coef.chi * u_star * ps);
  const double disc = r.b * r.b - 4.0 * r.c;
  if (disc >= 0.0) {
    // b > 0, so q is the root of larger magnitude and c / q has no cancellation.
    const double q = -0.5 * (r.b + std::sqrt(disc));
    const double s1 = q;
    const double s2 = q != 0.0 ? r.c / q : 0.0;
    r.sigma[0] = std::max(s1, s2);
    r.sigma[1] = std::min(s1, s2);
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    r.sigma[0] = {-0.5 * r.b, im};
    r.sigma[1] = {-0.5 * r.b, -im};
  }
  r.unstable = r.sigma[0].real() > 0.0;
  return r;
}

double chi_threshold(double u_star, const ParamSet& p, const DerivedCoefficients& coef) {
  if (!(u_star > 0.0)) throw ValidationError("chi_threshold: u_star must be positive");
  return p.kappa * coef.beta_u * filling_factor(u_star, p) / (p.alpha * u_star);
}

UnstableWindow k2_max(double u_star, const ParamSet& p, const DerivedCoefficients& coef) {
  const double g = filling_factor(u_star, p);
  const double num = p.alpha * coef.chi * u_star - p.kappa * coef.beta_u * g;
  UnstableWindow w;
  if (num > 0.0) {
    w.k2_max = num / (coef.beta_u * p.beta_c * g);
    w.stable = false;
  }
  return w;
}

std::size_t unstable_mode_count(double length, double k2max) {
  if (!(length > 0.0)) throw ValidationError("unstable_mode_count: length must be positive");
  if (!(k2max >= 0.0)) throw ValidationError("unstable_mode_count: k2max must be non-negative");
  std::size_t m = 0;
  while (true) {
    const double k = static_cast<double>(m + 1) * std::numbers::pi / length;
    if (!(k * k < k2max)) break;
    ++m;
  }
  return m;
}

StabilityReport stability_report(double u_star, double length, const ParamSet& p,
                                 const DerivedCoefficients& coef, std::size_t n_points,
                                 double k2_hi) {
  StabilityReport rep;
  rep.u_star = u_star;
  rep.chi = coef.chi;
  rep.chi_crit = chi_threshold(u_star, p, coef);
  rep.window = k2_max(u_star, p, coef);
  rep.mode_count = unstable_mode_count(length, rep.window.k2_max);
  if (!(k2_hi > 0.0)) {
    const double base = std::numbers::pi / length;
    k2_hi = rep.window.stable ? 100.0 * base * base : 2.0 * rep.window.k2_max;
  }
  n_points = std::max<std::size_t>(n_points, 2);
  rep.curve.reserve(n_points);
  rep.fastest_rate = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n_points; ++i) {
    const double k2 = k2_hi * static_cast<double>(i) / static_cast<double>(n_points - 1);
    rep.curve.push_back(dispersion(k2, u_star, p, coef));
    if (rep.curve.back().max_real() > rep.fastest_rate) {
      rep.fastest_rate = rep.curve.back().max_real();
      rep.fastest_k2 = k2;
    }
  }
  return rep;
}

}  // namespace chemotax
