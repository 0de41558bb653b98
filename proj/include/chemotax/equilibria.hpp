#pragma once

// Stationary solutions of the zero-flux system: homogeneous state, the density-chemo
// relation u = u_max W0((lam / u_max) exp(nu c)) and the scalar function
// Gamma(c) = kappa c - alpha u(c) whose roots organise the steady phase plane.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chemotax/params.hpp"

namespace chemotax {

// Principal branch of the Lambert W function for z >= 0 (w exp(w) = z, w >= 0).
// Halley iteration below z = e, Newton on w + ln w = ln z above. Throws DomainError for
// z < 0 or NaN.
double lambert_w0(double z);

// W0(exp(log_z)) without forming exp(log_z); valid for every finite log_z.
double lambert_w0_from_log(double log_z);

struct SteadyStateContext {
  double nu = 0.0;      // chi / beta_u
  double log_lam = 0.0;  // log of the mass-fixing constant lam; lam itself under- or overflows
                         // once nu c* exceeds ~700
  double u_max = 1.0;
  double alpha = 1.0;
  double kappa = 1.0;
  double beta_c = 1.0;
  double length = 1.0;  // domain length
  double mass = 1.0;
  Variant variant = Variant::generalised;

  double lam() const { return std::exp(log_lam); }
  void validate() const;
};

SteadyStateContext make_context(const ParamSet& p, const DerivedCoefficients& coef, double length,
                                double mass, double log_lam = 0.0);

// (u*, c*) = (M / |Omega|, alpha M / (kappa |Omega|)).
std::pair<double, double> homogeneous_steady_state(const ParamSet& p, double mass, double volume);

// log lam making u_infinity_of_c(c*) = u*: ln u* + u*/u_max - nu c* (no u*/u_max term classically).
double homogeneous_log_lambda(double u_star, double c_star, const SteadyStateContext& ctx);

// u_max W0((lam/u_max) exp(nu c)); lam exp(nu c) for the classical variant. Arguments whose
// exponential would overflow are evaluated in log space.
double u_infinity_of_c(double c, const SteadyStateContext& ctx);

enum class Quadrature { midpoint, trapezoid };

// log lam such that sum_j w_j u_infinity_of_c(c_j) h = mass, by bisection.
// midpoint weights w_j = 1 match the cell mass sum(u) h; trapezoid halves the end weights.
double log_lambda_from_mass(std::span<const double> c, double h, double mass,
                        const SteadyStateContext& ctx, Quadrature q = Quadrature::midpoint);

double gamma(double c, const SteadyStateContext& ctx);

// Integral of gamma over [0, c], in closed form.
double gamma_integral(double c, const SteadyStateContext& ctx);

enum class RootKind { saddle, centre, degenerate };
std::string to_string(RootKind k);

struct GammaRoot {
  double c = 0.0;
  double gamma_value = 0.0;
  double slope = 0.0;  // centered-difference Gamma'
  RootKind kind = RootKind::degenerate;
};

struct GammaRootReport {
  std::vector<GammaRoot> roots;  // ascending
  double scan_min = 0.0;
  double scan_max = 0.0;
  std::size_t n_scan = 0;
  double scale = 0.0;  // magnitude used for the root tolerance
  bool unresolved_beyond_scan = false;  // Gamma(scan_max) < 0
  std::vector<std::string> warnings;
};

// Uniform sign-change scan over [0, c_max_scan] followed by bisection to
// |Gamma| < 1e-10 scale. Throws ValidationError for c_max_scan <= 0 or n_scan < 2.
GammaRootReport gamma_roots(const SteadyStateContext& ctx, double c_max_scan,
                            std::size_t n_scan = 10000);

// Right-hand side of c' = w, w' = Gamma(c) / beta_c.
std::array<double, 2> phase_plane_rhs(const std::array<double, 2>& cw,
                                      const SteadyStateContext& ctx);

// beta_c w^2 / 2 - integral of Gamma; conserved along phase-plane orbits.
double phase_energy(const std::array<double, 2>& cw, const SteadyStateContext& ctx);

// Classical fourth-order Runge-Kutta; returns n_steps + 1 states including the start.
std::vector<std::array<double, 2>> integrate_phase_plane(const std::array<double, 2>& start,
                                                         double dx, std::size_t n_steps,
                                                         const SteadyStateContext& ctx);

}  // namespace chemotax
