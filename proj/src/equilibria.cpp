#include "chemotax/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chemotax {

namespace {

constexpr int kMaxIter = 64;

// Above this log-argument exp() is close to overflowing.
constexpr double kLogGuard = 700.0;

double w_from_log_newton(double log_z, double w) {
  // g(w) = w + ln w - log_z is concave and increasing; Newton converges monotonically.
  for (int i = 0; i < kMaxIter; ++i) {
    const double g = w + std::log(w) - log_z;
    const double step = g / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4e-16 * w) break;
  }
  return w;
}

}  // namespace

double lambert_w0(double z) {
  if (!(z >= 0.0)) throw DomainError("lambert_w0: argument must be non-negative");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;
  constexpr double e = 2.718281828459045;
  if (z > e) {
    const double lz = std::log(z);
    return w_from_log_newton(lz, lz - std::log(lz));
  }
  // Below 1e-4 the series through z^5 is exact to double precision (next term 10.8 z^6).
  if (z < 1e-4) return z * (1.0 - z * (1.0 - z * (1.5 - z * (8.0 / 3.0 - z * (125.0 / 24.0)))));
  // Initial guess: series near zero, a scaled log1p elsewhere on (0, e].
  double w = z < 0.25 ? z * (1.0 - z * (1.0 - 1.5 * z)) : 0.75 * std::log1p(z);
  for (int i = 0; i < kMaxIter; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 4e-16 * std::abs(w) || f == 0.0) break;
  }
  return w;
}

double lambert_w0_from_log(double log_z) {
  if (std::isnan(log_z)) throw DomainError("lambert_w0_from_log: NaN argument");
  if (log_z < kLogGuard) return lambert_w0(std::exp(log_z));
  return w_from_log_newton(log_z, log_z - std::log(log_z));
}

void SteadyStateContext::validate() const {
  if (!std::isfinite(log_lam)) throw ValidationError("log lambda must be finite");
  if (!(u_max > 0.0) || !(kappa > 0.0) || !(beta_c > 0.0))
    throw ValidationError("steady-state rates must be positive");
  // alpha = 0 (no production) is a legitimate degenerate case with Gamma(c) = kappa c.
  if (!(alpha >= 0.0)) throw ValidationError("production rate must be non-negative");
  if (!(nu >= 0.0)) throw ValidationError("nu must be non-negative");
  if (!(length > 0.0)) throw ValidationError("domain length must be positive");
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
}

SteadyStateContext make_context(const ParamSet& p, const DerivedCoefficients& coef, double length,
                                double mass, double log_lam) {
  SteadyStateContext ctx;
  ctx.nu = coef.nu;
  ctx.log_lam = log_lam;
  ctx.u_max = p.u_max;
  ctx.alpha = p.alpha;
  ctx.kappa = p.kappa;
  ctx.beta_c = p.beta_c;
  ctx.length = length;
  ctx.mass = mass;
  ctx.variant = p.variant;
  return ctx;
}

std::pair<double, double> homogeneous_steady_state(const ParamSet& p, double mass, double volume) {
  if (!(mass > 0.0) || !(volume > 0.0))
    throw ValidationError("mass and volume must be positive");
  const double u = mass / volume;
  return {u, (p.alpha / p.kappa) * u};
}

double homogeneous_log_lambda(double u_star, double c_star, const SteadyStateContext& ctx) {
  if (!(u_star > 0.0)) throw ValidationError("homogeneous density must be positive");
  if (ctx.variant == Variant::classical) return std::log(u_star) - ctx.nu * c_star;
  return std::log(u_star) + u_star / ctx.u_max - ctx.nu * c_star;
}

double u_infinity_of_c(double c, const SteadyStateContext& ctx) {
  if (!(c >= 0.0)) throw DomainError("u_infinity_of_c: concentration must be non-negative");
  if (ctx.variant == Variant::classical) return std::exp(ctx.log_lam + ctx.nu * c);
  const double log_z = (ctx.log_lam - std::log(ctx.u_max)) + ctx.nu * c;
  return ctx.u_max * lambert_w0_from_log(log_z);
}

double log_lambda_from_mass(std::span<const double> c, double h, double mass,
                        const SteadyStateContext& ctx, Quadrature q) {
  if (!(mass > 0.0)) throw ValidationError("lambda_from_mass: mass must be positive");
  if (c.empty() || !(h > 0.0)) throw ValidationError("lambda_from_mass: empty profile");
  const std::size_t n = c.size();
  auto weight = [&](std::size_t j) {
    if (q == Quadrature::trapezoid && n > 1 && (j == 0 || j + 1 == n)) return 0.5;
    return 1.0;
  };
  auto mass_at = [&](double log_lam) {
    SteadyStateContext trial = ctx;
    trial.log_lam = log_lam;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += weight(j) * u_infinity_of_c(c[j], trial);
    return s * h;
  };

  // Classical-limit guess log(M / sum w exp(nu c) h) via log-sum-exp.
  double top = -std::numeric_limits<double>::infinity();
  for (double cj : c) top = std::max(top, ctx.nu * cj);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += weight(j) * std::exp(ctx.nu * c[j] - top);
  const double guess = std::log(mass) - (top + std::log(acc * h));

  double lo = guess - 1.0, hi = guess + 1.0;
  for (int i = 0; i < 200 && mass_at(lo) > mass; ++i) lo -= 2.0 * (hi - lo);
  for (int i = 0; i < 200 && mass_at(hi) < mass; ++i) hi += 2.0 * (hi - lo);
  // d ln(mass) / d ln(lam) lies in (0, 1], so a log-bracket of 1e-12 pins the mass to 1e-12.
  for (int i = 0; i < 400 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mass_at(mid) < mass) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma(double c, const SteadyStateContext& ctx) {
  return ctx.kappa * c - ctx.alpha * u_infinity_of_c(c, ctx);
}

double gamma_integral(double c, const SteadyStateContext& ctx) {
  if (ctx.variant == Variant::classical) {
    // lam (e^{nu c} - 1) / nu, assembled in log space.
    const double x = ctx.nu * c;
    double grow = 0.0;
    if (ctx.nu == 0.0) grow = ctx.lam() * c;
    else if (x > 0.0) {
      const double log_em1 = x < 30.0 ? std::log(std::expm1(x)) : x + std::log1p(-std::exp(-x));
      grow = std::exp(ctx.log_lam + log_em1 - std::log(ctx.nu));
    }
    return 0.5 * ctx.kappa * c * c - ctx.alpha * grow;
  }
  const double log_a = ctx.log_lam - std::log(ctx.u_max);
  if (ctx.nu == 0.0) {
    return 0.5 * ctx.kappa * c * c - ctx.alpha * ctx.u_max * lambert_w0_from_log(log_a) * c;
  }
  // d/dc W(a e^{nu c}) = nu W / (1 + W), so the antiderivative of W is (W + W^2/2) / nu.
  const double w1 = lambert_w0_from_log(log_a + ctx.nu * c);
  const double w0 = lambert_w0_from_log(log_a);
  const double anti = ((w1 - w0) + 0.5 * (w1 - w0) * (w1 + w0)) / ctx.nu;
  return 0.5 * ctx.kappa * c * c - ctx.alpha * ctx.u_max * anti;
}

std::string to_string(RootKind k) {
  switch (k) {
    case RootKind::saddle: return "saddle";
    case RootKind::centre: return "centre";
    case RootKind::degenerate: return "degenerate";
  }
  return "degenerate";
}

GammaRootReport gamma_roots(const SteadyStateContext& ctx, double c_max_scan, std::size_t n_scan) {
  if (!(c_max_scan > 0.0)) throw ValidationError("gamma_roots: scan range must be positive");
  if (n_scan < 2) throw ValidationError("gamma_roots: need at least two scan points");
  ctx.validate();

  GammaRootReport rep;
  rep.scan_min = 0.0;
  rep.scan_max = c_max_scan;
  rep.n_scan = n_scan;

  const double dc = c_max_scan / static_cast<double>(n_scan - 1);
  std::vector<double> cs(n_scan), gs(n_scan);
  double scale = ctx.kappa * c_max_scan;
  for (std::size_t i = 0; i < n_scan; ++i) {
    cs[i] = i + 1 == n_scan ? c_max_scan : dc * static_cast<double>(i);
    gs[i] = gamma(cs[i], ctx);
    scale = std::max(scale, ctx.alpha * u_infinity_of_c(cs[i], ctx));
  }
  rep.scale = scale;
  const double tol = 1e-10 * scale;

  auto slope_at = [&](double c) {
    const double d = 1e-3 * dc;
    if (c - d < 0.0) return (gamma(c + d, ctx) - gamma(c, ctx)) / d;
    return (gamma(c + d, ctx) - gamma(c - d, ctx)) / (2.0 * d);
  };
  auto push_root = [&](double c) {
    GammaRoot r;
    r.c = c;
    r.gamma_value = gamma(c, ctx);
    r.slope = slope_at(c);
    r.kind = r.slope > 0.0 ? RootKind::saddle : (r.slope < 0.0 ? RootKind::centre
                                                                : RootKind::degenerate);
    rep.roots.push_back(r);
  };

  for (std::size_t i = 0; i < n_scan; ++i) {
    if (gs[i] == 0.0) {
      push_root(cs[i]);
      continue;
    }
    if (i + 1 < n_scan && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
      double a = cs[i], b = cs[i + 1];
      double ga = gs[i];
      double mid = 0.5 * (a + b);
      // Bisect down to the floating-point resolution of the bracket; the tolerance only
      // certifies the result.
      for (int it = 0; it < 2000; ++it) {
        mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        const double gm = gamma(mid, ctx);
        if (gm == 0.0) break;
        if ((gm < 0.0) == (ga < 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      push_root(mid);
      if (!(std::abs(rep.roots.back().gamma_value) < tol))
        rep.warnings.push_back("root near c = " + std::to_string(mid) +
                               " does not meet the residual tolerance");
    }
  }

  if (gs.back() < 0.0) {
    rep.unresolved_beyond_scan = true;
    rep.warnings.push_back("Gamma is still negative at the end of the scan range; a further root "
                           "may lie beyond c = " + std::to_string(c_max_scan));
  }
  return rep;
}

std::array<double, 2> phase_plane_rhs(const std::array<double, 2>& cw,
                                      const SteadyStateContext& ctx) {
  return {cw[1], gamma(cw[0], ctx) / ctx.beta_c};
}

double phase_energy(const std::array<double, 2>& cw, const SteadyStateContext& ctx) {
  return 0.5 * ctx.beta_c * cw[1] * cw[1] - gamma_integral(cw[0], ctx);
}

std::vector<std::array<double, 2>> integrate_phase_plane(const std::array<double, 2>& start,
                                                         double dx, std::size_t n_steps,
                                                         const SteadyStateContext& ctx) {
  std::vector<std::array<double, 2>> path;
  path.reserve(n_steps + 1);
  path.push_back(start);
  std::array<double, 2> y = start;
  auto axpy = [](const std::array<double, 2>& a, double s, const std::array<double, 2>& b) {
    return std::array<double, 2>{a[0] + s * b[0], a[1] + s * b[1]};
  };
  for (std::size_t i = 0; i < n_steps; ++i) {
    const auto k1 = phase_plane_rhs(y, ctx);
    const auto k2 = phase_plane_rhs(axpy(y, 0.5 * dx, k1), ctx);
    const auto k3 = phase_plane_rhs(axpy(y, 0.5 * dx, k2), ctx);
    const auto k4 = phase_plane_rhs(axpy(y, dx, k3), ctx);
    for (int d = 0; d < 2; ++d) y[d] += dx / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    path.push_back(y);
  }
  return path;
}

}  // namespace chemotax
