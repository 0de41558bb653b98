#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "chemotax/pks.hpp"
#include "chemotax/tridiagonal.hpp"
#include "fixtures.hpp"

using namespace chemotax;

namespace {

FieldPair uniform_1d(std::size_t n, double dx, double dt, double u0, double c0) {
  FieldPair fp;
  fp.grid = Grid{1, n, dx};
  fp.u.assign(n, u0);
  fp.c.assign(n, c0);
  fp.dt = dt;
  return fp;
}

// Cell-centred smooth data used by the convergence and Jacobian checks.
FieldPair smooth_1d(std::size_t n, double dt) {
  const double dx = 1.0 / static_cast<double>(n);
  FieldPair fp = uniform_1d(n, dx, dt, 0.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * dx;
    fp.u[i] = 1e6 * (1.0 + 0.2 * std::cos(3.0 * std::numbers::pi * x));
    fp.c[i] = 1e6 * (1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * x));
  }
  return fp;
}

std::vector<double> restrict_pairs(const std::vector<double>& fine) {
  std::vector<double> out(fine.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
  return out;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ParamSet base_2d() {
  auto p = fixtures::base_1d();
  p.dim = 2;
  p.theta = 0.025;
  p.u_max = 1e7;
  p.c_bar = 1e7;
  p.tau = 1e-4;
  return p;
}

}  // namespace

TEST_CASE("tridiagonal solver") {
  // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3] -> x = 1.
  const auto x = solve_tridiagonal(std::vector<double>{0, 1, 1}, std::vector<double>{2, 3, 2},
                                   std::vector<double>{1, 1, 0}, std::vector<double>{3, 5, 3});
  for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(solve_tridiagonal(std::vector<double>{0, 0}, std::vector<double>{0, 1},
                                    std::vector<double>{0, 0}, std::vector<double>{1, 1}),
                  NumericalError);
}

TEST_CASE("implicit chemoattractant step") {
  auto p = fixtures::base_1d();
  const auto coef = derive_coefficients(p);
  SUBCASE("pure decay of a uniform field") {
    const auto fp = uniform_1d(20, 0.05, 0.1, 0.0, 3.0);
    for (double c : step_c_implicit(fp, p, coef))
      CHECK(c == doctest::Approx(3.0 / (1.0 + 0.1 * p.kappa)).epsilon(1e-14));
  }
  SUBCASE("diffusion alone conserves the total") {
    p.alpha = 0.0;
    p.kappa = 0.0;
    p.beta_c = 0.3;
    auto fp = smooth_1d(64, 0.01);
    double before = 0.0, after = 0.0;
    for (double c : fp.c) before += c;
    for (double c : step_c_implicit(fp, p, coef)) after += c;
    CHECK(std::abs(after - before) / before < 1e-12);
  }
  SUBCASE("heat-kernel decay of the first cosine mode") {
    // c = 2 + cos(pi x), beta_c = 1, no reaction: the cosine part decays by exp(-pi^2 dt).
    p.alpha = 0.0;
    p.kappa = 0.0;
    p.beta_c = 1.0;
    auto err = [&](std::size_t n, double dt) {
      FieldPair fp = uniform_1d(n, 1.0 / n, dt, 0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) fp.c[i] = 2.0 + std::cos(std::numbers::pi * (i + 0.5) / n);
      const auto c1 = step_c_implicit(fp, p, coef);
      double e = 0.0;
      const double f = std::exp(-std::numbers::pi * std::numbers::pi * dt);
      for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs((c1[i] - 2.0) - f * (fp.c[i] - 2.0)));
      return e;
    };
    // Local error scales as dt^2 + dt dx^2: halving both cuts it by about four.
    const double e1 = err(32, 1e-2), e2 = err(64, 5e-3);
    CHECK(std::log2(e1 / e2) > 1.8);
  }
}

TEST_CASE("interface flux") {
  auto p = fixtures::base_1d();
  const auto coef = derive_coefficients(p);
  SUBCASE("no gradients, no flux") {
    const auto fp = uniform_1d(5, 0.01, 0.01, 1e6, 1e6);
    for (std::size_t f = 0; f <= 5; ++f) CHECK(flux_1d(fp.u, fp.u, fp.c, f, 0.01, p, coef) == 0.0);
  }
  SUBCASE("drift up the gradient is negative") {
    auto fp = uniform_1d(3, 0.01, 0.01, 1e6, 0.0);
    fp.c = {1e6, 1.1e6, 1.3e6};
    const double f = flux_1d(fp.u, fp.u, fp.c, 1, 0.01, p, coef);
    const double b = coef.chi * (1.1e6 - 1e6) / 0.01;
    CHECK(f < 0.0);
    CHECK(f == doctest::Approx(-b * 1e6 * psi(1e6, p)).epsilon(1e-12));
    CHECK(flux_1d(fp.u, fp.u, fp.c, 0, 0.01, p, coef) == 0.0);
    CHECK(flux_1d(fp.u, fp.u, fp.c, 3, 0.01, p, coef) == 0.0);
  }
}

TEST_CASE("Newton step leaves a state without transport unchanged") {
  auto p = fixtures::base_1d();
  auto fp = smooth_1d(40, 0.01);
  const DerivedCoefficients none{0.0, 0.0, 0.0};
  const auto u1 = step_u_implicit_1d(fp, p, none, SolverOptions{});
  CHECK(u1 == fp.u);
}

TEST_CASE("analytic Jacobian agrees with finite differences") {
  std::mt19937_64 gen(314);
  std::uniform_real_distribution<double> ud(2e5, 3e6), cd(5e5, 1.5e6);
  for (auto variant : {Variant::generalised, Variant::classical}) {
    auto p = fixtures::base_1d();
    p.variant = variant;
    p.eta = 40.0;  // strong drift so both upwind branches matter
    const auto coef = derive_coefficients(p);
    const std::size_t n = 24;
    FieldPair fp = uniform_1d(n, 1.0 / n, 0.05, 0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      fp.u[i] = ud(gen);
      fp.c[i] = cd(gen);
    }
    std::vector<double> u(n);
    for (auto& x : u) x = ud(gen);
    const auto jac = jacobian_1d(fp, u, p, coef);

    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      scale = std::max({scale, std::abs(jac.diag[j]), std::abs(jac.lower[j]), std::abs(jac.upper[j])});
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double h = 1e-4 * u[k];
      auto up = u, dn = u;
      up[k] += h;
      dn[k] -= h;
      const auto rp = residual_1d(fp, up, p, coef);
      const auto rm = residual_1d(fp, dn, p, coef);
      for (std::size_t j = 0; j < n; ++j) {
        const double fd = (rp[j] - rm[j]) / (2.0 * h);
        double an = 0.0;
        if (j == k) an = jac.diag[j];
        else if (j + 1 == k) an = jac.upper[j];
        else if (k + 1 == j) an = jac.lower[j];
        worst = std::max(worst, std::abs(fd - an) / scale);
      }
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("implicit density step conserves mass and stays positive") {
  auto p = fixtures::base_1d();
  const auto coef = derive_coefficients(p);
  auto fp = smooth_1d(100, 0.01);
  fp.grid.h = 0.01;
  SolverOptions opts;
  NewtonStats stats;
  for (int k = 0; k < 200; ++k) {
    const double m0 = fp.mass();
    fp = step_pde(fp, p, coef, opts, &stats);
    REQUIRE(std::abs(fp.mass() - m0) / m0 < 1e-12);
    REQUIRE(*std::min_element(fp.u.begin(), fp.u.end()) >= 0.0);
  }
  CHECK(stats.steps == 200);
  CHECK(stats.last_residual <= opts.newton_tol);
}

TEST_CASE("nonlinear diffusion matches an explicit fine-grid reference") {
  // chi = 0: u_t = (beta_u D(u) u_x)_x. Reference: explicit finite volumes on a 4x finer grid.
  auto p = fixtures::base_1d();
  const DerivedCoefficients coef{0.0, 1e-2, 0.0};
  auto bump = [&](double x) { return p.u_max * (0.2 + 2.0 * std::exp(-100.0 * (x - 0.5) * (x - 0.5))); };
  const std::size_t n = 100;
  FieldPair fp = uniform_1d(n, 1.0 / n, 1e-3, 0.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) fp.u[i] = bump((i + 0.5) / n);
  for (int k = 0; k < 100; ++k) fp = step_pde(fp, p, coef, SolverOptions{});

  const std::size_t nf = 4 * n;
  const double dxf = 1.0 / nf, dtf = 2e-5;
  std::vector<double> uf(nf), flux(nf + 1, 0.0);
  for (std::size_t i = 0; i < nf; ++i) uf[i] = bump((i + 0.5) / nf);
  for (int k = 0; k < 5000; ++k) {
    for (std::size_t f = 1; f < nf; ++f)
      flux[f] = coef.beta_u * big_d(0.5 * (uf[f - 1] + uf[f]), p) * (uf[f] - uf[f - 1]) / dxf;
    for (std::size_t i = 0; i < nf; ++i) uf[i] += dtf / dxf * (flux[i + 1] - flux[i]);
  }
  std::vector<double> ref(n, 0.0);
  for (std::size_t i = 0; i < nf; ++i) ref[i / 4] += 0.25 * uf[i];
  const double peak = *std::max_element(ref.begin(), ref.end());
  CHECK(max_diff(fp.u, ref) / peak < 0.01);
}

TEST_CASE("one-dimensional self-convergence") {
  auto p = fixtures::base_1d();
  const auto coef = derive_coefficients(p);
  auto solve = [&](std::size_t n, double dt) {
    const auto init = smooth_1d(n, dt);
    const std::vector<double> times{1.0};
    return run_pde(p, coef, init, 1.0, times, SolverOptions{}).snapshots.back().u;
  };
  const auto u1 = solve(50, 0.04), u2 = solve(100, 0.01), u3 = solve(200, 0.0025);
  const double e1 = max_diff(restrict_pairs(u2), u1);
  const double e2 = max_diff(restrict_pairs(u3), u2);
  MESSAGE("successive differences " << e1 << " " << e2);
  CHECK(std::log2(e1 / e2) >= 1.0);
}

TEST_CASE("run_pde basics") {
  auto p = fixtures::base_1d();
  const auto coef = derive_coefficients(p);
  const auto init = smooth_1d(50, 0.01);
  const std::vector<double> zero{0.0};
  const auto r0 = run_pde(p, coef, init, 0.0, zero, SolverOptions{});
  REQUIRE(r0.snapshots.size() == 1);
  CHECK(r0.snapshots[0].u == init.u);
  CHECK(r0.steps == 0);

  const std::vector<double> times{0.5, 0.1};
  const auto a = run_pde(p, coef, init, 0.5, times, SolverOptions{});
  const auto b = run_pde(p, coef, init, 0.5, times, SolverOptions{});
  REQUIRE(a.snapshots.size() == 2);
  CHECK(a.snapshots[0].time == doctest::Approx(0.5));
  CHECK(a.snapshots[1].time == doctest::Approx(0.1));
  CHECK(a.snapshots[0].u == b.snapshots[0].u);
  CHECK(a.snapshots[0].c == b.snapshots[0].c);

  SolverOptions bad;
  bad.scheme = Scheme::explicit_2d;
  CHECK_THROWS_AS(run_pde(p, coef, init, 0.5, times, bad), ValidationError);
}

TEST_CASE("explicit 2D scheme") {
  const auto p = base_2d();
  const auto coef = derive_coefficients(p);
  const std::size_t n = 21;
  FieldPair fp;
  fp.grid = Grid{2, n, 1.0 / n};
  fp.dt = p.tau;

  SUBCASE("homogeneous equilibrium is a fixed point") {
    fp.u.assign(n * n, 5e6);
    fp.c.assign(n * n, 5e6);
    const auto next = step_2d_explicit(fp, p, coef);
    CHECK(next.u == fp.u);
    CHECK(next.c == fp.c);
  }
  SUBCASE("mass conservation and dihedral symmetry") {
    fp.u.resize(n * n);
    fp.c.resize(n * n);
    const double mid = 0.5 * (n - 1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double r2 = ((i - mid) * (i - mid) + (j - mid) * (j - mid)) / (n * n);
        fp.u[j * n + i] = 5e6 * (1.0 + 0.5 * std::exp(-30.0 * r2));
        fp.c[j * n + i] = 5e6 * (1.0 + 2.0 * std::exp(-20.0 * r2) * std::cos(9.0 * r2));
      }
    for (int k = 0; k < 200; ++k) {
      const double m0 = fp.mass();
      fp = step_2d_explicit(fp, p, coef);
      REQUIRE(std::abs(fp.mass() - m0) / m0 < 1e-12);
    }
    const double peak = *std::max_element(fp.u.begin(), fp.u.end());
    double asym = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double v = fp.u[j * n + i];
        asym = std::max({asym, std::abs(v - fp.u[j * n + (n - 1 - i)]),
                         std::abs(v - fp.u[(n - 1 - j) * n + i]), std::abs(v - fp.u[i * n + j])});
      }
    CHECK(asym / peak <= 1e-12);
  }
  SUBCASE("time step above the stability estimate is rejected") {
    fp.u.assign(n * n, 5e6);
    fp.c.assign(n * n, 5e6);
    fp.dt = 10.0 * explicit_2d_dt_bound(fp, p, coef);
    CHECK_THROWS_AS(step_2d_explicit(fp, p, coef), CflViolation);
  }
}
