#include "chemotax/pks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "chemotax/kernels.hpp"
#include "chemotax/lattice.hpp"
#include "chemotax/tridiagonal.hpp"

namespace chemotax {

namespace {

// Newton iterates may dip below zero transiently; evaluate the closure there without the
// domain check used for physical states.
double psi_any(double u, const ParamSet& p) {
  return p.variant == Variant::classical ? 1.0 : std::exp(-u / p.u_max);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_nonnegative(std::span<const double> v, const char* what, double time) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
      throw NumericalError(std::string(what) + " became negative or non-finite (" +
                           std::to_string(v[i]) + ") at node " + std::to_string(i) +
                           ", t=" + std::to_string(time));
    }
  }
}

// Level-n quantities of a face that stay fixed through the Newton solve.
struct FaceFrozen {
  double a = 0.0;       // beta_u D(u_face^n) / dx
  double b_plus = 0.0;  // max(b, 0), b = chi (c_R - c_L) / dx
  double b_minus = 0.0; // max(-b, 0)
};

std::vector<FaceFrozen> freeze_faces(const FieldPair& fp, const ParamSet& p,
                                     const DerivedCoefficients& coef) {
  const std::size_t n = fp.grid.n;
  const double dx = fp.grid.h;
  std::vector<FaceFrozen> faces(n + 1);
  for (std::size_t f = 1; f < n; ++f) {
    const double u_face = 0.5 * (fp.u[f - 1] + fp.u[f]);
    const double b = coef.chi * ((fp.c[f] - fp.c[f - 1]) / dx);
    faces[f].a = coef.beta_u * big_d(u_face, p) / dx;
    faces[f].b_plus = b > 0.0 ? b : 0.0;
    faces[f].b_minus = b < 0.0 ? -b : 0.0;
  }
  return faces;
}

double face_flux(const FaceFrozen& f, double ul, double ur, const ParamSet& p) {
  const double diff = f.a * (ur - ul);
  const double adv = f.b_plus * ul * psi_any(ur, p) - f.b_minus * ur * psi_any(ul, p);
  return diff - adv;
}

std::vector<double> residual_with(const FieldPair& fp, std::span<const FaceFrozen> faces,
                                  std::span<const double> u, const ParamSet& p) {
  const std::size_t n = fp.grid.n;
  const double r = fp.dt / fp.grid.h;
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) flux[f] = face_flux(faces[f], u[f - 1], u[f], p);
  std::vector<double> res(n);
  for (std::size_t j = 0; j < n; ++j) res[j] = u[j] - fp.u[j] - r * (flux[j + 1] - flux[j]);
  return res;
}

TridiagonalJacobian jacobian_with(const FieldPair& fp, std::span<const FaceFrozen> faces,
                                  std::span<const double> u, const ParamSet& p) {
  const std::size_t n = fp.grid.n;
  const double r = fp.dt / fp.grid.h;
  const bool vf = p.variant == Variant::generalised;
  // dF_f/du_left and dF_f/du_right for every interior face.
  std::vector<double> dl(n + 1, 0.0), dr(n + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) {
    const double ul = u[f - 1], ur = u[f];
    const double pl = psi_any(ul, p), pr = psi_any(ur, p);
    const double dpl = vf ? -pl / p.u_max : 0.0;
    const double dpr = vf ? -pr / p.u_max : 0.0;
    const FaceFrozen& fz = faces[f];
    dl[f] = -fz.a - fz.b_plus * pr + fz.b_minus * ur * dpl;
    dr[f] = fz.a - fz.b_plus * ul * dpr + fz.b_minus * pl;
  }
  TridiagonalJacobian jac;
  jac.lower.assign(n, 0.0);
  jac.diag.assign(n, 0.0);
  jac.upper.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    // R_j depends on face j (left) and face j+1 (right).
    jac.diag[j] = 1.0 - r * (dl[j + 1] - dr[j]);
    if (j + 1 < n) jac.upper[j] = -r * dr[j + 1];
    if (j > 0) jac.lower[j] = r * dl[j];
  }
  return jac;
}

}  // namespace

double FieldPair::mass() const {
  double s = 0.0;
  for (double v : u) s += v;
  return s * grid.cell_volume();
}

void FieldPair::validate() const {
  grid.validate();
  if (u.size() != grid.size() || c.size() != grid.size())
    throw ValidationError("field size does not match the grid (" + std::to_string(grid.size()) +
                          " nodes)");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  for (double v : u)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("density must be non-negative");
  for (double v : c)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("chemoattractant must be non-negative");
}

void SolverOptions::validate() const {
  if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
  if (newton_max_iter < 1) throw ValidationError("newton_max_iter must be at least 1");
  if (max_halvings < 0) throw ValidationError("max_halvings must be non-negative");
}

std::vector<double> step_c_implicit(const FieldPair& fp, const ParamSet& p,
                                    const DerivedCoefficients&) {
  const std::size_t n = fp.grid.n;
  const double dx2 = fp.grid.h * fp.grid.h;
  if (fp.grid.dim == 2) {
    std::vector<double> out(fp.c.size());
    kernels::active().reaction_diffusion_2d(fp.c, fp.u, out, n,
                                            {fp.dt, p.beta_c, dx2, p.alpha, p.kappa});
    require_nonnegative(out, "chemoattractant", fp.time + fp.dt);
    return out;
  }
  // (1 + dt kappa) c_j - s (c_{j+1} - 2 c_j + c_{j-1}) = c^n_j + dt alpha u^n_j, mirrored ghosts.
  const double s = fp.dt * p.beta_c / dx2;
  std::vector<double> lower(n, -s), diag(n), upper(n, -s), rhs(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double neighbours = (j == 0 || j + 1 == n) ? 1.0 : 2.0;
    diag[j] = 1.0 + fp.dt * p.kappa + s * neighbours;
    rhs[j] = fp.c[j] + fp.dt * p.alpha * fp.u[j];
  }
  lower[0] = 0.0;
  upper[n - 1] = 0.0;
  auto out = solve_tridiagonal(lower, diag, upper, rhs);
  require_nonnegative(out, "chemoattractant", fp.time + fp.dt);
  return out;
}

double flux_1d(std::span<const double> u_old, std::span<const double> u_new,
               std::span<const double> c_old, std::size_t face, double dx, const ParamSet& p,
               const DerivedCoefficients& coef) {
  const std::size_t n = u_old.size();
  if (face == 0 || face >= n) return 0.0;
  const double b = coef.chi * ((c_old[face] - c_old[face - 1]) / dx);
  FaceFrozen fz;
  fz.a = coef.beta_u * big_d(0.5 * (u_old[face - 1] + u_old[face]), p) / dx;
  fz.b_plus = b > 0.0 ? b : 0.0;
  fz.b_minus = b < 0.0 ? -b : 0.0;
  return face_flux(fz, u_new[face - 1], u_new[face], p);
}

std::vector<double> residual_1d(const FieldPair& fp, std::span<const double> u_new,
                                const ParamSet& p, const DerivedCoefficients& coef) {
  const auto faces = freeze_faces(fp, p, coef);
  return residual_with(fp, faces, u_new, p);
}

TridiagonalJacobian jacobian_1d(const FieldPair& fp, std::span<const double> u_new,
                                const ParamSet& p, const DerivedCoefficients& coef) {
  const auto faces = freeze_faces(fp, p, coef);
  return jacobian_with(fp, faces, u_new, p);
}

std::vector<double> step_u_implicit_1d(const FieldPair& fp, const ParamSet& p,
                                       const DerivedCoefficients& coef, const SolverOptions& opts,
                                       NewtonStats* stats) {
  const std::size_t n = fp.grid.n;
  const auto faces = freeze_faces(fp, p, coef);
  const double scale = std::max(max_abs(fp.u), 1e-300);

  std::vector<double> u = fp.u;
  auto res = residual_with(fp, faces, u, p);
  double rnorm = max_abs(res) / scale;
  int iter = 0;
  bool damped = false;
  while (rnorm > opts.newton_tol) {
    if (iter == opts.newton_max_iter) throw NewtonDivergence(iter, rnorm);
    ++iter;
    const auto jac = jacobian_with(fp, faces, u, p);
    std::vector<double> neg(n);
    for (std::size_t j = 0; j < n; ++j) neg[j] = -res[j];
    const auto delta = solve_tridiagonal(jac.lower, jac.diag, jac.upper, neg);

    double step = 1.0;
    std::vector<double> trial(n);
    std::vector<double> trial_res;
    double trial_norm = 0.0;
    for (int halving = 0;; ++halving) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = u[j] + step * delta[j];
      trial_res = residual_with(fp, faces, trial, p);
      trial_norm = max_abs(trial_res) / scale;
      if (trial_norm <= rnorm || halving == opts.max_halvings) break;
      step *= 0.5;
      damped = true;
    }
    u.swap(trial);
    res.swap(trial_res);
    rnorm = trial_norm;
    if (!std::isfinite(rnorm)) throw NewtonDivergence(iter, rnorm);
  }
  require_nonnegative(u, "density", fp.time + fp.dt);

  if (stats) {
    ++stats->steps;
    stats->total_iterations += iter;
    stats->max_iterations = std::max(stats->max_iterations, iter);
    if (damped) ++stats->damped_steps;
    stats->last_residual = rnorm;
  }
  return u;
}

double explicit_2d_dt_bound(const FieldPair& fp, const ParamSet& p,
                            const DerivedCoefficients& coef) {
  const std::size_t n = fp.grid.n;
  const double dx = fp.grid.h;
  double max_jump = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double c0 = fp.c[j * n + i];
      if (i + 1 < n) max_jump = std::max(max_jump, std::abs(fp.c[j * n + i + 1] - c0));
      if (j + 1 < n) max_jump = std::max(max_jump, std::abs(fp.c[(j + 1) * n + i] - c0));
    }
  }
  // The drift term is bounded using psi <= 1.
  return 0.9 * dx * dx / (4.0 * (coef.beta_u + p.beta_c) + coef.chi * max_jump);
}

FieldPair step_2d_explicit(const FieldPair& fp, const ParamSet& p,
                           const DerivedCoefficients& coef) {
  if (fp.grid.dim != 2) throw ValidationError("explicit 2D step needs a 2D grid");
  const double bound = explicit_2d_dt_bound(fp, p, coef);
  if (fp.dt > bound) throw CflViolation(fp.dt, bound);

  const std::size_t n = fp.grid.n;
  const double dx = fp.grid.h;
  const auto& kt = kernels::active();

  std::vector<double> psi_node(n * n);
  for (std::size_t k = 0; k < n * n; ++k) psi_node[k] = psi(fp.u[k], p);

  const kernels::FaceFluxCoeffs fk{coef.beta_u, coef.chi, dx};
  std::vector<double> fx(n * (n + 1), 0.0), fy((n + 1) * n, 0.0);

  // x-faces, one row at a time (faces between columns i and i+1 of row j).
  std::vector<double> d_row(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t r0 = j * n;
    for (std::size_t i = 0; i + 1 < n; ++i)
      d_row[i] = big_d(0.5 * (fp.u[r0 + i] + fp.u[r0 + i + 1]), p);
    const std::span<const double> u_all(fp.u), c_all(fp.c), ps(psi_node);
    kernels::FaceInputs in{u_all.subspan(r0, n - 1),  u_all.subspan(r0 + 1, n - 1),
                           c_all.subspan(r0, n - 1),  c_all.subspan(r0 + 1, n - 1),
                           ps.subspan(r0, n - 1),     ps.subspan(r0 + 1, n - 1),
                           d_row};
    kt.face_flux(in, std::span<double>(fx).subspan(j * (n + 1) + 1, n - 1), fk);
  }

  // y-faces between rows j and j+1 are contiguous across the whole field.
  {
    const std::size_t m = n * (n - 1);
    std::vector<double> d_col(m);
    for (std::size_t k = 0; k < m; ++k) d_col[k] = big_d(0.5 * (fp.u[k] + fp.u[k + n]), p);
    const std::span<const double> u_all(fp.u), c_all(fp.c), ps(psi_node);
    kernels::FaceInputs in{u_all.subspan(0, m), u_all.subspan(n, m), c_all.subspan(0, m),
                           c_all.subspan(n, m), ps.subspan(0, m),    ps.subspan(n, m),
                           d_col};
    kt.face_flux(in, std::span<double>(fy).subspan(n, m), fk);
  }

  FieldPair next;
  next.grid = fp.grid;
  next.dt = fp.dt;
  next.time = fp.time + fp.dt;
  next.u.resize(n * n);
  kt.divergence_2d(fp.u, fx, fy, next.u, n, fp.dt, dx);
  require_nonnegative(next.u, "density", next.time);
  next.c = step_c_implicit(fp, p, coef);
  return next;
}

FieldPair step_pde(const FieldPair& fp, const ParamSet& p, const DerivedCoefficients& coef,
                   const SolverOptions& opts, NewtonStats* stats) {
  if (opts.scheme == Scheme::explicit_2d || fp.grid.dim == 2) return step_2d_explicit(fp, p, coef);
  FieldPair next;
  next.grid = fp.grid;
  next.dt = fp.dt;
  next.time = fp.time + fp.dt;
  next.c = step_c_implicit(fp, p, coef);
  next.u = step_u_implicit_1d(fp, p, coef, opts, stats);
  return next;
}

PdeRun run_pde(const ParamSet& p, const DerivedCoefficients& coef, const FieldPair& init,
               double t_end, std::span<const double> snapshot_times, const SolverOptions& opts,
               const PdeObserver& observer) {
  p.validate();
  init.validate();
  opts.validate();
  if (opts.scheme == Scheme::implicit_1d && init.grid.dim != 1)
    throw ValidationError("the implicit scheme is one-dimensional");
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be non-negative");

  const std::int64_t n_steps = step_for_time(t_end, init.dt);
  std::vector<std::int64_t> snap_steps;
  for (double t : snapshot_times) {
    const auto s = step_for_time(t, init.dt);
    if (s > n_steps) throw ValidationError("snapshot time " + std::to_string(t) + " beyond t_end");
    snap_steps.push_back(s);
  }
  std::vector<std::size_t> order(snap_steps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return snap_steps[a] < snap_steps[b]; });

  PdeRun run;
  run.snapshots.resize(snap_steps.size());
  const auto t0 = std::chrono::steady_clock::now();

  FieldPair state = init;
  std::size_t next = 0;
  auto capture = [&](std::int64_t step) {
    while (next < order.size() && snap_steps[order[next]] == step) {
      FieldPair snap = state;
      snap.time = static_cast<double>(step) * init.dt;
      run.snapshots[order[next]] = std::move(snap);
      ++next;
    }
  };
  capture(0);
  for (std::int64_t step = 1; step <= n_steps; ++step) {
    state = step_pde(state, p, coef, opts, &run.newton);
    state.time = static_cast<double>(step) * init.dt;
    if (observer) observer(state);
    capture(step);
  }
  run.steps = n_steps;
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

EquilibriumResult run_to_equilibrium(const ParamSet& p, const DerivedCoefficients& coef,
                                     const FieldPair& init, double t_max, double rate_tol,
                                     double check_interval, const SolverOptions& opts) {
  p.validate();
  init.validate();
  opts.validate();
  if (!(check_interval > 0.0) || !(rate_tol > 0.0))
    throw ValidationError("equilibrium check interval and tolerance must be positive");
  const std::int64_t chunk = std::max<std::int64_t>(1, step_for_time(check_interval, init.dt));
  const std::int64_t total = step_for_time(t_max, init.dt);

  EquilibriumResult out;
  out.state = init;
  std::int64_t done = 0;
  while (done < total) {
    const std::vector<double> before = out.state.u;
    const std::int64_t todo = std::min(chunk, total - done);
    for (std::int64_t s = 0; s < todo; ++s) {
      out.state = step_pde(out.state, p, coef, opts, &out.newton);
    }
    done += todo;
    out.state.time = init.time + static_cast<double>(done) * init.dt;
    double change = 0.0;
    for (std::size_t k = 0; k < before.size(); ++k)
      change = std::max(change, std::abs(out.state.u[k] - before[k]));
    const double peak = std::max(max_abs(out.state.u), 1e-300);
    out.last_rate = change / (peak * static_cast<double>(todo) * init.dt);
    if (out.last_rate < rate_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace chemotax
