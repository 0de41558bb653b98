#pragma once

// Finite-difference solver for the volume-filling (generalised) and classical
// Patlak-Keller-Segel systems with zero-flux boundaries:
//   u_t = div(beta_u D(u) grad u - chi psi(u) u grad c),   c_t = beta_c lap c + alpha u - kappa c.
//
// 1D: implicit Euler for c (tridiagonal), nonlinear implicit upwind flux scheme for u solved
//     by Newton iteration (D at level n, psi and u at level n+1, drift b at level n).
// 2D: fully explicit update of both fields.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "chemotax/grid.hpp"
#include "chemotax/params.hpp"

namespace chemotax {

struct FieldPair {
  Grid grid;  // n nodes per dimension, spacing grid.h = dx
  std::vector<double> u;
  std::vector<double> c;
  double time = 0.0;
  double dt = 0.0;

  // sum(u) dx^dim
  double mass() const;
  void validate() const;
};

enum class Scheme { implicit_1d, explicit_2d };

struct SolverOptions {
  double newton_tol = 1e-10;  // on max |residual| / max u^n
  int newton_max_iter = 50;
  int max_halvings = 10;  // damped retries when a Newton step increases the residual
  Scheme scheme = Scheme::implicit_1d;

  void validate() const;
};

struct NewtonStats {
  std::int64_t steps = 0;
  std::int64_t total_iterations = 0;
  int max_iterations = 0;
  std::int64_t damped_steps = 0;
  double last_residual = 0.0;
};

// Chemoattractant update. 1D: implicit Euler with mirrored ghost nodes. 2D: the explicit
// update (Laplacian and reaction at level n).
std::vector<double> step_c_implicit(const FieldPair& fp, const ParamSet& p,
                                    const DerivedCoefficients& coef);

// Flux through face `face` of a 1D grid (face f separates nodes f-1 and f; faces 0 and n are
// the zero-flux boundaries). D uses u_old at the face mean, drift uses c_old, psi and u use u_new.
double flux_1d(std::span<const double> u_old, std::span<const double> u_new,
               std::span<const double> c_old, std::size_t face, double dx, const ParamSet& p,
               const DerivedCoefficients& coef);

// Newton residual R_j = u_j - u^n_j - dt/dx (F_{j+1/2}(u) - F_{j-1/2}(u)).
std::vector<double> residual_1d(const FieldPair& fp, std::span<const double> u_new,
                                const ParamSet& p, const DerivedCoefficients& coef);

struct TridiagonalJacobian {
  std::vector<double> lower, diag, upper;
};
// Analytic Jacobian dR/du of residual_1d.
TridiagonalJacobian jacobian_1d(const FieldPair& fp, std::span<const double> u_new,
                                const ParamSet& p, const DerivedCoefficients& coef);

// Throws NewtonDivergence or NumericalError (negative density).
std::vector<double> step_u_implicit_1d(const FieldPair& fp, const ParamSet& p,
                                       const DerivedCoefficients& coef, const SolverOptions& opts,
                                       NewtonStats* stats = nullptr);

// Explicit stability estimate 0.9 dx^2 / (4 (beta_u + beta_c) + chi max|c_R - c_L|).
double explicit_2d_dt_bound(const FieldPair& fp, const ParamSet& p,
                            const DerivedCoefficients& coef);

// Advances both fields one explicit step. Throws CflViolation or NumericalError.
FieldPair step_2d_explicit(const FieldPair& fp, const ParamSet& p, const DerivedCoefficients& coef);

// One step of the configured scheme.
FieldPair step_pde(const FieldPair& fp, const ParamSet& p, const DerivedCoefficients& coef,
                   const SolverOptions& opts, NewtonStats* stats = nullptr);

struct PdeRun {
  std::vector<FieldPair> snapshots;
  NewtonStats newton;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;
};

using PdeObserver = std::function<void(const FieldPair&)>;

// Snapshot times resolve to step floor(t / dt). The observer sees every new time level.
PdeRun run_pde(const ParamSet& p, const DerivedCoefficients& coef, const FieldPair& init,
               double t_end, std::span<const double> snapshot_times, const SolverOptions& opts,
               const PdeObserver& observer = {});

struct EquilibriumResult {
  FieldPair state;
  bool converged = false;
  double last_rate = 0.0;  // max|u(t) - u(t - interval)| / (max u * interval)
  NewtonStats newton;
};

// Integrates until the relative change of u per unit time drops below rate_tol, checking
// every check_interval time units, or t_max is reached.
EquilibriumResult run_to_equilibrium(const ParamSet& p, const DerivedCoefficients& coef,
                                     const FieldPair& init, double t_max, double rate_tol,
                                     double check_interval, const SolverOptions& opts);

}  // namespace chemotax
