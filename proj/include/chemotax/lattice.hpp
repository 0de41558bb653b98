#pragma once

// Agent-based biased random walk with volume filling on a 1D or 2D lattice, coupled to a
// discrete chemoattractant balance with zero-flux boundaries.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chemotax/grid.hpp"
#include "chemotax/params.hpp"
#include "chemotax/rng.hpp"

namespace chemotax {

struct LatticeState {
  Grid grid;
  std::vector<std::int64_t> counts;  // agents per site
  std::vector<double> chemo;         // concentration per site
  std::int64_t step_index = 0;

  std::int64_t total_agents() const;
  // Throws ValidationError on shape mismatch or negative entries.
  void validate() const;
};

std::vector<double> density_of(std::span<const std::int64_t> counts, double h, int dim);

// Directions are ordered -x, +x, -y, +y; only the first 2*dim entries are used.
// Off-lattice directions always carry probability 0.
struct MoveProbabilities {
  std::array<double, 4> dir{};
  double stay = 1.0;
};

// Chemotactic move probabilities eta psi(u_dest) (c_dest - c_site)+ / (2 dim c_bar).
// Throws ProbabilityOverflow when they sum above 1.
MoveProbabilities chemo_move_probs(std::size_t site, const LatticeState& state, const ParamSet& p);
// Undirected move probabilities theta psi(u_dest) / (2 dim).
MoveProbabilities diffusion_move_probs(std::size_t site, const LatticeState& state,
                                       const ParamSet& p);

enum class SamplingMethod {
  // Per site, the joint outcome of all resident agents' two draws is one multinomial over
  // destination sites (exactly the law of independent per-agent draws).
  site_multinomial,
  // One uniform per agent per process; reference implementation for small populations.
  per_agent,
};

struct StepOptions {
  SamplingMethod method = SamplingMethod::site_multinomial;
  // Reflect the RNG addressing and direction order about the x midpoint. A mirrored
  // initial condition run with mirror_x reproduces the mirror image of the original run.
  bool mirror_x = false;
};

// Moves every agent once: a chemotactic draw, then an undirected draw, both against the
// frozen step-k field; each displacement is aborted if it would leave the lattice.
// Counts are replaced; chemo and step_index are untouched.
void step_cells(LatticeState& state, const ParamSet& p, const RngStream& rng,
                const StepOptions& opts = {});

struct ChemoStepInfo {
  bool stability_warning = false;  // tau beta_c / h^2 > 1 / (2 dim)
};

inline bool chemo_step_unstable(const ParamSet& p) {
  return p.tau * p.beta_c / (p.h * p.h) > 1.0 / (2.0 * p.dim);
}

// c <- c + tau (beta_c L c + alpha u - kappa c), u = density of the current counts.
ChemoStepInfo step_chemo(LatticeState& state, const ParamSet& p);

// Cells first (on the step-k fields), then chemo from the post-move density; step_index += 1.
ChemoStepInfo advance(LatticeState& state, const ParamSet& p, const RngStream& rng,
                      const StepOptions& opts = {});

// Snapshot request in physical time; resolved to step floor(t / tau).
std::int64_t step_for_time(double t, double tau);

struct LatticeSnapshot {
  std::int64_t step = 0;
  double time = 0.0;
  std::vector<std::int64_t> counts;
  std::vector<double> chemo;
};

struct Trajectory {
  std::vector<LatticeSnapshot> snapshots;
  std::int64_t total_agents = 0;
  bool stability_warning = false;
};

using LatticeObserver = std::function<void(const LatticeState&)>;

// Snapshot steps must be sorted and <= n_steps; step 0 is allowed.
Trajectory run_realization(const ParamSet& p, const LatticeState& init, std::int64_t n_steps,
                           const RngStream& rng, std::span<const std::int64_t> snapshot_steps,
                           const LatticeObserver& observer = {}, const StepOptions& opts = {});

struct EnsembleOptions {
  unsigned threads = 1;
  bool keep_per_realization = true;
};

struct EnsembleResult {
  std::vector<std::int64_t> steps;
  std::vector<double> times;
  std::vector<std::vector<double>> mean_density;  // [snapshot][site]
  std::vector<std::vector<double>> mean_chemo;    // [snapshot][site]
  std::vector<Trajectory> per_realization;        // empty unless retained
  std::size_t n_realizations = 0;
  std::int64_t total_agents = 0;
  bool stability_warning = false;
};

// Realisation r runs on RngStream{base_seed, r}; results do not depend on thread count.
EnsembleResult run_ensemble(const ParamSet& p, const LatticeState& init, std::int64_t n_steps,
                            std::size_t n_realizations, std::uint64_t base_seed,
                            std::span<const std::int64_t> snapshot_steps,
                            const EnsembleOptions& opts = {});

}  // namespace chemotax
