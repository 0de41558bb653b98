#include "chemotax/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "chemotax/kernels.hpp"

namespace chemotax {
namespace {

constexpr std::size_t kOff = std::numeric_limits<std::size_t>::max();
constexpr int kStay = -1;

inline double site_density(std::int64_t count, double h, int dim) {
  const double cells = static_cast<double>(count);
  return dim == 1 ? cells / h : cells / (h * h);
}

inline std::size_t neighbor(const Grid& g, std::size_t site, int d) {
  if (g.dim == 1) {
    if (d == 0) return site == 0 ? kOff : site - 1;
    return site + 1 == g.n ? kOff : site + 1;
  }
  const std::size_t ix = site % g.n;
  const std::size_t iy = site / g.n;
  switch (d) {
    case 0: return ix == 0 ? kOff : site - 1;
    case 1: return ix + 1 == g.n ? kOff : site + 1;
    case 2: return iy == 0 ? kOff : site - g.n;
    default: return iy + 1 == g.n ? kOff : site + g.n;
  }
}

inline std::size_t mirror_site(const Grid& g, std::size_t site) {
  if (g.dim == 1) return g.n - 1 - site;
  const std::size_t ix = site % g.n;
  return site - ix + (g.n - 1 - ix);
}

// Shared by the public probability queries and the stepping loop so both agree bitwise.
template <class PsiAt>
MoveProbabilities chemo_probs(const Grid& g, std::size_t site, std::span<const double> chemo,
                              PsiAt&& psi_at, const ParamSet& p, std::int64_t step) {
  MoveProbabilities m;
  const double denom = 2.0 * p.dim * p.c_bar;
  double total = 0.0;
  for (int d = 0; d < 2 * g.dim; ++d) {
    const std::size_t dest = neighbor(g, site, d);
    if (dest == kOff) continue;
    const double dc = chemo[dest] - chemo[site];
    if (dc <= 0.0) continue;
    m.dir[d] = ((p.eta * psi_at(dest)) * dc) / denom;
    total += m.dir[d];
  }
  if (total > 1.0) throw ProbabilityOverflow("chemotaxis", site, step, total);
  m.stay = 1.0 - total;
  return m;
}

template <class PsiAt>
MoveProbabilities diffusion_probs(const Grid& g, std::size_t site, PsiAt&& psi_at,
                                  const ParamSet& p, std::int64_t step) {
  MoveProbabilities m;
  const double weight = p.theta / (2.0 * p.dim);
  double total = 0.0;
  for (int d = 0; d < 2 * g.dim; ++d) {
    const std::size_t dest = neighbor(g, site, d);
    if (dest == kOff) continue;
    m.dir[d] = weight * psi_at(dest);
    total += m.dir[d];
  }
  if (total > 1.0) throw ProbabilityOverflow("diffusion", site, step, total);
  m.stay = 1.0 - total;
  return m;
}

inline double prob_of(const MoveProbabilities& m, int d) { return d == kStay ? m.stay : m.dir[d]; }

std::int64_t draw_binomial(SplitMix64& eng, std::int64_t n, double q) {
  if (n <= 0 || q <= 0.0) return 0;
  if (q >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, q);
  return dist(eng);
}

struct DestMass {
  std::size_t dest;
  double p;
};

// Direction order used for RNG consumption; mirrored runs swap -x and +x.
std::array<int, 5> move_order(int dim, bool mirror_x, int& count) {
  count = 2 * dim + 1;
  std::array<int, 5> order{};
  order[0] = mirror_x ? 1 : 0;
  order[1] = mirror_x ? 0 : 1;
  if (dim == 2) {
    order[2] = 2;
    order[3] = 3;
  }
  order[count - 1] = kStay;
  return order;
}

void sample_site_multinomial(const Grid& g, std::size_t site, std::int64_t n,
                             const MoveProbabilities& chemo, const MoveProbabilities& diff,
                             const std::array<int, 5>& order, int n_moves, SplitMix64& eng,
                             std::vector<std::int64_t>& next) {
  std::array<DestMass, 25> list{};
  int m = 0;
  for (int a = 0; a < n_moves; ++a) {
    const int d1 = order[a];
    const double p1 = prob_of(chemo, d1);
    if (p1 <= 0.0) continue;
    const std::size_t pos1 = d1 == kStay ? site : neighbor(g, site, d1);
    for (int b = 0; b < n_moves; ++b) {
      const int d2 = order[b];
      const double p2 = prob_of(diff, d2);
      if (p2 <= 0.0) continue;
      std::size_t pos2 = d2 == kStay ? pos1 : neighbor(g, pos1, d2);
      if (pos2 == kOff) pos2 = pos1;  // aborted: would leave the domain
      if (pos2 == site) continue;     // origin takes the remainder
      const double pj = p1 * p2;
      int k = 0;
      while (k < m && list[k].dest != pos2) ++k;
      if (k == m) list[m++] = {pos2, pj};
      else list[k].p += pj;
    }
  }
  std::int64_t remaining = n;
  double mass = 1.0;
  for (int k = 0; k < m && remaining > 0; ++k) {
    const double q = mass > 0.0 ? std::clamp(list[k].p / mass, 0.0, 1.0) : 1.0;
    const std::int64_t moved = draw_binomial(eng, remaining, q);
    next[list[k].dest] += moved;
    remaining -= moved;
    mass -= list[k].p;
  }
  next[site] += remaining;
}

int pick(const MoveProbabilities& m, const std::array<int, 5>& order, int n_moves, double r) {
  double acc = 0.0;
  for (int a = 0; a + 1 < n_moves; ++a) {
    acc += m.dir[order[a]];
    if (r < acc) return order[a];
  }
  return kStay;
}

void sample_site_per_agent(const Grid& g, std::size_t site, std::int64_t n,
                           const MoveProbabilities& chemo, const MoveProbabilities& diff,
                           const std::array<int, 5>& order, int n_moves, SplitMix64& eng,
                           std::vector<std::int64_t>& next) {
  for (std::int64_t a = 0; a < n; ++a) {
    const int d1 = pick(chemo, order, n_moves, eng.uniform());
    const int d2 = pick(diff, order, n_moves, eng.uniform());
    std::size_t pos = site;
    if (d1 != kStay) {
      const std::size_t to = neighbor(g, pos, d1);
      if (to != kOff) pos = to;
    }
    if (d2 != kStay) {
      const std::size_t to = neighbor(g, pos, d2);
      if (to != kOff) pos = to;
    }
    ++next[pos];
  }
}

}  // namespace

std::int64_t LatticeState::total_agents() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

void LatticeState::validate() const {
  grid.validate();
  if (counts.size() != grid.size() || chemo.size() != grid.size())
    throw ValidationError("lattice state arrays do not match the grid size");
  for (auto n : counts)
    if (n < 0) throw ValidationError("lattice state has a negative agent count");
  for (double c : chemo)
    if (!(c >= 0.0)) throw ValidationError("lattice state has a negative concentration");
}

std::vector<double> density_of(std::span<const std::int64_t> counts, double h, int dim) {
  std::vector<double> u(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) u[i] = site_density(counts[i], h, dim);
  return u;
}

MoveProbabilities chemo_move_probs(std::size_t site, const LatticeState& state, const ParamSet& p) {
  if (site >= state.grid.size()) throw ValidationError("site index out of range");
  auto psi_at = [&](std::size_t s) { return psi(site_density(state.counts[s], state.grid.h, p.dim), p); };
  return chemo_probs(state.grid, site, state.chemo, psi_at, p, state.step_index);
}

MoveProbabilities diffusion_move_probs(std::size_t site, const LatticeState& state,
                                       const ParamSet& p) {
  if (site >= state.grid.size()) throw ValidationError("site index out of range");
  auto psi_at = [&](std::size_t s) { return psi(site_density(state.counts[s], state.grid.h, p.dim), p); };
  return diffusion_probs(state.grid, site, psi_at, p, state.step_index);
}

void step_cells(LatticeState& state, const ParamSet& p, const RngStream& rng,
                const StepOptions& opts) {
  const Grid& g = state.grid;
  const std::size_t n_sites = g.size();
  std::vector<double> psi_cache(n_sites);
  for (std::size_t s = 0; s < n_sites; ++s)
    psi_cache[s] = psi(site_density(state.counts[s], g.h, p.dim), p);
  auto psi_at = [&](std::size_t s) { return psi_cache[s]; };

  int n_moves = 0;
  const auto order = move_order(g.dim, opts.mirror_x, n_moves);
  const std::int64_t before = state.total_agents();
  std::vector<std::int64_t> next(n_sites, 0);
  const auto step = static_cast<std::uint64_t>(state.step_index);

  for (std::size_t s = 0; s < n_sites; ++s) {
    const std::int64_t n = state.counts[s];
    if (n == 0) continue;
    const auto chemo = chemo_probs(g, s, state.chemo, psi_at, p, state.step_index);
    const auto diff = diffusion_probs(g, s, psi_at, p, state.step_index);
    SplitMix64 eng = rng.engine_for(step, opts.mirror_x ? mirror_site(g, s) : s);
    if (opts.method == SamplingMethod::per_agent)
      sample_site_per_agent(g, s, n, chemo, diff, order, n_moves, eng, next);
    else
      sample_site_multinomial(g, s, n, chemo, diff, order, n_moves, eng, next);
  }
  state.counts = std::move(next);
  if (state.total_agents() != before)
    throw NumericalError("agent count not conserved by step_cells");
}

ChemoStepInfo step_chemo(LatticeState& state, const ParamSet& p) {
  const Grid& g = state.grid;
  const auto u = density_of(state.counts, g.h, p.dim);
  std::vector<double> out(state.chemo.size());
  const kernels::ReactionDiffusionCoeffs k{p.tau, p.beta_c, g.h * g.h, p.alpha, p.kappa};
  const auto& kt = kernels::active();
  if (g.dim == 1) kt.reaction_diffusion_1d(state.chemo, u, out, k);
  else kt.reaction_diffusion_2d(state.chemo, u, out, g.n, k);
  for (std::size_t s = 0; s < out.size(); ++s)
    if (!(out[s] >= 0.0))
      throw NumericalError("chemoattractant became negative at site " + std::to_string(s) +
                           ", step " + std::to_string(state.step_index));
  state.chemo = std::move(out);
  return {chemo_step_unstable(p)};
}

ChemoStepInfo advance(LatticeState& state, const ParamSet& p, const RngStream& rng,
                      const StepOptions& opts) {
  step_cells(state, p, rng, opts);
  const auto info = step_chemo(state, p);
  ++state.step_index;
  return info;
}

std::int64_t step_for_time(double t, double tau) {
  if (!(t >= 0.0)) throw ValidationError("snapshot time must be non-negative");
  // The small offset keeps t = k tau from rounding down to k - 1.
  return static_cast<std::int64_t>(std::floor(t / tau + 1e-9));
}

Trajectory run_realization(const ParamSet& p, const LatticeState& init, std::int64_t n_steps,
                           const RngStream& rng, std::span<const std::int64_t> snapshot_steps,
                           const LatticeObserver& observer, const StepOptions& opts) {
  p.validate();
  init.validate();
  if (init.grid.dim != p.dim) throw ValidationError("lattice dimension differs from parameters");
  if (!std::is_sorted(snapshot_steps.begin(), snapshot_steps.end()))
    throw ValidationError("snapshot steps must be sorted");
  if (!snapshot_steps.empty() && (snapshot_steps.front() < 0 || snapshot_steps.back() > n_steps))
    throw ValidationError("snapshot step outside [0, n_steps]");

  LatticeState state = init;
  Trajectory traj;
  traj.total_agents = state.total_agents();
  std::size_t next_snap = 0;
  auto take_snapshots = [&] {
    while (next_snap < snapshot_steps.size() && snapshot_steps[next_snap] == state.step_index) {
      traj.snapshots.push_back({state.step_index, static_cast<double>(state.step_index) * p.tau,
                                state.counts, state.chemo});
      ++next_snap;
    }
  };
  take_snapshots();
  while (state.step_index < init.step_index + n_steps) {
    if (advance(state, p, rng, opts).stability_warning) traj.stability_warning = true;
    if (observer) observer(state);
    take_snapshots();
  }
  return traj;
}

EnsembleResult run_ensemble(const ParamSet& p, const LatticeState& init, std::int64_t n_steps,
                            std::size_t n_realizations, std::uint64_t base_seed,
                            std::span<const std::int64_t> snapshot_steps,
                            const EnsembleOptions& opts) {
  if (n_realizations == 0) throw ValidationError("ensemble needs at least one realisation");
  std::vector<Trajectory> runs(n_realizations);
  std::vector<std::exception_ptr> errors(n_realizations);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < n_realizations; r = next++) {
      try {
        runs[r] = run_realization(p, init, n_steps, RngStream{base_seed, r}, snapshot_steps);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(n_realizations)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  // Deterministic error reporting: the lowest failing realisation wins.
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnsembleResult res;
  res.n_realizations = n_realizations;
  res.total_agents = runs.front().total_agents;
  const std::size_t n_snap = runs.front().snapshots.size();
  const std::size_t n_sites = init.grid.size();
  const auto count = static_cast<double>(n_realizations);
  for (std::size_t k = 0; k < n_snap; ++k) {
    res.steps.push_back(runs.front().snapshots[k].step);
    res.times.push_back(runs.front().snapshots[k].time);
    std::vector<double> du(n_sites, 0.0), dc(n_sites, 0.0);
    for (const auto& run : runs) {
      const auto& snap = run.snapshots[k];
      for (std::size_t s = 0; s < n_sites; ++s) {
        du[s] += site_density(snap.counts[s], init.grid.h, p.dim);
        dc[s] += snap.chemo[s];
      }
    }
    if (n_realizations > 1) {
      for (auto& v : du) v /= count;
      for (auto& v : dc) v /= count;
    }
    res.mean_density.push_back(std::move(du));
    res.mean_chemo.push_back(std::move(dc));
  }
  for (const auto& run : runs) res.stability_warning = res.stability_warning || run.stability_warning;
  if (opts.keep_per_realization) res.per_realization = std::move(runs);
  return res;
}

}  // namespace chemotax
