#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

#include "chemotax/harness.hpp"

namespace chemotax::harness {

namespace {

constexpr double kGaussCentres[4][2] = {{0.26, 0.74}, {0.26, 0.26}, {0.74, 0.74}, {0.74, 0.26}};

double initial_density(const InitialConditionSpec& ic) {
  return ic.kind == InitialKind::uniform ? 0.5 * ic.a * ic.b : ic.a;
}

SolverOptions solver_for(const ParamSet& p) {
  SolverOptions o;
  o.scheme = p.dim == 1 ? Scheme::implicit_1d : Scheme::explicit_2d;
  return o;
}

std::vector<double> pde_times(const Manifest& m) {
  std::vector<double> t = m.snapshot_times;
  t.push_back(m.t_end);
  return t;
}

void run_pde_part(const Manifest& m, RunResult& rr) {
  const auto times = pde_times(m);
  PdeRun run = run_pde(rr.initial.params, rr.initial.coef, rr.initial.field, m.t_end, times,
                       solver_for(rr.initial.params));
  rr.pde_final = std::move(run.snapshots.back());
  run.snapshots.pop_back();
  rr.pde = std::move(run);
}

}  // namespace

InitialState build_initial_condition(const RunSpec& run) {
  const double u0 = initial_density(run.initial);
  if (!(u0 > 0.0)) throw ValidationError("run '" + run.id + "': empty population");

  InitialState s;
  s.params = run.params;
  const int dim = s.params.dim;
  if (dim != 1 && dim != 2) throw ValidationError("run '" + run.id + "': dim must be 1 or 2");
  const double h = run.length / static_cast<double>(run.n);
  s.params.h = h;
  const Grid grid{dim, run.n, h};
  grid.validate();

  const std::size_t sites = grid.size();
  std::vector<double> chemo(sites);
  if (dim == 1) {
    for (std::size_t i = 0; i < run.n; ++i) {
      const double x = grid.coordinate(i);
      chemo[i] = u0 * (1.0 + 0.1 * std::cos(10.0 * x) * std::sin(10.0 * x));
    }
  } else {
    for (std::size_t j = 0; j < run.n; ++j) {
      const double y = grid.coordinate(j);
      for (std::size_t i = 0; i < run.n; ++i) {
        const double x = grid.coordinate(i);
        double acc = 0.0;
        for (const auto& ctr : kGaussCentres) {
          const double dx = x - ctr[0], dy = y - ctr[1];
          acc += std::exp(-200.0 * dx * dx - 200.0 * dy * dy);
        }
        chemo[j * run.n + i] = 200.0 * acc;
      }
    }
  }
  const double c0_max = *std::max_element(chemo.begin(), chemo.end());
  s.params.c_bar = run.c_bar ? *run.c_bar : c_bar_from_initial(c0_max, s.params);
  s.params.validate();
  s.coef = derive_coefficients(s.params);

  const double cell = grid.cell_volume();
  const auto count = static_cast<std::int64_t>(std::llround(u0 * cell));
  if (count <= 0)
    throw ValidationError("run '" + run.id + "': initial density rounds to zero agents per site");

  s.lattice.grid = grid;
  s.lattice.counts.assign(sites, count);
  s.lattice.chemo = chemo;
  s.lattice.step_index = 0;

  s.field.grid = grid;
  s.field.u.assign(sites, u0);
  s.field.c = chemo;
  s.field.time = 0.0;
  s.field.dt = s.params.tau;

  s.continuum_mass = u0 * grid.domain_measure();
  s.discrete_mass = static_cast<double>(count) * static_cast<double>(sites);
  s.rounding_per_site = std::abs(s.discrete_mass - s.continuum_mass) / static_cast<double>(sites);
  s.rounding_flag = s.rounding_per_site > 0.5;
  s.u_star = u0;
  return s;
}

double rel_linf(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("rel_linf: size mismatch");
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a[i] - b[i]));
    na = std::max(na, std::abs(a[i]));
    nb = std::max(nb, std::abs(b[i]));
  }
  const double norm = std::max(na, nb);
  return norm > 0.0 ? d / norm : 0.0;
}

double rel_l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("rel_l2: size mismatch");
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    d += e * e;
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double norm = std::sqrt(std::max(na, nb));
  return norm > 0.0 ? std::sqrt(d) / norm : 0.0;
}

double spread(const std::vector<std::vector<double>>& fields) {
  double s = 0.0;
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j) s = std::max(s, rel_l2(fields[i], fields[j]));
  return s;
}

double l2_norm(std::span<const double> v, double cell_volume) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s * cell_volume);
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("CHEMOTAX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw ValidationError(std::string("CHEMOTAX_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

ExperimentResult run_experiment(const Manifest& m, const RunOptions& opts) {
  m.validate();
  ExperimentResult out;
  out.manifest = m;
  out.snapshot_times = m.snapshot_times;

  for (const auto& spec : m.runs) {
    RunResult rr;
    rr.id = spec.id;
    rr.group = spec.group;
    rr.initial = build_initial_condition(spec);
    const InitialState& init = rr.initial;
    const ParamSet& p = init.params;

    const double c_star = (p.alpha / p.kappa) * init.u_star;
    rr.steady = make_context(p, init.coef, spec.length, init.continuum_mass);
    rr.steady.log_lam = homogeneous_log_lambda(init.u_star, c_star, rr.steady);
    rr.stability = stability_report(init.u_star, spec.length, p, init.coef, m.dispersion_points);
    rr.gamma = gamma_roots(rr.steady, m.gamma_scan_factor * c_star, m.gamma_scan_points);

    if (spec.discrete) {
      std::vector<std::int64_t> steps;
      for (double t : m.snapshot_times) steps.push_back(step_for_time(t, p.tau));
      EnsembleOptions eo;
      eo.threads = opts.threads;
      eo.keep_per_realization = opts.keep_per_realization;
      try {
        rr.ensemble = run_ensemble(p, init.lattice, step_for_time(m.t_end, p.tau),
                                   m.realizations_for(spec), m.base_seed, steps, eo);
      } catch (const ProbabilityOverflow& e) {
        rr.overflow = OverflowRecord{e.process(), e.site(), e.step(), e.total()};
      }
    }
    if (spec.pde) run_pde_part(m, rr);

    if (rr.ensemble && rr.pde) {
      for (std::size_t k = 0; k < m.snapshot_times.size(); ++k) {
        SnapshotMetrics sm;
        sm.time = rr.ensemble->times[k];
        sm.step = rr.ensemble->steps[k];
        const auto& pde_snap = rr.pde->snapshots[k];
        sm.density = {rel_linf(rr.ensemble->mean_density[k], pde_snap.u),
                      rel_l2(rr.ensemble->mean_density[k], pde_snap.u)};
        sm.chemo = {rel_linf(rr.ensemble->mean_chemo[k], pde_snap.c),
                    rel_l2(rr.ensemble->mean_chemo[k], pde_snap.c)};
        if (!rr.ensemble->per_realization.empty()) {
          std::vector<std::vector<double>> dens;
          for (const auto& tr : rr.ensemble->per_realization)
            dens.push_back(density_of(tr.snapshots[k].counts, init.lattice.grid.h, p.dim));
          sm.density_spread = spread(dens);
        }
        rr.metrics.push_back(sm);
      }
    }
    out.runs.push_back(std::move(rr));
  }

  if (m.umax_ladder) {
    LadderResult lad;
    std::map<std::string, std::pair<const RunResult*, const RunResult*>> groups;
    for (const auto& rr : out.runs) {
      if (rr.group.empty() || !rr.pde_final) continue;
      auto& slot = groups[rr.group];
      if (rr.initial.params.variant == Variant::generalised) slot.first = &rr;
      else slot.second = &rr;
    }
    for (const auto& [g, pair] : groups) {
      if (!pair.first || !pair.second) continue;
      LadderEntry e;
      e.group = g;
      e.u_max = pair.first->initial.params.u_max;
      const auto& ug = pair.first->pde_final->u;
      const auto& uc = pair.second->pde_final->u;
      std::vector<double> diff(ug.size());
      for (std::size_t i = 0; i < ug.size(); ++i) diff[i] = ug[i] - uc[i];
      e.distance = l2_norm(diff, pair.first->pde_final->grid.cell_volume());
      e.classical_inf = *std::max_element(uc.begin(), uc.end());
      lad.entries.push_back(e);
    }
    std::sort(lad.entries.begin(), lad.entries.end(),
              [](const LadderEntry& a, const LadderEntry& b) { return a.u_max < b.u_max; });
    for (std::size_t i = 1; i < lad.entries.size(); ++i)
      if (lad.entries[i].distance > lad.entries[i - 1].distance) lad.non_increasing = false;
    out.ladder = lad;
  }

  if (opts.write_outputs) write_outputs(out);
  return out;
}

LadderResult umax_convergence_study(const Manifest& m) {
  Manifest pde_only = m;
  pde_only.umax_ladder = true;
  pde_only.runs.clear();
  for (auto r : m.runs) {
    if (r.group.empty()) continue;
    r.discrete = false;
    r.pde = true;
    pde_only.runs.push_back(r);
  }
  if (pde_only.runs.empty()) throw ValidationError("manifest has no grouped runs for a u_max ladder");
  RunOptions o;
  o.write_outputs = false;
  return *run_experiment(pde_only, o).ladder;
}

}  // namespace chemotax::harness
