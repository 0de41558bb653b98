#include <cstdio>
#include <fstream>

#include "chemotax/harness.hpp"

namespace chemotax::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

json params_json(const ParamSet& p, const DerivedCoefficients& c) {
  return {{"eta", p.eta},     {"theta", p.theta},   {"u_max", p.u_max}, {"zeta", p.zeta},
          {"c_bar", p.c_bar}, {"beta_c", p.beta_c}, {"alpha", p.alpha}, {"kappa", p.kappa},
          {"h", p.h},         {"tau", p.tau},       {"dim", p.dim},
          {"variant", std::string(to_string(p.variant))},
          {"chi", c.chi},     {"beta_u", c.beta_u}, {"nu", c.nu}};
}

json stability_entry(const StabilityReport& s) {
  return {{"u_star", s.u_star},
          {"chi", s.chi},
          {"chi_crit", s.chi_crit},
          {"unstable", !s.window.stable},
          {"k2_max", s.window.k2_max},
          {"unstable_modes", s.mode_count},
          {"fastest_k2", s.fastest_k2},
          {"fastest_rate", s.fastest_rate}};
}

json gamma_entry(const GammaRootReport& g, const SteadyStateContext& ctx) {
  json roots = json::array();
  for (const auto& r : g.roots)
    roots.push_back({{"c", r.c}, {"gamma", r.gamma_value}, {"slope", r.slope},
                     {"kind", to_string(r.kind)}});
  return {{"lambda", ctx.lam()},
          {"log_lambda", ctx.log_lam},
          {"nu", ctx.nu},
          {"scan_range", {g.scan_min, g.scan_max}},
          {"n_scan", g.n_scan},
          {"scale", g.scale},
          {"roots", roots},
          {"unresolved_beyond_scan", g.unresolved_beyond_scan},
          {"warnings", g.warnings}};
}

json newton_json(const NewtonStats& n) {
  return {{"steps", n.steps},
          {"total_iterations", n.total_iterations},
          {"max_iterations", n.max_iterations},
          {"damped_steps", n.damped_steps},
          {"last_residual", n.last_residual}};
}

fs::path run_dir(const ExperimentResult& r, const RunResult& run) {
  const fs::path base = fs::path(r.manifest.output_dir) / r.manifest.experiment_id;
  return r.runs.size() == 1 ? base : base / run.id;
}

}  // namespace

std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

json metrics_json(const ExperimentResult& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    const InitialState& init = run.initial;
    json j = {{"id", run.id},
              {"params", params_json(init.params, init.coef)},
              {"initial",
               {{"u_star", init.u_star},
                {"continuum_mass", init.continuum_mass},
                {"total_agents", init.discrete_mass},
                {"rounding_agents_per_site", init.rounding_per_site},
                {"rounding_exceeds_half_agent", init.rounding_flag}}},
              {"stability", stability_entry(run.stability)},
              {"gamma", gamma_entry(run.gamma, run.steady)}};
    if (!run.group.empty()) j["group"] = run.group;
    if (run.overflow) {
      j["probability_overflow"] = {{"process", run.overflow->process},
                                   {"site", run.overflow->site},
                                   {"step", run.overflow->step},
                                   {"total", run.overflow->total}};
    } else {
      j["probability_overflow"] = nullptr;
    }
    if (run.ensemble) {
      j["discrete"] = {{"realizations", run.ensemble->n_realizations},
                       {"total_agents", run.ensemble->total_agents},
                       {"stability_warning", run.ensemble->stability_warning}};
    }
    if (run.pde && run.pde_final) {
      double peak = 0.0;
      for (double v : run.pde_final->u) peak = std::max(peak, v);
      j["pde"] = {{"steps", run.pde->steps},
                  {"mass_initial", init.field.mass()},
                  {"mass_final", run.pde_final->mass()},
                  {"max_u_final", peak},
                  {"newton", newton_json(run.pde->newton)}};
    }
    json snaps = json::array();
    for (const auto& s : run.metrics) {
      snaps.push_back({{"t", s.time},
                       {"step", s.step},
                       {"density", {{"rel_Linf", s.density.rel_linf}, {"rel_L2", s.density.rel_l2}}},
                       {"chemo", {{"rel_Linf", s.chemo.rel_linf}, {"rel_L2", s.chemo.rel_l2}}},
                       {"density_spread", s.density_spread}});
    }
    j["snapshots"] = snaps;
    runs.push_back(j);
  }
  json out = {{"schema_version", kSchemaVersion},
              {"experiment_id", r.manifest.experiment_id},
              {"base_seed", r.manifest.base_seed},
              {"t_end", r.manifest.t_end},
              {"snapshot_times", r.snapshot_times},
              {"runs", runs}};
  if (r.ladder) {
    json entries = json::array();
    for (const auto& e : r.ladder->entries)
      entries.push_back({{"group", e.group},
                         {"u_max", e.u_max},
                         {"distance_L2", e.distance},
                         {"classical_Linf", e.classical_inf},
                         {"relative", e.relative()}});
    out["umax_ladder"] = {{"entries", entries}, {"non_increasing", r.ladder->non_increasing}};
  }
  return out;
}

json stability_json(const Manifest& m) {
  m.validate();
  json runs = json::array();
  for (const auto& spec : m.runs) {
    const auto init = build_initial_condition(spec);
    const auto rep = stability_report(init.u_star, spec.length, init.params, init.coef,
                                      m.dispersion_points);
    json e = stability_entry(rep);
    e["id"] = spec.id;
    e["params"] = params_json(init.params, init.coef);
    runs.push_back(e);
  }
  return {{"experiment_id", m.experiment_id}, {"runs", runs}};
}

json gamma_json(const Manifest& m) {
  m.validate();
  json runs = json::array();
  for (const auto& spec : m.runs) {
    const auto init = build_initial_condition(spec);
    const ParamSet& p = init.params;
    const double c_star = (p.alpha / p.kappa) * init.u_star;
    auto ctx = make_context(p, init.coef, spec.length, init.continuum_mass);
    ctx.log_lam = homogeneous_log_lambda(init.u_star, c_star, ctx);
    const auto rep = gamma_roots(ctx, m.gamma_scan_factor * c_star, m.gamma_scan_points);
    json e = gamma_entry(rep, ctx);
    e["id"] = spec.id;
    e["c_star"] = c_star;
    runs.push_back(e);
  }
  return {{"experiment_id", m.experiment_id}, {"runs", runs}};
}

void write_snapshot_csv(const fs::path& path, const Grid& grid, std::span<const double> density,
                        std::span<const double> chemo) {
  auto out = open_out(path);
  if (grid.dim == 1) {
    out << "site_index,x,density,chemo\n";
    for (std::size_t i = 0; i < grid.n; ++i)
      out << i << ',' << g17(grid.coordinate(i)) << ',' << g17(density[i]) << ','
          << g17(chemo[i]) << '\n';
  } else {
    out << "site_index,site_index_y,x,y,density,chemo\n";
    for (std::size_t j = 0; j < grid.n; ++j)
      for (std::size_t i = 0; i < grid.n; ++i) {
        const std::size_t k = j * grid.n + i;
        out << i << ',' << j << ',' << g17(grid.coordinate(i)) << ',' << g17(grid.coordinate(j))
            << ',' << g17(density[k]) << ',' << g17(chemo[k]) << '\n';
      }
  }
  finish(out, path);
}

void write_dispersion_csv(const fs::path& path, const StabilityReport& rep) {
  auto out = open_out(path);
  out << "k2,re_sigma1,re_sigma2,im_sigma1,im_sigma2\n";
  for (const auto& d : rep.curve)
    out << g17(d.k2) << ',' << g17(d.sigma[0].real()) << ',' << g17(d.sigma[1].real()) << ','
        << g17(d.sigma[0].imag()) << ',' << g17(d.sigma[1].imag()) << '\n';
  finish(out, path);
}

void write_gamma_csv(const fs::path& path, const SteadyStateContext& ctx, double c_max,
                     std::size_t points) {
  auto out = open_out(path);
  out << "c,gamma\n";
  points = std::max<std::size_t>(points, 2);
  for (std::size_t i = 0; i < points; ++i) {
    const double c = c_max * static_cast<double>(i) / static_cast<double>(points - 1);
    out << g17(c) << ',' << g17(gamma(c, ctx)) << '\n';
  }
  finish(out, path);
}

void write_outputs(const ExperimentResult& r) {
  const fs::path base = fs::path(r.manifest.output_dir) / r.manifest.experiment_id;
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw IoError("cannot create directory " + base.string() + ": " + ec.message());
  write_json(base / "manifest.json", to_json(r.manifest));
  write_json(base / "metrics.json", metrics_json(r));

  for (const auto& run : r.runs) {
    const fs::path dir = run_dir(r, run);
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const Grid& grid = run.initial.lattice.grid;
    const int dim = run.initial.params.dim;

    if (run.ensemble) {
      const auto& ens = *run.ensemble;
      for (std::size_t k = 0; k < ens.times.size(); ++k) {
        const std::string tl = time_label(r.snapshot_times[k]);
        write_snapshot_csv(dir / ("discrete_t" + tl + ".csv"), grid, ens.mean_density[k],
                           ens.mean_chemo[k]);
        for (std::size_t q = 0; q < ens.per_realization.size(); ++q) {
          const auto& snap = ens.per_realization[q].snapshots[k];
          write_snapshot_csv(dir / ("discrete_r" + std::to_string(q) + "_t" + tl + ".csv"), grid,
                             density_of(snap.counts, grid.h, dim), snap.chemo);
        }
      }
    }
    if (run.pde) {
      for (std::size_t k = 0; k < run.pde->snapshots.size(); ++k) {
        const auto& s = run.pde->snapshots[k];
        write_snapshot_csv(dir / ("pde_t" + time_label(r.snapshot_times[k]) + ".csv"), grid, s.u,
                           s.c);
      }
      json pr = {{"scheme", dim == 1 ? "implicit_1d" : "explicit_2d"},
                 {"params", params_json(run.initial.params, run.initial.coef)},
                 {"steps", run.pde->steps},
                 {"newton", newton_json(run.pde->newton)},
                 {"mass_initial", run.initial.field.mass()},
                 {"mass_final", run.pde_final ? run.pde_final->mass() : 0.0},
                 {"wall_seconds", run.pde->wall_seconds}};
      write_json(dir / "pde_run.json", pr);
    }
    write_dispersion_csv(dir / "dispersion.csv", run.stability);
    const double c_star = (run.initial.params.alpha / run.initial.params.kappa) * run.initial.u_star;
    write_gamma_csv(dir / "gamma.csv", run.steady, r.manifest.gamma_scan_factor * c_star, 2001);
  }
}

}  // namespace chemotax::harness
