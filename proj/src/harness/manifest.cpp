#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "chemotax/harness.hpp"

namespace chemotax::harness {

using nlohmann::json;

namespace {

std::string kind_name(InitialKind k) {
  return k == InitialKind::uniform ? "uniform" : "small_numbers";
}

InitialKind kind_from(const std::string& s) {
  if (s == "uniform") return InitialKind::uniform;
  if (s == "small_numbers") return InitialKind::small_numbers;
  throw ValidationError("unknown initial condition kind '" + s + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest field '") + key + "': " + e.what());
  }
}

template <class T>
T require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("manifest is missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest field '") + key + "': " + e.what());
  }
}

json run_to_json(const RunSpec& r) {
  const ParamSet& p = r.params;
  json params = {{"eta", p.eta},     {"theta", p.theta}, {"u_max", p.u_max},
                 {"zeta", p.zeta},   {"beta_c", p.beta_c}, {"alpha", p.alpha},
                 {"kappa", p.kappa}, {"tau", p.tau},     {"dim", p.dim},
                 {"variant", std::string(to_string(p.variant))}};
  if (r.c_bar) params["c_bar"] = *r.c_bar;
  json j = {{"id", r.id},
            {"params", params},
            {"n", r.n},
            {"length", r.length},
            {"initial", {{"kind", kind_name(r.initial.kind)}, {"a", r.initial.a}, {"b", r.initial.b}}},
            {"discrete", r.discrete},
            {"pde", r.pde}};
  if (!r.group.empty()) j["group"] = r.group;
  if (r.realizations) j["realizations"] = *r.realizations;
  if (r.paper_realizations) j["paper_realizations"] = *r.paper_realizations;
  return j;
}

RunSpec run_from_json(const json& j) {
  RunSpec r;
  r.id = require<std::string>(j, "id");
  r.group = get_or<std::string>(j, "group", "");
  const json& p = j.at("params");
  r.params.eta = require<double>(p, "eta");
  r.params.theta = require<double>(p, "theta");
  r.params.u_max = require<double>(p, "u_max");
  r.params.zeta = get_or<double>(p, "zeta", 1.0);
  r.params.beta_c = require<double>(p, "beta_c");
  r.params.alpha = get_or<double>(p, "alpha", 1.0);
  r.params.kappa = get_or<double>(p, "kappa", 1.0);
  r.params.tau = require<double>(p, "tau");
  r.params.dim = require<int>(p, "dim");
  r.params.variant = variant_from_string(get_or<std::string>(p, "variant", "generalised"));
  if (p.contains("c_bar")) r.c_bar = p.at("c_bar").get<double>();
  r.n = require<std::size_t>(j, "n");
  r.length = get_or<double>(j, "length", 1.0);
  const json& ic = j.at("initial");
  r.initial.kind = kind_from(require<std::string>(ic, "kind"));
  r.initial.a = require<double>(ic, "a");
  r.initial.b = get_or<double>(ic, "b", 1.0);
  r.discrete = get_or<bool>(j, "discrete", true);
  r.pde = get_or<bool>(j, "pde", true);
  if (j.contains("realizations")) r.realizations = j.at("realizations").get<std::size_t>();
  if (j.contains("paper_realizations"))
    r.paper_realizations = j.at("paper_realizations").get<std::size_t>();
  return r;
}

}  // namespace

void Manifest::validate() const {
  if (schema_version != kSchemaVersion)
    throw ValidationError("unsupported schema_version " + std::to_string(schema_version));
  if (experiment_id.empty()) throw ValidationError("experiment_id must not be empty");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end must be non-negative");
  for (double t : snapshot_times) {
    if (!(t >= 0.0)) throw ValidationError("snapshot times must be non-negative");
    if (t > t_end * (1.0 + 1e-12)) throw ValidationError("snapshot time " + std::to_string(t) +
                                                          " exceeds t_end " + std::to_string(t_end));
  }
  if (runs.empty()) throw ValidationError("manifest lists no runs");
  std::set<std::string> ids;
  for (const auto& r : runs) {
    if (r.id.empty()) throw ValidationError("run id must not be empty");
    if (!ids.insert(r.id).second) throw ValidationError("duplicate run id '" + r.id + "'");
    if (r.n < 2) throw ValidationError("run '" + r.id + "': n must be at least 2");
    if (!(r.length > 0.0)) throw ValidationError("run '" + r.id + "': length must be positive");
    if (!(r.initial.a > 0.0) || !(r.initial.b > 0.0))
      throw ValidationError("run '" + r.id + "': empty population (initial a and b must be positive)");
    if (!r.discrete && !r.pde) throw ValidationError("run '" + r.id + "' enables no model");
    if (realizations_for(r) == 0 && r.discrete)
      throw ValidationError("run '" + r.id + "': realization count must be at least 1");
  }
  if (gamma_scan_points < 2) throw ValidationError("gamma_scan_points must be at least 2");
  if (!(gamma_scan_factor > 0.0)) throw ValidationError("gamma_scan_factor must be positive");
}

std::size_t Manifest::realizations_for(const RunSpec& run) const {
  return run.realizations.value_or(realizations);
}

json to_json(const Manifest& m) {
  json runs = json::array();
  for (const auto& r : m.runs) runs.push_back(run_to_json(r));
  json j = {{"schema_version", m.schema_version},
            {"experiment_id", m.experiment_id},
            {"description", m.description},
            {"t_end", m.t_end},
            {"snapshot_times", m.snapshot_times},
            {"realizations", m.realizations},
            {"base_seed", m.base_seed},
            {"output_dir", m.output_dir},
            {"umax_ladder", m.umax_ladder},
            {"gamma_scan", {{"factor", m.gamma_scan_factor}, {"points", m.gamma_scan_points}}},
            {"dispersion_points", m.dispersion_points},
            {"runs", runs}};
  json ps = json::object();
  if (m.paper_scale.t_end) ps["t_end"] = *m.paper_scale.t_end;
  if (m.paper_scale.snapshot_times) ps["snapshot_times"] = *m.paper_scale.snapshot_times;
  if (m.paper_scale.realizations) ps["realizations"] = *m.paper_scale.realizations;
  if (!ps.empty()) j["paper_scale"] = ps;
  return j;
}

Manifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");
  Manifest m;
  m.schema_version = require<int>(j, "schema_version");
  if (m.schema_version != kSchemaVersion)
    throw ValidationError("unsupported schema_version " + std::to_string(m.schema_version));
  m.experiment_id = require<std::string>(j, "experiment_id");
  m.description = get_or<std::string>(j, "description", "");
  m.t_end = require<double>(j, "t_end");
  m.snapshot_times = get_or<std::vector<double>>(j, "snapshot_times", {});
  m.realizations = get_or<std::size_t>(j, "realizations", 5);
  m.base_seed = get_or<std::uint64_t>(j, "base_seed", 42);
  m.output_dir = get_or<std::string>(j, "output_dir", "results");
  m.umax_ladder = get_or<bool>(j, "umax_ladder", false);
  if (j.contains("gamma_scan")) {
    m.gamma_scan_factor = get_or<double>(j["gamma_scan"], "factor", 10.0);
    m.gamma_scan_points = get_or<std::size_t>(j["gamma_scan"], "points", 10000);
  }
  m.dispersion_points = get_or<std::size_t>(j, "dispersion_points", 401);
  if (!j.contains("runs") || !j["runs"].is_array())
    throw ValidationError("manifest is missing the 'runs' array");
  try {
    for (const auto& r : j["runs"]) m.runs.push_back(run_from_json(r));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed run entry: ") + e.what());
  }
  if (j.contains("paper_scale")) {
    const json& ps = j["paper_scale"];
    if (ps.contains("t_end")) m.paper_scale.t_end = ps["t_end"].get<double>();
    if (ps.contains("snapshot_times"))
      m.paper_scale.snapshot_times = ps["snapshot_times"].get<std::vector<double>>();
    if (ps.contains("realizations")) m.paper_scale.realizations = ps["realizations"].get<std::size_t>();
  }
  m.validate();
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("manifest file not found: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("cannot parse manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

Manifest apply_paper_scale(Manifest m) {
  if (m.paper_scale.t_end) m.t_end = *m.paper_scale.t_end;
  if (m.paper_scale.snapshot_times) m.snapshot_times = *m.paper_scale.snapshot_times;
  if (m.paper_scale.realizations) m.realizations = *m.paper_scale.realizations;
  for (auto& r : m.runs) {
    if (r.paper_realizations) r.realizations = r.paper_realizations;
  }
  m.validate();
  return m;
}

// ---------------------------------------------------------------- built-in experiments

namespace {

ParamSet base_1d() {
  ParamSet p;
  p.eta = 2.4502;
  p.theta = 0.1225;
  p.u_max = 2e6;
  p.zeta = 1.0;
  p.beta_c = 2.5e-3;
  p.alpha = 1.0;
  p.kappa = 1.0;
  p.tau = 1e-2;
  p.dim = 1;
  return p;
}

ParamSet base_2d() {
  ParamSet p = base_1d();
  p.theta = 0.025;
  p.u_max = 1e7;
  p.tau = 1e-4;
  p.dim = 2;
  return p;
}

RunSpec make_run(std::string id, const ParamSet& p, std::size_t n, InitialConditionSpec ic) {
  RunSpec r;
  r.id = std::move(id);
  r.params = p;
  r.n = n;
  r.initial = ic;
  return r;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  std::string s(buf);
  std::erase(s, '+');
  return s;
}

Manifest fig2() {
  Manifest m;
  m.experiment_id = "fig2_base_1d";
  m.description = "1D base case: lattice ensemble vs generalised PDE at five times";
  m.t_end = 500.0;
  m.snapshot_times = {1, 25, 50, 300, 500};
  m.realizations = 5;
  m.runs.push_back(make_run("base", base_1d(), 100, {InitialKind::uniform, 2e6, 1.0}));
  return m;
}

Manifest fig3() {
  Manifest m;
  m.experiment_id = "fig3_chi_sweep";
  m.description = "1D chemotactic weight sweep";
  m.t_end = 500.0;
  m.snapshot_times = {1, 25, 50, 300, 500};
  m.realizations = 5;
  for (double eta : {0.9801, 4.9005, 294.03}) {
    ParamSet p = base_1d();
    p.eta = eta;
    m.runs.push_back(make_run("eta_" + short_number(eta), p, 100, {InitialKind::uniform, 2e6, 1.0}));
  }
  return m;
}

Manifest fig4() {
  Manifest m;
  m.experiment_id = "fig4_mass_sweep_1d";
  m.description = "1D population-size sweep";
  m.t_end = 500.0;
  m.snapshot_times = {1, 25, 50, 300, 500};
  m.realizations = 5;
  for (double b : {0.25, 1.0, 5.0}) {
    ParamSet p = base_1d();
    p.u_max = 4e5;
    m.runs.push_back(make_run("B_" + short_number(b), p, 100, {InitialKind::uniform, 4e5, b}));
  }
  return m;
}

Manifest fig5() {
  Manifest m;
  m.experiment_id = "fig5_mass_sweep_2d";
  m.description = "2D population-size sweep (desk scale shortens t_end)";
  m.t_end = 1.0;
  m.snapshot_times = {0, 0.5, 1.0};
  m.realizations = 1;
  m.paper_scale.t_end = 15.0;
  m.paper_scale.snapshot_times = std::vector<double>{0, 5, 15};
  const double bs[] = {0.1, 1.0, 2.0};
  const std::size_t paper_reals[] = {2, 2, 1};
  for (int i = 0; i < 3; ++i) {
    RunSpec r = make_run("B_" + short_number(bs[i]), base_2d(), 51, {InitialKind::uniform, 1e7, bs[i]});
    r.paper_realizations = paper_reals[i];
    m.runs.push_back(r);
  }
  return m;
}

Manifest fig6() {
  Manifest m;
  m.experiment_id = "fig6_umax_sweep_1d";
  m.description = "1D critical-density ladder, generalised vs classical";
  m.t_end = 500.0;
  m.snapshot_times = {1, 25, 50, 300, 500};
  m.realizations = 5;
  m.umax_ladder = true;
  for (double umax : {2e6, 2e7, 2e9}) {
    for (Variant v : {Variant::generalised, Variant::classical}) {
      ParamSet p = base_1d();
      p.u_max = umax;
      p.eta = 1.225e-6 * umax;
      p.variant = v;
      const std::string group = "umax_" + short_number(umax);
      RunSpec r = make_run(group + "_" + std::string(to_string(v)), p, 100,
                           {InitialKind::uniform, 2e6, 1.0});
      r.group = group;
      r.paper_realizations = v == Variant::generalised ? 30 : 10;
      m.runs.push_back(r);
    }
  }
  return m;
}

Manifest fig7() {
  Manifest m;
  m.experiment_id = "fig7_umax_sweep_2d";
  m.description = "2D critical-density ladder, generalised vs classical (desk scale shortens t_end)";
  m.t_end = 1.0;
  m.snapshot_times = {0, 0.5, 1.0};
  m.realizations = 1;
  m.umax_ladder = true;
  m.paper_scale.t_end = 5.0;
  m.paper_scale.snapshot_times = std::vector<double>{0, 2.5, 5};
  m.paper_scale.realizations = 2;
  for (double umax : {1e8, 1e10, 1e11}) {
    for (Variant v : {Variant::generalised, Variant::classical}) {
      ParamSet p = base_2d();
      p.theta = 0.125;
      p.u_max = umax;
      p.eta = 2.4502e-7 * umax;
      p.variant = v;
      const std::string group = "umax_" + short_number(umax);
      RunSpec r = make_run(group + "_" + std::string(to_string(v)), p, 51,
                           {InitialKind::uniform, 1e7, 1.0});
      r.group = group;
      m.runs.push_back(r);
    }
  }
  return m;
}

Manifest fig8() {
  Manifest m;
  m.experiment_id = "fig8_small_numbers";
  m.description = "1D small-population divergence between lattice and PDE";
  m.t_end = 500.0;
  m.snapshot_times = {1, 25, 50, 300, 500};
  m.realizations = 5;
  for (double a0 : {1e5, 1e4, 1e3, 1e2}) {
    ParamSet p = base_1d();
    p.u_max = 2.0 * a0;
    m.runs.push_back(make_run("A0_" + short_number(a0), p, 100, {InitialKind::small_numbers, a0, 1.0}));
  }
  return m;
}

}  // namespace

std::vector<std::string> builtin_ids() {
  return {"fig2_base_1d",       "fig3_chi_sweep",     "fig4_mass_sweep_1d", "fig5_mass_sweep_2d",
          "fig6_umax_sweep_1d", "fig7_umax_sweep_2d", "fig8_small_numbers"};
}

bool is_builtin(const std::string& id) {
  for (const auto& b : builtin_ids())
    if (b == id) return true;
  return false;
}

Manifest builtin_manifest(const std::string& id) {
  Manifest m;
  if (id == "fig2_base_1d") m = fig2();
  else if (id == "fig3_chi_sweep") m = fig3();
  else if (id == "fig4_mass_sweep_1d") m = fig4();
  else if (id == "fig5_mass_sweep_2d") m = fig5();
  else if (id == "fig6_umax_sweep_1d") m = fig6();
  else if (id == "fig7_umax_sweep_2d") m = fig7();
  else if (id == "fig8_small_numbers") m = fig8();
  else throw ValidationError("unknown experiment id '" + id + "'");
  m.validate();
  return m;
}

}  // namespace chemotax::harness
