#pragma once

// Experiment runner: builds matching discrete and continuum initial states, runs the lattice
// ensemble and the PDE on the same grid, compares them at shared snapshot times and writes
// CSV/JSON artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chemotax/equilibria.hpp"
#include "chemotax/lattice.hpp"
#include "chemotax/params.hpp"
#include "chemotax/pks.hpp"
#include "chemotax/stability.hpp"

#include <json.hpp>

namespace chemotax::harness {

inline constexpr int kSchemaVersion = 1;

enum class InitialKind {
  uniform,        // u0 = (a / 2) * b
  small_numbers,  // u0 = a
};

struct InitialConditionSpec {
  InitialKind kind = InitialKind::uniform;
  double a = 2e6;
  double b = 1.0;
};

struct RunSpec {
  std::string id;
  std::string group;  // runs sharing a group are compared across variants
  ParamSet params;    // h and c_bar are derived from n, length and the initial condition
  std::size_t n = 100;
  double length = 1.0;
  std::optional<double> c_bar;  // explicit normalisation; otherwise max(max c0, zeta u_max)
  InitialConditionSpec initial;
  bool discrete = true;
  bool pde = true;
  std::optional<std::size_t> realizations;        // overrides the experiment count
  std::optional<std::size_t> paper_realizations;  // used with paper scale
};

struct PaperScale {
  std::optional<double> t_end;
  std::optional<std::vector<double>> snapshot_times;
  std::optional<std::size_t> realizations;
};

struct Manifest {
  int schema_version = kSchemaVersion;
  std::string experiment_id;
  std::string description;
  double t_end = 0.0;
  std::vector<double> snapshot_times;
  std::size_t realizations = 5;
  std::uint64_t base_seed = 42;
  std::string output_dir = "results";
  std::vector<RunSpec> runs;
  bool umax_ladder = false;
  double gamma_scan_factor = 10.0;  // scan Gamma over [0, factor * c*]
  std::size_t gamma_scan_points = 10000;
  std::size_t dispersion_points = 401;
  PaperScale paper_scale;

  // Throws ValidationError naming the offending field.
  void validate() const;
  // Effective realization count of a run.
  std::size_t realizations_for(const RunSpec& run) const;
};

nlohmann::json to_json(const Manifest& m);
Manifest manifest_from_json(const nlohmann::json& j);
// Throws ValidationError when the file is missing ("manifest file not found: <path>") or malformed.
Manifest load_manifest(const std::filesystem::path& path);

std::vector<std::string> builtin_ids();
bool is_builtin(const std::string& id);
Manifest builtin_manifest(const std::string& id);

// Replaces t_end, snapshot times and realization counts by the paper-scale block.
Manifest apply_paper_scale(Manifest m);

struct InitialState {
  LatticeState lattice;
  FieldPair field;
  ParamSet params;  // with h, tau, c_bar filled in
  DerivedCoefficients coef;
  double continuum_mass = 0.0;
  double discrete_mass = 0.0;       // total agents (counts sum)
  double rounding_per_site = 0.0;   // |discrete - continuum| mass, in agents per site
  bool rounding_flag = false;       // rounding_per_site > 0.5
  double u_star = 0.0;              // mean initial density
};

// Throws ValidationError for an empty population or invalid parameters.
InitialState build_initial_condition(const RunSpec& run);

// rel_Linf = ||a - b||_inf / max(||a||_inf, ||b||_inf), rel_L2 likewise; 0 when both vanish.
double rel_linf(std::span<const double> a, std::span<const double> b);
double rel_l2(std::span<const double> a, std::span<const double> b);
// Max pairwise rel_L2 between fields; 0 for fewer than two.
double spread(const std::vector<std::vector<double>>& fields);
// Grid L2 norm sqrt(sum v^2 cell_volume).
double l2_norm(std::span<const double> v, double cell_volume);

struct FieldMetrics {
  double rel_linf = 0.0;
  double rel_l2 = 0.0;
};

struct SnapshotMetrics {
  double time = 0.0;
  std::int64_t step = 0;
  FieldMetrics density;
  FieldMetrics chemo;
  double density_spread = 0.0;
};

struct OverflowRecord {
  std::string process;
  std::size_t site = 0;
  std::int64_t step = 0;
  double total = 0.0;
};

struct RunResult {
  std::string id;
  std::string group;
  InitialState initial;
  std::optional<EnsembleResult> ensemble;
  std::optional<OverflowRecord> overflow;
  std::optional<PdeRun> pde;     // snapshots at the manifest times
  std::optional<FieldPair> pde_final;  // state at t_end
  std::vector<SnapshotMetrics> metrics;  // filled when both models completed
  StabilityReport stability;
  GammaRootReport gamma;
  SteadyStateContext steady;  // homogeneous lambda
};

struct LadderEntry {
  std::string group;
  double u_max = 0.0;
  double distance = 0.0;           // L2 distance generalised vs classical PDE at t_end
  double classical_inf = 0.0;      // ||u_classical||_inf at t_end
  double relative() const { return classical_inf > 0.0 ? distance / classical_inf : 0.0; }
};

struct LadderResult {
  std::vector<LadderEntry> entries;  // ascending u_max
  bool non_increasing = true;
};

struct ExperimentResult {
  Manifest manifest;
  std::vector<double> snapshot_times;
  std::vector<RunResult> runs;
  std::optional<LadderResult> ladder;
};

struct RunOptions {
  unsigned threads = 1;
  bool write_outputs = true;
  bool keep_per_realization = true;
};

// Thread count from an explicit value, else CHEMOTAX_THREADS, else 1.
unsigned resolve_threads(std::optional<unsigned> flag);

ExperimentResult run_experiment(const Manifest& m, const RunOptions& opts = {});

// PDE-only distances between generalised and classical runs of each group.
LadderResult umax_convergence_study(const Manifest& m);

nlohmann::json metrics_json(const ExperimentResult& r);
nlohmann::json stability_json(const Manifest& m);
nlohmann::json gamma_json(const Manifest& m);

// Writes manifest.json, metrics.json and per-run CSVs under <output_dir>/<experiment_id>.
void write_outputs(const ExperimentResult& r);

// CSV writers (17 significant digits).
void write_snapshot_csv(const std::filesystem::path& path, const Grid& grid,
                        std::span<const double> density, std::span<const double> chemo);
void write_dispersion_csv(const std::filesystem::path& path, const StabilityReport& rep);
void write_gamma_csv(const std::filesystem::path& path, const SteadyStateContext& ctx,
                     double c_max, std::size_t points);

std::string time_label(double t);

}  // namespace chemotax::harness
