// Command-line front end for the experiment harness.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chemotax/harness.hpp"

namespace hz = chemotax::harness;

namespace {

struct Flags {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> realizations;
  std::optional<unsigned> threads;
  std::optional<std::string> snapshot_times;
  bool paper_scale = false;
};

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw chemotax::ValidationError("invalid snapshot time '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw chemotax::ValidationError("--snapshot-times needs at least one value");
  return out;
}

hz::Manifest resolve(const std::string& target, const Flags& f) {
  hz::Manifest m;
  if (std::filesystem::exists(target)) {
    m = hz::load_manifest(target);
  } else if (hz::is_builtin(target)) {
    m = hz::builtin_manifest(target);
  } else {
    throw chemotax::ValidationError("manifest file not found: " + target +
                                    " (and not a built-in experiment id)");
  }
  if (f.paper_scale) m = hz::apply_paper_scale(m);
  if (f.out_dir) m.output_dir = *f.out_dir;
  if (f.seed) m.base_seed = *f.seed;
  if (f.realizations) {
    m.realizations = *f.realizations;
    for (auto& r : m.runs) r.realizations.reset();
  }
  if (f.snapshot_times) m.snapshot_times = parse_times(*f.snapshot_times);
  m.validate();
  return m;
}

void print_summary(const hz::ExperimentResult& r) {
  std::printf("experiment %s -> %s\n", r.manifest.experiment_id.c_str(),
              (std::filesystem::path(r.manifest.output_dir) / r.manifest.experiment_id).c_str());
  for (const auto& run : r.runs) {
    std::printf("  %-28s", run.id.c_str());
    if (run.overflow) {
      std::printf(" discrete: probability overflow (%s, site %zu, step %lld, sum %.4g)",
                  run.overflow->process.c_str(), run.overflow->site,
                  static_cast<long long>(run.overflow->step), run.overflow->total);
    }
    if (!run.metrics.empty()) {
      const auto& last = run.metrics.back();
      std::printf(" t=%g rel_Linf(u)=%.4g rel_L2(u)=%.4g spread=%.4g", last.time,
                  last.density.rel_linf, last.density.rel_l2, last.density_spread);
    } else if (run.pde_final) {
      double peak = 0.0;
      for (double v : run.pde_final->u) peak = std::max(peak, v);
      std::printf(" pde max u(t_end)=%.6g", peak);
    }
    std::printf("\n");
  }
  if (r.ladder) {
    std::printf("  u_max ladder (%s):\n", r.ladder->non_increasing ? "non-increasing" : "NOT monotone");
    for (const auto& e : r.ladder->entries)
      std::printf("    u_max=%-10g L2=%.6g relative=%.6g\n", e.u_max, e.distance, e.relative());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice chemotaxis vs volume-filling Keller-Segel experiments"};
  app.require_subcommand(1);
  Flags f;

  std::string out_dir, snapshot_times;
  std::uint64_t seed = 0;
  std::size_t realizations = 0;
  unsigned threads = 0;
  auto* o_out = app.add_option("--out-dir", out_dir, "Output root directory");
  auto* o_seed = app.add_option("--seed", seed, "Base seed for the lattice ensembles");
  auto* o_real = app.add_option("--realizations", realizations, "Realizations per run")
                     ->check(CLI::PositiveNumber);
  auto* o_thr = app.add_option("--threads", threads, "Worker threads (default: CHEMOTAX_THREADS or 1)")
                    ->check(CLI::PositiveNumber);
  auto* o_snap = app.add_option("--snapshot-times", snapshot_times, "Comma-separated snapshot times");
  app.add_flag("--paper-scale", f.paper_scale, "Use the full-length settings");

  std::string target;
  auto* run = app.add_subcommand("run", "Run an experiment (manifest file or built-in id)");
  run->add_option("manifest", target, "Manifest path or built-in experiment id")->required();
  auto* list = app.add_subcommand("list-experiments", "List built-in experiment ids");
  auto* stab = app.add_subcommand("stability-report", "Linear stability summary as JSON");
  stab->add_option("manifest", target)->required();
  auto* gam = app.add_subcommand("gamma-report", "Steady-state Gamma root census as JSON");
  gam->add_option("manifest", target)->required();
  auto* show = app.add_subcommand("print-manifest", "Print the effective manifest as JSON");
  show->add_option("manifest", target)->required();
  for (auto* sc : {run, list, stab, gam, show}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (*o_out) f.out_dir = out_dir;
  if (*o_seed) f.seed = seed;
  if (*o_real) f.realizations = realizations;
  if (*o_thr) f.threads = threads;
  if (*o_snap) f.snapshot_times = snapshot_times;

  try {
    if (*list) {
      for (const auto& id : hz::builtin_ids()) std::cout << id << '\n';
      return 0;
    }
    const hz::Manifest m = resolve(target, f);
    if (*show) {
      std::cout << hz::to_json(m).dump(2) << '\n';
    } else if (*stab) {
      std::cout << hz::stability_json(m).dump(2) << '\n';
    } else if (*gam) {
      std::cout << hz::gamma_json(m).dump(2) << '\n';
    } else {
      hz::RunOptions opts;
      opts.threads = hz::resolve_threads(f.threads);
      print_summary(hz::run_experiment(m, opts));
    }
    return 0;
  } catch (const chemotax::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const chemotax::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
