#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "chemotax/lattice.hpp"
#include "fixtures.hpp"

using namespace chemotax;

namespace {

LatticeState make_state(std::size_t n, double h, int dim, std::int64_t per_site, double c0) {
  LatticeState s;
  s.grid = Grid{dim, n, h};
  s.counts.assign(s.grid.size(), per_site);
  s.chemo.assign(s.grid.size(), c0);
  return s;
}

// 1D configuration with a sinusoidal chemoattractant bump on 50 sites.
LatticeState wavy_state(std::int64_t per_site) {
  auto s = make_state(50, 0.02, 1, per_site, 0.0);
  for (std::size_t i = 0; i < 50; ++i)
    s.chemo[i] = 1e6 * (1.0 + 0.3 * std::sin(7.0 * s.grid.coordinate(i)));
  return s;
}

ParamSet wavy_params() {
  auto p = fixtures::base_1d();
  p.h = 0.02;
  p.c_bar = 2e6;
  p.u_max = 5e5;
  p.eta = 0.8;
  p.theta = 0.6;
  return p;
}

}  // namespace

TEST_CASE("density from counts") {
  CHECK(density_of(std::vector<std::int64_t>{0}, 1e-2, 1)[0] == 0.0);
  CHECK(density_of(std::vector<std::int64_t>{10000}, 1e-2, 1)[0] == doctest::Approx(1e6).epsilon(1e-15));
  CHECK(density_of(std::vector<std::int64_t>{1}, 1.0, 2)[0] == 1.0);
}

TEST_CASE("chemotactic move probabilities") {
  auto p = fixtures::base_1d();
  p.eta = 1.0;
  p.c_bar = 100.0;

  SUBCASE("flat field never biases") {
    auto s = make_state(5, 1.0, 1, 3, 42.0);
    for (std::size_t i = 0; i < 5; ++i) {
      const auto m = chemo_move_probs(i, s, p);
      CHECK(m.dir[0] == 0.0);
      CHECK(m.dir[1] == 0.0);
      CHECK(m.stay == 1.0);
    }
  }
  SUBCASE("unit gradient towards an empty site") {
    auto s = make_state(3, 1.0, 1, 0, 0.0);
    s.chemo = {100.0, 100.0, 200.0};
    const auto m = chemo_move_probs(1, s, p);
    CHECK(m.dir[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.dir[0] == 0.0);
    CHECK(m.stay == doctest::Approx(0.5));

    // Destination at the critical density scales the probability by psi(u_max).
    s.counts[2] = static_cast<std::int64_t>(p.u_max * 1.0);  // h = 1
    const auto crowded = chemo_move_probs(1, s, p);
    CHECK(crowded.dir[1] == doctest::Approx(0.18393972058572117).epsilon(1e-12));
  }
  SUBCASE("boundary directions are disabled") {
    auto s = make_state(3, 1.0, 1, 1, 0.0);
    s.chemo = {50.0, 0.0, 0.0};
    const auto m = chemo_move_probs(0, s, p);
    CHECK(m.dir[0] == 0.0);
    CHECK(m.dir[1] == 0.0);
  }
  SUBCASE("two-dimensional divisor") {
    auto planar = p;
    planar.dim = 2;
    auto s = make_state(3, 1.0, 2, 0, 0.0);
    s.chemo[1 * 3 + 2] = 100.0;  // +x neighbour of the centre
    const auto m = chemo_move_probs(4, s, planar);
    CHECK(m.dir[1] == doctest::Approx(0.25).epsilon(1e-15));
  }
  SUBCASE("infeasible weights are reported") {
    auto s = make_state(3, 1.0, 1, 0, 0.0);
    s.chemo = {300.0, 0.0, 300.0};
    p.eta = 1.0;
    CHECK_THROWS_AS(chemo_move_probs(1, s, p), ProbabilityOverflow);
    try {
      chemo_move_probs(1, s, p);
    } catch (const ProbabilityOverflow& e) {
      CHECK(e.site() == 1);
      CHECK(e.total() == doctest::Approx(3.0));
    }
  }
}

TEST_CASE("undirected move probabilities") {
  auto p = fixtures::base_1d();
  SUBCASE("empty neighbours") {
    p.theta = 0.5;
    auto s = make_state(3, 1e-2, 1, 0, 0.0);
    s.counts[1] = 1;
    const auto m = diffusion_move_probs(1, s, p);
    CHECK(m.dir[0] == 0.25);
    CHECK(m.dir[1] == 0.25);
    CHECK(m.stay == 0.5);
  }
  SUBCASE("crowded neighbour") {
    auto s = make_state(3, 1e-2, 1, 0, 0.0);
    s.counts[2] = 20000;  // density 2e6 = u_max
    const auto m = diffusion_move_probs(1, s, p);
    CHECK(m.dir[1] == doctest::Approx(0.06125 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(m.dir[1] == doctest::Approx(0.022533).epsilon(1e-4));
    CHECK(m.dir[0] == doctest::Approx(0.06125).epsilon(1e-15));
  }
  SUBCASE("classical ignores crowding") {
    p.variant = Variant::classical;
    auto s = make_state(3, 1e-2, 1, 50000, 0.0);
    const auto m = diffusion_move_probs(1, s, p);
    CHECK(m.dir[0] == doctest::Approx(0.06125).epsilon(1e-15));
    CHECK(m.dir[1] == doctest::Approx(0.06125).epsilon(1e-15));
  }
  SUBCASE("stay probability lies in [0, 1] on a random state") {
    auto s = wavy_state(0);
    for (std::size_t i = 0; i < s.counts.size(); ++i) s.counts[i] = static_cast<std::int64_t>(i * 400);
    auto q = wavy_params();
    for (std::size_t i = 0; i < s.counts.size(); ++i) {
      const auto a = chemo_move_probs(i, s, q);
      const auto b = diffusion_move_probs(i, s, q);
      CHECK(a.stay >= 0.0);
      CHECK(a.stay <= 1.0);
      CHECK(b.stay >= 0.0);
      CHECK(b.stay <= 1.0);
    }
  }
}

TEST_CASE("trivial cell steps") {
  auto p = fixtures::base_1d();
  const RngStream rng{7, 0};
  SUBCASE("empty lattice") {
    auto s = make_state(10, 1e-2, 1, 0, 5.0);
    step_cells(s, p, rng);
    CHECK(s.total_agents() == 0);
  }
  SUBCASE("no undirected moves on a flat field") {
    p.theta = 0.0;
    auto s = make_state(10, 1e-2, 1, 123, 5.0);
    const auto before = s.counts;
    step_cells(s, p, rng);
    CHECK(s.counts == before);
  }
}

TEST_CASE("agent count is conserved every step for both samplers") {
  const auto p = wavy_params();
  for (auto method : {SamplingMethod::site_multinomial, SamplingMethod::per_agent}) {
    auto s = wavy_state(300);
    const auto total = s.total_agents();
    const RngStream rng{99, 3};
    for (int k = 0; k < 200; ++k) {
      advance(s, p, rng, {method, false});
      REQUIRE(s.total_agents() == total);
      REQUIRE(std::all_of(s.counts.begin(), s.counts.end(), [](auto c) { return c >= 0; }));
      REQUIRE(std::all_of(s.chemo.begin(), s.chemo.end(), [](double c) { return c >= 0.0; }));
    }
  }
}

TEST_CASE("mean squared displacement of a free walker") {
  // One agent, theta = 1, flat chemo: each step moves +-h with probability 1/2 each, so the
  // per-step displacement variance is h^2 theta. 1e4 walks of 10 steps put 5% at about
  // 3.5 standard errors; walks start 20 sites from either wall.
  ParamSet p = fixtures::base_1d();
  p.variant = Variant::classical;
  p.theta = 1.0;
  p.eta = 0.0;
  const std::size_t n = 41;
  const double h = 1.0;
  p.h = h;
  const int steps_per_walk = 10;
  const int walks = 10000;
  double sum_sq = 0.0;
  for (int w = 0; w < walks; ++w) {
    auto s = make_state(n, h, 1, 0, 1.0);
    s.counts[n / 2] = 1;
    const RngStream rng{2024, static_cast<std::uint64_t>(w)};
    for (int k = 0; k < steps_per_walk; ++k) {
      step_cells(s, p, rng);
      ++s.step_index;
    }
    const auto pos = std::find(s.counts.begin(), s.counts.end(), 1) - s.counts.begin();
    const double disp = (static_cast<double>(pos) - static_cast<double>(n / 2)) * h;
    sum_sq += disp * disp;
  }
  const double msd_per_step = sum_sq / (walks * static_cast<double>(steps_per_walk));
  CHECK(msd_per_step == doctest::Approx(h * h * p.theta).epsilon(0.05));
}

TEST_CASE("unbiased walk shows no centre-of-mass drift") {
  ParamSet p = fixtures::base_1d();
  p.variant = Variant::classical;
  p.theta = 0.5;
  p.eta = 0.0;
  p.h = 1.0;
  const std::size_t n = 2001;
  const int agents = 200;
  const int steps = 10000;
  auto s = make_state(n, 1.0, 1, 0, 1.0);
  s.counts[n / 2] = agents;
  const RngStream rng{5, 0};
  for (int k = 0; k < steps; ++k) {
    step_cells(s, p, rng);
    ++s.step_index;
  }
  double com = 0.0;
  for (std::size_t i = 0; i < n; ++i) com += static_cast<double>(s.counts[i]) * (double(i) - double(n / 2));
  com /= agents;
  // Each agent's displacement has variance theta * steps; the mean of 200 has variance / 200.
  const double se = std::sqrt(p.theta * steps / agents);
  CHECK(std::abs(com) < 3.0 * se);
  CHECK(s.counts.front() == 0);
  CHECK(s.counts.back() == 0);
}

TEST_CASE("mirrored initial data and mirrored stream give the mirrored trajectory") {
  const auto p = wavy_params();
  auto a = wavy_state(0);
  for (std::size_t i = 0; i < a.counts.size(); ++i) a.counts[i] = static_cast<std::int64_t>(200 + 37 * (i % 7));
  auto b = a;
  std::reverse(b.counts.begin(), b.counts.end());
  std::reverse(b.chemo.begin(), b.chemo.end());
  const RngStream rng{17, 1};
  for (int k = 0; k < 100; ++k) {
    advance(a, p, rng, {SamplingMethod::site_multinomial, false});
    advance(b, p, rng, {SamplingMethod::site_multinomial, true});
  }
  auto rb = b.counts;
  std::reverse(rb.begin(), rb.end());
  CHECK(a.counts == rb);
  auto rc = b.chemo;
  std::reverse(rc.begin(), rc.end());
  CHECK(a.chemo == rc);
}

TEST_CASE("site multinomial and per-agent reference agree in distribution") {
  // Compare first and second moments of the one-step outcome at a chosen site.
  const auto p = wavy_params();
  const auto init = wavy_state(400);
  const std::size_t probe = 20;
  const int trials = 4000;
  auto moments = [&](SamplingMethod m, std::uint64_t seed) {
    double s1 = 0.0, s2 = 0.0, t1 = 0.0;
    for (int t = 0; t < trials; ++t) {
      auto s = init;
      step_cells(s, p, RngStream{seed, static_cast<std::uint64_t>(t)}, {m, false});
      const double x = static_cast<double>(s.counts[probe]);
      s1 += x;
      s2 += x * x;
      t1 += static_cast<double>(s.counts[probe + 1]);
    }
    const double mean = s1 / trials;
    return std::array<double, 3>{mean, s2 / trials - mean * mean, t1 / trials};
  };
  const auto a = moments(SamplingMethod::site_multinomial, 1);
  const auto b = moments(SamplingMethod::per_agent, 2);
  const double se_mean = std::sqrt((a[1] + b[1]) / trials);
  CHECK(std::abs(a[0] - b[0]) < 4.0 * se_mean);
  CHECK(std::abs(a[2] - b[2]) < 4.0 * std::sqrt(2.0 * a[1] / trials) + 1e-9);
  CHECK(a[1] == doctest::Approx(b[1]).epsilon(0.12));
}

TEST_CASE("discrete chemoattractant update") {
  auto p = fixtures::base_1d();
  SUBCASE("no reaction keeps a uniform field") {
    p.alpha = 0.0;
    p.kappa = 0.0;
    auto s = make_state(8, 1e-2, 1, 10, 3.5);
    step_chemo(s, p);
    for (double c : s.chemo) CHECK(c == 3.5);
  }
  SUBCASE("pure decay") {
    p.beta_c = 0.0;
    auto s = make_state(8, 1e-2, 1, 0, 2.0);
    step_chemo(s, p);
    for (double c : s.chemo) CHECK(c == doctest::Approx(2.0 * (1.0 - p.tau * p.kappa)).epsilon(1e-15));
  }
  SUBCASE("pure production") {
    p.beta_c = 0.0;
    p.kappa = 0.0;
    auto s = make_state(8, 1e-2, 1, 10000, 0.0);  // density 1e6
    step_chemo(s, p);
    for (double c : s.chemo) CHECK(c == doctest::Approx(1e4).epsilon(1e-14));
  }
  SUBCASE("stability warning") {
    p.beta_c = 1.0;
    auto s = make_state(8, 1e-2, 1, 0, 0.0);
    CHECK(step_chemo(s, p).stability_warning);
  }
}

TEST_CASE("snapshot step resolution") {
  CHECK(step_for_time(0.0, 1e-2) == 0);
  CHECK(step_for_time(1.0, 1e-2) == 100);
  CHECK(step_for_time(0.3, 0.1) == 3);
  CHECK(step_for_time(0.0149, 1e-2) == 1);
  CHECK_THROWS_AS(step_for_time(-1.0, 1e-2), ValidationError);
}

TEST_CASE("ensembles are deterministic and conserve the population") {
  const auto p = wavy_params();
  const auto init = wavy_state(200);
  const std::vector<std::int64_t> snaps{0, 10, 50};
  const auto a = run_ensemble(p, init, 50, 3, 77, snaps);
  const auto b = run_ensemble(p, init, 50, 3, 77, snaps, {2, true});
  CHECK(a.mean_density == b.mean_density);
  CHECK(a.mean_chemo == b.mean_chemo);
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const double total = std::accumulate(a.mean_density[k].begin(), a.mean_density[k].end(), 0.0) * p.h;
    CHECK(total == doctest::Approx(static_cast<double>(init.total_agents())).epsilon(1e-12));
    // Mean equals the average of the retained realisations.
    for (std::size_t i = 0; i < init.counts.size(); ++i) {
      double sum = 0.0;
      for (const auto& tr : a.per_realization) sum += static_cast<double>(tr.snapshots[k].counts[i]) / p.h;
      CHECK(a.mean_density[k][i] == doctest::Approx(sum / 3.0).epsilon(1e-14));
    }
  }
  const auto single = run_ensemble(p, init, 50, 1, 77, snaps);
  const auto tr = run_realization(p, init, 50, RngStream{77, 0}, snaps);
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    CHECK(single.mean_density[k] == density_of(tr.snapshots[k].counts, p.h, 1));
    CHECK(single.mean_chemo[k] == tr.snapshots[k].chemo);
  }
}
