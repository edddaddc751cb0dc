#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <set>

#include "support.hpp"
#include "teamform/anneal.hpp"
#include "teamform/feasibility.hpp"
#include "teamform/gen.hpp"

using namespace teamform;
using namespace teamform::anneal;
using teamform::testing::make_instance;
using teamform::testing::task;
using teamform::testing::worker;

namespace {

// Path 0-1-2-3 plus an isolated node 4.
SocialNetwork path_network() { return SocialNetwork(5, {{0, 1, 4}, {1, 2, 2}, {2, 3, 1}}); }

struct Prepared {
  Instance instance;
  Assignment initial;
};

std::optional<Prepared> prepare(const GenParams& p, std::uint64_t seed) {
  Prepared out{gen::generate_instance(p, LfrConfig{}, seed), {}};
  feasibility::SearchLimits limits;
  limits.time_limit_seconds = 30;
  limits.node_cap = 2'000'000;
  Rng rng(seed);
  auto found = feasibility::find_initial_solution(out.instance, limits, rng);
  if (!found.initial) return std::nullopt;
  out.initial = *found.initial;
  return out;
}

std::optional<Prepared> small_generated(std::uint64_t seed) {
  GenParams p{150, 2, 6, 8, 3, 6, 60, 300};
  return prepare(p, seed);
}

bool same_trace(const OptimizerTrace& a, const OptimizerTrace& b) {
  if (a.levels.size() != b.levels.size()) return false;
  for (std::size_t i = 0; i < a.levels.size(); ++i) {
    const auto& x = a.levels[i];
    const auto& y = b.levels[i];
    if (x.stage != y.stage || x.level != y.level || x.temperature != y.temperature ||
        x.best_value != y.best_value || x.accepts != y.accepts || x.rejects != y.rejects) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Smoothing, EdgeWeightPassesThrough) {
  const auto net = path_network();
  HopCache hops(net);
  EXPECT_EQ(smoothed_weight(0, 1, net, 1.7, 3, hops), 4.0);
  EXPECT_EQ(smoothed_weight(1, 0, net, 0.0, 0, hops), 4.0);
}

TEST(Smoothing, VirtualWeightFormula) {
  const auto net = path_network();
  HopCache hops(net);
  EXPECT_EQ(smoothed_weight(0, 2, net, 1.0, 0, hops), 0.0);
  EXPECT_DOUBLE_EQ(smoothed_weight(0, 2, net, 1.0, 5, hops), 0.5);
  EXPECT_DOUBLE_EQ(smoothed_weight(0, 3, net, 1.5, 5, hops), 0.5);
  EXPECT_DOUBLE_EQ(smoothed_weight(0, 3, net, 1.5, 2, hops), 1.5 / 3 * 2 / 5);
  EXPECT_EQ(smoothed_weight(0, 4, net, 2.0, 5, hops), 0.0);
}

TEST(Smoothing, DensityExamples) {
  const auto net = path_network();
  HopCache hops(net);
  EXPECT_DOUBLE_EQ(smoothed_density({0, 3}, net, 1.5, 5, hops), 0.25);
  for (const Team& t : {Team{0, 1, 2}, Team{0, 2, 3, 4}, Team{1}, Team{}}) {
    EXPECT_EQ(smoothed_density(t, net, 0.0, 5, hops), density(t, net));
    EXPECT_EQ(smoothed_density(t, net, 2.0, 0, hops), density(t, net));
  }
}

TEST(Smoothing, HopCacheMatchesBfs) {
  Rng rng(3);
  teamform::testing::SmallSpec spec;
  spec.n = 14;
  spec.edge_probability = 0.15;
  const auto inst = teamform::testing::random_small_instance(spec, rng);
  HopCache cache(inst.network);
  for (int u = 0; u < spec.n; ++u) {
    for (int v = 0; v < spec.n; ++v) {
      if (u == v) continue;
      const auto h = shortest_path_hops(inst.network, u, v);
      EXPECT_EQ(cache.hops(u, v), h ? *h : -1);
    }
  }
}

TEST(Acceptance, ClosedForms) {
  EXPECT_EQ(acceptance_probability(5, 5, 10), 1.0);
  EXPECT_NEAR(acceptance_probability(3, 5, 10), std::exp(-0.2), 1e-15);
  EXPECT_NEAR(acceptance_probability(3, 5, 10), 0.81873, 1e-5);
  EXPECT_EQ(acceptance_probability(7, 5, 0.01), 1.0);
  EXPECT_THROW(acceptance_probability(1, 2, 0), std::invalid_argument);
  EXPECT_THROW(acceptance_probability(1, 2, -1), std::invalid_argument);
}

TEST(Acceptance, EmpiricalRateForLnTwoDrop) {
  Rng rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double T = 2.5;
  int accepted = 0;
  for (int i = 0; i < 100000; ++i) accepted += u(rng) < acceptance_probability(0.0, T * std::log(2.0), T) ? 1 : 0;
  EXPECT_GE(accepted / 1e5, 0.49);
  EXPECT_LE(accepted / 1e5, 0.51);
}

TEST(Cooling, GeometricSchedule) {
  EXPECT_EQ(cool(10, 0.9), 9.0);
  for (double alpha : {0.8, 0.9, 0.95}) {
    double t = 10.0;
    for (int i = 0; i < 100; ++i) t = cool(t, alpha);
    EXPECT_NEAR(t, 10.0 * std::pow(alpha, 100), 1e-12 * 10.0 * std::pow(alpha, 100));
  }
  double t = 10.0;
  for (int i = 0; i < 100; ++i) t = cool(t, 0.9);
  EXPECT_NEAR(t, 2.656e-4, 1e-7);
}

TEST(Config, Validation) {
  SaConfig c;
  EXPECT_NO_THROW(validate(c));
  for (double a : {0.0, 1.0, -0.1}) {
    c = SaConfig{};
    c.alpha = a;
    EXPECT_THROW(validate(c), std::invalid_argument);
  }
  c = SaConfig{};
  c.beta = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = SaConfig{};
  c.runs = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = SaConfig{};
  c.initial_temperature = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

// --- neighborhoods -----------------------------------------------------------------

namespace {

Instance open_instance(int n, int K) {
  // no skill requirements and a loose budget, so only size and membership matter
  std::vector<Worker> workers;
  for (int i = 0; i < n; ++i) workers.push_back(worker({1, 0}, 1));
  return make_instance(workers, {task({0, 0}, 100)}, {{0, 1, 1}}, K);
}

}  // namespace

TEST(Neighbors, FullTeamNeverGrows) {
  const auto inst = open_instance(8, 3);
  Rng rng(5);
  const Team team{0, 1, 2};
  EXPECT_FALSE(sample_neighbor(team, NeighborhoodKind::N3, {3, 4, 5}, inst, 0, 50, rng));
}

TEST(Neighbors, EmptyPoolBlocksSwapAndAdd) {
  const auto inst = open_instance(4, 3);
  Rng rng(6);
  EXPECT_FALSE(sample_neighbor({0, 1}, NeighborhoodKind::N1, {}, inst, 0, 50, rng));
  EXPECT_FALSE(sample_neighbor({0, 1}, NeighborhoodKind::N3, {}, inst, 0, 50, rng));
  // N2 also adds one outside worker, so it needs a non-empty pool as well
  EXPECT_FALSE(sample_neighbor({0, 1}, NeighborhoodKind::N2, {}, inst, 0, 50, rng));
  const auto shrunk = sample_neighbor({0, 1}, NeighborhoodKind::N2, {3}, inst, 0, 50, rng);
  ASSERT_TRUE(shrunk);
  EXPECT_EQ(*shrunk, (Team{3}));
}

TEST(Neighbors, SingletonCannotShrink) {
  const auto inst = open_instance(4, 3);
  Rng rng(7);
  EXPECT_FALSE(sample_neighbor({2}, NeighborhoodKind::N2, {0, 1}, inst, 0, 50, rng));
}

TEST(Neighbors, MovesAreLegal) {
  Rng gen(8);
  int produced = 0;
  for (int trial = 0; trial < 300; ++trial) {
    teamform::testing::SmallSpec spec;
    spec.n = 12;
    spec.K = 4;
    spec.budget_slack = 12;
    const auto inst = teamform::testing::random_small_instance(spec, gen);
    Team team;
    std::vector<WorkerId> pool;
    for (int i = 0; i < spec.n; ++i) {
      if (team.size() < 3 && gen() % 3 == 0) {
        team.push_back(i);
      } else {
        pool.push_back(i);
      }
    }
    for (auto kind : {NeighborhoodKind::N1, NeighborhoodKind::N2, NeighborhoodKind::N3}) {
      const auto next = sample_neighbor(team, kind, pool, inst, 0, 50, gen);
      if (!next) continue;
      ++produced;
      const auto expected = static_cast<long>(team.size()) + (kind == NeighborhoodKind::N2 ? -1 : 0) +
                            (kind == NeighborhoodKind::N3 ? 1 : 0);
      EXPECT_EQ(static_cast<long>(next->size()), expected);
      std::set<WorkerId> members(next->begin(), next->end());
      EXPECT_EQ(members.size(), next->size());
      for (WorkerId w : *next) {
        const bool from_team = std::find(team.begin(), team.end(), w) != team.end();
        const bool from_pool = std::find(pool.begin(), pool.end(), w) != pool.end();
        EXPECT_TRUE(from_team || from_pool);
      }
      Assignment single{{*next}};
      EXPECT_TRUE(teamform::testing::independently_feasible(single, inst));
    }
  }
  EXPECT_GT(produced, 50);
}

// --- run_sa / hill climbing ----------------------------------------------------------

TEST(RunSa, ZeroBudgetReturnsInitial) {
  const auto prepared = small_generated(1);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::sweeps(0);
  const auto r = run_sa(prepared->instance, prepared->initial, c, 9);
  EXPECT_EQ(r.best.teams, prepared->initial.teams);
  EXPECT_EQ(r.best_value, total_density(prepared->initial, prepared->instance.network));
  const auto h = run_hill_climbing(prepared->instance, prepared->initial, c, 9);
  EXPECT_EQ(h.best.teams, prepared->initial.teams);
}

TEST(RunSa, RejectsInfeasibleInitial) {
  const auto prepared = small_generated(1);
  ASSERT_TRUE(prepared);
  Assignment bad = prepared->initial;
  bad.teams[1] = bad.teams[0];
  EXPECT_THROW(run_sa(prepared->instance, bad, SaConfig{}, 1), std::invalid_argument);
  EXPECT_THROW(run_hill_climbing(prepared->instance, bad, SaConfig{}, 1), std::invalid_argument);
}

TEST(RunSa, OutputFeasibleAndTraceMonotone) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto prepared = small_generated(seed);
    if (!prepared) continue;
    SaConfig c;
    c.budget = Budget::sweeps(1200);
    const auto r = run_sa(prepared->instance, prepared->initial, c, seed);
    EXPECT_TRUE(teamform::testing::independently_feasible(r.best, prepared->instance));
    EXPECT_NEAR(r.best_value, teamform::testing::reference_total(r.best, prepared->instance), 1e-9);
    EXPECT_GE(r.best_value, total_density(prepared->initial, prepared->instance.network));
    ASSERT_EQ(r.trace.levels.size(), 600u);
    for (std::size_t i = 1; i < r.trace.levels.size(); ++i) {
      EXPECT_GE(r.trace.levels[i].best_value, r.trace.levels[i - 1].best_value);
    }
    EXPECT_EQ(r.trace.levels.front().stage, 5);
    EXPECT_EQ(r.trace.levels.back().stage, 0);
    EXPECT_EQ(r.trace.levels.front().temperature, 10.0);
  }
}

TEST(RunSa, TemperatureResetsEachRun) {
  const auto prepared = small_generated(2);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.alpha = 0.9;
  c.budget = Budget::sweeps(600);
  const auto r = run_sa(prepared->instance, prepared->initial, c, 2);
  for (const auto& row : r.trace.levels) {
    EXPECT_NEAR(row.temperature, 10.0 * std::pow(0.9, row.level), 1e-12 * 10.0);
  }
}

TEST(RunSa, SweepsAreSpentExactly) {
  const auto prepared = small_generated(3);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::sweeps(1000);
  const auto r = run_sa(prepared->instance, prepared->initial, c, 3);
  std::uint64_t moves = 0;
  for (const auto& row : r.trace.levels) moves += row.accepts + row.rejects;
  // each sweep proposes at most once per team; teams without a legal neighbor sit out
  EXPECT_LE(moves, 1000u * prepared->instance.tasks.size());
  EXPECT_GT(moves, 500u);
}

TEST(RunSa, BetaZeroMatchesSmoothingOff) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto prepared = small_generated(seed);
    if (!prepared) continue;
    SaConfig zero;
    zero.beta = 0.0;
    zero.budget = Budget::sweeps(900);
    SaConfig off = zero;
    off.beta = 1.5;
    off.smoothing = false;
    const auto a = run_sa(prepared->instance, prepared->initial, zero, seed);
    const auto b = run_sa(prepared->instance, prepared->initial, off, seed);
    EXPECT_TRUE(same_trace(a.trace, b.trace)) << "seed " << seed;
    EXPECT_EQ(a.best.teams, b.best.teams);
    EXPECT_EQ(a.best_value, b.best_value);
  }
}

TEST(RunSa, DeterministicInIterationMode) {
  const auto prepared = small_generated(4);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::sweeps(800);
  const auto a = run_sa(prepared->instance, prepared->initial, c, 11);
  const auto b = run_sa(prepared->instance, prepared->initial, c, 11);
  EXPECT_TRUE(same_trace(a.trace, b.trace));
  EXPECT_EQ(a.best.teams, b.best.teams);
  const auto h1 = run_hill_climbing(prepared->instance, prepared->initial, c, 11);
  const auto h2 = run_hill_climbing(prepared->instance, prepared->initial, c, 11);
  EXPECT_TRUE(same_trace(h1.trace, h2.trace));
}

TEST(RunSa, WallClockModeRespectsTheLimit) {
  const auto prepared = small_generated(5);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::wall_clock(0.6);
  const auto start = std::chrono::steady_clock::now();
  const auto r = run_sa(prepared->instance, prepared->initial, c, 5);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(elapsed, 3.0);
  EXPECT_EQ(r.trace.run_seconds.size(), 6u);
  EXPECT_TRUE(teamform::testing::independently_feasible(r.best, prepared->instance));
}

TEST(HillClimbing, OnlyImprovingMovesAccepted) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto prepared = small_generated(seed);
    if (!prepared) continue;
    SaConfig c;
    c.budget = Budget::sweeps(600);
    const auto r = run_hill_climbing(prepared->instance, prepared->initial, c, seed);
    EXPECT_TRUE(teamform::testing::independently_feasible(r.best, prepared->instance));
    double previous = total_density(prepared->initial, prepared->instance.network);
    std::uint64_t accepts = 0;
    for (const auto& row : r.trace.levels) {
      EXPECT_GE(row.best_value, previous);
      previous = row.best_value;
      accepts += row.accepts;
    }
    // each accepted move raises the value, so accepts are bounded by improvements seen
    if (accepts == 0) {
      EXPECT_EQ(r.best_value, total_density(prepared->initial, prepared->instance.network));
    }
  }
}

TEST(RunSa, NeverBeatsTheOracleAndUsuallyMatchesIt) {
  Rng gen(2024);
  int matched = 0, total = 0;
  while (total < 20) {
    const int m = 1 + static_cast<int>(gen() % 2);
    const auto inst = teamform::testing::generated_small_instance(10, m, 3, 5, gen);
    const auto opt = feasibility::brute_force_optimum(inst);
    if (!opt.feasible) continue;
    Rng rng(1);
    const auto init = feasibility::find_initial_solution(inst, feasibility::SearchLimits{}, rng);
    ASSERT_TRUE(init.initial);
    SaConfig c;
    c.budget = Budget::sweeps(6000);
    const auto r = run_sa(inst, *init.initial, c, static_cast<std::uint64_t>(total));
    const auto h = run_hill_climbing(inst, *init.initial, c, static_cast<std::uint64_t>(total));
    EXPECT_LE(r.best_value, opt.value + 1e-9);
    EXPECT_LE(h.best_value, opt.value + 1e-9);
    matched += std::abs(r.best_value - opt.value) < 1e-9 ? 1 : 0;
    ++total;
  }
  EXPECT_GE(matched, 18);
}

// --- grid ---------------------------------------------------------------------------

TEST(Grid, SixteenCellsBestIsMaxAndParallelMatches) {
  const auto prepared = small_generated(6);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::sweeps(300);
  const auto seq = grid_search(prepared->instance, prepared->initial, c, 21, false);
  const auto par = grid_search(prepared->instance, prepared->initial, c, 21, true);
  ASSERT_EQ(seq.cells.size(), 16u);
  double best = -1;
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(seq.cells[i].alpha, kGridAlphas[i / 4]);
    EXPECT_EQ(seq.cells[i].beta, kGridBetas[i % 4]);
    best = std::max(best, seq.cells[i].result.best_value);
    seeds.insert(seq.cells[i].seed);
    EXPECT_EQ(seq.cells[i].seed, par.cells[i].seed);
    EXPECT_EQ(seq.cells[i].result.best_value, par.cells[i].result.best_value);
    EXPECT_EQ(seq.cells[i].result.best.teams, par.cells[i].result.best.teams);
  }
  EXPECT_EQ(seeds.size(), 16u);
  EXPECT_EQ(seq.best_cell().result.best_value, best);
  EXPECT_EQ(seq.best, par.best);
  for (std::size_t i = 0; i < seq.best; ++i) EXPECT_LT(seq.cells[i].result.best_value, best);
}

TEST(Grid, TiesGoToSmallestAlphaThenBeta) {
  // zero budget: every cell returns the initial value
  const auto prepared = small_generated(7);
  ASSERT_TRUE(prepared);
  SaConfig c;
  c.budget = Budget::sweeps(0);
  const auto g = grid_search(prepared->instance, prepared->initial, c, 3);
  EXPECT_EQ(g.best, 0u);
  EXPECT_EQ(g.best_cell().alpha, 0.8);
  EXPECT_EQ(g.best_cell().beta, 0.5);
}
