#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "teamform/gen.hpp"
#include "teamform/io.hpp"

using namespace teamform;
using namespace teamform::gen;

namespace {

// Exact moments of Poisson(mean) restricted to [lo, hi], summed directly.
struct TruncatedMoments {
  double mass = 0.0;
  double mean = 0.0;
};

TruncatedMoments truncated_moments(double mean, int lo, int hi) {
  double mass = 0.0;
  double first = 0.0;
  double pmf = std::exp(-mean);  // P(0)
  for (int k = 0; k <= hi; ++k) {
    if (k > 0) pmf *= mean / k;
    if (k >= lo) {
      mass += pmf;
      first += k * pmf;
    }
  }
  return {mass, first / mass};
}

}  // namespace

TEST(TruncatedPoisson, DegenerateWindowReturnsBound) {
  Rng rng(1);
  for (double mean : {0.5, 3.0, 40.0}) EXPECT_EQ(truncated_poisson(mean, 3, 3, rng), 3);
}

TEST(TruncatedPoisson, DrawsStayInWindow) {
  Rng rng(2);
  for (int i = 0; i < 20000; ++i) {
    const int x = truncated_poisson(3.0, 1, 9, rng);
    ASSERT_GE(x, 1);
    ASSERT_LE(x, 9);
  }
  for (int i = 0; i < 20000; ++i) {
    const int x = truncated_poisson(5.0, 0, 20, rng);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, 20);
  }
}

TEST(TruncatedPoisson, MeanMatchesExactExpectation) {
  Rng rng(3);
  const auto exact = truncated_moments(3.0, 1, 5);
  EXPECT_GE(exact.mean, 2.75);
  EXPECT_LE(exact.mean, 2.95);
  double sum = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) sum += truncated_poisson(3.0, 1, 5, rng);
  // standard deviation of the truncated law is about 1.1
  EXPECT_NEAR(sum / draws, exact.mean, 5 * 1.1 / std::sqrt(draws));
}

TEST(TruncatedPoisson, WindowMassMatchesDirectSum) {
  EXPECT_NEAR(poisson_window_mass(3.0, 1, 5), truncated_moments(3.0, 1, 5).mass, 1e-12);
  EXPECT_NEAR(poisson_window_mass(10.0, 1, kUnbounded), 1.0 - std::exp(-10.0), 1e-12);
}

TEST(TruncatedPoisson, Errors) {
  Rng rng(4);
  EXPECT_THROW(truncated_poisson(3.0, 5, 4, rng), std::invalid_argument);
  EXPECT_THROW(truncated_poisson(0.0, 1, 5, rng), std::invalid_argument);
  EXPECT_THROW(truncated_poisson(1.0, 40, 50, rng), std::invalid_argument);
}

TEST(Poisson, ZeroMeanIsZero) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(poisson(0.0, rng), 0);
}

TEST(AdjustMean, ReachesLatticeResolutionWithinBounds) {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<int> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = truncated_poisson(4.0, 1, 20, rng);
    const double target = 2.0 + static_cast<double>(rng() % 9);
    adjust_mean(v, target, 1, 20, rng);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    EXPECT_LE(std::abs(mean - target), 0.5 / n + 1e-12);
    for (int x : v) {
      EXPECT_GE(x, 1);
      EXPECT_LE(x, 20);
    }
  }
}

TEST(Lfr, SimpleGraphAtSmallSize) {
  Rng rng(7);
  const auto topo = generate_lfr_graph(100, 5, LfrConfig{}, rng);
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : topo.edges) {
    EXPECT_LT(u, v);
    EXPECT_GE(u, 0);
    EXPECT_LT(v, 100);
    EXPECT_TRUE(seen.insert({u, v}).second);
  }
  EXPECT_EQ(topo.community.size(), 100u);
}

TEST(Lfr, MeanDegreeWithinTenPercent) {
  for (int k : {10, 20}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      Rng rng(seed);
      const auto topo = generate_lfr_graph(500, k, LfrConfig{}, rng);
      EXPECT_NEAR(topo.mean_degree(), k, 0.1 * k) << "k=" << k << " seed=" << seed;
    }
  }
  Rng rng(9);
  EXPECT_NEAR(generate_lfr_graph(300, 30, LfrConfig{}, rng).mean_degree(), 30, 3.0);
}

TEST(Lfr, MixingRoughlyRespected) {
  Rng rng(10);
  LfrConfig cfg;
  const auto topo = generate_lfr_graph(1000, 20, cfg, rng);
  std::size_t external = 0;
  for (auto [u, v] : topo.edges) external += topo.community[u] != topo.community[v] ? 1 : 0;
  const double frac = static_cast<double>(external) / static_cast<double>(topo.edges.size());
  EXPECT_NEAR(frac, cfg.mu, 0.1);
}

TEST(Lfr, Deterministic) {
  Rng a(42), b(42);
  EXPECT_EQ(generate_lfr_graph(200, 10, LfrConfig{}, a).edges, generate_lfr_graph(200, 10, LfrConfig{}, b).edges);
}

TEST(EdgeWeights, RangeCountAndMean) {
  Topology topo;
  topo.n = 460;
  for (int u = 0; u < topo.n; ++u) {
    for (int v = u + 1; v < topo.n; ++v) topo.edges.emplace_back(u, v);
  }
  ASSERT_GE(topo.edges.size(), 100000u);
  Rng rng(11);
  const auto net = assign_edge_weights(topo, rng);
  EXPECT_EQ(net.edge_count(), topo.edges.size());
  double sum = 0.0;
  for (const auto& e : net.edges()) {
    ASSERT_GE(e.weight, 1);
    ASSERT_LE(e.weight, 5);
    sum += e.weight;
  }
  EXPECT_NEAR(sum / static_cast<double>(net.edge_count()), truncated_moments(3.0, 1, 5).mean, 0.05);
}

TEST(Workers, SkillStructureAndCost) {
  Rng rng(12);
  const auto workers = generate_workers(100000, kSkillTypes, rng);
  double skill_count = 0.0;
  bool saw_zero = false;
  for (const auto& w : workers) {
    ASSERT_EQ(w.skills.size(), static_cast<std::size_t>(kSkillTypes));
    int owned = 0;
    int sum = 0;
    for (int s : w.skills) {
      ASSERT_GE(s, 0);
      ASSERT_LE(s, 9);
      owned += s > 0 ? 1 : 0;
      sum += s;
    }
    skill_count += owned;
    if (owned == 0) {
      saw_zero = true;
      EXPECT_EQ(w.cost, 0);
    }
    ASSERT_GE(w.cost, 0);
  }
  EXPECT_NEAR(skill_count / static_cast<double>(workers.size()), truncated_moments(5.0, 0, 20).mean, 0.05);
  EXPECT_TRUE(saw_zero);
}

TEST(Workers, CostTracksLevelSum) {
  Rng rng(13);
  const auto workers = generate_workers(20000, kSkillTypes, rng);
  double cost = 0.0, levels = 0.0;
  for (const auto& w : workers) {
    cost += w.cost;
    levels += std::accumulate(w.skills.begin(), w.skills.end(), 0);
  }
  EXPECT_NEAR(cost / levels, 1.0, 0.02);
}

TEST(Tasks, BudgetAndRequirements) {
  Rng rng(14);
  const auto tasks = generate_tasks(10, 4, 10, 0, kSkillTypes, rng);
  double count = 0.0;
  for (const auto& t : tasks) {
    const int sum = std::accumulate(t.required.begin(), t.required.end(), 0);
    EXPECT_EQ(t.budget, sum);
    int c = 0;
    for (int r : t.required) {
      ASSERT_GE(r, 0);
      c += r > 0 ? 1 : 0;
    }
    EXPECT_GE(c, 1);
    count += c;
  }
  EXPECT_LE(std::abs(count / 10 - 4.0), 0.5);
}

TEST(Tasks, SingleTaskCountPulledToTarget) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto tasks = generate_tasks(1, 4, 10, 25, kSkillTypes, rng);
    int c = 0;
    for (int r : tasks[0].required) c += r > 0 ? 1 : 0;
    EXPECT_EQ(c, 4);
    EXPECT_EQ(tasks[0].budget, std::accumulate(tasks[0].required.begin(), tasks[0].required.end(), 0) + 25);
  }
}

TEST(Tasks, LevelMeanNearTarget) {
  Rng rng(15);
  const auto tasks = generate_tasks(10, 6, 30, 0, kSkillTypes, rng);
  double sum = 0.0;
  int count = 0;
  for (const auto& t : tasks) {
    for (int r : t.required) {
      if (r > 0) {
        sum += r;
        ++count;
      }
    }
  }
  EXPECT_LE(std::abs(sum / count - 30.0), 0.5);
}

TEST(Instance, DeterministicAndRecordsProvenance) {
  GenParams p;
  p.n = 150;
  p.m = 3;
  const auto a = generate_instance(p, LfrConfig{}, 99);
  const auto b = generate_instance(p, LfrConfig{}, 99);
  EXPECT_EQ(io::write_instance(a), io::write_instance(b));
  ASSERT_TRUE(a.provenance);
  EXPECT_EQ(a.provenance->seed, 99u);
  EXPECT_EQ(a.provenance->params, p);
  EXPECT_EQ(a.num_skills, 20);
  EXPECT_EQ(a.team_limit, p.K);
  EXPECT_NE(io::write_instance(a), io::write_instance(generate_instance(p, LfrConfig{}, 100)));
}

TEST(Instance, MinimumParametersAreValid) {
  GenParams p{100, 1, 1, 5, 2, 5, 0, 300};
  const auto inst = generate_instance(p, LfrConfig{}, 1);
  EXPECT_NO_THROW(inst.validate());
  EXPECT_EQ(inst.num_workers(), 100);
  EXPECT_EQ(inst.num_tasks(), 1);
}

TEST(Instance, MaximumParametersAreValid) {
  GenParams p{1000, 10, 50, 30, 10, 45, 500, 600};
  const auto inst = generate_instance(p, LfrConfig{}, 2);
  EXPECT_NEAR(2.0 * inst.network.edge_count() / 1000.0, 30.0, 3.0);
  for (const auto& t : inst.tasks) {
    EXPECT_GE(t.budget, std::accumulate(t.required.begin(), t.required.end(), 0));
  }
}

TEST(Params, RangeErrorsNameTheField) {
  GenParams p;
  p.m = 11;
  try {
    validate(p);
    FAIL() << "expected a range error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("m = 11"), std::string::npos) << e.what();
  }
  p = GenParams{};
  p.time_limit = 400;
  EXPECT_THROW(validate(p), std::invalid_argument);
  LfrConfig cfg;
  cfg.mu = 1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = LfrConfig{};
  cfg.tau1 = 1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}
