#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "support.hpp"
#include "teamform/model.hpp"

using namespace teamform;
using teamform::testing::make_instance;
using teamform::testing::task;
using teamform::testing::worker;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SocialNetwork triangle_4_2() {
  // w(0,1) = 4, w(1,2) = 2, no (0,2)
  return SocialNetwork(3, {{0, 1, 4}, {1, 2, 2}});
}

}  // namespace

TEST(Density, ThreeMembersTwoEdges) { EXPECT_DOUBLE_EQ(density({0, 1, 2}, triangle_4_2()), 2.0); }

TEST(Density, SingletonAndEmptyAreZero) {
  const auto net = triangle_4_2();
  EXPECT_EQ(density({1}, net), 0.0);
  EXPECT_EQ(density({}, net), 0.0);
}

TEST(Density, NoEdgesInsideTeam) {
  SocialNetwork net(4, {{0, 1, 3}});
  EXPECT_EQ(density({1, 2, 3}, net), 0.0);
}

TEST(Density, PermutationInvariant) {
  Rng rng(7);
  teamform::testing::SmallSpec spec;
  spec.n = 10;
  const auto inst = teamform::testing::random_small_instance(spec, rng);
  Team team{0, 3, 5, 7, 9};
  const double base = density(team, inst.network);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(team.begin(), team.end(), rng);
    EXPECT_EQ(density(team, inst.network), base);
  }
}

TEST(Density, AddingEdgeRaisesByWeightOverSize) {
  SocialNetwork before(4, {{0, 1, 2}, {1, 2, 1}});
  SocialNetwork after(4, {{0, 1, 2}, {1, 2, 1}, {0, 2, 5}});
  const Team team{0, 1, 2};
  EXPECT_NEAR(density(team, after) - density(team, before), 5.0 / 3.0, 1e-12);
}

TEST(Density, MatchesReferenceOnRandomTeams) {
  Rng rng(11);
  teamform::testing::SmallSpec spec;
  spec.n = 14;
  spec.edge_probability = 0.4;
  const auto inst = teamform::testing::random_small_instance(spec, rng);
  for (int trial = 0; trial < 200; ++trial) {
    Team team;
    for (int i = 0; i < 14; ++i) {
      if (rng() % 2) team.push_back(i);
    }
    EXPECT_NEAR(density(team, inst.network), teamform::testing::reference_density(team, inst), 1e-9);
  }
}

TEST(TotalDensity, SumsTeams) {
  SocialNetwork net(6, {{0, 1, 4}, {1, 2, 2}, {3, 4, 4}, {4, 5, 2}});
  Assignment a{{{0, 1, 2}, {3, 4, 5}}};
  EXPECT_DOUBLE_EQ(total_density(a, net), 4.0);
  EXPECT_EQ(total_density(Assignment{{{}, {}}}, net), 0.0);
  EXPECT_EQ(total_density(Assignment{{{0, 1, 2}}}, net), density({0, 1, 2}, net));
}

TEST(Network, RejectsBadEdges) {
  EXPECT_THROW(SocialNetwork(3, {{1, 1, 2}}), std::invalid_argument);
  EXPECT_THROW(SocialNetwork(3, {{0, 1, 2}, {1, 0, 3}}), std::invalid_argument);
  EXPECT_THROW(SocialNetwork(3, {{0, 3, 1}}), std::invalid_argument);
  EXPECT_THROW(SocialNetwork(3, {{0, 1, 0}}), std::invalid_argument);
}

TEST(Network, WeightLookupIsSymmetric) {
  SocialNetwork net(4, {{2, 0, 3}, {3, 1, 1}});
  EXPECT_EQ(net.weight(0, 2), 3);
  EXPECT_EQ(net.weight(2, 0), 3);
  EXPECT_EQ(net.weight(1, 3), 1);
  EXPECT_EQ(net.weight(0, 1), 0);
  EXPECT_FALSE(net.adjacent(0, 3));
}

// --- check_feasible ---------------------------------------------------------------

namespace {

Instance two_task_instance() {
  // skills: 2 types
  return make_instance(
      {worker({2, 0}, 3), worker({0, 3}, 4), worker({1, 1}, 2), worker({2, 2}, 5)},
      {task({2, 3}, 7), task({1, 1}, 5)}, {{0, 1, 1}, {1, 2, 2}, {2, 3, 3}}, 2);
}

}  // namespace

TEST(CheckFeasible, ExactBoundaryIsFeasible) {
  const auto inst = two_task_instance();
  // team 0: workers 0 and 1 cover exactly (2, 3) at cost exactly 7
  const auto report = check_feasible(Assignment{{{0, 1}, {2}}}, inst);
  EXPECT_TRUE(report.feasible());
}

TEST(CheckFeasible, DuplicateWorkerListed) {
  const auto inst = two_task_instance();
  const auto report = check_feasible(Assignment{{{0, 1}, {1}}}, inst);
  EXPECT_FALSE(report.feasible());
  ASSERT_EQ(report.duplicate_workers.size(), 1u);
  EXPECT_EQ(report.duplicate_workers[0], 1);
}

TEST(CheckFeasible, SizeOverrunByOne) {
  auto inst = two_task_instance();
  inst.tasks[0].budget = 100;
  const auto report = check_feasible(Assignment{{{0, 1, 2}, {3}}}, inst);
  EXPECT_FALSE(report.feasible());
  ASSERT_EQ(report.size_overruns.size(), 1u);
  EXPECT_EQ(report.size_overruns[0].size - report.size_overruns[0].limit, 1);
}

TEST(CheckFeasible, ShortfallAndBudget) {
  const auto inst = two_task_instance();
  const auto report = check_feasible(Assignment{{{0, 3}, {2}}}, inst);
  EXPECT_FALSE(report.feasible());
  // team 0 has skill (4, 2) < (2, 3) on skill 1 and costs 8 > 7
  ASSERT_EQ(report.skill_shortfalls.size(), 1u);
  EXPECT_EQ(report.skill_shortfalls[0].skill, 1);
  EXPECT_EQ(report.skill_shortfalls[0].have, 2);
  ASSERT_EQ(report.budget_overruns.size(), 1u);
  EXPECT_EQ(report.budget_overruns[0].cost, 8);
}

TEST(CheckFeasible, InputErrors) {
  const auto inst = two_task_instance();
  EXPECT_THROW(check_feasible(Assignment{{{0, 9}, {}}}, inst), std::out_of_range);
  EXPECT_THROW(check_feasible(Assignment{{{0}}}, inst), std::invalid_argument);
}

TEST(CheckFeasible, RemovingWorkerNeverAddsBudgetOrSizeViolations) {
  Rng rng(3);
  teamform::testing::SmallSpec spec;
  spec.n = 12;
  spec.m = 2;
  spec.K = 4;
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = teamform::testing::random_small_instance(spec, rng);
    Assignment a{{{}, {}}};
    for (int i = 0; i < spec.n; ++i) {
      const auto r = rng() % 3;
      if (r < 2) a.teams[r].push_back(i);
    }
    const auto before = check_feasible(a, inst);
    for (std::size_t j = 0; j < 2; ++j) {
      if (a.teams[j].empty()) continue;
      Assignment smaller = a;
      smaller.teams[j].pop_back();
      const auto after = check_feasible(smaller, inst);
      EXPECT_LE(after.budget_overruns.size(), before.budget_overruns.size());
      EXPECT_LE(after.size_overruns.size(), before.size_overruns.size());
    }
  }
}

TEST(CheckFeasible, AgreesWithIndependentChecker) {
  Rng rng(5);
  teamform::testing::SmallSpec spec;
  spec.n = 10;
  spec.m = 2;
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = teamform::testing::random_small_instance(spec, rng);
    Assignment a{{{}, {}}};
    for (int i = 0; i < spec.n; ++i) {
      const auto r = rng() % 4;
      if (r < 2) a.teams[r].push_back(i);
    }
    EXPECT_EQ(check_feasible(a, inst).feasible(), teamform::testing::independently_feasible(a, inst));
  }
}

// --- paths and communication cost -------------------------------------------------

TEST(Hops, AdjacentPathAndDisconnected) {
  SocialNetwork net(5, {{0, 1, 5}, {1, 2, 1}});
  EXPECT_EQ(shortest_path_hops(net, 0, 1), 1);
  EXPECT_EQ(shortest_path_hops(net, 0, 2), 2);
  EXPECT_EQ(shortest_path_hops(net, 0, 4), std::nullopt);
  EXPECT_THROW(shortest_path_hops(net, 3, 3), std::invalid_argument);
}

TEST(CommunicationCost, SingleEdgePair) {
  SocialNetwork net(2, {{0, 1, 4}});
  EXPECT_EQ(cc_diameter({0, 1}, net), 4.0);
  EXPECT_EQ(cc_sd({0, 1}, net), 4.0);
  EXPECT_EQ(cc_ld({0, 1}, 0, net), 4.0);
}

TEST(CommunicationCost, SingletonIsZero) {
  SocialNetwork net(2, {{0, 1, 4}});
  EXPECT_EQ(cc_diameter({1}, net), 0.0);
  EXPECT_EQ(cc_sd({1}, net), 0.0);
  EXPECT_EQ(cc_ld({1}, 1, net), 0.0);
}

TEST(CommunicationCost, TriangleUsesTwoHopPath) {
  // weights 1, 1, 3: the heavy pair is closer through the third node
  SocialNetwork net(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 3}});
  EXPECT_EQ(cc_diameter({0, 1, 2}, net), 2.0);
  EXPECT_EQ(cc_sd({0, 1, 2}, net), 4.0);
  EXPECT_EQ(cc_ld({0, 1, 2}, 1, net), 2.0);
  const auto lead = best_leader({0, 1, 2}, net);
  ASSERT_TRUE(lead);
  EXPECT_EQ(lead->first, 1);
  EXPECT_EQ(lead->second, 2.0);
}

TEST(CommunicationCost, DisconnectedIsInfinite) {
  SocialNetwork net(3, {{0, 1, 1}});
  EXPECT_EQ(cc_diameter({0, 2}, net), kInf);
  EXPECT_EQ(cc_sd({0, 2}, net), kInf);
  EXPECT_EQ(cc_ld({0, 2}, 0, net), kInf);
  EXPECT_THROW(cc_ld({0, 2}, 1, net), std::invalid_argument);
  EXPECT_FALSE(best_leader({}, net));
}

TEST(Instance, ValidateRejectsShapeMismatch) {
  auto inst = two_task_instance();
  inst.workers[0].skills.push_back(1);
  EXPECT_THROW(inst.validate(), std::invalid_argument);
  inst = two_task_instance();
  inst.tasks[1].budget = -1;
  EXPECT_THROW(inst.validate(), std::invalid_argument);
}
