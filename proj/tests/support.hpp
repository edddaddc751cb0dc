#pragma once

// Helpers shared by the test binaries: small hand-built instances, random
// small instances, and constraint/objective checks written independently of
// the library.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "teamform/gen.hpp"
#include "teamform/model.hpp"
#include "teamform/rng.hpp"

namespace teamform::testing {

inline Worker worker(std::vector<int> skills, int cost) { return Worker{std::move(skills), cost}; }
inline Task task(std::vector<int> required, int budget) { return Task{std::move(required), budget}; }

inline Instance make_instance(std::vector<Worker> workers, std::vector<Task> tasks, std::vector<Edge> edges,
                              int team_limit) {
  Instance inst;
  inst.num_skills = workers.empty() ? (tasks.empty() ? 0 : static_cast<int>(tasks[0].required.size()))
                                    : static_cast<int>(workers[0].skills.size());
  inst.team_limit = team_limit;
  const int n = static_cast<int>(workers.size());
  inst.workers = std::move(workers);
  inst.tasks = std::move(tasks);
  inst.network = SocialNetwork(n, std::move(edges));
  inst.validate();
  return inst;
}

struct SmallSpec {
  int n = 8;
  int m = 1;
  int K = 3;
  int l = 5;
  double edge_probability = 0.5;
  int max_level = 4;
  int max_required = 4;
  int budget_slack = 4;
};

/// Random instance sized for exhaustive enumeration. Requirements are kept
/// coverable often enough that both outcomes occur.
inline Instance random_small_instance(const SmallSpec& spec, Rng& rng) {
  std::uniform_int_distribution<int> level(0, spec.max_level);
  std::bernoulli_distribution has_skill(0.5);
  std::bernoulli_distribution has_edge(spec.edge_probability);
  std::uniform_int_distribution<int> weight(1, 5);
  std::vector<Worker> workers;
  for (int i = 0; i < spec.n; ++i) {
    std::vector<int> skills(static_cast<std::size_t>(spec.l), 0);
    int sum = 0;
    for (auto& s : skills) {
      if (has_skill(rng)) s = std::max(1, level(rng));
      sum += s;
    }
    std::poisson_distribution<int> cost(std::max(sum, 1));
    workers.push_back(worker(skills, cost(rng)));
  }
  std::vector<Task> tasks;
  std::uniform_int_distribution<int> req(0, spec.max_required);
  std::uniform_int_distribution<int> nreq(1, 2);
  std::uniform_int_distribution<int> slack(0, spec.budget_slack);
  for (int j = 0; j < spec.m; ++j) {
    std::vector<int> required(static_cast<std::size_t>(spec.l), 0);
    int count = nreq(rng);
    int sum = 0;
    for (int c = 0; c < count; ++c) {
      const int k = std::uniform_int_distribution<int>(0, spec.l - 1)(rng);
      required[static_cast<std::size_t>(k)] = std::max(1, req(rng));
    }
    for (int r : required) sum += r;
    tasks.push_back(task(required, sum + slack(rng)));
  }
  std::vector<Edge> edges;
  for (int u = 0; u < spec.n; ++u) {
    for (int v = u + 1; v < spec.n; ++v) {
      if (has_edge(rng)) edges.push_back(Edge{u, v, weight(rng)});
    }
  }
  return make_instance(std::move(workers), std::move(tasks), std::move(edges), spec.K);
}

/// Small instance drawn with the production samplers: skills and tasks at the
/// low end of the parameter ranges (2 required skills, mean level 5), an extra
/// budget uniform in [0, 500] and a dense random graph with sampled weights.
inline Instance generated_small_instance(int n, int m, int K, int num_skills, Rng& rng) {
  auto workers = gen::generate_workers(n, num_skills, rng);
  const int b_extra = std::uniform_int_distribution<int>(0, 500)(rng);
  auto tasks = gen::generate_tasks(m, 2, 5, b_extra, num_skills, rng);
  gen::Topology topology;
  topology.n = n;
  topology.community.assign(static_cast<std::size_t>(n), 0);
  std::bernoulli_distribution has_edge(0.5);
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (has_edge(rng)) topology.edges.emplace_back(u, v);
    }
  }
  Instance inst;
  inst.num_skills = num_skills;
  inst.team_limit = K;
  inst.workers = std::move(workers);
  inst.tasks = std::move(tasks);
  inst.network = gen::assign_edge_weights(topology, rng);
  inst.validate();
  return inst;
}

/// Constraint check written from the problem statement, sharing no code
/// with check_feasible.
inline bool independently_feasible(const Assignment& a, const Instance& inst) {
  if (static_cast<int>(a.teams.size()) != static_cast<int>(inst.tasks.size())) return false;
  std::set<int> seen;
  for (std::size_t j = 0; j < a.teams.size(); ++j) {
    const auto& team = a.teams[j];
    if (static_cast<int>(team.size()) > inst.team_limit) return false;
    long cost = 0;
    std::vector<long> have(static_cast<std::size_t>(inst.num_skills), 0);
    for (int w : team) {
      if (w < 0 || w >= static_cast<int>(inst.workers.size())) return false;
      if (!seen.insert(w).second) return false;
      cost += inst.workers[static_cast<std::size_t>(w)].cost;
      for (int k = 0; k < inst.num_skills; ++k) have[static_cast<std::size_t>(k)] += inst.workers[w].skills[k];
    }
    if (cost > inst.tasks[j].budget) return false;
    for (int k = 0; k < inst.num_skills; ++k) {
      if (have[static_cast<std::size_t>(k)] < inst.tasks[j].required[static_cast<std::size_t>(k)]) return false;
    }
  }
  return true;
}

/// Density from an explicit edge map, summing each unordered pair once.
inline double reference_density(const Team& team, const Instance& inst) {
  if (team.empty()) return 0.0;
  std::map<std::pair<int, int>, int> w;
  for (const auto& e : inst.network.edges()) w[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
  long sum = 0;
  for (std::size_t a = 0; a < team.size(); ++a) {
    for (std::size_t b = a + 1; b < team.size(); ++b) {
      auto it = w.find({std::min(team[a], team[b]), std::max(team[a], team[b])});
      if (it != w.end()) sum += it->second;
    }
  }
  return static_cast<double>(sum) / static_cast<double>(team.size());
}

inline double reference_total(const Assignment& a, const Instance& inst) {
  double t = 0.0;
  for (const auto& team : a.teams) t += reference_density(team, inst);
  return t;
}

}  // namespace teamform::testing
