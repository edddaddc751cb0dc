#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "teamform/params.hpp"

namespace teamform {

using WorkerId = int;
using Team = std::vector<WorkerId>;

struct Worker {
  std::vector<int> skills;  // one level per skill type, 0 when absent
  int cost = 0;
};

struct Task {
  std::vector<int> required;
  int budget = 0;
};

struct Edge {
  WorkerId u = 0;
  WorkerId v = 0;
  int weight = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected weighted simple graph over workers. Pairs without an edge have
/// weight 0. Adjacency lists are kept sorted so that weight lookups are a
/// binary search.
class SocialNetwork {
 public:
  SocialNetwork() = default;
  /// Throws std::invalid_argument on self-loops, duplicate pairs,
  /// out-of-range endpoints or weights below 1.
  SocialNetwork(int n, std::vector<Edge> edges);

  int size() const { return static_cast<int>(adjacency_.size()); }
  std::size_t edge_count() const { return edges_.size(); }

  /// Edges with u < v, sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

  struct Neighbor {
    WorkerId id;
    int weight;
  };
  const std::vector<Neighbor>& neighbors(WorkerId u) const { return adjacency_[u]; }

  int weight(WorkerId u, WorkerId v) const;
  bool adjacent(WorkerId u, WorkerId v) const { return weight(u, v) > 0; }

  friend bool operator==(const SocialNetwork& a, const SocialNetwork& b) {
    return a.edges_ == b.edges_ && a.adjacency_.size() == b.adjacency_.size();
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

struct Instance {
  std::vector<Worker> workers;
  std::vector<Task> tasks;
  SocialNetwork network;
  int num_skills = 0;
  int team_limit = 0;  // K
  std::optional<Provenance> provenance;

  int num_workers() const { return static_cast<int>(workers.size()); }
  int num_tasks() const { return static_cast<int>(tasks.size()); }

  /// Throws std::invalid_argument when vectors disagree with num_skills,
  /// the network size differs from the worker count, or a value is negative.
  void validate() const;
};

/// One team per task, in task order.
struct Assignment {
  std::vector<Team> teams;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct ConstraintReport {
  struct SkillShortfall {
    int task;
    int skill;
    long have;
    long need;
  };
  struct BudgetOverrun {
    int task;
    long cost;
    long budget;
  };
  struct SizeOverrun {
    int task;
    int size;
    int limit;
  };

  std::vector<SkillShortfall> skill_shortfalls;
  std::vector<BudgetOverrun> budget_overruns;
  std::vector<SizeOverrun> size_overruns;
  std::vector<WorkerId> duplicate_workers;

  bool feasible() const {
    return skill_shortfalls.empty() && budget_overruns.empty() && size_overruns.empty() &&
           duplicate_workers.empty();
  }
};

/// Sum of edge weights over unordered pairs inside the team, divided by the
/// team size. An empty team has density 0.
double density(const Team& team, const SocialNetwork& network);

double total_density(const Assignment& assignment, const SocialNetwork& network);

/// Evaluates skill coverage, budget, team size and disjointness for every
/// team. Throws std::out_of_range for worker ids outside the instance and
/// std::invalid_argument when the team count differs from the task count.
ConstraintReport check_feasible(const Assignment& assignment, const Instance& instance);

/// Unweighted BFS hop count; nullopt when v is unreachable from u.
/// Throws std::invalid_argument when u == v.
std::optional<int> shortest_path_hops(const SocialNetwork& network, WorkerId u, WorkerId v);

/// Single-source weighted shortest path lengths (edge weight as length).
/// Unreachable entries hold +infinity.
std::vector<double> weighted_distances(const SocialNetwork& network, WorkerId source);

// Communication-cost diagnostics. Distances use edge weights as lengths and
// any disconnected pair yields +infinity.
double cc_diameter(const Team& team, const SocialNetwork& network);
double cc_sd(const Team& team, const SocialNetwork& network);
double cc_ld(const Team& team, WorkerId leader, const SocialNetwork& network);

/// The member minimizing CC-LD (smallest id on ties) and that cost.
/// Empty team yields nullopt.
std::optional<std::pair<WorkerId, double>> best_leader(const Team& team,
                                                       const SocialNetwork& network);

}  // namespace teamform
