#include "teamform/model.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

namespace teamform {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_worker(const SocialNetwork& network, WorkerId u) {
  if (u < 0 || u >= network.size()) {
    throw std::out_of_range("worker id " + std::to_string(u) + " outside [0, " +
                            std::to_string(network.size()) + ")");
  }
}

}  // namespace

SocialNetwork::SocialNetwork(int n, std::vector<Edge> edges) : adjacency_(static_cast<std::size_t>(n)) {
  if (n < 0) throw std::invalid_argument("negative network size");
  for (auto& e : edges) {
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      throw std::invalid_argument("edge endpoint outside [0, n)");
    }
    if (e.u == e.v) throw std::invalid_argument("self-loop on worker " + std::to_string(e.u));
    if (e.weight < 1) throw std::invalid_argument("edge weight must be at least 1");
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(edges[i].u) + ", " +
                                  std::to_string(edges[i].v) + ")");
    }
  }
  for (const auto& e : edges) {
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  }
  edges_ = std::move(edges);
}

int SocialNetwork::weight(WorkerId u, WorkerId v) const {
  const auto& list = adjacency_[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
                             [](const Neighbor& nb, WorkerId id) { return nb.id < id; });
  return (it != list.end() && it->id == v) ? it->weight : 0;
}

void Instance::validate() const {
  if (num_skills < 0) throw std::invalid_argument("negative skill count");
  if (team_limit < 0) throw std::invalid_argument("negative team-size limit");
  if (network.size() != num_workers()) {
    throw std::invalid_argument("network has " + std::to_string(network.size()) + " nodes but " +
                                std::to_string(num_workers()) + " workers");
  }
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const auto& w = workers[i];
    if (static_cast<int>(w.skills.size()) != num_skills) {
      throw std::invalid_argument("worker " + std::to_string(i) + " skill vector length mismatch");
    }
    if (w.cost < 0 || std::any_of(w.skills.begin(), w.skills.end(), [](int s) { return s < 0; })) {
      throw std::invalid_argument("worker " + std::to_string(i) + " has a negative value");
    }
  }
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    const auto& t = tasks[j];
    if (static_cast<int>(t.required.size()) != num_skills) {
      throw std::invalid_argument("task " + std::to_string(j) + " requirement length mismatch");
    }
    if (t.budget < 0 || std::any_of(t.required.begin(), t.required.end(), [](int s) { return s < 0; })) {
      throw std::invalid_argument("task " + std::to_string(j) + " has a negative value");
    }
  }
}

double density(const Team& team, const SocialNetwork& network) {
  if (team.empty()) return 0.0;
  long sum = 0;
  for (std::size_t a = 0; a < team.size(); ++a) {
    for (std::size_t b = a + 1; b < team.size(); ++b) sum += network.weight(team[a], team[b]);
  }
  return static_cast<double>(sum) / static_cast<double>(team.size());
}

double total_density(const Assignment& assignment, const SocialNetwork& network) {
  double total = 0.0;
  for (const auto& team : assignment.teams) total += density(team, network);
  return total;
}

ConstraintReport check_feasible(const Assignment& assignment, const Instance& instance) {
  if (assignment.teams.size() != instance.tasks.size()) {
    throw std::invalid_argument("assignment has " + std::to_string(assignment.teams.size()) +
                                " teams for " + std::to_string(instance.tasks.size()) + " tasks");
  }
  ConstraintReport report;
  std::vector<int> seen(instance.workers.size(), 0);
  for (std::size_t j = 0; j < assignment.teams.size(); ++j) {
    const auto& team = assignment.teams[j];
    const auto& task = instance.tasks[j];
    std::vector<long> have(static_cast<std::size_t>(instance.num_skills), 0);
    long cost = 0;
    for (WorkerId i : team) {
      if (i < 0 || i >= instance.num_workers()) {
        throw std::out_of_range("worker id " + std::to_string(i) + " outside the instance");
      }
      const auto& w = instance.workers[i];
      for (int s = 0; s < instance.num_skills; ++s) have[s] += w.skills[s];
      cost += w.cost;
      if (++seen[i] == 2) report.duplicate_workers.push_back(i);
    }
    for (int s = 0; s < instance.num_skills; ++s) {
      if (have[s] < task.required[s]) {
        report.skill_shortfalls.push_back({static_cast<int>(j), s, have[s], task.required[s]});
      }
    }
    if (cost > task.budget) report.budget_overruns.push_back({static_cast<int>(j), cost, task.budget});
    if (static_cast<int>(team.size()) > instance.team_limit) {
      report.size_overruns.push_back(
          {static_cast<int>(j), static_cast<int>(team.size()), instance.team_limit});
    }
  }
  std::sort(report.duplicate_workers.begin(), report.duplicate_workers.end());
  return report;
}

std::optional<int> shortest_path_hops(const SocialNetwork& network, WorkerId u, WorkerId v) {
  require_worker(network, u);
  require_worker(network, v);
  if (u == v) throw std::invalid_argument("hop distance requires distinct workers");
  std::vector<int> dist(static_cast<std::size_t>(network.size()), -1);
  std::deque<WorkerId> queue{u};
  dist[u] = 0;
  while (!queue.empty()) {
    WorkerId x = queue.front();
    queue.pop_front();
    for (const auto& nb : network.neighbors(x)) {
      if (dist[nb.id] >= 0) continue;
      dist[nb.id] = dist[x] + 1;
      if (nb.id == v) return dist[nb.id];
      queue.push_back(nb.id);
    }
  }
  return std::nullopt;
}

std::vector<double> weighted_distances(const SocialNetwork& network, WorkerId source) {
  require_worker(network, source);
  std::vector<double> dist(static_cast<std::size_t>(network.size()), kInf);
  using Item = std::pair<double, WorkerId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (const auto& nb : network.neighbors(x)) {
      double nd = d + nb.weight;
      if (nd < dist[nb.id]) {
        dist[nb.id] = nd;
        heap.push({nd, nb.id});
      }
    }
  }
  return dist;
}

double cc_diameter(const Team& team, const SocialNetwork& network) {
  double worst = 0.0;
  for (std::size_t a = 0; a < team.size(); ++a) {
    const auto dist = weighted_distances(network, team[a]);
    for (std::size_t b = a + 1; b < team.size(); ++b) worst = std::max(worst, dist[team[b]]);
  }
  return worst;
}

double cc_sd(const Team& team, const SocialNetwork& network) {
  double total = 0.0;
  for (std::size_t a = 0; a < team.size(); ++a) {
    const auto dist = weighted_distances(network, team[a]);
    for (std::size_t b = a + 1; b < team.size(); ++b) total += dist[team[b]];
  }
  return total;
}

double cc_ld(const Team& team, WorkerId leader, const SocialNetwork& network) {
  if (std::find(team.begin(), team.end(), leader) == team.end()) {
    throw std::invalid_argument("leader " + std::to_string(leader) + " is not a team member");
  }
  const auto dist = weighted_distances(network, leader);
  double total = 0.0;
  for (WorkerId u : team) {
    if (u != leader) total += dist[u];
  }
  return total;
}

std::optional<std::pair<WorkerId, double>> best_leader(const Team& team,
                                                       const SocialNetwork& network) {
  std::optional<std::pair<WorkerId, double>> best;
  for (WorkerId u : team) {
    double cost = cc_ld(team, u, network);
    if (!best || cost < best->second || (cost == best->second && u < best->first)) best = {u, cost};
  }
  return best;
}

}  // namespace teamform
