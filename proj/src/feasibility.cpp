#include "teamform/feasibility.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace teamform::feasibility {

namespace {

using Clock = std::chrono::steady_clock;

// True when the available workers cannot close some skill gap with at most
// `capacity` members, counting only workers whose own cost fits the budget.
bool cannot_complete(const Instance& instance, const std::vector<long>& gap, long residual_budget,
                     int capacity, const std::vector<char>& unavailable, std::vector<int>& scratch) {
  bool open = false;
  for (long g : gap) open = open || g > 0;
  if (!open) return false;
  if (capacity <= 0 || residual_budget < 0) return true;
  for (int k = 0; k < instance.num_skills; ++k) {
    if (gap[k] <= 0) continue;
    scratch.clear();
    for (int i = 0; i < instance.num_workers(); ++i) {
      const auto& w = instance.workers[i];
      if (!unavailable[i] && w.cost <= residual_budget && w.skills[k] > 0) scratch.push_back(w.skills[k]);
    }
    auto take = std::min<std::size_t>(scratch.size(), static_cast<std::size_t>(capacity));
    if (take < scratch.size()) {
      std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take), scratch.end(),
                       std::greater<>());
    }
    long reach = std::accumulate(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take), 0L);
    if (reach < gap[k]) return true;
  }

  // Aggregate over skills: a worker usefully supplies at most min(level, gap)
  // of each skill, so any completion needs total useful supply >= total gap
  // from at most `capacity` workers whose summed cost fits the budget.
  long total_gap = 0;
  for (long g : gap) total_gap += std::max(0L, g);
  struct Supply {
    long useful;
    long cost;
  };
  std::vector<Supply> supply;
  for (int i = 0; i < instance.num_workers(); ++i) {
    const auto& w = instance.workers[i];
    if (unavailable[i] || w.cost > residual_budget) continue;
    long useful = 0;
    for (int k = 0; k < instance.num_skills; ++k) {
      if (gap[k] > 0) useful += std::min<long>(w.skills[k], gap[k]);
    }
    if (useful > 0) supply.push_back({useful, w.cost});
  }
  std::vector<long> useful(supply.size());
  for (std::size_t i = 0; i < supply.size(); ++i) useful[i] = supply[i].useful;
  const auto take = std::min<std::size_t>(useful.size(), static_cast<std::size_t>(capacity));
  if (take < useful.size()) {
    std::nth_element(useful.begin(), useful.begin() + static_cast<std::ptrdiff_t>(take), useful.end(),
                     std::greater<>());
  }
  if (std::accumulate(useful.begin(), useful.begin() + static_cast<std::ptrdiff_t>(take), 0L) < total_gap) {
    return true;
  }
  // Fractional knapsack: cheapest cost per unit of useful supply first.
  std::sort(supply.begin(), supply.end(), [](const Supply& a, const Supply& b) {
    return a.cost * b.useful < b.cost * a.useful;
  });
  double cost = 0.0;
  long remaining = total_gap;
  for (const auto& s : supply) {
    if (remaining <= 0) break;
    if (s.useful <= remaining) {
      cost += static_cast<double>(s.cost);
      remaining -= s.useful;
    } else {
      cost += static_cast<double>(s.cost) * static_cast<double>(remaining) / static_cast<double>(s.useful);
      remaining = 0;
    }
  }
  return remaining > 0 || cost > static_cast<double>(residual_budget) + 1e-9;
}

std::vector<long> requirement_gap(const Task& task) {
  return std::vector<long>(task.required.begin(), task.required.end());
}

class Search {
 public:
  Search(const Instance& instance, const SearchLimits& limits, Rng& rng)
      : instance_(instance),
        limits_(limits),
        rng_(rng),
        used_(static_cast<std::size_t>(instance.num_workers()), 0),
        excluded_(static_cast<std::size_t>(instance.num_tasks()),
                  std::vector<char>(static_cast<std::size_t>(instance.num_workers()), 0)),
        teams_(static_cast<std::size_t>(instance.num_tasks())) {
    order_.resize(teams_.size());
    std::iota(order_.begin(), order_.end(), 0);
    auto tightness = [&](int j) {
      const auto& t = instance.tasks[j];
      double need = std::accumulate(t.required.begin(), t.required.end(), 0.0);
      if (need == 0.0) return 0.0;
      return t.budget == 0 ? std::numeric_limits<double>::infinity() : need / t.budget;
    };
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return tightness(a) > tightness(b); });
  }

  FeasibilityOutcome run() {
    start_ = Clock::now();
    FeasibilityOutcome out;
    bool found = begin_task(0, 0);
    out.stats = stats_;
    out.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    if (found) {
      out.kind = OutcomeKind::Feasible;
      Assignment a;
      a.teams = teams_;
      for (auto& team : a.teams) std::sort(team.begin(), team.end());
      if (!check_feasible(a, instance_).feasible()) {
        throw std::logic_error("feasibility search produced an infeasible assignment");
      }
      out.initial = std::move(a);
    } else {
      out.kind = stop_.value_or(OutcomeKind::Infeasible);
    }
    return out;
  }

 private:
  bool tick(std::size_t depth) {
    ++stats_.nodes;
    stats_.max_depth = std::max(stats_.max_depth, depth);
    if (stats_.nodes > limits_.node_cap || depth > limits_.max_stored_states) {
      stop_ = OutcomeKind::ResourceExhausted;
      return false;
    }
    if ((stats_.nodes & 255) == 0 &&
        std::chrono::duration<double>(Clock::now() - start_).count() > limits_.time_limit_seconds) {
      stop_ = OutcomeKind::Timeout;
      return false;
    }
    return true;
  }

  bool begin_task(std::size_t pos, std::size_t depth) {
    if (pos == order_.size()) return true;
    if (limits_.propagate) {
      for (std::size_t q = pos; q < order_.size(); ++q) {
        const auto& task = instance_.tasks[order_[q]];
        if (cannot_complete(instance_, requirement_gap(task), task.budget, instance_.team_limit, used_,
                            scratch_)) {
          return false;
        }
      }
    }
    const auto& task = instance_.tasks[order_[pos]];
    return grow(pos, requirement_gap(task), task.budget, depth);
  }

  bool grow(std::size_t pos, std::vector<long> gap, long budget, std::size_t depth) {
    if (!tick(depth)) return false;
    const int task = order_[pos];
    auto& team = teams_[task];
    auto& excluded = excluded_[task];

    int open_skill = -1;
    for (int k = 0; k < instance_.num_skills; ++k) {
      if (gap[k] > 0) open_skill = k;
    }
    if (open_skill < 0) return begin_task(pos + 1, depth + 1);

    const int capacity = instance_.team_limit - static_cast<int>(team.size());
    if (limits_.propagate) {
      blocked_ = used_;
      for (std::size_t i = 0; i < excluded.size(); ++i) blocked_[i] |= excluded[i];
      if (cannot_complete(instance_, gap, budget, capacity, blocked_, scratch_)) return false;
    }
    if (capacity <= 0) return false;

    // Branch on the open skill with the fewest eligible workers.
    std::vector<int> eligible_count(static_cast<std::size_t>(instance_.num_skills), 0);
    for (int i = 0; i < instance_.num_workers(); ++i) {
      if (!available(i, excluded, budget)) continue;
      const auto& w = instance_.workers[i];
      for (int k = 0; k < instance_.num_skills; ++k) {
        if (gap[k] > 0 && w.skills[k] > 0) ++eligible_count[k];
      }
    }
    int branch_skill = -1;
    for (int k = 0; k < instance_.num_skills; ++k) {
      if (gap[k] > 0 && (branch_skill < 0 || eligible_count[k] < eligible_count[branch_skill])) {
        branch_skill = k;
      }
    }

    struct Candidate {
      WorkerId id;
      double score;
      std::uint64_t tie;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < instance_.num_workers(); ++i) {
      if (!available(i, excluded, budget) || instance_.workers[i].skills[branch_skill] <= 0) continue;
      const auto& w = instance_.workers[i];
      long coverage = 0;
      for (int k = 0; k < instance_.num_skills; ++k) {
        if (gap[k] > 0) coverage += std::min<long>(w.skills[k], gap[k]);
      }
      candidates.push_back({i, static_cast<double>(coverage) / (w.cost + 1.0), rng_()});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      return a.score != b.score ? a.score > b.score : a.tie < b.tie;
    });

    std::vector<WorkerId> newly_excluded;
    bool found = false;
    for (const auto& c : candidates) {
      const auto& w = instance_.workers[c.id];
      std::vector<long> next_gap = gap;
      for (int k = 0; k < instance_.num_skills; ++k) next_gap[k] -= w.skills[k];
      team.push_back(c.id);
      used_[c.id] = 1;
      found = grow(pos, std::move(next_gap), budget - w.cost, depth + 1);
      if (found) break;
      team.pop_back();
      used_[c.id] = 0;
      if (stop_) break;
      excluded[c.id] = 1;
      newly_excluded.push_back(c.id);
    }
    for (WorkerId id : newly_excluded) excluded[id] = 0;
    return found;
  }

  bool available(int i, const std::vector<char>& excluded, long budget) const {
    return !used_[i] && !excluded[i] && instance_.workers[i].cost <= budget;
  }

  const Instance& instance_;
  SearchLimits limits_;
  Rng& rng_;
  std::vector<char> used_;
  std::vector<std::vector<char>> excluded_;
  std::vector<Team> teams_;
  std::vector<int> order_;
  std::vector<char> blocked_;
  std::vector<int> scratch_;
  SearchStats stats_;
  std::optional<OutcomeKind> stop_;
  Clock::time_point start_;
};

void require_enumerable(const Instance& instance) {
  if (instance.num_workers() > kMaxBruteForceWorkers || instance.num_tasks() > kMaxBruteForceTasks) {
    throw std::invalid_argument("brute force is limited to " + std::to_string(kMaxBruteForceWorkers) +
                                " workers and " + std::to_string(kMaxBruteForceTasks) + " tasks");
  }
}

// Enumerates labellings with running per-team totals. Partial labellings that
// already break a budget or size limit are cut, since adding workers can only
// increase both.
class Enumerator {
 public:
  Enumerator(const Instance& instance, bool stop_at_first)
      : instance_(instance),
        stop_at_first_(stop_at_first),
        m_(instance.num_tasks()),
        labels_(static_cast<std::size_t>(instance.num_workers()), 0),
        skill_(static_cast<std::size_t>(m_), std::vector<long>(static_cast<std::size_t>(instance.num_skills), 0)),
        cost_(static_cast<std::size_t>(m_), 0),
        size_(static_cast<std::size_t>(m_), 0),
        weight_(static_cast<std::size_t>(m_), 0) {}

  BruteForceResult run() {
    visit(0);
    BruteForceResult result;
    result.feasible = found_;
    if (found_) {
      Assignment a;
      a.teams.resize(static_cast<std::size_t>(m_));
      for (int i = 0; i < instance_.num_workers(); ++i) {
        if (best_labels_[i] > 0) a.teams[best_labels_[i] - 1].push_back(i);
      }
      result.best = std::move(a);
      result.value = best_value_;
    }
    return result;
  }

 private:
  void visit(int i) {
    if (stop_at_first_ && found_) return;
    if (i == instance_.num_workers()) {
      leaf();
      return;
    }
    for (int label = 0; label <= m_; ++label) {
      if (label == 0) {
        visit(i + 1);
        continue;
      }
      const int j = label - 1;
      const auto& w = instance_.workers[i];
      if (cost_[j] + w.cost > instance_.tasks[j].budget || size_[j] + 1 > instance_.team_limit) continue;
      long added = 0;
      for (int v = 0; v < i; ++v) {
        if (labels_[v] == label) added += instance_.network.weight(v, i);
      }
      for (int k = 0; k < instance_.num_skills; ++k) skill_[j][k] += w.skills[k];
      cost_[j] += w.cost;
      ++size_[j];
      weight_[j] += added;
      labels_[i] = label;
      visit(i + 1);
      labels_[i] = 0;
      weight_[j] -= added;
      --size_[j];
      cost_[j] -= w.cost;
      for (int k = 0; k < instance_.num_skills; ++k) skill_[j][k] -= w.skills[k];
      if (stop_at_first_ && found_) return;
    }
  }

  void leaf() {
    for (int j = 0; j < m_; ++j) {
      for (int k = 0; k < instance_.num_skills; ++k) {
        if (skill_[j][k] < instance_.tasks[j].required[k]) return;
      }
    }
    double value = 0.0;
    for (int j = 0; j < m_; ++j) {
      if (size_[j] > 0) value += static_cast<double>(weight_[j]) / size_[j];
    }
    if (!found_ || value > best_value_ + 1e-9) {
      found_ = true;
      best_value_ = value;
      best_labels_ = labels_;
    }
  }

  const Instance& instance_;
  bool stop_at_first_;
  int m_;
  std::vector<int> labels_;
  std::vector<std::vector<long>> skill_;
  std::vector<long> cost_;
  std::vector<int> size_;
  std::vector<long> weight_;
  bool found_ = false;
  double best_value_ = 0.0;
  std::vector<int> best_labels_;
};

}  // namespace

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Feasible: return "feasible";
    case OutcomeKind::Infeasible: return "infeasible";
    case OutcomeKind::Timeout: return "timeout";
    case OutcomeKind::ResourceExhausted: return "resource_exhausted";
  }
  return "unknown";
}

FeasibilityOutcome find_initial_solution(const Instance& instance, const SearchLimits& limits, Rng& rng) {
  instance.validate();
  if (limits.time_limit_seconds <= 0 || limits.node_cap == 0 || limits.max_stored_states == 0) {
    throw std::invalid_argument("search limits must be positive");
  }
  return Search(instance, limits, rng).run();
}

BoundDecision propagate_bounds(const PartialAssignment& partial, const Instance& instance) {
  const auto n = static_cast<std::size_t>(instance.num_workers());
  std::vector<char> used(n, 0);
  for (const auto& team : partial.completed) {
    if (!team) continue;
    for (WorkerId i : *team) used.at(static_cast<std::size_t>(i)) = 1;
  }
  for (WorkerId i : partial.current_team) used.at(static_cast<std::size_t>(i)) = 1;
  std::vector<int> scratch;

  if (partial.current_task >= 0) {
    const auto& task = instance.tasks.at(static_cast<std::size_t>(partial.current_task));
    std::vector<long> gap = requirement_gap(task);
    long budget = task.budget;
    for (WorkerId i : partial.current_team) {
      const auto& w = instance.workers[i];
      for (int k = 0; k < instance.num_skills; ++k) gap[k] -= w.skills[k];
      budget -= w.cost;
    }
    int capacity = instance.team_limit - static_cast<int>(partial.current_team.size());
    if (budget < 0 || capacity < 0) return BoundDecision::Prune;
    std::vector<char> blocked = used;
    for (WorkerId i : partial.excluded) blocked.at(static_cast<std::size_t>(i)) = 1;
    if (cannot_complete(instance, gap, budget, capacity, blocked, scratch)) return BoundDecision::Prune;
  }
  for (int j = 0; j < instance.num_tasks(); ++j) {
    if (j == partial.current_task) continue;
    if (static_cast<std::size_t>(j) < partial.completed.size() && partial.completed[j]) continue;
    const auto& task = instance.tasks[j];
    if (cannot_complete(instance, requirement_gap(task), task.budget, instance.team_limit, used, scratch)) {
      return BoundDecision::Prune;
    }
  }
  return BoundDecision::Continue;
}

bool brute_force_feasible(const Instance& instance) {
  require_enumerable(instance);
  return Enumerator(instance, true).run().feasible;
}

BruteForceResult brute_force_optimum(const Instance& instance) {
  require_enumerable(instance);
  return Enumerator(instance, false).run();
}

}  // namespace teamform::feasibility
