#include "teamform/anneal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <future>
#include <stdexcept>
#include <string>

namespace teamform::anneal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Move {
  std::array<WorkerId, 2> removed{};  // indices into the team's member list
  int n_removed = 0;
  std::array<WorkerId, 2> added{};  // worker ids taken from the free pool
  int n_added = 0;
};

// A team plus the running totals needed to evaluate moves in O(|team|).
struct TeamState {
  Team members;
  std::vector<long> skills;
  long cost = 0;
  long raw_weight = 0;      // sum of edge weights over member pairs
  double inverse_hops = 0;  // sum of 1/hops over non-adjacent reachable pairs
};

// Pool of unassigned workers with O(1) removal and insertion.
class FreePool {
 public:
  FreePool(int n, const std::vector<WorkerId>& workers) : position_(static_cast<std::size_t>(n), -1) {
    for (WorkerId w : workers) insert(w);
  }
  std::size_t size() const { return items_.size(); }
  WorkerId at(std::size_t i) const { return items_[i]; }
  const std::vector<WorkerId>& items() const { return items_; }
  void insert(WorkerId w) {
    position_[w] = static_cast<int>(items_.size());
    items_.push_back(w);
  }
  void erase(WorkerId w) {
    int p = position_[w];
    WorkerId last = items_.back();
    items_[p] = last;
    position_[last] = p;
    items_.pop_back();
    position_[w] = -1;
  }

 private:
  std::vector<WorkerId> items_;
  std::vector<int> position_;
};

class Evaluator {
 public:
  Evaluator(const Instance& instance, HopCache* hops) : instance_(instance), hops_(hops) {}

  double inverse_hop(WorkerId u, WorkerId v) const {
    if (instance_.network.adjacent(u, v)) return 0.0;
    int p = hops_->hops(u, v);
    return p > 0 ? 1.0 / p : 0.0;
  }

  TeamState build(const Team& team, bool with_hops) const {
    TeamState s;
    s.members = team;
    s.skills.assign(static_cast<std::size_t>(instance_.num_skills), 0);
    for (std::size_t a = 0; a < team.size(); ++a) {
      const auto& w = instance_.workers[team[a]];
      for (int k = 0; k < instance_.num_skills; ++k) s.skills[k] += w.skills[k];
      s.cost += w.cost;
      for (std::size_t b = a + 1; b < team.size(); ++b) {
        s.raw_weight += instance_.network.weight(team[a], team[b]);
        if (with_hops) s.inverse_hops += inverse_hop(team[a], team[b]);
      }
    }
    return s;
  }

  bool satisfies(const TeamState& s, const Move& mv, int task) const {
    const auto& t = instance_.tasks[task];
    const int size = static_cast<int>(s.members.size()) - mv.n_removed + mv.n_added;
    if (size > instance_.team_limit) return false;
    long cost = s.cost;
    for (int r = 0; r < mv.n_removed; ++r) cost -= instance_.workers[s.members[mv.removed[r]]].cost;
    for (int a = 0; a < mv.n_added; ++a) cost += instance_.workers[mv.added[a]].cost;
    if (cost > t.budget) return false;
    for (int k = 0; k < instance_.num_skills; ++k) {
      long have = s.skills[k];
      for (int r = 0; r < mv.n_removed; ++r) have -= instance_.workers[s.members[mv.removed[r]]].skills[k];
      for (int a = 0; a < mv.n_added; ++a) have += instance_.workers[mv.added[a]].skills[k];
      if (have < t.required[k]) return false;
    }
    return true;
  }

  // Raw weight and inverse-hop sums of the team after the move.
  std::pair<long, double> sums_after(const TeamState& s, const Move& mv, bool with_hops) const {
    const auto& net = instance_.network;
    long raw = s.raw_weight;
    double inv = s.inverse_hops;
    std::array<WorkerId, 2> out{};
    for (int r = 0; r < mv.n_removed; ++r) out[r] = s.members[mv.removed[r]];
    auto is_removed = [&](std::size_t idx) {
      for (int r = 0; r < mv.n_removed; ++r) {
        if (static_cast<std::size_t>(mv.removed[r]) == idx) return true;
      }
      return false;
    };
    for (int r = 0; r < mv.n_removed; ++r) {
      for (std::size_t i = 0; i < s.members.size(); ++i) {
        if (static_cast<std::size_t>(mv.removed[r]) == i) continue;
        raw -= net.weight(out[r], s.members[i]);
        if (with_hops) inv -= inverse_hop(out[r], s.members[i]);
      }
    }
    if (mv.n_removed == 2) {
      raw += net.weight(out[0], out[1]);
      if (with_hops) inv += inverse_hop(out[0], out[1]);
    }
    for (int a = 0; a < mv.n_added; ++a) {
      for (std::size_t i = 0; i < s.members.size(); ++i) {
        if (is_removed(i)) continue;
        raw += net.weight(mv.added[a], s.members[i]);
        if (with_hops) inv += inverse_hop(mv.added[a], s.members[i]);
      }
    }
    if (mv.n_added == 2) {
      raw += net.weight(mv.added[0], mv.added[1]);
      if (with_hops) inv += inverse_hop(mv.added[0], mv.added[1]);
    }
    return {raw, inv};
  }

  void apply(TeamState& s, const Move& mv, long raw, double inv) const {
    for (int r = 0; r < mv.n_removed; ++r) {
      const auto& w = instance_.workers[s.members[mv.removed[r]]];
      for (int k = 0; k < instance_.num_skills; ++k) s.skills[k] -= w.skills[k];
      s.cost -= w.cost;
    }
    for (int a = 0; a < mv.n_added; ++a) {
      const auto& w = instance_.workers[mv.added[a]];
      for (int k = 0; k < instance_.num_skills; ++k) s.skills[k] += w.skills[k];
      s.cost += w.cost;
    }
    // Erase the higher index first so the lower one stays valid.
    std::array<int, 2> idx = mv.removed;
    if (mv.n_removed == 2 && idx[0] < idx[1]) std::swap(idx[0], idx[1]);
    for (int r = 0; r < mv.n_removed; ++r) {
      s.members[idx[r]] = s.members.back();
      s.members.pop_back();
    }
    for (int a = 0; a < mv.n_added; ++a) s.members.push_back(mv.added[a]);
    s.raw_weight = raw;
    s.inverse_hops = inv;
  }

 private:
  const Instance& instance_;
  HopCache* hops_;
};

std::optional<Move> draw_move(const Evaluator& eval, const TeamState& s, NeighborhoodKind kind,
                              const FreePool& pool, const Instance& instance, int task, int retry_cap,
                              Rng& rng) {
  const int size = static_cast<int>(s.members.size());
  const int n_removed = kind == NeighborhoodKind::N2 ? 2 : 1;
  const int n_added = kind == NeighborhoodKind::N3 ? 2 : 1;
  if (size < n_removed || static_cast<int>(pool.size()) < n_added) return std::nullopt;
  if (size - n_removed + n_added > instance.team_limit) return std::nullopt;
  std::uniform_int_distribution<int> pick_member(0, size - 1);
  std::uniform_int_distribution<std::size_t> pick_free(0, pool.size() - 1);
  for (int attempt = 0; attempt < retry_cap; ++attempt) {
    Move mv;
    mv.n_removed = n_removed;
    mv.n_added = n_added;
    mv.removed[0] = pick_member(rng);
    if (n_removed == 2) {
      do {
        mv.removed[1] = pick_member(rng);
      } while (mv.removed[1] == mv.removed[0]);
    }
    mv.added[0] = pool.at(pick_free(rng));
    if (n_added == 2) {
      do {
        mv.added[1] = pool.at(pick_free(rng));
      } while (mv.added[1] == mv.added[0]);
    }
    if (eval.satisfies(s, mv, task)) return mv;
  }
  return std::nullopt;
}

enum class Acceptance { Metropolis, StrictImprovement };

class Optimizer {
 public:
  Optimizer(const Instance& instance, const Assignment& initial, const SaConfig& config, std::uint64_t seed,
            Acceptance rule)
      : instance_(instance),
        config_(config),
        rule_(rule),
        rng_(seed),
        hops_(instance.network),
        eval_(instance, &hops_),
        pool_(instance.num_workers(), {}) {
    instance.validate();
    validate(config);
    const auto report = check_feasible(initial, instance);
    if (!report.feasible()) throw std::invalid_argument("initial assignment is infeasible");
    std::vector<char> used(static_cast<std::size_t>(instance.num_workers()), 0);
    for (const auto& team : initial.teams) {
      for (WorkerId w : team) used[w] = 1;
    }
    for (WorkerId w = 0; w < instance.num_workers(); ++w) {
      if (!used[w]) pool_.insert(w);
    }
    teams_.reserve(initial.teams.size());
    for (const auto& team : initial.teams) teams_.push_back(eval_.build(team, false));
    best_.teams = initial.teams;
    best_value_ = raw_total();
  }

  RunResult run() {
    RunResult result;
    const int runs = config_.runs;
    const int levels = config_.levels_per_run;
    const std::uint64_t total_levels = static_cast<std::uint64_t>(runs) * levels;
    std::uint64_t global_level = 0;

    for (int r = 0; r < runs; ++r) {
      const auto run_start = Clock::now();
      const int stage = runs - 1 - r;
      scale_ = 0.0;
      if (rule_ == Acceptance::Metropolis && config_.smoothing && runs > 1) {
        scale_ = config_.beta * (static_cast<double>(stage) / (runs - 1));
      }
      refresh_totals();
      double temperature = config_.initial_temperature;
      int level = 0;
      for (;;) {
        TraceRow row;
        row.stage = stage;
        row.level = level;
        row.temperature = rule_ == Acceptance::Metropolis ? temperature : 0.0;
        const auto level_start = Clock::now();
        if (config_.budget.mode == Budget::Mode::Iterations) {
          const std::uint64_t n = config_.budget.iterations;
          const std::uint64_t sweeps = (global_level + 1) * n / total_levels - global_level * n / total_levels;
          for (std::uint64_t s = 0; s < sweeps; ++s) sweep(temperature, row);
        } else {
          const double level_seconds = config_.budget.seconds / static_cast<double>(total_levels);
          do {
            sweep(temperature, row);
          } while (seconds_since(level_start) < level_seconds);
        }
        row.best_value = best_value_;
        result.trace.levels.push_back(row);
        temperature = cool(temperature, config_.alpha);
        ++level;
        ++global_level;
        if (config_.budget.mode == Budget::Mode::Iterations) {
          if (level >= levels) break;
        } else if (seconds_since(run_start) >= config_.budget.seconds / runs) {
          break;
        }
      }
      result.trace.run_seconds.push_back(seconds_since(run_start));
    }
    result.best = best_;
    for (auto& team : result.best.teams) std::sort(team.begin(), team.end());
    result.best_value = best_value_;
    return result;
  }

 private:
  bool with_hops() const { return scale_ != 0.0; }

  double objective(long raw, double inv, std::size_t size) const {
    if (size == 0) return 0.0;
    if (!with_hops()) return static_cast<double>(raw) / static_cast<double>(size);
    return (static_cast<double>(raw) + scale_ * inv) / static_cast<double>(size);
  }

  double raw_total() const {
    double total = 0.0;
    for (const auto& t : teams_) {
      if (!t.members.empty()) total += static_cast<double>(t.raw_weight) / static_cast<double>(t.members.size());
    }
    return total;
  }

  // Full recomputation at each run start; raw sums are exact integers so
  // any mismatch is a bookkeeping bug.
  void refresh_totals() {
    for (auto& t : teams_) {
      TeamState fresh = eval_.build(t.members, with_hops());
      if (fresh.raw_weight != t.raw_weight || fresh.cost != t.cost || fresh.skills != t.skills) {
        throw std::logic_error("incremental team totals diverged from recomputation");
      }
      t.inverse_hops = fresh.inverse_hops;
    }
  }

  void sweep(double temperature, TraceRow& row) {
    for (std::size_t j = 0; j < teams_.size(); ++j) {
      auto& team = teams_[j];
      std::array<Move, 3> found{};
      int n_found = 0;
      for (auto kind : {NeighborhoodKind::N1, NeighborhoodKind::N2, NeighborhoodKind::N3}) {
        auto mv = draw_move(eval_, team, kind, pool_, instance_, static_cast<int>(j),
                            config_.neighbor_retry_cap, rng_);
        if (mv) found[n_found++] = *mv;
      }
      if (n_found == 0) continue;
      const Move& mv = found[std::uniform_int_distribution<int>(0, n_found - 1)(rng_)];
      const std::size_t new_size = team.members.size() - mv.n_removed + mv.n_added;
      auto [raw, inv] = eval_.sums_after(team, mv, with_hops());

      bool accept;
      if (rule_ == Acceptance::Metropolis) {
        const double f_old = objective(team.raw_weight, team.inverse_hops, team.members.size());
        const double f_new = objective(raw, inv, new_size);
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        accept = u < acceptance_probability(f_new, f_old, temperature);
      } else {
        const double f_old = team.members.empty() ? 0.0
                                                  : static_cast<double>(team.raw_weight) / team.members.size();
        const double f_new = static_cast<double>(raw) / static_cast<double>(new_size);
        accept = f_new > f_old;
      }
      if (!accept) {
        ++row.rejects;
        continue;
      }
      ++row.accepts;
      for (int r = 0; r < mv.n_removed; ++r) pool_.insert(team.members[mv.removed[r]]);
      for (int a = 0; a < mv.n_added; ++a) pool_.erase(mv.added[a]);
      eval_.apply(team, mv, raw, inv);
    }
    const double total = raw_total();
    if (total > best_value_) {
      best_value_ = total;
      for (std::size_t j = 0; j < teams_.size(); ++j) best_.teams[j] = teams_[j].members;
    }
  }

  const Instance& instance_;
  SaConfig config_;
  Acceptance rule_;
  Rng rng_;
  HopCache hops_;
  Evaluator eval_;
  FreePool pool_;
  std::vector<TeamState> teams_;
  Assignment best_;
  double best_value_ = 0.0;
  double scale_ = 0.0;
};

}  // namespace

void validate(const SaConfig& config) {
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(config.beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (!(config.initial_temperature > 0.0)) throw std::invalid_argument("initial temperature must be positive");
  if (config.runs < 1) throw std::invalid_argument("runs must be at least 1");
  if (config.levels_per_run < 1) throw std::invalid_argument("levels per run must be at least 1");
  if (config.neighbor_retry_cap < 1) throw std::invalid_argument("neighbor retry cap must be at least 1");
  if (config.budget.mode == Budget::Mode::WallClock && !(config.budget.seconds >= 0.0)) {
    throw std::invalid_argument("time limit must be non-negative");
  }
}

double acceptance_probability(double f_new, double f_old, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (f_new >= f_old) return 1.0;
  return std::exp((f_new - f_old) / temperature);
}

HopCache::HopCache(const SocialNetwork& network)
    : network_(&network), rows_(static_cast<std::size_t>(network.size())) {}

int HopCache::hops(WorkerId u, WorkerId v) {
  auto& row = rows_[u];
  if (row.empty()) {
    row.assign(static_cast<std::size_t>(network_->size()), -1);
    std::deque<WorkerId> queue{u};
    row[u] = 0;
    while (!queue.empty()) {
      WorkerId x = queue.front();
      queue.pop_front();
      for (const auto& nb : network_->neighbors(x)) {
        if (row[nb.id] >= 0) continue;
        row[nb.id] = static_cast<std::int16_t>(row[x] + 1);
        queue.push_back(nb.id);
      }
    }
  }
  return row[v];
}

double smoothed_weight(WorkerId u, WorkerId v, const SocialNetwork& network, double beta, int stage,
                       HopCache& hops) {
  if (u == v) throw std::invalid_argument("smoothed weight requires distinct workers");
  if (int w = network.weight(u, v); w > 0) return w;
  int p = hops.hops(u, v);
  if (p <= 0) return 0.0;
  return beta * (1.0 / p) * (stage / 5.0);
}

double smoothed_density(const Team& team, const SocialNetwork& network, double beta, int stage,
                        HopCache& hops) {
  if (team.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t a = 0; a < team.size(); ++a) {
    for (std::size_t b = a + 1; b < team.size(); ++b) {
      sum += smoothed_weight(team[a], team[b], network, beta, stage, hops);
    }
  }
  return sum / static_cast<double>(team.size());
}

std::optional<Team> sample_neighbor(const Team& team, NeighborhoodKind kind,
                                    const std::vector<WorkerId>& free_pool, const Instance& instance,
                                    int task, int retry_cap, Rng& rng) {
  HopCache hops(instance.network);
  Evaluator eval(instance, &hops);
  TeamState state = eval.build(team, false);
  FreePool pool(instance.num_workers(), free_pool);
  auto mv = draw_move(eval, state, kind, pool, instance, task, retry_cap, rng);
  if (!mv) return std::nullopt;
  auto [raw, inv] = eval.sums_after(state, *mv, false);
  eval.apply(state, *mv, raw, inv);
  return state.members;
}

RunResult run_sa(const Instance& instance, const Assignment& initial, const SaConfig& config,
                 std::uint64_t seed) {
  return Optimizer(instance, initial, config, seed, Acceptance::Metropolis).run();
}

RunResult run_hill_climbing(const Instance& instance, const Assignment& initial, const SaConfig& config,
                            std::uint64_t seed) {
  return Optimizer(instance, initial, config, seed, Acceptance::StrictImprovement).run();
}

GridResult grid_search(const Instance& instance, const Assignment& initial, const SaConfig& base,
                       std::uint64_t seed, bool parallel) {
  GridResult grid;
  for (double alpha : kGridAlphas) {
    for (double beta : kGridBetas) {
      GridCell cell;
      cell.alpha = alpha;
      cell.beta = beta;
      cell.seed = derive_seed(seed, grid.cells.size());
      grid.cells.push_back(cell);
    }
  }
  auto run_cell = [&](GridCell& cell) {
    SaConfig cfg = base;
    cfg.alpha = cell.alpha;
    cfg.beta = cell.beta;
    cell.result = run_sa(instance, initial, cfg, cell.seed);
  };
  if (parallel) {
    std::vector<std::future<void>> jobs;
    for (auto& cell : grid.cells) jobs.push_back(std::async(std::launch::async, run_cell, std::ref(cell)));
    for (auto& job : jobs) job.get();
  } else {
    for (auto& cell : grid.cells) run_cell(cell);
  }
  for (std::size_t c = 1; c < grid.cells.size(); ++c) {
    if (grid.cells[c].result.best_value > grid.cells[grid.best].result.best_value) grid.best = c;
  }
  return grid;
}

}  // namespace teamform::anneal
