#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "teamform/model.hpp"
#include "teamform/rng.hpp"

namespace teamform::feasibility {

struct SearchLimits {
  double time_limit_seconds = 3600.0;
  std::uint64_t node_cap = 100'000'000;
  /// Bound on simultaneously stored partial states (the search stack).
  std::size_t max_stored_states = 1'000'000;
  /// Bound propagation can be switched off to check that it never changes
  /// the answer.
  bool propagate = true;
};

enum class OutcomeKind { Feasible, Infeasible, Timeout, ResourceExhausted };

std::string_view to_string(OutcomeKind kind);

struct SearchStats {
  std::uint64_t nodes = 0;
  std::size_t max_depth = 0;
  double wall_seconds = 0.0;
};

struct FeasibilityOutcome {
  OutcomeKind kind = OutcomeKind::Infeasible;
  std::optional<Assignment> initial;  // set iff kind == Feasible
  SearchStats stats;
};

/// Depth-first search for any assignment meeting every constraint. Tasks are
/// processed most-constrained first; each team is grown one worker at a time,
/// branching on the workers able to contribute to one still-uncovered skill.
FeasibilityOutcome find_initial_solution(const Instance& instance, const SearchLimits& limits,
                                         Rng& rng);

/// Snapshot of a search node, used by propagate_bounds.
struct PartialAssignment {
  /// Teams already completed, keyed by task index.
  std::vector<std::optional<Team>> completed;
  /// Task currently being built and its members so far.
  int current_task = -1;
  Team current_team;
  /// Workers that may not join the current team.
  std::vector<WorkerId> excluded;
};

enum class BoundDecision { Continue, Prune };

/// Prunes when no completion can exist: the free workers cannot close some
/// residual skill gap of the current or of an unstarted task within its
/// remaining capacity and budget (each candidate must itself fit the
/// residual budget).
BoundDecision propagate_bounds(const PartialAssignment& partial, const Instance& instance);

inline constexpr int kMaxBruteForceWorkers = 14;
inline constexpr int kMaxBruteForceTasks = 2;

struct BruteForceResult {
  bool feasible = false;
  std::optional<Assignment> best;
  double value = 0.0;
};

/// Exhaustive enumeration of every worker-to-{none, team 1..m} labelling.
/// Throws std::invalid_argument above 14 workers or 2 tasks.
bool brute_force_feasible(const Instance& instance);

/// The feasible assignment maximizing total density; among ties, the
/// lexicographically smallest labelling (none < team 1 < team 2) wins.
BruteForceResult brute_force_optimum(const Instance& instance);

}  // namespace teamform::feasibility
