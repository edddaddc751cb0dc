#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "teamform/model.hpp"
#include "teamform/rng.hpp"

namespace teamform::anneal {

/// Either a wall-clock limit (the time limit L, split evenly across runs and
/// temperature levels) or a deterministic count of sweeps split the same way.
struct Budget {
  enum class Mode { Iterations, WallClock };
  Mode mode = Mode::Iterations;
  std::uint64_t iterations = 0;
  double seconds = 0.0;

  static Budget sweeps(std::uint64_t n) { return {Mode::Iterations, n, 0.0}; }
  static Budget wall_clock(double s) { return {Mode::WallClock, 0, s}; }
};

struct SaConfig {
  double alpha = 0.9;
  double beta = 1.0;
  double initial_temperature = 10.0;
  int runs = 6;
  int levels_per_run = 100;
  Budget budget = Budget::sweeps(6000);
  int neighbor_retry_cap = 50;
  /// When false, virtual edges are never computed (the objective is the raw
  /// density in every run).
  bool smoothing = true;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const SaConfig& config);

enum class NeighborhoodKind { N1, N2, N3 };

struct TraceRow {
  int stage = 0;  // smoothing stage, counting down
  int level = 0;  // temperature level within the run
  double temperature = 0.0;
  double best_value = 0.0;
  std::uint64_t accepts = 0;
  std::uint64_t rejects = 0;
};

struct OptimizerTrace {
  std::vector<TraceRow> levels;
  std::vector<double> run_seconds;
};

struct RunResult {
  Assignment best;
  double best_value = 0.0;
  OptimizerTrace trace;
};

/// min(1, exp((f_new - f_old) / T)). Throws std::invalid_argument if T <= 0.
double acceptance_probability(double f_new, double f_old, double temperature);

inline double cool(double temperature, double alpha) { return alpha * temperature; }

/// Memoized unweighted hop counts, filled one BFS source at a time.
class HopCache {
 public:
  explicit HopCache(const SocialNetwork& network);

  /// Hop count from u to v, or -1 when unreachable.
  int hops(WorkerId u, WorkerId v);

 private:
  const SocialNetwork* network_;
  std::vector<std::vector<std::int16_t>> rows_;
};

/// Edge weight when (u, v) is an edge; otherwise the virtual weight
/// beta * (1 / hops) * (stage / 5), or 0 if v is unreachable.
double smoothed_weight(WorkerId u, WorkerId v, const SocialNetwork& network, double beta, int stage,
                       HopCache& hops);

double smoothed_density(const Team& team, const SocialNetwork& network, double beta, int stage,
                        HopCache& hops);

/// Draws up to retry_cap random moves of the given kind and returns the first
/// resulting team that satisfies the task's skill, budget and size limits.
std::optional<Team> sample_neighbor(const Team& team, NeighborhoodKind kind,
                                    const std::vector<WorkerId>& free_pool, const Instance& instance,
                                    int task, int retry_cap, Rng& rng);

/// Six-stage annealing. Acceptance uses the smoothed objective of the current
/// stage; the returned best-so-far uses raw density.
/// Throws std::invalid_argument when `initial` is infeasible.
RunResult run_sa(const Instance& instance, const Assignment& initial, const SaConfig& config,
                 std::uint64_t seed);

/// Same loop and budget as run_sa, but only strictly improving moves (raw
/// density) are accepted.
RunResult run_hill_climbing(const Instance& instance, const Assignment& initial, const SaConfig& config,
                            std::uint64_t seed);

inline constexpr std::array<double, 4> kGridAlphas{0.8, 0.85, 0.9, 0.95};
inline constexpr std::array<double, 4> kGridBetas{0.5, 1.0, 1.5, 2.0};

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  RunResult result;
};

struct GridResult {
  std::vector<GridCell> cells;  // alpha-major order
  std::size_t best = 0;

  const GridCell& best_cell() const { return cells.at(best); }
};

/// run_sa over every (alpha, beta) grid pair with per-cell derived seeds.
/// The best cell has the highest value; ties go to the smaller alpha, then
/// the smaller beta. Cells run concurrently when `parallel` is set, with
/// results identical to sequential execution.
GridResult grid_search(const Instance& instance, const Assignment& initial, const SaConfig& base,
                       std::uint64_t seed, bool parallel = false);

}  // namespace teamform::anneal
