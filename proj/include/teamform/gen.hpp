#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "teamform/model.hpp"
#include "teamform/params.hpp"
#include "teamform/rng.hpp"

namespace teamform::gen {

inline constexpr int kSkillTypes = 20;
inline constexpr int kUnbounded = std::numeric_limits<int>::max();

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unweighted simple graph; every pair has u < v and the list is sorted.
struct Topology {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> community;  // community label per node

  double mean_degree() const { return n == 0 ? 0.0 : 2.0 * static_cast<double>(edges.size()) / n; }
};

/// Probability that a Poisson(mean) draw falls in [lo, hi]; hi may be
/// kUnbounded.
double poisson_window_mass(double mean, int lo, int hi);

/// Poisson(mean) draw resampled until it lands in [lo, hi]. Throws
/// std::invalid_argument when lo > hi, mean <= 0, or the window carries less
/// than 1e-6 of the probability mass.
int truncated_poisson(double mean, int lo, int hi, Rng& rng);

/// Plain Poisson draw that also accepts mean == 0.
int poisson(double mean, Rng& rng);

/// Nudges entries by +-1 (within [lo, hi]) until the sample mean is as close
/// to target as the integer lattice allows.
void adjust_mean(std::vector<int>& values, double target, int lo, int hi, Rng& rng);

/// LFR-style benchmark topology: power-law degrees with exponent tau1,
/// planted communities with power-law sizes (tau2) and a fraction mu of each
/// node's edges leaving its community.
Topology generate_lfr_graph(int n, int mean_degree, const LfrConfig& cfg, Rng& rng);

/// Each edge gets a weight drawn from Poisson(3) truncated to [1, 5].
SocialNetwork assign_edge_weights(const Topology& topology, Rng& rng);

std::vector<Worker> generate_workers(int n, int num_skills, Rng& rng);

std::vector<Task> generate_tasks(int m, int mean_skill_count, int mean_skill_level, int b_extra,
                                 int num_skills, Rng& rng);

Instance generate_instance(const GenParams& params, const LfrConfig& cfg, std::uint64_t seed);

}  // namespace teamform::gen
