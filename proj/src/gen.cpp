#include "teamform/gen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

namespace teamform::gen {

namespace {

constexpr double kMinWindowMass = 1e-6;
constexpr int kDegreeSequenceRetries = 1000;
constexpr int kGraphRetries = 20;
constexpr int kRewireAttempts = 50;

double log_poisson_pmf(double mean, int k) {
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

double poisson_cdf_below(double mean, int lo) {
  double total = 0.0;
  for (int k = 0; k < lo; ++k) total += std::exp(log_poisson_pmf(mean, k));
  return total;
}

// Continuous power law with density proportional to x^-tau on [lo, hi].
double power_law_sample(double tau, double lo, double hi, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (std::abs(tau - 1.0) < 1e-12) return lo * std::pow(hi / lo, u);
  double a = std::pow(lo, 1.0 - tau);
  double b = std::pow(hi, 1.0 - tau);
  return std::pow(a - u * (a - b), 1.0 / (1.0 - tau));
}

double power_law_mean(double tau, double lo, double hi) {
  if (std::abs(tau - 1.0) < 1e-12) return (hi - lo) / std::log(hi / lo);
  if (std::abs(tau - 2.0) < 1e-12) return std::log(hi / lo) / (1.0 / lo - 1.0 / hi);
  double num = (std::pow(lo, 2.0 - tau) - std::pow(hi, 2.0 - tau)) / (tau - 2.0);
  double den = (std::pow(lo, 1.0 - tau) - std::pow(hi, 1.0 - tau)) / (tau - 1.0);
  return num / den;
}

// Lower cutoff giving the requested mean; clamps at 1.
double power_law_lower_cutoff(double tau, double hi, double mean) {
  double lo = 1.0;
  if (power_law_mean(tau, lo, hi) >= mean) return lo;
  double up = hi;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + up);
    (power_law_mean(tau, mid, hi) < mean ? lo : up) = mid;
  }
  return 0.5 * (lo + up);
}

std::uint64_t pair_key(int u, int v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

class EdgeSet {
 public:
  bool contains(int u, int v) const { return keys_.count(pair_key(u, v)) > 0; }
  void insert(int u, int v) { keys_.insert(pair_key(u, v)); }
  void erase(int u, int v) { keys_.erase(pair_key(u, v)); }

 private:
  std::unordered_set<std::uint64_t> keys_;
};

// Configuration-model pairing of stubs. Pairs that would form a self-loop, a
// multi-edge or (for external stubs) an intra-community edge are repaired by
// swapping endpoints with a random existing edge of the same pool, and
// dropped if no swap is found.
template <typename Allowed>
void wire_stubs(std::vector<int> stubs, std::vector<std::pair<int, int>>& pool_edges, EdgeSet& edges,
                Allowed allowed, Rng& rng) {
  std::shuffle(stubs.begin(), stubs.end(), rng);
  std::vector<std::pair<int, int>> bad;
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    int a = stubs[i];
    int b = stubs[i + 1];
    if (a != b && allowed(a, b) && !edges.contains(a, b)) {
      edges.insert(a, b);
      pool_edges.emplace_back(a, b);
    } else {
      bad.emplace_back(a, b);
    }
  }
  for (auto [a, b] : bad) {
    for (int attempt = 0; attempt < kRewireAttempts && !pool_edges.empty(); ++attempt) {
      std::size_t pick = std::uniform_int_distribution<std::size_t>(0, pool_edges.size() - 1)(rng);
      auto [c, d] = pool_edges[pick];
      if (rng() & 1) std::swap(c, d);
      if (a == c || b == d) continue;
      if (!allowed(a, c) || !allowed(b, d)) continue;
      if (edges.contains(a, c) || edges.contains(b, d)) continue;
      if (pair_key(a, c) == pair_key(b, d)) continue;
      edges.erase(c, d);
      pool_edges[pick] = {a, c};
      edges.insert(a, c);
      pool_edges.emplace_back(b, d);
      edges.insert(b, d);
      break;
    }
  }
}

std::vector<int> sample_degrees(int n, int mean_degree, int max_degree, double tau, Rng& rng) {
  const double lo = power_law_lower_cutoff(tau, max_degree, mean_degree);
  std::vector<int> degrees(static_cast<std::size_t>(n));
  for (int attempt = 0; attempt < kDegreeSequenceRetries; ++attempt) {
    long sum = 0;
    for (auto& d : degrees) {
      double x = power_law_sample(tau, lo, max_degree, rng);
      d = std::clamp(static_cast<int>(std::lround(x)), 1, max_degree);
      sum += d;
    }
    double mean = static_cast<double>(sum) / n;
    if (std::abs(mean - mean_degree) <= 0.05 * mean_degree) return degrees;
  }
  throw GenerationError("could not realize a degree sequence with mean " +
                        std::to_string(mean_degree) + " on " + std::to_string(n) + " nodes");
}

std::vector<int> sample_community_sizes(int n, int lo, int hi, double tau, Rng& rng) {
  std::vector<int> sizes;
  int total = 0;
  while (total < n) {
    int s = std::clamp(static_cast<int>(std::lround(power_law_sample(tau, lo, hi, rng))), lo, hi);
    s = std::min(s, n - total);
    if (s < lo && !sizes.empty()) {
      for (int r = 0; r < s; ++r) {
        std::size_t c = std::uniform_int_distribution<std::size_t>(0, sizes.size() - 1)(rng);
        ++sizes[c];
      }
    } else {
      sizes.push_back(s);
    }
    total += s;
  }
  return sizes;
}

Topology try_lfr(int n, int mean_degree, const LfrConfig& cfg, Rng& rng) {
  const int max_degree = cfg.max_degree > 0 ? std::min(cfg.max_degree, n - 1)
                                            : std::min(n - 1, 3 * mean_degree);
  if (max_degree <= mean_degree) {
    throw std::invalid_argument("maximum degree must exceed the mean degree");
  }
  std::vector<int> degree = sample_degrees(n, mean_degree, max_degree, cfg.tau1, rng);
  std::vector<int> internal(degree.size());
  for (std::size_t i = 0; i < degree.size(); ++i) {
    internal[i] = static_cast<int>(std::lround((1.0 - cfg.mu) * degree[i]));
  }

  const int max_internal = *std::max_element(internal.begin(), internal.end());
  int cmax = cfg.max_community > 0 ? cfg.max_community : std::max(n / 4, cfg.min_community);
  cmax = std::min(n, std::max(cmax, max_internal + 1));
  int cmin = std::min(cfg.min_community, cmax);
  std::vector<int> sizes = sample_community_sizes(n, cmin, cmax, cfg.tau2, rng);

  // Place the most demanding nodes first; ties are broken randomly.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return internal[a] > internal[b]; });

  std::vector<int> fill(sizes.size(), 0);
  std::vector<int> community(static_cast<std::size_t>(n), -1);
  std::vector<std::size_t> eligible;
  for (int node : order) {
    eligible.clear();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
      if (fill[c] < sizes[c] && sizes[c] > internal[node]) eligible.push_back(c);
    }
    std::size_t chosen;
    if (!eligible.empty()) {
      chosen = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
    } else {
      chosen = sizes.size();
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (fill[c] < sizes[c] && (chosen == sizes.size() || sizes[c] > sizes[chosen])) chosen = c;
      }
      internal[node] = sizes[chosen] - 1;
    }
    community[node] = static_cast<int>(chosen);
    ++fill[chosen];
  }

  std::vector<std::vector<int>> members(sizes.size());
  for (int v = 0; v < n; ++v) members[community[v]].push_back(v);

  EdgeSet edges;
  std::vector<std::pair<int, int>> all_edges;
  std::vector<int> external(degree.size());
  for (auto& group : members) {
    long stub_total = 0;
    for (int v : group) stub_total += internal[v];
    if (stub_total % 2 != 0) {
      for (int v : group) {
        if (internal[v] > 0) {
          --internal[v];
          break;
        }
      }
    }
    std::vector<int> stubs;
    for (int v : group) stubs.insert(stubs.end(), static_cast<std::size_t>(internal[v]), v);
    std::vector<std::pair<int, int>> group_edges;
    wire_stubs(std::move(stubs), group_edges, edges, [](int, int) { return true; }, rng);
    all_edges.insert(all_edges.end(), group_edges.begin(), group_edges.end());
  }

  std::vector<int> stubs;
  for (int v = 0; v < n; ++v) {
    external[v] = std::max(0, degree[v] - internal[v]);
    stubs.insert(stubs.end(), static_cast<std::size_t>(external[v]), v);
  }
  if (stubs.size() % 2 != 0) stubs.pop_back();
  std::vector<std::pair<int, int>> cross_edges;
  wire_stubs(std::move(stubs), cross_edges, edges,
             [&](int a, int b) { return community[a] != community[b]; }, rng);
  all_edges.insert(all_edges.end(), cross_edges.begin(), cross_edges.end());

  for (auto& e : all_edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(all_edges.begin(), all_edges.end());
  return Topology{n, std::move(all_edges), std::move(community)};
}

}  // namespace

double poisson_window_mass(double mean, int lo, int hi) {
  if (lo > hi) return 0.0;
  lo = std::max(lo, 0);
  if (hi == kUnbounded) return std::max(0.0, 1.0 - poisson_cdf_below(mean, lo));
  double total = 0.0;
  for (int k = lo; k <= hi; ++k) total += std::exp(log_poisson_pmf(mean, k));
  return std::min(total, 1.0);
}

int poisson(double mean, Rng& rng) {
  if (mean < 0.0) throw std::invalid_argument("Poisson mean must be non-negative");
  if (mean == 0.0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

int truncated_poisson(double mean, int lo, int hi, Rng& rng) {
  if (lo > hi) throw std::invalid_argument("truncation window is empty");
  if (lo == hi) return lo;
  if (!(mean > 0.0)) throw std::invalid_argument("truncated Poisson mean must be positive");
  if (poisson_window_mass(mean, lo, hi) < kMinWindowMass) {
    throw std::invalid_argument("truncation window [" + std::to_string(lo) + ", " +
                                (hi == kUnbounded ? std::string("inf") : std::to_string(hi)) +
                                "] has vanishing mass for mean " + std::to_string(mean));
  }
  std::poisson_distribution<int> dist(mean);
  for (;;) {
    int x = dist(rng);
    if (x >= lo && x <= hi) return x;
  }
}

void adjust_mean(std::vector<int>& values, double target, int lo, int hi, Rng& rng) {
  if (values.empty()) return;
  const double count = static_cast<double>(values.size());
  long sum = std::accumulate(values.begin(), values.end(), 0L);
  std::vector<std::size_t> eligible;
  while (std::abs(sum / count - target) > 0.5 / count + 1e-12) {
    const bool raise = sum / count < target;
    eligible.clear();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (raise ? values[i] < hi : values[i] > lo) eligible.push_back(i);
    }
    if (eligible.empty()) return;
    std::size_t pick = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
    values[pick] += raise ? 1 : -1;
    sum += raise ? 1 : -1;
  }
}

Topology generate_lfr_graph(int n, int mean_degree, const LfrConfig& cfg, Rng& rng) {
  validate(cfg);
  if (n < 2 || mean_degree < 1 || mean_degree >= n) {
    throw std::invalid_argument("LFR requires 1 <= k < n");
  }
  Topology best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < kGraphRetries; ++attempt) {
    Topology t = try_lfr(n, mean_degree, cfg, rng);
    double gap = std::abs(t.mean_degree() - mean_degree);
    if (gap <= 0.05 * mean_degree) return t;
    if (gap < best_gap) {
      best_gap = gap;
      best = std::move(t);
    }
  }
  if (best_gap <= 0.1 * mean_degree) return best;
  throw GenerationError("LFR realization missed mean degree " + std::to_string(mean_degree) +
                        " by " + std::to_string(best_gap));
}

SocialNetwork assign_edge_weights(const Topology& topology, Rng& rng) {
  std::vector<Edge> edges;
  edges.reserve(topology.edges.size());
  for (auto [u, v] : topology.edges) edges.push_back({u, v, truncated_poisson(3.0, 1, 5, rng)});
  return SocialNetwork(topology.n, std::move(edges));
}

std::vector<Worker> generate_workers(int n, int num_skills, Rng& rng) {
  std::vector<Worker> workers(static_cast<std::size_t>(n));
  std::vector<int> skill_ids(static_cast<std::size_t>(num_skills));
  for (auto& w : workers) {
    w.skills.assign(static_cast<std::size_t>(num_skills), 0);
    int count = truncated_poisson(5.0, 0, num_skills, rng);
    std::iota(skill_ids.begin(), skill_ids.end(), 0);
    // Partial Fisher-Yates: the first `count` ids are a uniform subset.
    int level_sum = 0;
    for (int s = 0; s < count; ++s) {
      int pick = std::uniform_int_distribution<int>(s, num_skills - 1)(rng);
      std::swap(skill_ids[s], skill_ids[pick]);
      int level = truncated_poisson(3.0, 1, 9, rng);
      w.skills[skill_ids[s]] = level;
      level_sum += level;
    }
    w.cost = poisson(level_sum, rng);
  }
  return workers;
}

std::vector<Task> generate_tasks(int m, int mean_skill_count, int mean_skill_level, int b_extra,
                                 int num_skills, Rng& rng) {
  if (mean_skill_count > num_skills) {
    throw std::invalid_argument("mean required-skill count exceeds the number of skill types");
  }
  if (b_extra < 0) throw std::invalid_argument("additional budget must be non-negative");
  std::vector<int> counts(static_cast<std::size_t>(m));
  for (auto& c : counts) c = truncated_poisson(mean_skill_count, 1, num_skills, rng);
  adjust_mean(counts, mean_skill_count, 1, num_skills, rng);

  std::vector<std::vector<int>> chosen(counts.size());
  std::vector<int> skill_ids(static_cast<std::size_t>(num_skills));
  for (std::size_t j = 0; j < counts.size(); ++j) {
    std::iota(skill_ids.begin(), skill_ids.end(), 0);
    for (int s = 0; s < counts[j]; ++s) {
      int pick = std::uniform_int_distribution<int>(s, num_skills - 1)(rng);
      std::swap(skill_ids[s], skill_ids[pick]);
    }
    chosen[j].assign(skill_ids.begin(), skill_ids.begin() + counts[j]);
  }

  std::vector<int> levels;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    for (int s = 0; s < counts[j]; ++s) levels.push_back(truncated_poisson(mean_skill_level, 1, kUnbounded, rng));
  }
  adjust_mean(levels, mean_skill_level, 1, kUnbounded, rng);

  std::vector<Task> tasks(counts.size());
  std::size_t next = 0;
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    tasks[j].required.assign(static_cast<std::size_t>(num_skills), 0);
    int level_sum = 0;
    for (int skill : chosen[j]) {
      tasks[j].required[skill] = levels[next++];
      level_sum += tasks[j].required[skill];
    }
    tasks[j].budget = level_sum + b_extra;
  }
  return tasks;
}

Instance generate_instance(const GenParams& params, const LfrConfig& cfg, std::uint64_t seed) {
  validate(params);
  validate(cfg);
  Rng rng(seed);
  Topology topology = generate_lfr_graph(params.n, params.k, cfg, rng);
  Instance instance;
  instance.network = assign_edge_weights(topology, rng);
  instance.workers = generate_workers(params.n, kSkillTypes, rng);
  instance.tasks = generate_tasks(params.m, params.m_sn, params.m_sl, params.b_extra, kSkillTypes, rng);
  instance.num_skills = kSkillTypes;
  instance.team_limit = params.K;
  instance.provenance = Provenance{params, cfg, seed};
  return instance;
}

}  // namespace teamform::gen
