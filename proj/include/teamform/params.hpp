#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace teamform {

/// The eight experimental parameters, in their canonical order
/// (n, m, K, k, m_SN, m_SL, b', L).
struct GenParams {
  int n = 100;          // workers
  int m = 1;            // tasks
  int K = 10;           // team-size limit
  int k = 10;           // mean degree
  int m_sn = 4;         // mean required-skill count
  int m_sl = 10;        // mean required level
  int b_extra = 100;    // additional budget
  int time_limit = 300; // solver time limit L in seconds

  static constexpr std::size_t kDims = 8;

  std::array<int, kDims> as_array() const { return {n, m, K, k, m_sn, m_sl, b_extra, time_limit}; }
  static GenParams from_array(const std::array<int, kDims>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }

  friend bool operator==(const GenParams&, const GenParams&) = default;
  friend auto operator<=>(const GenParams& a, const GenParams& b) {
    return a.as_array() <=> b.as_array();
  }
};

struct ParamRange {
  std::string_view name;
  int lo;
  int hi;
};

/// Experimental ranges; the time limit is additionally restricted to
/// kTimeLimits.
inline constexpr std::array<ParamRange, GenParams::kDims> kParamRanges{{
    {"n", 100, 1000},
    {"m", 1, 10},
    {"K", 1, 50},
    {"k", 5, 30},
    {"m_SN", 2, 10},
    {"m_SL", 5, 45},
    {"b_extra", 0, 500},
    {"L", 300, 600},
}};

inline constexpr std::array<int, 3> kTimeLimits{300, 450, 600};

/// Throws std::invalid_argument naming the first out-of-range field.
void validate(const GenParams& params);

struct LfrConfig {
  double tau1 = 2.5;  // degree exponent
  double tau2 = 1.5;  // community-size exponent
  double mu = 0.3;    // mixing parameter
  int min_community = 10;
  int max_community = 0;  // 0: n / 4
  int max_degree = 0;     // 0: min(n - 1, 3k)

  friend bool operator==(const LfrConfig&, const LfrConfig&) = default;
};

/// Throws std::invalid_argument unless tau1 > 1, tau2 >= 1 and 0 < mu < 1.
void validate(const LfrConfig& cfg);

/// Where a generated instance came from.
struct Provenance {
  GenParams params;
  LfrConfig lfr;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

}  // namespace teamform
