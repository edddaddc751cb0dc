#include "teamform/params.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace teamform {

void validate(const GenParams& params) {
  const auto values = params.as_array();
  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    const auto& range = kParamRanges[d];
    if (values[d] < range.lo || values[d] > range.hi) {
      throw std::invalid_argument(std::string(range.name) + " = " + std::to_string(values[d]) +
                                  " outside [" + std::to_string(range.lo) + ", " +
                                  std::to_string(range.hi) + "]");
    }
  }
  if (std::find(kTimeLimits.begin(), kTimeLimits.end(), params.time_limit) == kTimeLimits.end()) {
    throw std::invalid_argument("L = " + std::to_string(params.time_limit) +
                                " must be one of 300, 450, 600");
  }
}

void validate(const LfrConfig& cfg) {
  if (!(cfg.tau1 > 1.0)) throw std::invalid_argument("lfr.tau1 must exceed 1");
  if (!(cfg.tau2 >= 1.0)) throw std::invalid_argument("lfr.tau2 must be at least 1");
  if (!(cfg.mu > 0.0 && cfg.mu < 1.0)) throw std::invalid_argument("lfr.mu must lie in (0, 1)");
  if (cfg.min_community < 1) throw std::invalid_argument("lfr.min_community must be positive");
  if (cfg.max_community < 0 || cfg.max_degree < 0) {
    throw std::invalid_argument("lfr size overrides must be non-negative");
  }
}

}  // namespace teamform
