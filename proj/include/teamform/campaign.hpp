#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teamform/feasibility.hpp"
#include "teamform/io.hpp"
#include "teamform/params.hpp"
#include "teamform/surrogate.hpp"

namespace teamform::campaign {

struct CampaignOptions {
  std::size_t budget = 200;  // total conditions in the log
  std::size_t initial_design = 16;
  /// SA sweeps granted per second of the condition's time limit L, so that L
  /// keeps its meaning under a deterministic budget.
  double sweeps_per_second = 20.0;
  feasibility::SearchLimits feasibility{60.0, 10'000'000, 1'000'000, true};
  std::uint64_t seed = 1;
  /// Acquisition points evaluated per round (constant liar when > 1).
  std::size_t parallel = 1;
  /// Hill-climbing and beta = 0 rows in the cell log.
  bool baselines = true;
  LfrConfig lfr;
  surrogate::AcquisitionConfig acquisition;
  int fit_restarts = 3;
  /// Overrides the wall-clock timestamp column (for reproducible logs).
  std::optional<std::string> timestamp;
};

/// Raised when the initial design produced no feasible condition.
struct CampaignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditionResult {
  feasibility::OutcomeKind outcome = feasibility::OutcomeKind::Infeasible;
  bool feasible = false;
  double value = 0.0;  // best grid cell; 0 when infeasible
  std::vector<io::CellRow> cells;
};

/// Generate, search for an initial solution, then run the 16-cell grid
/// (plus baselines when requested). Deterministic given the seed.
ConditionResult evaluate_condition(const GenParams& params, const CampaignOptions& options, std::uint64_t seed);

/// Seed of the condition at a given log position.
std::uint64_t condition_seed(std::uint64_t campaign_seed, std::size_t index);

/// Appends conditions to the logs until `budget` rows exist. Rows already in
/// the log are kept and never repeated. `progress` receives one line per
/// completed condition.
void run_campaign(const CampaignOptions& options, const std::filesystem::path& log_path,
                  const std::filesystem::path& cell_path,
                  const std::function<void(const std::string&)>& progress = {});

}  // namespace teamform::campaign
