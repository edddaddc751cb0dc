#pragma once

#include <string>
#include <utility>
#include <vector>

#include "teamform/io.hpp"
#include "teamform/surrogate.hpp"

namespace teamform::analysis {

/// One observation per condition whose value is the mean of the sa cells at
/// the given alpha over the four grid betas. Conditions missing any of those
/// cells are skipped.
std::vector<surrogate::Observation> alpha_group(const std::vector<io::CellRow>& cells, double alpha);

/// Mean over the four grid alphas at the given beta. beta = 0 uses the
/// no-smoothing baseline rows.
std::vector<surrogate::Observation> beta_group(const std::vector<io::CellRow>& cells, double beta);

/// Best sa cell of each condition (the campaign's evaluation value).
std::vector<surrogate::Observation> grid_best_group(const std::vector<io::CellRow>& cells);

/// Hill-climbing baseline value of each condition.
std::vector<surrogate::Observation> hill_group(const std::vector<io::CellRow>& cells);

/// The `count` largest off-diagonal entries, one per unordered pair, as
/// (row, column) indices in decreasing order of value.
std::vector<std::pair<std::size_t, std::size_t>> top_pairs(const surrogate::Matrix& table, std::size_t count);

}  // namespace teamform::analysis
