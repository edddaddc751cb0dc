#include "teamform/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "teamform/anneal.hpp"

namespace teamform::analysis {

namespace {

using Key = std::pair<GenParams, std::uint64_t>;

bool same(double a, double b) { return std::abs(a - b) < 1e-9; }

template <typename Accept, typename Reduce>
std::vector<surrogate::Observation> collect(const std::vector<io::CellRow>& cells, std::size_t expected,
                                            Accept accept, Reduce reduce) {
  std::map<Key, std::vector<double>> grouped;
  std::vector<Key> order;
  for (const auto& c : cells) {
    if (!accept(c)) continue;
    Key key{c.params, c.seed};
    auto [it, inserted] = grouped.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(c.value);
  }
  std::vector<surrogate::Observation> out;
  for (const auto& key : order) {
    const auto& values = grouped[key];
    if (expected != 0 && values.size() != expected) continue;
    out.push_back({key.first, reduce(values), true});
  }
  return out;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool in_grid_betas(double beta) {
  return std::any_of(anneal::kGridBetas.begin(), anneal::kGridBetas.end(), [&](double b) { return same(b, beta); });
}

bool in_grid_alphas(double alpha) {
  return std::any_of(anneal::kGridAlphas.begin(), anneal::kGridAlphas.end(),
                     [&](double a) { return same(a, alpha); });
}

}  // namespace

std::vector<surrogate::Observation> alpha_group(const std::vector<io::CellRow>& cells, double alpha) {
  return collect(
      cells, anneal::kGridBetas.size(),
      [&](const io::CellRow& c) { return c.method == "sa" && same(c.alpha, alpha) && in_grid_betas(c.beta); }, mean);
}

std::vector<surrogate::Observation> beta_group(const std::vector<io::CellRow>& cells, double beta) {
  return collect(
      cells, anneal::kGridAlphas.size(),
      [&](const io::CellRow& c) { return c.method == "sa" && same(c.beta, beta) && in_grid_alphas(c.alpha); }, mean);
}

std::vector<surrogate::Observation> grid_best_group(const std::vector<io::CellRow>& cells) {
  return collect(
      cells, anneal::kGridAlphas.size() * anneal::kGridBetas.size(),
      [](const io::CellRow& c) { return c.method == "sa" && in_grid_betas(c.beta) && in_grid_alphas(c.alpha); },
      [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); });
}

std::vector<surrogate::Observation> hill_group(const std::vector<io::CellRow>& cells) {
  return collect(
      cells, 1, [](const io::CellRow& c) { return c.method == "hill"; },
      [](const std::vector<double>& v) { return v.front(); });
}

std::vector<std::pair<std::size_t, std::size_t>> top_pairs(const surrogate::Matrix& table, std::size_t count) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> entries;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      if (r != c) entries.emplace_back(table(r, c), static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [value, r, c] : entries) {
    if (out.size() == count) break;
    const bool dup = std::any_of(out.begin(), out.end(), [&, r = r, c = c](const auto& p) {
      return (p.first == r && p.second == c) || (p.first == c && p.second == r);
    });
    if (!dup) out.emplace_back(r, c);
  }
  return out;
}

}  // namespace teamform::analysis
