#include "teamform/campaign.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <future>
#include <set>

#include "teamform/anneal.hpp"
#include "teamform/gen.hpp"

namespace teamform::campaign {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

surrogate::ParamVector fresh_random(Rng& rng, const std::set<GenParams>& seen) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    auto p = surrogate::random_param_vector(rng);
    if (!seen.contains(p)) return p;
  }
  throw CampaignError("could not draw an unseen parameter vector");
}

// Acquisition batch: refit on the feasible rows, then pick q points, adding a
// constant-liar observation (mean of the feasible values) after each pick.
std::vector<GenParams> acquire(const std::vector<io::ObservationRow>& rows, std::size_t q,
                               const CampaignOptions& options, std::uint64_t round_seed) {
  std::vector<surrogate::Observation> obs;
  std::set<GenParams> distinct;
  double sum = 0.0;
  for (const auto& r : rows) {
    if (!r.feasible) continue;
    obs.push_back({r.params, r.value, true});
    distinct.insert(r.params);
    sum += r.value;
  }
  std::vector<GenParams> history;
  for (const auto& r : rows) history.push_back(r.params);
  std::set<GenParams> seen(history.begin(), history.end());
  Rng rng(round_seed);
  std::vector<GenParams> picks;
  if (distinct.size() < 2) {
    while (picks.size() < q) {
      picks.push_back(fresh_random(rng, seen));
      seen.insert(picks.back());
    }
    return picks;
  }
  surrogate::FitOptions fit;
  fit.restarts = options.fit_restarts;
  fit.seed = derive_seed(round_seed, 1);
  auto model = surrogate::fit_gpr(obs, fit);
  const double lie = sum / static_cast<double>(obs.size());
  for (std::size_t i = 0; i < q; ++i) {
    auto p = surrogate::next_point(model, options.acquisition, history, rng);
    picks.push_back(p);
    history.push_back(p);
    if (i + 1 == q) break;
    obs.push_back({p, lie, true});
    surrogate::Matrix x(static_cast<Eigen::Index>(obs.size()), static_cast<Eigen::Index>(GenParams::kDims));
    surrogate::Vector y(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t r = 0; r < obs.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = surrogate::normalize(obs[r].x).transpose();
      y(static_cast<Eigen::Index>(r)) = obs[r].y;
    }
    model = surrogate::GprModel::with_hyper(x, y, model.hyper());
  }
  return picks;
}

}  // namespace

std::uint64_t condition_seed(std::uint64_t campaign_seed, std::size_t index) {
  return derive_seed(campaign_seed, 1'000'000 + index);
}

ConditionResult evaluate_condition(const GenParams& params, const CampaignOptions& options, std::uint64_t seed) {
  validate(params);
  ConditionResult out;
  Instance inst;
  try {
    inst = gen::generate_instance(params, options.lfr, seed);
  } catch (const gen::GenerationError&) {
    return out;
  }
  Rng feas_rng(derive_seed(seed, 0));
  const auto found = feasibility::find_initial_solution(inst, options.feasibility, feas_rng);
  out.outcome = found.kind;
  if (found.kind != feasibility::OutcomeKind::Feasible) return out;
  out.feasible = true;

  anneal::SaConfig base;
  base.budget = anneal::Budget::sweeps(
      static_cast<std::uint64_t>(std::llround(options.sweeps_per_second * params.time_limit)));
  const auto grid = anneal::grid_search(inst, *found.initial, base, derive_seed(seed, 1));
  out.value = grid.best_cell().result.best_value;
  for (const auto& c : grid.cells) out.cells.push_back({params, seed, "sa", c.alpha, c.beta, c.result.best_value});
  if (options.baselines) {
    for (std::size_t a = 0; a < anneal::kGridAlphas.size(); ++a) {
      anneal::SaConfig cfg = base;
      cfg.alpha = anneal::kGridAlphas[a];
      cfg.beta = 0.0;
      const auto r = anneal::run_sa(inst, *found.initial, cfg, derive_seed(seed, 100 + a));
      out.cells.push_back({params, seed, "sa", cfg.alpha, 0.0, r.best_value});
    }
    const auto hill = anneal::run_hill_climbing(inst, *found.initial, base, derive_seed(seed, 200));
    out.cells.push_back({params, seed, "hill", 0.0, 0.0, hill.best_value});
  }
  return out;
}

namespace {

void require_feasible(const std::vector<io::ObservationRow>& rows) {
  if (std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.feasible; })) {
    throw CampaignError("all " + std::to_string(rows.size()) +
                        " conditions so far are infeasible; the surrogate has nothing to fit");
  }
}

}  // namespace

void run_campaign(const CampaignOptions& options, const std::filesystem::path& log_path,
                  const std::filesystem::path& cell_path, const std::function<void(const std::string&)>& progress) {
  if (options.budget < options.initial_design) {
    throw std::invalid_argument("budget " + std::to_string(options.budget) + " is smaller than the initial design " +
                                std::to_string(options.initial_design));
  }
  if (options.parallel < 1) throw std::invalid_argument("parallel batch size must be at least 1");
  auto rows = io::read_observation_log(log_path);
  std::set<GenParams> seen;
  for (const auto& r : rows) seen.insert(r.params);

  while (rows.size() < options.budget) {
    const std::size_t index = rows.size();
    std::vector<GenParams> batch;
    if (index < options.initial_design) {
      const std::size_t q = std::min(options.parallel, options.initial_design - index);
      for (std::size_t i = 0; i < q; ++i) {
        Rng rng(derive_seed(options.seed, index + i));
        batch.push_back(fresh_random(rng, seen));
        seen.insert(batch.back());
      }
    } else {
      require_feasible(rows);
      const std::size_t q = std::min(options.parallel, options.budget - index);
      batch = acquire(rows, q, options, derive_seed(options.seed, 2'000'000 + index));
      for (const auto& p : batch) seen.insert(p);
    }

    std::vector<ConditionResult> results(batch.size());
    if (batch.size() == 1) {
      results[0] = evaluate_condition(batch[0], options, condition_seed(options.seed, index));
    } else {
      std::vector<std::future<ConditionResult>> jobs;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
          return evaluate_condition(batch[i], options, condition_seed(options.seed, index + i));
        }));
      }
      for (std::size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i].get();
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      io::ObservationRow row;
      row.params = batch[i];
      row.value = results[i].value;
      row.feasible = results[i].feasible;
      row.seed = condition_seed(options.seed, index + i);
      row.timestamp = options.timestamp ? *options.timestamp : utc_now();
      io::append_observation(log_path, row);
      if (!results[i].cells.empty()) io::append_cells(cell_path, results[i].cells);
      rows.push_back(row);
      if (progress) {
        progress("condition " + std::to_string(index + i + 1) + "/" + std::to_string(options.budget) + ": " +
                 std::string(feasibility::to_string(results[i].outcome)) + " value " +
                 io::format_double(results[i].value));
      }
    }
    if (rows.size() >= options.initial_design) require_feasible(rows);
  }
}

}  // namespace teamform::campaign
