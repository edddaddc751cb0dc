#include "teamform/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "teamform/analysis.hpp"
#include "teamform/anneal.hpp"
#include "teamform/campaign.hpp"
#include "teamform/feasibility.hpp"
#include "teamform/gen.hpp"
#include "teamform/io.hpp"
#include "teamform/surrogate.hpp"

namespace teamform::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Keys accepted in --config files across all subcommands.
const std::set<std::string> kConfigKeys = {
    "n",        "m",        "K",           "k",       "m_SN",           "m_SL",
    "b_extra",  "L",        "lfr.tau1",    "lfr.tau2", "lfr.mu",        "alpha",
    "beta",     "budget",   "initial_design", "sweeps_per_second", "feasibility.time_limit",
    "feasibility.node_cap"};

struct Common {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> iters;
  std::optional<double> time_limit;
  std::string out;
  std::string config;
};

void add_common(CLI::App* sub, Common& c, bool budget_flags) {
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  if (budget_flags) {
    auto* iters = sub->add_option("--iters", c.iters, "Deterministic budget: total sweeps over all runs");
    auto* limit = sub->add_option("--time-limit", c.time_limit, "Wall-clock budget in seconds");
    iters->excludes(limit);
  }
  sub->add_option("--config", c.config, "key = value configuration file");
}

std::map<std::string, std::string> load_config(const std::string& path) {
  if (path.empty()) return {};
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  auto cfg = io::parse_config(text);
  for (const auto& [key, value] : cfg) {
    if (!kConfigKeys.contains(key)) throw UsageError("unknown config key '" + key + "' in " + path);
  }
  return cfg;
}

std::string read_input(const std::string& path) {
  try {
    return io::read_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

Instance load_instance(const std::string& path) { return io::read_instance(read_input(path)); }

ordered_json params_json(const GenParams& p) {
  ordered_json j;
  const auto a = p.as_array();
  for (std::size_t d = 0; d < GenParams::kDims; ++d) j[std::string(kParamRanges[d].name)] = a[d];
  return j;
}

ordered_json lfr_json(const LfrConfig& c) {
  return {{"tau1", c.tau1},
          {"tau2", c.tau2},
          {"mu", c.mu},
          {"min_community", c.min_community},
          {"max_community", c.max_community},
          {"max_degree", c.max_degree}};
}

ordered_json sa_json(const anneal::SaConfig& c) {
  ordered_json j{{"alpha", c.alpha},
                 {"beta", c.beta},
                 {"initial_temperature", c.initial_temperature},
                 {"runs", c.runs},
                 {"levels_per_run", c.levels_per_run},
                 {"neighbor_retry_cap", c.neighbor_retry_cap},
                 {"smoothing", c.smoothing}};
  if (c.budget.mode == anneal::Budget::Mode::Iterations) {
    j["budget"] = {{"mode", "iterations"}, {"sweeps", c.budget.iterations}};
  } else {
    j["budget"] = {{"mode", "wall_clock"}, {"seconds", c.budget.seconds}};
  }
  return j;
}

ordered_json manifest_head(std::string_view command, const std::vector<std::string>& args, std::uint64_t seed) {
  ordered_json j;
  j["tool"] = "teamform";
  j["version"] = std::string(kToolVersion);
  j["command"] = std::string(command);
  j["arguments"] = std::vector<std::string>(args.begin() + 1, args.end());
  j["seed"] = seed;
  return j;
}

void write_json(const fs::path& path, const ordered_json& j) { io::write_file(path, j.dump(2) + "\n"); }

int exit_for(feasibility::OutcomeKind kind) {
  switch (kind) {
    case feasibility::OutcomeKind::Feasible:
      return kOk;
    case feasibility::OutcomeKind::Infeasible:
      return kInfeasible;
    case feasibility::OutcomeKind::Timeout:
      return kTimeout;
    case feasibility::OutcomeKind::ResourceExhausted:
      return kResourceExhausted;
  }
  return kInternal;
}

std::string fixed(double v, int digits = 4) {
  if (!std::isfinite(v)) return io::format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- gen ----------------------------------------------------------------------------

struct GenArgs {
  Common common;
  std::optional<int> n, m, K, k, m_sn, m_sl, b_extra;
};

int cmd_gen(const GenArgs& a, const std::vector<std::string>& args) {
  const auto cfg = load_config(a.common.config);
  GenParams p;
  io::apply_param_overrides(cfg, p);
  if (a.n) p.n = *a.n;
  if (a.m) p.m = *a.m;
  if (a.K) p.K = *a.K;
  if (a.k) p.k = *a.k;
  if (a.m_sn) p.m_sn = *a.m_sn;
  if (a.m_sl) p.m_sl = *a.m_sl;
  if (a.b_extra) p.b_extra = *a.b_extra;
  if (a.common.time_limit) {
    const double L = *a.common.time_limit;
    if (L != std::floor(L)) throw UsageError("L must be an integer number of seconds");
    p.time_limit = static_cast<int>(L);
  }
  validate(p);
  LfrConfig lfr;
  io::apply_lfr_overrides(cfg, lfr);
  validate(lfr);
  if (a.common.out.empty()) throw UsageError("--out is required");

  const Instance inst = gen::generate_instance(p, lfr, a.common.seed);
  const fs::path out(a.common.out);
  io::write_file(out, io::write_instance(inst));

  auto m = manifest_head("gen", args, a.common.seed);
  m["params"] = params_json(p);
  m["lfr"] = lfr_json(lfr);
  m["outputs"] = {{"instance", out.string()}};
  m["stats"] = {{"workers", inst.num_workers()},
                {"tasks", inst.num_tasks()},
                {"edges", inst.network.edge_count()},
                {"mean_degree", 2.0 * static_cast<double>(inst.network.edge_count()) / inst.num_workers()}};
  write_json(out.string() + ".manifest.json", m);
  std::cout << "wrote " << out.string() << " (" << inst.num_workers() << " workers, " << inst.num_tasks()
            << " tasks, " << inst.network.edge_count() << " edges)\n";
  return kOk;
}

// --- solve --------------------------------------------------------------------------

struct SolveArgs {
  Common common;
  std::string instance;
  std::optional<double> alpha, beta;
  std::string baseline;
  bool grid = false;
  bool parallel = false;
  bool no_smoothing = false;
  double feas_time_limit = 600.0;
  std::uint64_t node_cap = 100'000'000;
};

int cmd_solve(const SolveArgs& a, const std::vector<std::string>& args) {
  const auto cfg = load_config(a.common.config);
  if (a.common.out.empty()) throw UsageError("--out is required");
  if (!a.baseline.empty() && a.baseline != "hill") throw UsageError("--baseline accepts only 'hill'");
  if (!a.baseline.empty() && a.grid) throw UsageError("--baseline and --grid are mutually exclusive");
  const Instance inst = load_instance(a.instance);

  anneal::SaConfig sa;
  if (auto it = cfg.find("alpha"); it != cfg.end()) sa.alpha = io::parse_double(it->second, "alpha");
  if (auto it = cfg.find("beta"); it != cfg.end()) sa.beta = io::parse_double(it->second, "beta");
  if (a.alpha) sa.alpha = *a.alpha;
  if (a.beta) sa.beta = *a.beta;
  sa.smoothing = !a.no_smoothing;
  const bool wall = a.common.time_limit.has_value();
  if (wall) {
    sa.budget = anneal::Budget::wall_clock(*a.common.time_limit);
  } else if (a.common.iters) {
    sa.budget = anneal::Budget::sweeps(*a.common.iters);
  }
  anneal::validate(sa);

  feasibility::SearchLimits limits;
  limits.time_limit_seconds = a.feas_time_limit;
  limits.node_cap = a.node_cap;
  Rng feas_rng(derive_seed(a.common.seed, 0));
  const auto found = feasibility::find_initial_solution(inst, limits, feas_rng);

  const fs::path out(a.common.out);
  fs::create_directories(out);
  auto m = manifest_head("solve", args, a.common.seed);
  m["instance"] = a.instance;
  if (inst.provenance) {
    m["instance_params"] = params_json(inst.provenance->params);
    m["instance_lfr"] = lfr_json(inst.provenance->lfr);
    m["instance_seed"] = inst.provenance->seed;
  }
  const std::string method = a.grid ? "grid" : (a.baseline == "hill" ? "hill" : "sa");
  m["method"] = method;
  m["sa"] = sa_json(sa);
  if (a.grid) m["grid"] = {{"alphas", anneal::kGridAlphas}, {"betas", anneal::kGridBetas}};
  ordered_json feas{{"outcome", std::string(feasibility::to_string(found.kind))},
                    {"nodes", found.stats.nodes},
                    {"max_depth", found.stats.max_depth},
                    {"node_cap", limits.node_cap},
                    {"time_limit_seconds", limits.time_limit_seconds}};
  if (wall) feas["wall_seconds"] = found.stats.wall_seconds;
  m["feasibility"] = feas;

  if (found.kind != feasibility::OutcomeKind::Feasible) {
    m["outcome"] = {{"status", std::string(feasibility::to_string(found.kind))},
                    {"solution", nullptr},
                    {"note", "no solution: the initial-solution stage did not produce a feasible assignment"}};
    write_json(out / "manifest.json", m);
    std::cerr << "no solution: " << feasibility::to_string(found.kind) << "\n";
    return exit_for(found.kind);
  }

  const std::uint64_t run_seed = derive_seed(a.common.seed, 1);
  anneal::RunResult result;
  ordered_json outputs{{"solution", (out / "solution.json").string()}, {"trace", (out / "trace.csv").string()}};
  if (a.grid) {
    const auto grid = anneal::grid_search(inst, *found.initial, sa, run_seed, a.parallel);
    io::write_file(out / "grid.csv", io::grid_csv(grid));
    outputs["grid"] = (out / "grid.csv").string();
    result = grid.best_cell().result;
    m["grid_best"] = {{"alpha", grid.best_cell().alpha}, {"beta", grid.best_cell().beta}};
  } else if (method == "hill") {
    result = anneal::run_hill_climbing(inst, *found.initial, sa, run_seed);
  } else {
    result = anneal::run_sa(inst, *found.initial, sa, run_seed);
  }
  if (!check_feasible(result.best, inst).feasible()) {
    throw std::logic_error("optimizer returned an assignment that violates the constraints");
  }
  const auto solution = io::describe(result.best, inst);
  io::write_file(out / "solution.json", io::write_solution(solution));
  io::write_file(out / "trace.csv", io::trace_csv(result.trace));
  ordered_json outcome{{"status", "solved"},
                       {"initial_objective", total_density(*found.initial, inst.network)},
                       {"objective", solution.objective}};
  if (wall) outcome["run_seconds"] = result.trace.run_seconds;
  m["outcome"] = outcome;
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
  std::cout << "objective " << io::format_double(solution.objective) << "\n";
  return kOk;
}

// --- oracle -------------------------------------------------------------------------

int cmd_oracle(const Common& c, const std::string& instance_path, const std::vector<std::string>& args) {
  if (c.out.empty()) throw UsageError("--out is required");
  const Instance inst = load_instance(instance_path);
  if (inst.num_workers() > feasibility::kMaxBruteForceWorkers || inst.num_tasks() > feasibility::kMaxBruteForceTasks) {
    throw UsageError("oracle supports at most " + std::to_string(feasibility::kMaxBruteForceWorkers) +
                     " workers and " + std::to_string(feasibility::kMaxBruteForceTasks) + " tasks");
  }
  const auto best = feasibility::brute_force_optimum(inst);
  const fs::path out(c.out);
  fs::create_directories(out);
  ordered_json doc{{"version", "teamform-oracle/1"}, {"feasible", best.feasible}};
  if (best.best) {
    doc["objective"] = best.value;
    doc["teams"] = best.best->teams;
  } else {
    doc["objective"] = nullptr;
    doc["teams"] = nullptr;
  }
  io::write_file(out / "oracle.json", doc.dump(2) + "\n");
  auto m = manifest_head("oracle", args, c.seed);
  m["instance"] = instance_path;
  m["outcome"] = {{"status", best.feasible ? "feasible" : "infeasible"}};
  m["outputs"] = {{"oracle", (out / "oracle.json").string()}};
  write_json(out / "manifest.json", m);
  if (!best.feasible) {
    std::cerr << "no solution: instance is infeasible\n";
    return kInfeasible;
  }
  std::cout << "optimum " << io::format_double(best.value) << "\n";
  return kOk;
}

// --- experiment ---------------------------------------------------------------------

struct ExperimentArgs {
  Common common;
  std::string log;
  std::string cells;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> initial;
  std::optional<double> sweeps_per_second;
  std::size_t parallel = 1;
  bool no_baselines = false;
  std::optional<double> feas_time_limit;
  std::optional<std::uint64_t> node_cap;
  std::string timestamp;
  bool quiet = false;
};

int cmd_experiment(const ExperimentArgs& a, const std::vector<std::string>& args) {
  const auto cfg = load_config(a.common.config);
  campaign::CampaignOptions o;
  o.seed = a.common.seed;
  io::apply_lfr_overrides(cfg, o.lfr);
  validate(o.lfr);
  if (auto it = cfg.find("budget"); it != cfg.end()) o.budget = io::parse_integer(it->second, "budget");
  if (auto it = cfg.find("initial_design"); it != cfg.end()) {
    o.initial_design = io::parse_integer(it->second, "initial_design");
  }
  if (auto it = cfg.find("sweeps_per_second"); it != cfg.end()) {
    o.sweeps_per_second = io::parse_double(it->second, "sweeps_per_second");
  }
  if (auto it = cfg.find("feasibility.time_limit"); it != cfg.end()) {
    o.feasibility.time_limit_seconds = io::parse_double(it->second, "feasibility.time_limit");
  }
  if (auto it = cfg.find("feasibility.node_cap"); it != cfg.end()) {
    o.feasibility.node_cap = io::parse_integer(it->second, "feasibility.node_cap");
  }
  if (a.budget) o.budget = *a.budget;
  if (a.initial) o.initial_design = *a.initial;
  if (a.sweeps_per_second) o.sweeps_per_second = *a.sweeps_per_second;
  if (a.feas_time_limit) o.feasibility.time_limit_seconds = *a.feas_time_limit;
  if (a.node_cap) o.feasibility.node_cap = *a.node_cap;
  if (a.common.iters || a.common.time_limit) {
    throw UsageError("experiment budgets come from each condition's L; use --sweeps-per-second");
  }
  if (!(o.sweeps_per_second > 0.0)) throw UsageError("--sweeps-per-second must be positive");
  if (o.budget < o.initial_design) throw UsageError("--budget must be at least the initial design size");
  o.parallel = a.parallel;
  if (o.parallel < 1) throw UsageError("--parallel must be at least 1");
  o.baselines = !a.no_baselines;
  if (!a.timestamp.empty()) o.timestamp = a.timestamp;

  const fs::path log(a.log);
  const fs::path cells = a.cells.empty() ? fs::path(log.string() + ".cells.csv") : fs::path(a.cells);
  if (log.has_parent_path()) fs::create_directories(log.parent_path());
  if (cells.has_parent_path()) fs::create_directories(cells.parent_path());
  campaign::run_campaign(o, log, cells, [&](const std::string& line) {
    if (!a.quiet) std::cerr << line << "\n";
  });

  auto m = manifest_head("experiment", args, o.seed);
  m["budget"] = o.budget;
  m["initial_design"] = o.initial_design;
  m["sweeps_per_second"] = o.sweeps_per_second;
  m["parallel"] = o.parallel;
  m["baselines"] = o.baselines;
  m["lfr"] = lfr_json(o.lfr);
  m["feasibility"] = {{"time_limit_seconds", o.feasibility.time_limit_seconds},
                      {"node_cap", o.feasibility.node_cap}};
  m["acquisition"] = {{"weight", o.acquisition.weight},
                      {"deduplicate", o.acquisition.deduplicate},
                      {"pool_size", o.acquisition.pool_size}};
  const auto rows = io::read_observation_log(log);
  std::size_t feasible = 0;
  for (const auto& r : rows) feasible += r.feasible ? 1 : 0;
  m["outcome"] = {{"conditions", rows.size()}, {"feasible", feasible}};
  m["outputs"] = {{"log", log.string()}, {"cells", cells.string()}};
  write_json(log.string() + ".manifest.json", m);
  std::cout << rows.size() << " conditions, " << feasible << " feasible\n";
  return kOk;
}

// --- analyze ------------------------------------------------------------------------

struct AnalyzeArgs {
  Common common;
  std::string log;
  std::string cells;
  std::size_t samples = 2000;
  std::size_t curve_levels = 0;
  std::size_t levels = 11;
  std::size_t group_levels = 21;
  int restarts = 5;
  std::size_t min_rows = 10;
};

std::string param_name(std::size_t d) { return std::string(kParamRanges[d].name); }

std::string curve_csv(const std::vector<surrogate::CurvePoint>& curve) {
  std::string out = "value,mean,variance,lower,upper\n";
  for (const auto& p : curve) {
    out += std::to_string(p.value) + "," + io::format_double(p.mean) + "," + io::format_double(p.variance) + "," +
           io::format_double(p.lower) + "," + io::format_double(p.upper) + "\n";
  }
  return out;
}

ordered_json hyper_json(const surrogate::GprModel& model, std::size_t rows) {
  ordered_json ls;
  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    ls[param_name(d)] = model.hyper().lengthscales(static_cast<Eigen::Index>(d));
  }
  return {{"rows", rows},
          {"signal_variance", model.hyper().signal_variance},
          {"noise_variance", model.hyper().noise_variance},
          {"lengthscales", ls},
          {"log_marginal_likelihood", model.log_marginal_likelihood()},
          {"initial_log_marginal_likelihood", model.initial_log_marginal_likelihood()},
          {"jitter", model.jitter()},
          {"degenerate", model.degenerate()},
          {"target_mean", model.target_mean()},
          {"target_scale", model.target_scale()}};
}

int cmd_analyze(const AnalyzeArgs& a, const std::vector<std::string>& args) {
  if (a.common.out.empty()) throw UsageError("--out is required");
  if (a.samples < 1) throw UsageError("--samples must be positive");
  const auto rows = io::read_observation_log(a.log);
  if (rows.empty() && !fs::exists(a.log)) throw UsageError("cannot open " + a.log);
  std::vector<surrogate::Observation> obs;
  for (const auto& r : rows) obs.push_back({r.params, r.value, r.feasible});
  const auto n_feasible = static_cast<std::size_t>(std::count_if(obs.begin(), obs.end(), [](auto& o) { return o.feasible; }));
  if (n_feasible < a.min_rows) {
    throw UsageError("analysis needs at least " + std::to_string(a.min_rows) + " feasible rows; " + a.log + " has " +
                     std::to_string(n_feasible) + " of " + std::to_string(rows.size()));
  }

  const fs::path out(a.common.out);
  fs::create_directories(out);
  const std::uint64_t seed = a.common.seed;
  surrogate::FitOptions fit;
  fit.restarts = a.restarts;
  fit.seed = derive_seed(seed, 0);
  const auto model = surrogate::fit_gpr(obs, fit);

  auto m = manifest_head("analyze", args, seed);
  m["log"] = a.log;
  m["samples"] = a.samples;
  m["curve_levels"] = a.curve_levels;
  m["levels"] = a.levels;
  m["group_levels"] = a.group_levels;
  m["restarts"] = a.restarts;
  ordered_json outputs = ordered_json::array();

  write_json(out / "hyper.json", hyper_json(model, n_feasible));
  outputs.push_back("hyper.json");

  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    Rng rng(derive_seed(seed, 10 + d));
    const auto curve = surrogate::marginal_curve(model, d, a.samples, rng, a.curve_levels);
    const std::string name = "curve_" + std::to_string(d + 1) + "_" + param_name(d) + ".csv";
    io::write_file(out / name, curve_csv(curve));
    outputs.push_back(name);
  }

  Rng matrix_rng(derive_seed(seed, 20));
  const auto table = surrogate::variation_matrix(model, a.samples, matrix_rng, a.levels);
  std::string csv = "p2\\p1";
  for (std::size_t d = 0; d < GenParams::kDims; ++d) csv += "," + param_name(d);
  csv += "\n";
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    csv += param_name(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < table.cols(); ++c) csv += "," + io::format_double(table(r, c));
    csv += "\n";
  }
  io::write_file(out / "variation_matrix.csv", csv);
  outputs.push_back("variation_matrix.csv");

  ordered_json pairs = ordered_json::array();
  std::size_t rank = 0;
  for (const auto& [r, c] : analysis::top_pairs(table, 3)) {
    Rng rng(derive_seed(seed, 30 + rank++));
    const auto h = surrogate::heatmap_grid(model, r, c, a.samples, rng, a.levels);
    std::string hm = param_name(r) + "\\" + param_name(c);
    for (int v : h.col_values) hm += "," + std::to_string(v);
    hm += "\n";
    for (std::size_t i = 0; i < h.row_values.size(); ++i) {
      hm += std::to_string(h.row_values[i]);
      for (std::size_t j = 0; j < h.col_values.size(); ++j) {
        hm += "," + io::format_double(h.mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      hm += "\n";
    }
    const std::string name = "heatmap_" + param_name(r) + "_" + param_name(c) + ".csv";
    io::write_file(out / name, hm);
    outputs.push_back(name);
    pairs.push_back({{"row", param_name(r)}, {"column", param_name(c)}, {"value", table(static_cast<Eigen::Index>(r),
                                                                                       static_cast<Eigen::Index>(c))}});
  }
  m["top_pairs"] = pairs;

  if (!a.cells.empty()) {
    const auto cells = io::read_cell_log(a.cells);
    m["cells"] = a.cells;
    ordered_json groups = ordered_json::object();
    std::uint64_t stream = 100;
    auto group_curves = [&](const std::string& file,
                            const std::vector<std::pair<std::string, std::vector<surrogate::Observation>>>& sets) {
      std::string text = "group,param,value,mean,variance,lower,upper\n";
      bool any = false;
      for (const auto& [label, set] : sets) {
        const std::uint64_t s = stream++;
        std::set<GenParams> distinct;
        for (const auto& o : set) distinct.insert(o.x);
        if (set.size() < a.min_rows || distinct.size() < 2) {
          groups[label] = {{"rows", set.size()}, {"fitted", false}};
          continue;
        }
        surrogate::FitOptions gf = fit;
        gf.seed = derive_seed(seed, s);
        const auto gm = surrogate::fit_gpr(set, gf);
        groups[label] = hyper_json(gm, set.size());
        groups[label]["fitted"] = true;
        for (std::size_t d = 0; d < GenParams::kDims; ++d) {
          Rng rng(derive_seed(derive_seed(seed, s), d));
          for (const auto& p : surrogate::marginal_curve(gm, d, a.samples, rng, a.group_levels)) {
            text += label + "," + param_name(d) + "," + std::to_string(p.value) + "," + io::format_double(p.mean) +
                    "," + io::format_double(p.variance) + "," + io::format_double(p.lower) + "," +
                    io::format_double(p.upper) + "\n";
          }
        }
        any = true;
      }
      if (any) {
        io::write_file(out / file, text);
        outputs.push_back(file);
      }
    };

    std::vector<std::pair<std::string, std::vector<surrogate::Observation>>> by_alpha, by_beta, by_method;
    for (double alpha : anneal::kGridAlphas) {
      by_alpha.emplace_back("alpha=" + io::format_double(alpha), analysis::alpha_group(cells, alpha));
    }
    for (double beta : anneal::kGridBetas) {
      by_beta.emplace_back("beta=" + io::format_double(beta), analysis::beta_group(cells, beta));
    }
    auto zero = analysis::beta_group(cells, 0.0);
    if (!zero.empty()) by_beta.emplace_back("beta=0", std::move(zero));
    by_method.emplace_back("grid_best", analysis::grid_best_group(cells));
    auto hill = analysis::hill_group(cells);
    if (!hill.empty()) by_method.emplace_back("hill", std::move(hill));
    group_curves("curves_by_alpha.csv", by_alpha);
    group_curves("curves_by_beta.csv", by_beta);
    group_curves("curves_by_method.csv", by_method);
    m["groups"] = groups;
  }

  m["hyper"] = hyper_json(model, n_feasible);
  m["outputs"] = outputs;
  write_json(out / "manifest.json", m);
  std::cout << "analysis of " << n_feasible << " feasible rows written to " << out.string() << "\n";
  return kOk;
}

// --- report -------------------------------------------------------------------------

struct ReportArgs {
  Common common;
  std::string log;
  std::string cells;
  std::string analysis;
};

std::string mean_cell(const std::vector<surrogate::Observation>& set) {
  if (set.empty()) return "n/a";
  double s = 0.0;
  for (const auto& o : set) s += o.y;
  return fixed(s / static_cast<double>(set.size()));
}

int cmd_report(const ReportArgs& a) {
  const auto rows = io::read_observation_log(a.log);
  if (rows.empty() && !fs::exists(a.log)) throw UsageError("cannot open " + a.log);
  std::ostringstream md;
  std::size_t feasible = 0;
  for (const auto& r : rows) feasible += r.feasible ? 1 : 0;
  md << "# Campaign report\n\n";
  md << "- Conditions: " << rows.size() << "\n";
  md << "- Feasible: " << feasible;
  if (!rows.empty()) md << " (" << fixed(100.0 * static_cast<double>(feasible) / rows.size(), 1) << "%)";
  md << "\n\n";

  std::vector<const io::ObservationRow*> best;
  for (const auto& r : rows) {
    if (r.feasible) best.push_back(&r);
  }
  std::stable_sort(best.begin(), best.end(), [](auto* x, auto* y) { return x->value > y->value; });
  if (best.size() > 5) best.resize(5);
  if (!best.empty()) {
    md << "## Highest evaluation values\n\n| n | m | K | k | m_SN | m_SL | b_extra | L | value |\n";
    md << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto* r : best) {
      md << "|";
      for (int v : r->params.as_array()) md << " " << v << " |";
      md << " " << fixed(r->value) << " |\n";
    }
    md << "\n";
  }

  if (!a.cells.empty()) {
    const auto cells = io::read_cell_log(a.cells);
    md << "## Cooling ratio\n\nMean over the four smoothing weights of each condition.\n\n";
    md << "| alpha | conditions | mean value | mean value at beta = 0 |\n|---|---|---|---|\n";
    for (double alpha : anneal::kGridAlphas) {
      const auto set = analysis::alpha_group(cells, alpha);
      std::vector<surrogate::Observation> zero;
      for (const auto& c : cells) {
        if (c.method == "sa" && c.beta == 0.0 && std::abs(c.alpha - alpha) < 1e-9) zero.push_back({c.params, c.value, true});
      }
      md << "| " << io::format_double(alpha) << " | " << set.size() << " | " << mean_cell(set) << " | "
         << mean_cell(zero) << " |\n";
    }
    md << "\n## Smoothing weight\n\nMean over the four cooling ratios of each condition.\n\n";
    md << "| beta | conditions | mean value |\n|---|---|---|\n";
    const auto zero = analysis::beta_group(cells, 0.0);
    if (!zero.empty()) md << "| 0 | " << zero.size() << " | " << mean_cell(zero) << " |\n";
    for (double beta : anneal::kGridBetas) {
      const auto set = analysis::beta_group(cells, beta);
      md << "| " << io::format_double(beta) << " | " << set.size() << " | " << mean_cell(set) << " |\n";
    }
    const auto grid = analysis::grid_best_group(cells);
    const auto hill = analysis::hill_group(cells);
    if (!hill.empty() && !grid.empty()) {
      md << "\n## Baseline\n\n| method | conditions | mean value |\n|---|---|---|\n";
      md << "| grid-best annealing | " << grid.size() << " | " << mean_cell(grid) << " |\n";
      md << "| hill climbing | " << hill.size() << " | " << mean_cell(hill) << " |\n";
    }
    md << "\n";
  }

  if (!a.analysis.empty()) {
    const fs::path dir(a.analysis);
    const auto hyper = json::parse(read_input((dir / "hyper.json").string()));
    md << "## Surrogate\n\n";
    md << "- Rows fitted: " << hyper.at("rows").get<std::size_t>() << "\n";
    md << "- Signal variance: " << fixed(hyper.at("signal_variance").get<double>()) << "\n";
    md << "- Noise variance: " << fixed(hyper.at("noise_variance").get<double>(), 6) << "\n";
    md << "- Log marginal likelihood: " << fixed(hyper.at("log_marginal_likelihood").get<double>()) << "\n\n";
    md << "| parameter | lengthscale |\n|---|---|\n";
    for (std::size_t d = 0; d < GenParams::kDims; ++d) {
      md << "| " << param_name(d) << " | " << fixed(hyper.at("lengthscales").at(param_name(d)).get<double>()) << " |\n";
    }
    const auto manifest = json::parse(read_input((dir / "manifest.json").string()));
    if (manifest.contains("top_pairs")) {
      md << "\n### Strongest interactions\n\n| p2 (row) | p1 (column) | max minus average variation |\n|---|---|---|\n";
      for (const auto& p : manifest["top_pairs"]) {
        md << "| " << p.at("row").get<std::string>() << " | " << p.at("column").get<std::string>() << " | "
           << fixed(p.at("value").get<double>()) << " |\n";
      }
    }
    md << "\n";
  }

  if (a.common.out.empty()) {
    std::cout << md.str();
  } else {
    io::write_file(a.common.out, md.str());
  }
  return kOk;
}

}  // namespace

int run(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

int run(const std::vector<std::string>& args) {
  CLI::App app{"Multi-team formation on social networks: generation, solving and surrogate analysis", "teamform"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance");
  add_common(gen, gen_args.common, false);
  gen->add_option("--time-limit,--L", gen_args.common.time_limit, "Solver time limit L recorded in the instance");
  gen->add_option("--out", gen_args.common.out, "Instance file to write")->required();
  gen->add_option("--n", gen_args.n, "Number of workers");
  gen->add_option("--m", gen_args.m, "Number of tasks");
  gen->add_option("--K", gen_args.K, "Team-size limit");
  gen->add_option("--k", gen_args.k, "Mean degree");
  gen->add_option("--m-sn", gen_args.m_sn, "Mean required-skill count");
  gen->add_option("--m-sl", gen_args.m_sl, "Mean required skill level");
  gen->add_option("--b-extra", gen_args.b_extra, "Additional budget");

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Find an initial solution and optimize it");
  add_common(solve, solve_args.common, true);
  solve->add_option("--instance", solve_args.instance, "Instance file")->required();
  solve->add_option("--out", solve_args.common.out, "Output directory")->required();
  solve->add_option("--alpha", solve_args.alpha, "Cooling ratio");
  solve->add_option("--beta", solve_args.beta, "Smoothing weight");
  solve->add_option("--baseline", solve_args.baseline, "Baseline optimizer (hill)");
  solve->add_flag("--grid", solve_args.grid, "Run the 16-cell alpha/beta grid and keep the best");
  solve->add_flag("--parallel", solve_args.parallel, "Run grid cells concurrently");
  solve->add_flag("--no-smoothing", solve_args.no_smoothing, "Disable virtual edge weights");
  solve->add_option("--feas-time-limit", solve_args.feas_time_limit, "Initial-solution search time limit (s)")
      ->capture_default_str();
  solve->add_option("--node-cap", solve_args.node_cap, "Initial-solution search node cap")->capture_default_str();

  Common oracle_common;
  std::string oracle_instance;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive optimum of a small instance");
  add_common(oracle, oracle_common, false);
  oracle->add_option("--instance", oracle_instance, "Instance file")->required();
  oracle->add_option("--out", oracle_common.out, "Output directory")->required();

  ExperimentArgs exp_args;
  auto* exp = app.add_subcommand("experiment", "Run or resume a surrogate-guided campaign");
  add_common(exp, exp_args.common, true);
  exp->add_option("--log,--out", exp_args.log, "Observation log (CSV, appended)")->required();
  exp->add_option("--cells", exp_args.cells, "Per-cell log (default: <log>.cells.csv)");
  exp->add_option("--budget", exp_args.budget, "Total number of conditions");
  exp->add_option("--initial", exp_args.initial, "Random initial design size");
  exp->add_option("--sweeps-per-second", exp_args.sweeps_per_second, "SA sweeps per second of L");
  exp->add_option("--parallel", exp_args.parallel, "Conditions per round (constant liar)")->capture_default_str();
  exp->add_flag("--no-baselines", exp_args.no_baselines, "Skip the hill-climbing and beta = 0 runs");
  exp->add_option("--feas-time-limit", exp_args.feas_time_limit, "Initial-solution search time limit (s)");
  exp->add_option("--node-cap", exp_args.node_cap, "Initial-solution search node cap");
  exp->add_option("--timestamp", exp_args.timestamp, "Fixed value for the timestamp column");
  exp->add_flag("--quiet", exp_args.quiet, "No progress lines");

  AnalyzeArgs an_args;
  auto* analyze = app.add_subcommand("analyze", "Fit the surrogate and write marginal analyses");
  add_common(analyze, an_args.common, false);
  analyze->add_option("--log", an_args.log, "Observation log")->required();
  analyze->add_option("--cells", an_args.cells, "Per-cell log for the alpha/beta analyses");
  analyze->add_option("--out", an_args.common.out, "Output directory")->required();
  analyze->add_option("--samples", an_args.samples, "Monte Carlo samples per point")->capture_default_str();
  analyze->add_option("--curve-levels", an_args.curve_levels, "Levels per marginal curve (0: every integer)")
      ->capture_default_str();
  analyze->add_option("--levels", an_args.levels, "Levels per axis for the variation matrix and heatmaps (0: all)")
      ->capture_default_str();
  analyze->add_option("--group-levels", an_args.group_levels, "Levels per axis for alpha/beta curves (0: all)")
      ->capture_default_str();
  analyze->add_option("--restarts", an_args.restarts, "Hyperparameter fit restarts")->capture_default_str();
  analyze->add_option("--min-rows", an_args.min_rows, "Minimum feasible rows")->capture_default_str();

  ReportArgs rep_args;
  auto* report = app.add_subcommand("report", "Summarize a campaign as Markdown");
  add_common(report, rep_args.common, false);
  report->add_option("--log", rep_args.log, "Observation log")->required();
  report->add_option("--cells", rep_args.cells, "Per-cell log");
  report->add_option("--analysis", rep_args.analysis, "Directory written by analyze");
  report->add_option("--out", rep_args.common.out, "Report file (default: stdout)");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  if (storage.empty()) storage.emplace_back("teamform");
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args, storage);
    if (solve->parsed()) return cmd_solve(solve_args, storage);
    if (oracle->parsed()) return cmd_oracle(oracle_common, oracle_instance, storage);
    if (exp->parsed()) return cmd_experiment(exp_args, storage);
    if (analyze->parsed()) return cmd_analyze(an_args, storage);
    if (report->parsed()) return cmd_report(rep_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const campaign::CampaignError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace teamform::cli
