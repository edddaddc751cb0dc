#include "teamform/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace teamform::io {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Sparse encoding of a dense level vector: [[index, level], ...] for level > 0.
json sparse(const std::vector<int>& dense) {
  json out = json::array();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0) out.push_back(json::array({i, dense[i]}));
  }
  return out;
}

std::vector<int> dense(const json& pairs, int num_skills, std::string_view what) {
  std::vector<int> out(static_cast<std::size_t>(num_skills), 0);
  for (const auto& p : pairs) {
    if (!p.is_array() || p.size() != 2) throw FormatError(std::string(what) + ": expected [index, level] pairs");
    const int idx = p[0].get<int>();
    const int level = p[1].get<int>();
    if (idx < 0 || idx >= num_skills) {
      throw FormatError(std::string(what) + ": skill index " + std::to_string(idx) + " out of range");
    }
    if (level < 0) throw FormatError(std::string(what) + ": negative level");
    if (out[static_cast<std::size_t>(idx)] != 0) {
      throw FormatError(std::string(what) + ": skill " + std::to_string(idx) + " listed twice");
    }
    out[static_cast<std::size_t>(idx)] = level;
  }
  return out;
}

json params_json(const GenParams& p) {
  json j = json::object();
  const auto a = p.as_array();
  for (std::size_t d = 0; d < GenParams::kDims; ++d) j[std::string(kParamRanges[d].name)] = a[d];
  return j;
}

GenParams params_from_json(const json& j) {
  std::array<int, GenParams::kDims> a{};
  for (std::size_t d = 0; d < GenParams::kDims; ++d) a[d] = j.at(std::string(kParamRanges[d].name)).get<int>();
  return GenParams::from_array(a);
}

json lfr_json(const LfrConfig& c) {
  return json{{"tau1", c.tau1},
              {"tau2", c.tau2},
              {"mu", c.mu},
              {"min_community", c.min_community},
              {"max_community", c.max_community},
              {"max_degree", c.max_degree}};
}

LfrConfig lfr_from_json(const json& j) {
  LfrConfig c;
  c.tau1 = j.at("tau1").get<double>();
  c.tau2 = j.at("tau2").get<double>();
  c.mu = j.at("mu").get<double>();
  c.min_community = j.at("min_community").get<int>();
  c.max_community = j.at("max_community").get<int>();
  c.max_degree = j.at("max_degree").get<int>();
  return c;
}

// Major version of a "<name>/<major>[.<minor>]" tag; throws on a different name.
int major_version(const json& doc, std::string_view expected) {
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string()) {
    throw FormatError("document has no version tag");
  }
  const auto tag = doc["version"].get<std::string>();
  const auto want = expected.substr(0, expected.find('/'));
  const auto slash = tag.find('/');
  if (slash == std::string::npos || tag.substr(0, slash) != want) {
    throw FormatError("unexpected document type '" + tag + "'");
  }
  const auto number = std::string_view(tag).substr(slash + 1);
  return static_cast<int>(parse_integer(number.substr(0, number.find('.')), "version"));
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double from_nullable(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

void append_line(std::string& out, std::string_view line) {
  out.append(line);
  out.push_back('\n');
}

GenParams params_from_fields(const std::vector<std::string>& f, std::string_view where) {
  std::array<int, GenParams::kDims> a{};
  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    a[d] = static_cast<int>(parse_integer(f[d], std::string(where) + " " + std::string(kParamRanges[d].name)));
  }
  return GenParams::from_array(a);
}

std::string params_fields(const GenParams& p) {
  std::string out;
  for (int v : p.as_array()) {
    out += std::to_string(v);
    out.push_back(',');
  }
  return out;
}

std::vector<std::string> read_table(const std::filesystem::path& path, std::string_view header) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::istringstream in(read_file(path));
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line != header) throw FormatError(path.string() + ": unexpected header '" + line + "'");
      first = false;
      continue;
    }
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

void append_rows(const std::filesystem::path& path, std::string_view header, const std::string& body) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  if (fresh) out << header << '\n';
  out << body;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string(what) + ": '" + s + "' is not a number");
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  const std::string s = trim(text);
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError(std::string(what) + ": '" + s + "' is not an integer");
  }
  return v;
}

// --- Instances ----------------------------------------------------------------------

std::string write_instance(const Instance& instance) {
  instance.validate();
  std::string out = "{\n";
  auto field = [&](std::string_view key, const json& value, bool last = false) {
    out += "  " + json(key).dump() + ": " + value.dump() + (last ? "\n" : ",\n");
  };
  field("version", std::string(kInstanceVersion));
  field("num_skills", instance.num_skills);
  field("team_limit", instance.team_limit);
  if (instance.provenance) {
    field("params", params_json(instance.provenance->params));
    field("lfr", lfr_json(instance.provenance->lfr));
    field("seed", instance.provenance->seed);
  }
  auto list = [&](std::string_view key, const std::vector<json>& items, bool last) {
    out += "  " + json(key).dump() + ": [";
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += (i == 0 ? "\n    " : ",\n    ") + items[i].dump();
    }
    out += items.empty() ? "]" : "\n  ]";
    out += last ? "\n" : ",\n";
  };
  std::vector<json> items;
  for (std::size_t i = 0; i < instance.workers.size(); ++i) {
    const auto& w = instance.workers[i];
    items.push_back(json{{"id", i}, {"cost", w.cost}, {"skills", sparse(w.skills)}});
  }
  list("workers", items, false);
  items.clear();
  for (std::size_t i = 0; i < instance.tasks.size(); ++i) {
    const auto& t = instance.tasks[i];
    items.push_back(json{{"id", i}, {"budget", t.budget}, {"required", sparse(t.required)}});
  }
  list("tasks", items, false);
  items.clear();
  for (const auto& e : instance.network.edges()) items.push_back(json::array({e.u, e.v, e.weight}));
  list("edges", items, true);
  out += "}\n";
  return out;
}

Instance read_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("instance is not valid JSON: ") + e.what());
  }
  const int major = major_version(doc, kInstanceVersion);
  if (major != 1) throw FormatError("unsupported instance version " + doc["version"].get<std::string>());
  try {
    Instance inst;
    inst.num_skills = doc.at("num_skills").get<int>();
    inst.team_limit = doc.at("team_limit").get<int>();
    if (inst.num_skills < 1) throw FormatError("num_skills must be positive");
    const auto& workers = doc.at("workers");
    for (std::size_t i = 0; i < workers.size(); ++i) {
      const auto& w = workers[i];
      if (w.at("id").get<std::size_t>() != i) throw FormatError("worker ids must be 0..n-1 in order");
      inst.workers.push_back(
          Worker{dense(w.at("skills"), inst.num_skills, "worker " + std::to_string(i)), w.at("cost").get<int>()});
    }
    const auto& tasks = doc.at("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      if (t.at("id").get<std::size_t>() != i) throw FormatError("task ids must be 0..m-1 in order");
      inst.tasks.push_back(
          Task{dense(t.at("required"), inst.num_skills, "task " + std::to_string(i)), t.at("budget").get<int>()});
    }
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw FormatError("edges must be [u, v, w] triples");
      edges.push_back(Edge{e[0].get<int>(), e[1].get<int>(), e[2].get<int>()});
    }
    inst.network = SocialNetwork(static_cast<int>(inst.workers.size()), std::move(edges));
    if (doc.contains("params")) {
      Provenance p;
      p.params = params_from_json(doc.at("params"));
      p.lfr = lfr_from_json(doc.at("lfr"));
      p.seed = doc.at("seed").get<std::uint64_t>();
      inst.provenance = p;
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed instance: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid instance: ") + e.what());
  }
}

// --- Solutions ----------------------------------------------------------------------

Solution describe(const Assignment& assignment, const Instance& instance) {
  Solution s;
  s.assignment = assignment;
  s.objective = total_density(assignment, instance.network);
  for (std::size_t j = 0; j < assignment.teams.size(); ++j) {
    const auto& team = assignment.teams[j];
    TeamReport r;
    r.task = static_cast<int>(j);
    r.members = team;
    r.density = density(team, instance.network);
    for (WorkerId w : team) r.cost += instance.workers.at(static_cast<std::size_t>(w)).cost;
    r.cc_diameter = cc_diameter(team, instance.network);
    r.cc_sd = cc_sd(team, instance.network);
    if (auto lead = best_leader(team, instance.network)) {
      r.leader = lead->first;
      r.cc_ld = lead->second;
    }
    s.teams.push_back(r);
  }
  return s;
}

std::string write_solution(const Solution& solution) {
  json teams = json::array();
  for (const auto& t : solution.teams) {
    teams.push_back(json{{"task", t.task},
                         {"members", t.members},
                         {"density", t.density},
                         {"cost", t.cost},
                         {"cc_diameter", finite_or_null(t.cc_diameter)},
                         {"cc_sd", finite_or_null(t.cc_sd)},
                         {"leader", t.leader ? json(*t.leader) : json(nullptr)},
                         {"cc_ld", t.leader ? finite_or_null(t.cc_ld) : json(nullptr)}});
  }
  json doc{{"version", kSolutionVersion}, {"objective", solution.objective}, {"teams", teams}};
  return doc.dump(2) + "\n";
}

Solution read_solution(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("solution is not valid JSON: ") + e.what());
  }
  if (major_version(doc, kSolutionVersion) != 1) throw FormatError("unsupported solution version");
  try {
    Solution s;
    s.objective = doc.at("objective").get<double>();
    for (const auto& t : doc.at("teams")) {
      TeamReport r;
      r.task = t.at("task").get<int>();
      r.members = t.at("members").get<Team>();
      r.density = t.at("density").get<double>();
      r.cost = t.at("cost").get<long>();
      r.cc_diameter = from_nullable(t.at("cc_diameter"));
      r.cc_sd = from_nullable(t.at("cc_sd"));
      if (!t.at("leader").is_null()) {
        r.leader = t.at("leader").get<int>();
        r.cc_ld = from_nullable(t.at("cc_ld"));
      }
      s.assignment.teams.push_back(r.members);
      s.teams.push_back(r);
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed solution: ") + e.what());
  }
}

// --- Tables -------------------------------------------------------------------------

std::string trace_csv(const anneal::OptimizerTrace& trace) {
  std::string out = "level,temperature,best_value,accepts,rejects\n";
  for (std::size_t i = 0; i < trace.levels.size(); ++i) {
    const auto& r = trace.levels[i];
    append_line(out, std::to_string(i) + "," + format_double(r.temperature) + "," + format_double(r.best_value) +
                         "," + std::to_string(r.accepts) + "," + std::to_string(r.rejects));
  }
  return out;
}

std::string grid_csv(const anneal::GridResult& grid) {
  std::string out = "alpha,beta,seed,best_value,best\n";
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& c = grid.cells[i];
    append_line(out, format_double(c.alpha) + "," + format_double(c.beta) + "," + std::to_string(c.seed) + "," +
                         format_double(c.result.best_value) + "," + (i == grid.best ? "1" : "0"));
  }
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// --- Config files -------------------------------------------------------------------

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw FormatError("config line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw FormatError("config line " + std::to_string(lineno) + ": key '" + key + "' repeated");
    }
  }
  return out;
}

void apply_lfr_overrides(const std::map<std::string, std::string>& config, LfrConfig& cfg) {
  if (auto it = config.find("lfr.tau1"); it != config.end()) cfg.tau1 = parse_double(it->second, "lfr.tau1");
  if (auto it = config.find("lfr.tau2"); it != config.end()) cfg.tau2 = parse_double(it->second, "lfr.tau2");
  if (auto it = config.find("lfr.mu"); it != config.end()) cfg.mu = parse_double(it->second, "lfr.mu");
}

void apply_param_overrides(const std::map<std::string, std::string>& config, GenParams& params) {
  auto a = params.as_array();
  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    const std::string key(kParamRanges[d].name);
    if (auto it = config.find(key); it != config.end()) a[d] = static_cast<int>(parse_integer(it->second, key));
  }
  params = GenParams::from_array(a);
}

// --- Observation log ----------------------------------------------------------------

std::string observation_line(const ObservationRow& row) {
  return params_fields(row.params) + format_double(row.value) + "," + (row.feasible ? "1" : "0") + "," +
         std::to_string(row.seed) + "," + row.timestamp;
}

std::vector<ObservationRow> read_observation_log(const std::filesystem::path& path) {
  std::vector<ObservationRow> rows;
  int lineno = 1;
  for (const auto& line : read_table(path, kObservationHeader)) {
    ++lineno;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(lineno);
    if (f.size() != 12) throw FormatError(where + ": expected 12 columns, found " + std::to_string(f.size()));
    ObservationRow r;
    r.params = params_from_fields(f, where);
    r.value = parse_double(f[8], where + " value");
    const auto feasible = parse_integer(f[9], where + " feasible");
    if (feasible != 0 && feasible != 1) throw FormatError(where + ": feasible must be 0 or 1");
    r.feasible = feasible == 1;
    r.seed = static_cast<std::uint64_t>(std::stoull(trim(f[10])));
    r.timestamp = trim(f[11]);
    rows.push_back(r);
  }
  return rows;
}

void append_observation(const std::filesystem::path& path, const ObservationRow& row) {
  append_rows(path, kObservationHeader, observation_line(row) + "\n");
}

std::string cell_line(const CellRow& row) {
  return params_fields(row.params) + std::to_string(row.seed) + "," + row.method + "," + format_double(row.alpha) +
         "," + format_double(row.beta) + "," + format_double(row.value);
}

std::vector<CellRow> read_cell_log(const std::filesystem::path& path) {
  std::vector<CellRow> rows;
  int lineno = 1;
  for (const auto& line : read_table(path, kCellHeader)) {
    ++lineno;
    const auto f = split_csv_line(line);
    const std::string where = path.string() + " row " + std::to_string(lineno);
    if (f.size() != 13) throw FormatError(where + ": expected 13 columns, found " + std::to_string(f.size()));
    CellRow r;
    r.params = params_from_fields(f, where);
    r.seed = static_cast<std::uint64_t>(std::stoull(trim(f[8])));
    r.method = trim(f[9]);
    if (r.method != "sa" && r.method != "hill") throw FormatError(where + ": unknown method '" + r.method + "'");
    r.alpha = parse_double(f[10], where + " alpha");
    r.beta = parse_double(f[11], where + " beta");
    r.value = parse_double(f[12], where + " value");
    rows.push_back(r);
  }
  return rows;
}

void append_cells(const std::filesystem::path& path, const std::vector<CellRow>& rows) {
  std::string body;
  for (const auto& r : rows) append_line(body, cell_line(r));
  append_rows(path, kCellHeader, body);
}

}  // namespace teamform::io
