#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teamform/anneal.hpp"
#include "teamform/model.hpp"
#include "teamform/params.hpp"

namespace teamform::io {

inline constexpr std::string_view kInstanceVersion = "teamform-instance/1";
inline constexpr std::string_view kSolutionVersion = "teamform-solution/1";

/// Malformed or unsupported input document.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: truncates and replaces.
void write_file(const std::filesystem::path& path, std::string_view content);

// --- Instances ----------------------------------------------------------------------

/// JSON document with version, params, seed, workers (sparse skills), tasks
/// (sparse requirements) and edges as (u, v, w) triples. Worker ids are
/// 0-based.
std::string write_instance(const Instance& instance);
/// Throws FormatError on malformed input or an unknown major version.
Instance read_instance(std::string_view text);

// --- Solutions ----------------------------------------------------------------------

struct TeamReport {
  int task = 0;
  Team members;
  double density = 0.0;
  long cost = 0;
  double cc_diameter = 0.0;
  double cc_sd = 0.0;
  std::optional<WorkerId> leader;
  double cc_ld = 0.0;
};

struct Solution {
  Assignment assignment;
  double objective = 0.0;
  std::vector<TeamReport> teams;
};

/// Fills the per-team densities and communication-cost diagnostics.
Solution describe(const Assignment& assignment, const Instance& instance);

std::string write_solution(const Solution& solution);
Solution read_solution(std::string_view text);

// --- Tables -------------------------------------------------------------------------

/// Shortest text that reads back to the same double; "inf" / "-inf" / "nan"
/// for non-finite values.
std::string format_double(double value);

std::string trace_csv(const anneal::OptimizerTrace& trace);
std::string grid_csv(const anneal::GridResult& grid);

/// Splits one CSV line on commas (no quoting is ever produced).
std::vector<std::string> split_csv_line(std::string_view line);

// --- Config files -------------------------------------------------------------------

/// `key = value` lines; `#` starts a comment. Throws FormatError on lines
/// without '=' or on repeated keys.
std::map<std::string, std::string> parse_config(std::string_view text);

/// Applies the lfr.* keys of a config to cfg. Throws FormatError on values
/// that do not parse.
void apply_lfr_overrides(const std::map<std::string, std::string>& config, LfrConfig& cfg);
/// Applies n, m, K, k, m_SN, m_SL, b_extra and L keys.
void apply_param_overrides(const std::map<std::string, std::string>& config, GenParams& params);

double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

// --- Observation log ----------------------------------------------------------------

inline constexpr std::string_view kObservationHeader =
    "n,m,K,k,m_SN,m_SL,b_extra,L,value,feasible,seed,timestamp";

struct ObservationRow {
  GenParams params;
  double value = 0.0;
  bool feasible = false;
  std::uint64_t seed = 0;
  std::string timestamp;
};

std::string observation_line(const ObservationRow& row);
/// Reads a log; a missing file yields an empty log. Throws FormatError on a
/// wrong header or malformed row.
std::vector<ObservationRow> read_observation_log(const std::filesystem::path& path);
/// Appends one row, writing the header first when the file is new.
void append_observation(const std::filesystem::path& path, const ObservationRow& row);

/// Per-cell results of one condition. method is "sa" or "hill"; the hill
/// rows carry alpha = beta = 0 and sa rows with beta = 0 are the
/// no-smoothing baseline.
inline constexpr std::string_view kCellHeader = "n,m,K,k,m_SN,m_SL,b_extra,L,seed,method,alpha,beta,value";

struct CellRow {
  GenParams params;
  std::uint64_t seed = 0;
  std::string method;
  double alpha = 0.0;
  double beta = 0.0;
  double value = 0.0;
};

std::string cell_line(const CellRow& row);
std::vector<CellRow> read_cell_log(const std::filesystem::path& path);
void append_cells(const std::filesystem::path& path, const std::vector<CellRow>& rows);

}  // namespace teamform::io
