#pragma once

// Structured config parsing, trajectory serialization (CSV/JSON) and
// deterministic SVG plot emission for the command-line harness.

#include "specfact/experiments.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace specfact {

// Raised for any configuration problem: unknown key, type mismatch, or a
// constraint violation. The message names the key and the line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parsed run request: either a named scenario (the default) or, when
// `single_run` is set (any raw run key present), one direct optimizer run on
// an explicitly described target.
struct ConfigDocument {
  // Scenario mode.
  std::string scenario = "uniform_growth";
  bool full_scale = false;
  double lambda_override = -1.0; // regularized scenario; <0 keeps the default

  // Shared.
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 1;
  bool emit_plots = false;

  // Single-run mode.
  bool single_run = false;
  RunConfig run;
  int target_m = 60;
  int target_n = 70;
  std::vector<double> target_sigma = {8.0, 5.0, 3.0, 1.5, 0.7};

  // One line per resolved key, echoed into run output headers.
  std::vector<std::string> resolution_log;
};

// Parses the strict key=value format: one `key = value` pair per line,
// '#' starts a comment, blank lines ignored. Unknown keys, malformed values
// and constraint violations throw ConfigError naming the key and line.
// An empty document resolves to all defaults (scenario uniform_growth);
// method=SpecSmoothed without beta resolves beta to 1e-8.
ConfigDocument parse_config(const std::string& text);

// CSV columns, in order: step, time, loss, sv_1..sv_r, d_1..d_r, e_1..e_r,
// off_g_fro, xz_perp_fro, active_count, effective_rank, balancedness_drift.
// Reals carry 17 significant digits (parse-back exact).
void write_csv(const TrajectoryLog& log, const std::string& path);
std::string csv_string(const TrajectoryLog& log);

// Full-fidelity JSON: metadata, run header fields and every StepDiagnostics
// including the core matrices; read_json inverts write_json exactly.
void write_json(const TrajectoryLog& log, const std::string& path);
nlohmann::json log_to_json(const TrajectoryLog& log);
TrajectoryLog log_from_json(const nlohmann::json& j);
TrajectoryLog read_json(const std::string& path);

enum class PlotKind { Spectrum, SqrtModes, Loss, Drift, NthRoot };
PlotKind parse_plot_kind(const std::string& name);

// Renders one SVG 1.1 document: one polyline per (log, mode) or per log,
// fixed palette and ordering, labeled axes, legend, log-scale y for Loss.
// Deterministic: the same input yields byte-identical output. Throws
// std::invalid_argument when no log has any record.
std::string render_plot(const std::vector<std::pair<std::string, const TrajectoryLog*>>& logs,
                        PlotKind kind);
void emit_plot(const std::vector<std::pair<std::string, const TrajectoryLog*>>& logs,
               PlotKind kind, const std::string& path);

} // namespace specfact
