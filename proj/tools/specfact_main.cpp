// Command-line harness: runs scenarios or single optimizer configurations,
// serializes trajectory logs to CSV/JSON, and renders SVG plots.
//
// Exit codes: 0 success, 1 config error, 2 numerical divergence,
// 3 scenario check failure under --check.

#include "specfact/cli_io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace specfact;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

PlotKind default_plot_kind(const std::string& scenario) {
  if (scenario == "invariant_drift") return PlotKind::Drift;
  if (scenario == "depth_sweep") return PlotKind::NthRoot;
  return PlotKind::Spectrum;
}

void write_scenario_outputs(const ScenarioResult& result,
                            const std::string& out_dir, bool plots) {
  const fs::path dir = fs::path(out_dir) / result.name;
  fs::create_directories(dir);
  for (const auto& [label, log] : result.logs) {
    write_csv(log, (dir / (label + ".csv")).string());
    write_json(log, (dir / (label + ".json")).string());
    if (plots && !log.records.empty()) {
      emit_plot({{label, &log}}, default_plot_kind(result.name),
                (dir / (label + ".svg")).string());
    }
  }
  nlohmann::json summary = result.summary;
  summary["scenario"] = result.name;
  summary["seed"] = result.seed;
  summary["code_version"] = kCodeVersion;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& check : result.checks) {
    checks.push_back({{"name", check.name},
                      {"pass", check.pass},
                      {"detail", check.detail}});
  }
  summary["checks"] = std::move(checks);
  std::ofstream out(dir / "summary.json", std::ios::binary);
  out << summary.dump(2) << '\n';
}

int run_command(const std::string& config_path, std::string scenario_flag,
                std::optional<std::uint64_t> seed_flag,
                std::string out_flag, bool check) {
  ConfigDocument doc;
  try {
    doc = parse_config(config_path.empty() ? "" : read_file(config_path));
    if (!scenario_flag.empty()) {
      doc.scenario = scenario_flag;
      doc.resolution_log.push_back("scenario = " + scenario_flag + " (--scenario)");
    }
    if (seed_flag) {
      doc.seed = *seed_flag;
      doc.resolution_log.push_back("seed = " + std::to_string(*seed_flag) + " (--seed)");
    }
    if (!out_flag.empty()) {
      doc.out_dir = out_flag;
      doc.resolution_log.push_back("out_dir = " + out_flag + " (--out)");
    }
    if (const char* env = std::getenv("SPECFACT_WORKERS")) {
      const int w = std::atoi(env);
      if (w >= 1) {
        doc.workers = w;
        doc.resolution_log.push_back("workers = " + std::to_string(w) +
                                     " (SPECFACT_WORKERS)");
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  for (const std::string& line : doc.resolution_log) {
    std::cout << "# " << line << '\n';
  }

  try {
    if (doc.single_run) {
      const TargetMatrix target = construct_target(
          doc.target_m, doc.target_n, doc.target_sigma, doc.seed);
      doc.run.seed = doc.seed;
      validate_config(doc.run);
      const TrajectoryLog log = run(doc.run, target);
      fs::create_directories(doc.out_dir);
      const fs::path base = fs::path(doc.out_dir) / "run";
      write_csv(log, base.string() + ".csv");
      write_json(log, base.string() + ".json");
      if (doc.emit_plots) {
        emit_plot({{"run", &log}}, PlotKind::Spectrum, base.string() + ".svg");
      }
      std::cout << "final loss " << log.records.back().loss << " after "
                << log.records.back().step << " steps -> " << base.string()
                << ".{csv,json}\n";
      return 0;
    }

    ScenarioOptions options;
    options.full_scale = doc.full_scale;
    options.workers = doc.workers;
    options.lambda = doc.lambda_override;
    const ScenarioResult result =
        run_scenario(doc.scenario, doc.seed, options);
    write_scenario_outputs(result, doc.out_dir, doc.emit_plots);
    std::cout << "scenario " << result.name << " seed " << result.seed
              << " -> " << (fs::path(doc.out_dir) / result.name).string()
              << '\n';
    int failures = 0;
    for (const auto& c : result.checks) {
      std::cout << "  check " << c.name << ": " << (c.pass ? "pass" : "FAIL");
      if (!c.detail.empty()) std::cout << " (" << c.detail << ')';
      std::cout << '\n';
      if (!c.pass) ++failures;
    }
    if (check && failures > 0) {
      std::cerr << failures << " scenario check(s) failed\n";
      return 3;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return 2;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral-gradient factorization harness"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run a scenario or a single config");
  std::string config_path, scenario_flag, out_flag, seed_text;
  bool check = false;
  run_cmd->add_option("--config", config_path, "config file (key = value)");
  run_cmd->add_option("--scenario", scenario_flag, "scenario name override");
  run_cmd->add_option("--seed", seed_text, "seed override");
  run_cmd->add_option("--out", out_flag, "output directory override");
  run_cmd->add_flag("--check", check, "exit 3 if any scenario check fails");

  auto* list_cmd = app.add_subcommand("list-scenarios", "list scenario names");

  auto* plot_cmd = app.add_subcommand("plot", "render an SVG from a JSON log");
  std::string plot_kind_name, plot_in, plot_out;
  plot_cmd->add_option("--kind", plot_kind_name, "plot kind")->required();
  plot_cmd->add_option("--in", plot_in, "input JSON log")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) {
      for (const ScenarioInfo& info : list_scenarios()) {
        std::cout << info.name << " - " << info.description << '\n';
      }
      return 0;
    }
    if (plot_cmd->parsed()) {
      const TrajectoryLog log = read_json(plot_in);
      emit_plot({{fs::path(plot_in).stem().string(), &log}},
                parse_plot_kind(plot_kind_name), plot_out);
      std::cout << "wrote " << plot_out << '\n';
      return 0;
    }
    std::optional<std::uint64_t> seed_flag;
    if (!seed_text.empty()) seed_flag = std::stoull(seed_text);
    return run_command(config_path, scenario_flag, seed_flag, out_flag, check);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
