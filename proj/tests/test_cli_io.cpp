#include "specfact/cli_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace specfact;

namespace {

TrajectoryLog small_log() {
  const TargetMatrix t = construct_target(6, 7, {3.0, 1.0}, 1);
  RunConfig cfg;
  cfg.method = Method::SpecExact;
  cfg.eta = 0.05;
  cfg.max_steps = 40;
  cfg.seed = 1;
  return run(cfg, t);
}

} // namespace

TEST_CASE("empty config resolves to all defaults") {
  const ConfigDocument doc = parse_config("");
  CHECK(doc.scenario == "uniform_growth");
  CHECK(doc.seed == 0);
  CHECK_FALSE(doc.single_run);
}

TEST_CASE("SpecSmoothed without beta gets the default 1e-8") {
  const ConfigDocument doc = parse_config("method = SpecSmoothed\n");
  CHECK(doc.single_run);
  CHECK(doc.run.beta == 1e-8);
}

TEST_CASE("negative beta is rejected naming the key") {
  try {
    parse_config("method = SpecSmoothed\nbeta = -1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("beta") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unknown keys are rejected with key and line") {
  try {
    parse_config("# a comment\n\nfrobnicate = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("config parses comments, values and constraints") {
  const ConfigDocument doc = parse_config(
      "scenario = basin # trailing comment\n"
      "seed = 42\n"
      "workers = 3\n"
      "full_scale = true\n");
  CHECK(doc.scenario == "basin");
  CHECK(doc.seed == 42);
  CHECK(doc.workers == 3);
  CHECK(doc.full_scale);
  CHECK_THROWS_AS(parse_config("eta = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("method = Adam\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mu = 1.5\n"), ConfigError);
}

TEST_CASE("one-record log serializes to a two-line CSV") {
  TrajectoryLog log = small_log();
  log.records.resize(1);
  const std::string csv = csv_string(log);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(csv.rfind("step,time,loss,sv_1,sv_2,d_1,d_2,e_1,e_2,off_g_fro,", 0) ==
        0);
}

TEST_CASE("CSV reals round-trip within 0 ULP") {
  const TrajectoryLog log = small_log();
  const std::string csv = csv_string(log);
  std::istringstream in(csv);
  std::string header, line;
  std::getline(in, header);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(cells, cell, ',')) {
      values.push_back(std::strtod(cell.c_str(), nullptr));
    }
    const auto& rec = log.records[row];
    CHECK(values[1] == rec.time);
    CHECK(values[2] == rec.loss);
    CHECK(values[3] == rec.product_singular_values(0));
    CHECK(values[5] == rec.core.d(0));
    CHECK(values[7] == rec.core.e(0));
    ++row;
  }
  CHECK(row == log.records.size());
}

TEST_CASE("JSON round-trips the full log") {
  const TrajectoryLog log = small_log();
  const TrajectoryLog back = log_from_json(log_to_json(log));
  CHECK(back.metadata == log.metadata);
  CHECK(back.eta == log.eta);
  CHECK(back.epsilon == log.epsilon);
  CHECK(back.depth == log.depth);
  CHECK((back.sigma - log.sigma).norm() == 0.0);
  REQUIRE(back.records.size() == log.records.size());
  CHECK(csv_string(back) == csv_string(log));
  // Through text as well (shortest-round-trip double formatting).
  const TrajectoryLog text_back =
      log_from_json(nlohmann::json::parse(log_to_json(log).dump()));
  CHECK(csv_string(text_back) == csv_string(log));
}

TEST_CASE("plots are deterministic and validate inputs") {
  const TrajectoryLog log = small_log();
  const std::vector<std::pair<std::string, const TrajectoryLog*>> input = {
      {"run", &log}};
  const std::string a = render_plot(input, PlotKind::Spectrum);
  const std::string b = render_plot(input, PlotKind::Spectrum);
  CHECK(a == b);
  // One polyline per mode (2 here), plus none spurious.
  std::size_t count = 0, pos = 0;
  while ((pos = a.find("<polyline", pos)) != std::string::npos) {
    ++count;
    pos += 9;
  }
  CHECK(count == 2);
  CHECK(a.find("log10(loss)") == std::string::npos);

  const std::string loss_svg = render_plot(input, PlotKind::Loss);
  CHECK(loss_svg.find("log10(loss)") != std::string::npos);

  TrajectoryLog empty;
  const std::vector<std::pair<std::string, const TrajectoryLog*>> bad = {
      {"empty", &empty}};
  CHECK_THROWS_AS(render_plot(bad, PlotKind::Loss), std::invalid_argument);
  CHECK_THROWS_AS(parse_plot_kind("pie"), std::invalid_argument);
  CHECK(parse_plot_kind("nth_root") == PlotKind::NthRoot);
}
