#include "specfact/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace specfact {

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& key,
                       const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ", key '" + key +
                    "': " + what);
}

double parse_real(const std::string& value, int line, const std::string& key) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    fail(line, key, "expected a real number, got '" + value + "'");
  }
  if (pos != value.size()) {
    fail(line, key, "trailing characters in real number '" + value + "'");
  }
  return v;
}

long long parse_int(const std::string& value, int line,
                    const std::string& key) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    fail(line, key, "expected an integer, got '" + value + "'");
  }
  if (pos != value.size()) {
    fail(line, key, "trailing characters in integer '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail(line, key, "expected true or false, got '" + value + "'");
}

Method parse_method(const std::string& value, int line,
                    const std::string& key) {
  if (value == "GD") return Method::GD;
  if (value == "SpecExact") return Method::SpecExact;
  if (value == "SpecSmoothed") return Method::SpecSmoothed;
  if (value == "MuonNS") return Method::MuonNS;
  fail(line, key, "unknown method '" + value +
                      "' (expected GD, SpecExact, SpecSmoothed or MuonNS)");
}

std::vector<double> parse_real_list(const std::string& value, int line,
                                    const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, key, "empty entry in list");
    out.push_back(parse_real(item, line, key));
  }
  if (out.empty()) fail(line, key, "expected a comma-separated list");
  return out;
}

} // namespace

ConfigDocument parse_config(const std::string& text) {
  ConfigDocument doc;
  bool beta_given = false;
  int beta_line = 0;

  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const auto hash = raw.find('#');
    std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected key = value, got '" + body + "'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line) +
                        ": empty key");
    }
    if (value.empty()) fail(line, key, "empty value");

    auto note = [&](const std::string& v) {
      doc.resolution_log.push_back(key + " = " + v + " (line " +
                                   std::to_string(line) + ")");
    };

    if (key == "scenario") {
      doc.scenario = value;
    } else if (key == "seed") {
      const long long v = parse_int(value, line, key);
      if (v < 0) fail(line, key, "seed must be non-negative");
      doc.seed = static_cast<std::uint64_t>(v);
    } else if (key == "out_dir") {
      doc.out_dir = value;
    } else if (key == "workers") {
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "workers must be >= 1");
      doc.workers = static_cast<int>(v);
    } else if (key == "full_scale") {
      doc.full_scale = parse_bool(value, line, key);
    } else if (key == "plots") {
      doc.emit_plots = parse_bool(value, line, key);
    } else if (key == "lambda") {
      const double v = parse_real(value, line, key);
      if (v < 0.0) fail(line, key, "lambda must be >= 0");
      doc.lambda_override = v;
      doc.run.lambda = v;
    } else if (key == "method") {
      doc.single_run = true;
      doc.run.method = parse_method(value, line, key);
    } else if (key == "eta") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v <= 0.0) fail(line, key, "eta must be > 0");
      doc.run.eta = v;
    } else if (key == "mu") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v < 0.0 || v >= 1.0) fail(line, key, "mu must lie in [0, 1)");
      doc.run.mu = v;
    } else if (key == "beta") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v < 0.0) fail(line, key, "beta must be >= 0");
      doc.run.beta = v;
      beta_given = true;
      beta_line = line;
    } else if (key == "max_steps") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "max_steps must be >= 1");
      doc.run.max_steps = static_cast<int>(v);
    } else if (key == "stop_loss") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v < 0.0) fail(line, key, "stop_loss must be >= 0");
      doc.run.stop_loss = v;
    } else if (key == "stop_grad_norm") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v < 0.0) fail(line, key, "stop_grad_norm must be >= 0");
      doc.run.stop_grad_norm = v;
    } else if (key == "gamma") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v <= 0.0) fail(line, key, "gamma must be > 0");
      doc.run.init.gamma = v;
    } else if (key == "init") {
      doc.single_run = true;
      if (value == "lora") {
        doc.run.init.kind = InitKind::LoRA;
      } else if (value == "spectral") {
        doc.run.init.kind = InitKind::Spectral;
      } else {
        fail(line, key, "expected lora or spectral, got '" + value + "'");
      }
    } else if (key == "depth") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 2) fail(line, key, "depth must be >= 2");
      doc.run.depth = static_cast<int>(v);
    } else if (key == "rank") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 0) fail(line, key, "rank must be >= 0 (0 = target rank)");
      doc.run.rank = static_cast<int>(v);
    } else if (key == "ns_iterations") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "ns_iterations must be >= 1");
      doc.run.ns_iterations = static_cast<int>(v);
    } else if (key == "log_stride") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "log_stride must be >= 1");
      doc.run.log_stride = static_cast<int>(v);
    } else if (key == "retain_factors") {
      doc.single_run = true;
      doc.run.retain_factors = parse_bool(value, line, key);
    } else if (key == "epsilon_active") {
      doc.single_run = true;
      const double v = parse_real(value, line, key);
      if (v <= 0.0) fail(line, key, "epsilon_active must be > 0");
      doc.run.epsilon_active = v;
    } else if (key == "target_m") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "target_m must be >= 1");
      doc.target_m = static_cast<int>(v);
    } else if (key == "target_n") {
      doc.single_run = true;
      const long long v = parse_int(value, line, key);
      if (v < 1) fail(line, key, "target_n must be >= 1");
      doc.target_n = static_cast<int>(v);
    } else if (key == "target_sigma") {
      doc.single_run = true;
      doc.target_sigma = parse_real_list(value, line, key);
    } else {
      fail(line, key, "unknown key");
    }
    note(value);
  }

  if (doc.single_run) {
    doc.run.seed = doc.seed;
    if (doc.run.method == Method::SpecSmoothed && !beta_given) {
      doc.run.beta = kDefaultBeta;
      doc.resolution_log.push_back("beta = 1e-08 (default for SpecSmoothed)");
    }
    if (doc.run.method == Method::SpecSmoothed && doc.run.beta <= 0.0) {
      fail(beta_line, "beta", "SpecSmoothed requires beta > 0");
    }
    if (doc.run.method != Method::SpecSmoothed && doc.run.beta != 0.0) {
      fail(beta_line, "beta", "beta applies only to SpecSmoothed");
    }
  }
  doc.resolution_log.push_back(
      doc.single_run ? "mode = single run (raw run keys present)"
                     : "mode = scenario '" + doc.scenario + "'");
  return doc;
}

// --- CSV ---------------------------------------------------------------------

std::string csv_string(const TrajectoryLog& log) {
  const int r = static_cast<int>(log.sigma.size());
  std::ostringstream os;
  os << "step,time,loss";
  for (int i = 1; i <= r; ++i) os << ",sv_" << i;
  for (int i = 1; i <= r; ++i) os << ",d_" << i;
  for (int i = 1; i <= r; ++i) os << ",e_" << i;
  os << ",off_g_fro,xz_perp_fro,active_count,effective_rank,"
        "balancedness_drift\n";
  for (const auto& rec : log.records) {
    os << rec.step << ',' << fmt_real(rec.time) << ',' << fmt_real(rec.loss);
    for (int i = 0; i < r; ++i) {
      os << ',' << fmt_real(rec.product_singular_values(i));
    }
    for (int i = 0; i < r; ++i) os << ',' << fmt_real(rec.core.d(i));
    for (int i = 0; i < r; ++i) os << ',' << fmt_real(rec.core.e(i));
    os << ',' << fmt_real(rec.core.off_g_fro) << ','
       << fmt_real(rec.core.xz_perp_fro) << ',' << rec.active_set.size()
       << ',' << fmt_real(rec.effective_rank) << ','
       << fmt_real(rec.balancedness_drift) << '\n';
  }
  return os.str();
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << csv_string(log);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// --- JSON --------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.size();
  if (rows == 0) return Matrix(0, 0);
  const auto cols = j.at(0).size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j.at(i).at(k).get<double>();
    }
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  }
  return v;
}

} // namespace

nlohmann::json log_to_json(const TrajectoryLog& log) {
  nlohmann::json j;
  j["metadata"] = log.metadata;
  j["eta"] = log.eta;
  j["epsilon"] = log.epsilon;
  j["depth"] = log.depth;
  j["sigma"] = vector_to_json(log.sigma);
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : log.records) {
    nlohmann::json r;
    r["step"] = rec.step;
    r["time"] = rec.time;
    r["loss"] = rec.loss;
    r["sv"] = vector_to_json(rec.product_singular_values);
    r["core"] = {{"x", matrix_to_json(rec.core.x)},
                 {"z", matrix_to_json(rec.core.z)},
                 {"z_perp", matrix_to_json(rec.core.z_perp)},
                 {"g", matrix_to_json(rec.core.g)},
                 {"d", vector_to_json(rec.core.d)},
                 {"e", vector_to_json(rec.core.e)},
                 {"off_g_fro", rec.core.off_g_fro},
                 {"xz_perp_fro", rec.core.xz_perp_fro}};
    r["active_set"] = rec.active_set;
    r["effective_rank"] = rec.effective_rank;
    r["balancedness_drift"] = rec.balancedness_drift;
    r["per_factor_fro_norms"] = rec.per_factor_fro_norms;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& snap : log.factor_snapshots) {
    nlohmann::json factors = nlohmann::json::array();
    for (const Matrix& f : snap) factors.push_back(matrix_to_json(f));
    snaps.push_back(std::move(factors));
  }
  j["factor_snapshots"] = std::move(snaps);
  return j;
}

TrajectoryLog log_from_json(const nlohmann::json& j) {
  TrajectoryLog log;
  log.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  log.eta = j.at("eta").get<double>();
  log.epsilon = j.at("epsilon").get<double>();
  log.depth = j.at("depth").get<int>();
  log.sigma = vector_from_json(j.at("sigma"));
  for (const auto& r : j.at("records")) {
    StepDiagnostics rec;
    rec.step = r.at("step").get<int>();
    rec.time = r.at("time").get<double>();
    rec.loss = r.at("loss").get<double>();
    rec.product_singular_values = vector_from_json(r.at("sv"));
    const auto& core = r.at("core");
    rec.core.x = matrix_from_json(core.at("x"));
    rec.core.z = matrix_from_json(core.at("z"));
    rec.core.z_perp = matrix_from_json(core.at("z_perp"));
    rec.core.g = matrix_from_json(core.at("g"));
    rec.core.d = vector_from_json(core.at("d"));
    rec.core.e = vector_from_json(core.at("e"));
    rec.core.off_g_fro = core.at("off_g_fro").get<double>();
    rec.core.xz_perp_fro = core.at("xz_perp_fro").get<double>();
    rec.active_set = r.at("active_set").get<std::vector<int>>();
    rec.effective_rank = r.at("effective_rank").get<double>();
    rec.balancedness_drift = r.at("balancedness_drift").get<double>();
    rec.per_factor_fro_norms =
        r.at("per_factor_fro_norms").get<std::vector<double>>();
    log.records.push_back(std::move(rec));
  }
  for (const auto& snap : j.at("factor_snapshots")) {
    std::vector<Matrix> factors;
    for (const auto& f : snap) factors.push_back(matrix_from_json(f));
    log.factor_snapshots.push_back(std::move(factors));
  }
  return log;
}

void write_json(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << log_to_json(log).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

TrajectoryLog read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  in >> j;
  return log_from_json(j);
}

// --- SVG plots ----------------------------------------------------------------

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "spectrum") return PlotKind::Spectrum;
  if (name == "sqrt_modes") return PlotKind::SqrtModes;
  if (name == "loss") return PlotKind::Loss;
  if (name == "drift") return PlotKind::Drift;
  if (name == "nth_root") return PlotKind::NthRoot;
  throw std::invalid_argument(
      "unknown plot kind '" + name +
      "' (expected spectrum, sqrt_modes, loss, drift or nth_root)");
}

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                          "#bcbd22", "#17becf"};
constexpr int kPaletteSize = 10;

std::string fmt_coord(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::vector<Series> extract_series(
    const std::vector<std::pair<std::string, const TrajectoryLog*>>& logs,
    PlotKind kind) {
  std::vector<Series> series;
  const bool multi = logs.size() > 1;
  for (const auto& [name, log] : logs) {
    const std::string prefix = multi ? name + " " : "";
    const int r = static_cast<int>(log->sigma.size());
    switch (kind) {
      case PlotKind::Spectrum:
      case PlotKind::SqrtModes:
      case PlotKind::NthRoot: {
        for (int i = 0; i < r; ++i) {
          Series s;
          s.label = prefix + "mode " + std::to_string(i + 1);
          for (const auto& rec : log->records) {
            double y;
            if (kind == PlotKind::Spectrum) {
              y = rec.product_singular_values(i);
            } else if (kind == PlotKind::SqrtModes) {
              if (rec.core.d(i) <= 0.0) continue;
              y = std::sqrt(rec.core.d(i));
            } else {
              y = std::pow(rec.product_singular_values(i), 1.0 / log->depth);
            }
            s.points.emplace_back(rec.time, y);
          }
          if (!s.points.empty()) series.push_back(std::move(s));
        }
        break;
      }
      case PlotKind::Loss: {
        Series s;
        s.label = prefix + "loss";
        for (const auto& rec : log->records) {
          if (rec.loss > 0.0) s.points.emplace_back(rec.time, std::log10(rec.loss));
        }
        if (!s.points.empty()) series.push_back(std::move(s));
        break;
      }
      case PlotKind::Drift: {
        Series s;
        s.label = prefix + "drift";
        for (const auto& rec : log->records) {
          s.points.emplace_back(rec.time, rec.balancedness_drift);
        }
        if (!s.points.empty()) series.push_back(std::move(s));
        break;
      }
    }
  }
  return series;
}

const char* y_axis_label(PlotKind kind) {
  switch (kind) {
    case PlotKind::Spectrum: return "singular value";
    case PlotKind::SqrtModes: return "sqrt(d_i)";
    case PlotKind::Loss: return "log10(loss)";
    case PlotKind::Drift: return "balancedness drift";
    case PlotKind::NthRoot: return "sv^(1/L)";
  }
  return "";
}

} // namespace

std::string render_plot(
    const std::vector<std::pair<std::string, const TrajectoryLog*>>& logs,
    PlotKind kind) {
  for (const auto& [name, log] : logs) {
    if (log->records.empty()) {
      throw std::invalid_argument("emit_plot: log '" + name + "' is empty");
    }
  }
  const std::vector<Series> series = extract_series(logs, kind);
  if (series.empty()) {
    throw std::invalid_argument("emit_plot: no plottable data");
  }

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;

  constexpr double kWidth = 720, kHeight = 480;
  constexpr double kLeft = 70, kRight = 180, kTop = 20, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto sy = [&](double y) {
    return kTop + (ymax - y) / (ymax - ymin) * plot_h;
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
        "width=\"720\" height=\"480\" viewBox=\"0 0 720 480\">\n"
     << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n"
     << "<rect x=\"" << fmt_coord(kLeft) << "\" y=\"" << fmt_coord(kTop)
     << "\" width=\"" << fmt_coord(plot_w) << "\" height=\""
     << fmt_coord(plot_h)
     << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Ticks and grid.
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / kTicks;
    const double fy = ymin + (ymax - ymin) * i / kTicks;
    os << "<line x1=\"" << fmt_coord(sx(fx)) << "\" y1=\""
       << fmt_coord(kTop + plot_h) << "\" x2=\"" << fmt_coord(sx(fx))
       << "\" y2=\"" << fmt_coord(kTop + plot_h + 5)
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt_coord(sx(fx)) << "\" y=\""
       << fmt_coord(kTop + plot_h + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_tick(fx)
       << "</text>\n"
       << "<line x1=\"" << fmt_coord(kLeft - 5) << "\" y1=\""
       << fmt_coord(sy(fy)) << "\" x2=\"" << fmt_coord(kLeft) << "\" y2=\""
       << fmt_coord(sy(fy)) << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << fmt_coord(kLeft - 8) << "\" y=\""
       << fmt_coord(sy(fy) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(fy)
       << "</text>\n";
  }

  // Axis labels.
  os << "<text x=\"" << fmt_coord(kLeft + plot_w / 2) << "\" y=\""
     << fmt_coord(kHeight - 10)
     << "\" font-size=\"13\" text-anchor=\"middle\">time</text>\n"
     << "<text x=\"16\" y=\"" << fmt_coord(kTop + plot_h / 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << fmt_coord(kTop + plot_h / 2) << ")\">" << y_axis_label(kind)
     << "</text>\n";

  // Polylines.
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPaletteSize];
    os << "<polyline fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[k].points) {
      os << fmt_coord(sx(x)) << ',' << fmt_coord(sy(y)) << ' ';
    }
    os << "\"/>\n";
  }

  // Legend.
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPaletteSize];
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << fmt_coord(kWidth - kRight + 10) << "\" y1=\""
       << fmt_coord(ly) << "\" x2=\"" << fmt_coord(kWidth - kRight + 34)
       << "\" y2=\"" << fmt_coord(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"1.5\"/>\n"
       << "<text x=\"" << fmt_coord(kWidth - kRight + 40) << "\" y=\""
       << fmt_coord(ly + 4) << "\" font-size=\"11\">" << series[k].label
       << "</text>\n";
  }

  os << "</svg>\n";
  return os.str();
}

void emit_plot(
    const std::vector<std::pair<std::string, const TrajectoryLog*>>& logs,
    PlotKind kind, const std::string& path) {
  const std::string svg = render_plot(logs, kind);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << svg;
  if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace specfact
