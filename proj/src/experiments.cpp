#include "specfact/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <sstream>
#include <thread>

namespace specfact {

namespace {

const ScenarioConstants kConstants{};

// --- small shared helpers ---------------------------------------------------

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt_short(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double max_pairwise_gap(const Vector& v) {
  return v.maxCoeff() - v.minCoeff();
}

double final_loss_of(const TrajectoryLog& log) {
  return log.records.back().loss;
}

double min_loss_of(const TrajectoryLog& log) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& rec : log.records) m = std::min(m, rec.loss);
  return m;
}

int steps_to_loss(const TrajectoryLog& log, double level) {
  for (const auto& rec : log.records) {
    if (rec.loss <= level) return rec.step;
  }
  return -1;
}

int monotone_violations(const TrajectoryLog& log, double slack) {
  int count = 0;
  for (std::size_t k = 1; k < log.records.size(); ++k) {
    if (log.records[k].loss > log.records[k - 1].loss + slack) ++count;
  }
  return count;
}

// Worst-case surplus of the diagonal-surrogate error over its alignment
// bound 2(||Off G||_F + ||X Z_perp||_F) + 1e-9, across the whole log.
double surrogate_bound_slack(const TrajectoryLog& log) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& rec : log.records) {
    const double err =
        diagonal_surrogate_error(rec.core, rec.product_singular_values);
    worst = std::max(
        worst, err - 2.0 * (rec.core.off_g_fro + rec.core.xz_perp_fro) - 1e-9);
  }
  return worst;
}

// Max deviation of the loss from 1/2(||G - Sigma||_F^2 + ||X Z_perp||_F^2).
double loss_identity_deviation(const TrajectoryLog& log) {
  double worst = 0.0;
  for (const auto& rec : log.records) {
    Matrix gap = rec.core.g;
    for (int i = 0; i < log.sigma.size(); ++i) gap(i, i) -= log.sigma(i);
    const double identity =
        0.5 * (gap.squaredNorm() +
               rec.core.xz_perp_fro * rec.core.xz_perp_fro);
    worst = std::max(worst, std::abs(rec.loss - identity));
  }
  return worst;
}

// Slope gap of sqrt(d_i) over the all-active window; NaN if no window.
double growth_slope_gap(const TrajectoryLog& log) {
  const auto [begin, end] = active_window(log, log.epsilon);
  if (end - begin < 3) return std::numeric_limits<double>::quiet_NaN();
  return max_pairwise_gap(sqrt_coordinate_slopes(log, begin, end));
}

// R^2 of the log-loss fit over the trailing records with loss within a
// factor 10 of the final loss.
double loss_tail_r2(const TrajectoryLog& log) {
  const double level = 10.0 * final_loss_of(log);
  int begin = static_cast<int>(log.records.size());
  while (begin > 0 && log.records[begin - 1].loss <= level &&
         log.records[begin - 1].loss > 0.0) {
    --begin;
  }
  std::vector<double> t, y;
  for (std::size_t k = begin; k < log.records.size(); ++k) {
    t.push_back(log.records[k].time);
    y.push_back(std::log(log.records[k].loss));
  }
  if (t.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  return fit_line(t, y).r_squared;
}

std::string order_to_string(const std::vector<int>& order) {
  std::ostringstream os;
  for (std::size_t i = 0; i < order.size(); ++i) {
    os << (i ? "," : "") << order[i];
  }
  return os.str();
}

void add_check(ScenarioResult& result, const std::string& name, bool pass,
               const std::string& detail) {
  result.checks.push_back({name, pass, detail});
}

RunConfig growth_config(Method method, std::uint64_t seed) {
  const auto& c = kConstants;
  RunConfig cfg;
  cfg.method = method;
  cfg.eta = c.ug_eta;
  cfg.beta = method == Method::SpecSmoothed ? c.ug_beta : 0.0;
  cfg.max_steps = c.ug_max_steps;
  cfg.stop_loss = c.ug_stop_loss;
  cfg.seed = seed;
  cfg.init.kind = InitKind::LoRA;
  cfg.init.gamma = c.ug_gamma;
  return cfg;
}

TargetMatrix growth_target(std::uint64_t seed) {
  const auto& c = kConstants;
  return construct_target(c.ug_m, c.ug_n, c.ug_sigma, seed);
}

// --- scenarios ---------------------------------------------------------------

ScenarioResult scenario_uniform_growth(std::uint64_t seed,
                                       const ScenarioOptions&) {
  const auto& c = kConstants;
  const TargetMatrix target = growth_target(seed);
  ScenarioResult result;

  RunConfig exact = growth_config(Method::SpecExact, seed);
  RunConfig smoothed = growth_config(Method::SpecSmoothed, seed);
  smoothed.max_steps = c.comparison_max_steps;
  RunConfig gd = growth_config(Method::GD, seed);
  gd.max_steps = c.comparison_max_steps;

  result.logs["SpecExact"] = run(exact, target);
  result.logs["SpecSmoothed"] = run(smoothed, target);
  result.logs["GD"] = run(gd, target);

  nlohmann::json& s = result.summary;
  for (const auto& [name, log] : result.logs) {
    s[name]["final_loss"] = final_loss_of(log);
    s[name]["min_loss"] = min_loss_of(log);
    s[name]["steps_to_stop_loss"] = steps_to_loss(log, c.ug_stop_loss);
    s[name]["monotone_violations"] = monotone_violations(log, 1e-9);
    s[name]["surrogate_bound_slack"] = surrogate_bound_slack(log);
    s[name]["loss_identity_deviation"] = loss_identity_deviation(log);
    const auto order = convergence_order(log, log.epsilon);
    s[name]["order"] = order_to_string(order.order);
    s[name]["non_converged_modes"] =
        static_cast<int>(order.non_converged.size());
    if (name != "GD") s[name]["slope_gap"] = growth_slope_gap(log);
  }

  // GD mode-speed dispersion over the same all-active window.
  {
    const TrajectoryLog& log = result.logs.at("GD");
    const auto [begin, end] = active_window(log, log.epsilon);
    if (end - begin >= 3) {
      const Vector slopes = sqrt_coordinate_slopes(log, begin, end);
      s["GD"]["slope_ratio"] = slopes.maxCoeff() / slopes.minCoeff();
    }
  }

  // Alignment sup-norms along the smoothed run.
  {
    const TrajectoryLog& log = result.logs.at("SpecSmoothed");
    double sup_off = 0.0, sup_xzp = 0.0;
    for (const auto& rec : log.records) {
      sup_off = std::max(sup_off, rec.core.off_g_fro);
      sup_xzp = std::max(sup_xzp, rec.core.xz_perp_fro);
    }
    s["SpecSmoothed"]["sup_off_g_fro"] = sup_off;
    s["SpecSmoothed"]["sup_xz_perp_fro"] = sup_xzp;
    s["SpecSmoothed"]["loss_tail_r2"] = loss_tail_r2(log);
  }

  add_check(result, "spec_exact_smallest_first",
            s["SpecExact"]["order"] == "5,4,3,2,1",
            "order=" + s["SpecExact"]["order"].get<std::string>());
  add_check(result, "gd_largest_first", s["GD"]["order"] == "1,2,3,4,5",
            "order=" + s["GD"]["order"].get<std::string>());
  const int sm_steps = s["SpecSmoothed"]["steps_to_stop_loss"].get<int>();
  const int gd_steps = s["GD"]["steps_to_stop_loss"].get<int>();
  add_check(result, "smoothed_faster_than_gd_to_1e-6",
            sm_steps >= 0 && (gd_steps < 0 || sm_steps < gd_steps),
            "smoothed=" + std::to_string(sm_steps) +
                " gd=" + std::to_string(gd_steps));
  return result;
}

ScenarioResult scenario_momentum_sweep(std::uint64_t seed, Method method) {
  const auto& c = kConstants;
  const TargetMatrix target = growth_target(seed);
  ScenarioResult result;
  bool all_gap_ok = true;
  for (double mu : c.momentum_grid) {
    RunConfig cfg = growth_config(method, seed);
    cfg.mu = mu;
    std::ostringstream key;
    key << "mu_" << mu;
    nlohmann::json& s = result.summary[key.str()];
    try {
      TrajectoryLog log = run(cfg, target);
      s["diverged"] = false;
      s["final_loss"] = final_loss_of(log);
      s["min_loss"] = min_loss_of(log);
      const double gap = growth_slope_gap(log);
      s["slope_gap"] = gap;
      all_gap_ok = all_gap_ok && gap <= c.slope_gap_sweep;
      result.logs[key.str()] = std::move(log);
    } catch (const DivergenceError& e) {
      // Large-momentum divergence is recorded, not fatal.
      s["diverged"] = true;
      s["diverged_at_step"] = e.step_index;
      all_gap_ok = false;
    }
  }
  add_check(result, "slope_gap_le_0.2_all_mu", all_gap_ok, "");
  return result;
}

ScenarioResult scenario_rank_sweep(std::uint64_t seed,
                                   const ScenarioOptions& options) {
  const auto& c = kConstants;
  const TargetMatrix target = growth_target(seed);
  ScenarioResult result;
  bool all_ok = true;
  std::vector<std::pair<int, TrajectoryLog>> logs(c.rank_grid.size());
  parallel_for(static_cast<int>(c.rank_grid.size()), options.workers,
               [&](int i) {
                 const int r = c.rank_grid[i];
                 double floor = 0.0;
                 for (int j = r; j < target.rank_star(); ++j) {
                   floor += 0.5 * target.sigma(j) * target.sigma(j);
                 }
                 RunConfig cfg = growth_config(Method::SpecSmoothed, seed);
                 cfg.eta = c.sweep_eta;
                 cfg.beta = c.sweep_beta;
                 cfg.rank = r;
                 cfg.stop_loss = floor + 1e-8;
                 cfg.max_steps = c.sweep_max_steps;
                 cfg.log_stride = 10;
                 logs[i] = {r, run(cfg, target)};
               });
  for (auto& [r, log] : logs) {
    double floor = 0.0;
    for (int j = r; j < target.rank_star(); ++j) {
      floor += 0.5 * target.sigma(j) * target.sigma(j);
    }
    const std::string key = "r_" + std::to_string(r);
    nlohmann::json& s = result.summary[key];
    s["final_loss"] = final_loss_of(log);
    s["eckart_young_floor"] = floor;
    s["loss_gap_to_floor"] = final_loss_of(log) - floor;
    s["top_singular_value"] = log.records.back().product_singular_values(0);
    // ||AB - Y_r||_F^2 = ||AB - Y||_F^2 - ||Y - Y_r||_F^2 once the product
    // is supported on the top-r singular subspaces, which the converged
    // runs satisfy to well below the reported tolerance.
    const double res_sq = 2.0 * final_loss_of(log); // ||AB - Y||_F^2
    const double tail_sq = 2.0 * floor;             // ||Y - Y_r||_F^2
    const double dist = std::sqrt(std::max(0.0, res_sq - tail_sq));
    s["distance_to_best_rank_r"] = dist;
    all_ok = all_ok && dist <= 1e-3 &&
             std::abs(final_loss_of(log) - floor) <= 1e-3;
    result.logs[key] = std::move(log);
  }
  add_check(result, "best_rank_r_within_1e-3", all_ok, "");
  return result;
}

ScenarioResult scenario_depth_sweep(std::uint64_t seed,
                                    const ScenarioOptions& options) {
  const auto& c = kConstants;
  const TargetMatrix target = growth_target(seed);
  const int r_star = target.rank_star();
  const double eps = kActiveEpsilonFraction * target.sigma(r_star - 1);
  ScenarioResult result;
  bool all_ok = true;
  std::vector<TrajectoryLog> logs(c.depth_grid.size());
  parallel_for(static_cast<int>(c.depth_grid.size()), options.workers,
               [&](int i) {
                 RunConfig cfg = growth_config(Method::SpecExact, seed);
                 cfg.depth = c.depth_grid[i];
                 cfg.max_steps = c.depth_max_steps;
                 cfg.stop_loss = 1e-9;
                 logs[i] = run(cfg, target);
               });
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const int depth = c.depth_grid[i];
    TrajectoryLog& log = logs[i];
    // Active window on the product spectrum: every mode still below its
    // target by eps and all modes clear of the initialization scale.
    auto in_window = [&](const StepDiagnostics& rec) {
      for (int k = 0; k < r_star; ++k) {
        const double sv = rec.product_singular_values(k);
        if (!(sv <= target.sigma(k) - eps)) return false;
        if (!(sv >= 1e-3)) return false;
      }
      return true;
    };
    int begin = 0;
    const int n = static_cast<int>(log.records.size());
    while (begin < n && !in_window(log.records[begin])) ++begin;
    int end = begin;
    while (end < n && in_window(log.records[end])) ++end;

    Vector slopes(r_star);
    double min_r2 = 1.0;
    if (end - begin >= 3) {
      std::vector<double> t(end - begin), y(end - begin);
      for (int k = 0; k < r_star; ++k) {
        for (int j = begin; j < end; ++j) {
          t[j - begin] = log.records[j].time;
          y[j - begin] = std::pow(log.records[j].product_singular_values(k),
                                  1.0 / depth);
        }
        const LineFit fit = fit_line(t, y);
        slopes(k) = fit.slope;
        min_r2 = std::min(min_r2, fit.r_squared);
      }
    } else {
      slopes.setConstant(std::numeric_limits<double>::quiet_NaN());
      min_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    const std::string key = "L_" + std::to_string(depth);
    result.summary[key]["window_records"] = end - begin;
    result.summary[key]["slope_gap"] = max_pairwise_gap(slopes);
    result.summary[key]["min_r2"] = min_r2;
    result.summary[key]["final_loss"] = final_loss_of(log);
    all_ok = all_ok && min_r2 >= c.r2_depth &&
             max_pairwise_gap(slopes) <= c.slope_gap_sweep;
    result.logs[key] = std::move(log);
  }
  add_check(result, "nth_root_linear_uniform", all_ok, "");
  return result;
}

ScenarioResult scenario_basin(std::uint64_t seed,
                              const ScenarioOptions& options) {
  const auto& c = kConstants;
  const int bases =
      options.full_scale ? c.basin_bases_full : c.basin_bases_ci;
  const int perturbations = options.full_scale ? c.basin_perturbations_full
                                               : c.basin_perturbations_ci;
  const TargetMatrix target =
      construct_target(c.basin_m, c.basin_n, c.basin_sigma, seed);

  RunConfig base_cfg;
  base_cfg.method = Method::SpecSmoothed;
  base_cfg.eta = c.basin_eta;
  base_cfg.beta = c.basin_beta;
  base_cfg.rank = c.basin_rank;
  base_cfg.max_steps = c.basin_max_steps;
  base_cfg.stop_loss = c.basin_converged_loss;
  base_cfg.init.kind = InitKind::LoRA;
  base_cfg.init.gamma = c.basin_gamma;
  base_cfg.log_stride = 100000;
  base_cfg.retain_factors = true;

  ScenarioResult result;
  std::vector<BasinRun> runs;
  nlohmann::json base_stats = nlohmann::json::array();

  for (int b = 0; b < bases; ++b) {
    RunConfig cfg = base_cfg;
    cfg.seed = seed + 17 * static_cast<std::uint64_t>(b);
    const FactorState start = initialize(cfg, target);
    const TrajectoryLog log = run(cfg, target);
    if (final_loss_of(log) > c.basin_converged_loss) {
      throw std::runtime_error(
          "basin: base run " + std::to_string(b) +
          " failed to converge (loss " + std::to_string(final_loss_of(log)) +
          ")");
    }
    const std::vector<Matrix>& minimum = log.factor_snapshots.back();
    const double radius = std::sqrt(
        (minimum[0] - start.factors[0]).squaredNorm() +
        (minimum[1] - start.factors[1]).squaredNorm());
    base_stats.push_back({{"final_loss", final_loss_of(log)},
                          {"radius", radius},
                          {"steps", log.records.back().step}});

    std::vector<BasinRun> local(perturbations);
    parallel_for(perturbations, options.workers, [&](int k) {
      const std::uint64_t pseed =
          seed + 1000 * static_cast<std::uint64_t>(b + 1) +
          static_cast<std::uint64_t>(k);
      Matrix da = sample_gaussian(static_cast<int>(minimum[0].rows()),
                                  static_cast<int>(minimum[0].cols()), pseed);
      Matrix db = sample_gaussian(static_cast<int>(minimum[1].rows()),
                                  static_cast<int>(minimum[1].cols()),
                                  pseed + 500000);
      const double norm =
          std::sqrt(da.squaredNorm() + db.squaredNorm());
      da *= radius / norm;
      db *= radius / norm;

      RunConfig pcfg = base_cfg;
      pcfg.seed = pseed;
      pcfg.init.kind = InitKind::Explicit;
      pcfg.init.explicit_factors = {minimum[0] + da, minimum[1] + db};
      const TrajectoryLog plog = run(pcfg, target);
      const std::vector<Matrix>& end = plog.factor_snapshots.back();
      BasinRun br;
      br.final_loss = final_loss_of(plog);
      br.converged = br.final_loss <= c.basin_converged_loss;
      // Distance to the unperturbed minimum, before and after the restart.
      br.initial_distance = radius;
      br.final_distance =
          std::sqrt((end[0] - minimum[0]).squaredNorm() +
                    (end[1] - minimum[1]).squaredNorm());
      br.decrement = br.initial_distance - br.final_distance;
      local[k] = br;
    });
    runs.insert(runs.end(), local.begin(), local.end());
  }

  bool all_converged = true, all_decrement_positive = true;
  nlohmann::json per_run = nlohmann::json::array();
  for (const BasinRun& r : runs) {
    all_converged = all_converged && r.converged;
    all_decrement_positive = all_decrement_positive && r.decrement > 0.0;
    per_run.push_back({{"converged", r.converged},
                       {"final_loss", r.final_loss},
                       {"initial_distance", r.initial_distance},
                       {"final_distance", r.final_distance},
                       {"decrement", r.decrement}});
  }
  result.summary["bases"] = bases;
  result.summary["perturbations_per_base"] = perturbations;
  result.summary["base_runs"] = base_stats;
  result.summary["perturbed_runs"] = per_run;
  result.summary["all_converged"] = all_converged;
  result.summary["all_decrement_positive"] = all_decrement_positive;
  add_check(result, "all_perturbed_converged", all_converged, "");
  add_check(result, "all_decrements_positive", all_decrement_positive, "");
  return result;
}

ScenarioResult scenario_invariant_drift(std::uint64_t seed,
                                        const ScenarioOptions&) {
  const auto& c = kConstants;
  ScenarioResult result;
  nlohmann::json& s = result.summary;

  // Asymmetric two-block start inside a rank-3 target on identity-aligned
  // bases, padded to 4x4 so the orthogonalized flow differs from plain GD.
  const int dim = 4, r_pad = 3, r_run = 2;
  Matrix u = Matrix::Identity(dim, dim).leftCols(r_pad);
  Vector sig = Eigen::Map<const Vector>(c.drift_sigma_list.data(), r_pad);
  const TargetMatrix block_target = make_target_from_svd(u, sig, u, seed);

  Matrix a0 = Matrix::Zero(dim, r_run);
  a0(0, 0) = a0(1, 1) = c.drift_a;
  Matrix b0 = Matrix::Zero(r_run, dim);
  b0(0, 0) = b0(1, 1) = c.drift_b;

  auto block_run = [&](Method method) {
    RunConfig cfg;
    cfg.method = method;
    cfg.eta = c.drift_eta;
    cfg.beta = method == Method::SpecSmoothed ? c.ug_beta : 0.0;
    cfg.max_steps = c.drift_steps;
    cfg.rank = r_run;
    cfg.seed = seed;
    cfg.init.kind = InitKind::Explicit;
    cfg.init.explicit_factors = {a0, b0};
    cfg.retain_factors = true;
    return run(cfg, block_target);
  };
  auto max_drift = [](const TrajectoryLog& log) {
    double m = 0.0;
    for (const auto& rec : log.records) {
      m = std::max(m, rec.balancedness_drift);
    }
    return m;
  };

  result.logs["block_GD"] = block_run(Method::GD);
  result.logs["block_SpecSmoothed"] = block_run(Method::SpecSmoothed);
  const double gd_drift = max_drift(result.logs.at("block_GD"));
  const double spec_drift = max_drift(result.logs.at("block_SpecSmoothed"));
  s["block"]["gd_max_drift"] = gd_drift;
  s["block"]["spec_max_drift"] = spec_drift;
  s["block"]["ratio"] = gd_drift > 0.0
                            ? spec_drift / gd_drift
                            : std::numeric_limits<double>::infinity();

  // One-step drift against the closed-form instantaneous rate
  // 2 a b (a b - sigma) (1/sqrt(b^2(ab-sigma)^2 + beta) -
  //                      1/sqrt(a^2(ab-sigma)^2 + beta)).
  {
    const double a = c.drift_a, b = c.drift_b, sg = c.drift_sigma;
    const double gap = a * b - sg, beta = c.ug_beta;
    const double rate =
        std::abs(2.0 * a * b * gap *
                 (1.0 / std::sqrt(b * b * gap * gap + beta) -
                  1.0 / std::sqrt(a * a * gap * gap + beta)));
    const TrajectoryLog& log = result.logs.at("block_SpecSmoothed");
    const double first = log.records[1].balancedness_drift;
    s["block"]["one_step_drift"] = first;
    s["block"]["closed_form_rate"] = rate;
    s["block"]["one_step_ge_eta_rate"] = first >= c.drift_eta * rate;
  }

  // Symmetric start: the drift rate vanishes identically.
  {
    Matrix as = Matrix::Zero(dim, r_run);
    as(0, 0) = as(1, 1) = 1.0;
    Matrix bs = Matrix::Zero(r_run, dim);
    bs(0, 0) = bs(1, 1) = 1.0;
    RunConfig cfg;
    cfg.method = Method::SpecSmoothed;
    cfg.eta = c.drift_eta;
    cfg.beta = c.ug_beta;
    cfg.max_steps = 1;
    cfg.rank = r_run;
    cfg.seed = seed;
    cfg.init.kind = InitKind::Explicit;
    cfg.init.explicit_factors = {as, bs};
    const TrajectoryLog log = run(cfg, block_target);
    s["symmetric_one_step_drift_rate"] =
        log.records.back().balancedness_drift / c.drift_eta;
  }

  // Zero-init contrast on the reference target.
  {
    const TargetMatrix target = growth_target(seed);
    for (Method method : {Method::GD, Method::SpecSmoothed}) {
      RunConfig cfg = growth_config(method, seed);
      cfg.eta = c.drift_eta_lora;
      cfg.max_steps = c.drift_steps;
      cfg.stop_loss = 0.0;
      const TrajectoryLog log = run(cfg, target);
      s["lora"][method_name(method)]["max_drift"] = max_drift(log);
      result.logs["lora_" + method_name(method)] = log;
    }
  }

  add_check(result, "gd_drift_le_1e-6", gd_drift <= 1e-6,
            "gd_drift=" + fmt_short(gd_drift));
  add_check(result, "spec_drift_ratio_ge_100",
            spec_drift >= c.drift_ratio * gd_drift, "");
  add_check(result, "symmetric_rate_le_1e-9",
            s["symmetric_one_step_drift_rate"].get<double>() <= 1e-9, "");
  return result;
}

ScenarioResult scenario_regularized(std::uint64_t seed,
                                    const ScenarioOptions& options) {
  const auto& c = kConstants;
  const TargetMatrix target = growth_target(seed);
  ScenarioResult result;

  auto reg_run = [&](double lambda, const std::string& key) {
    RunConfig cfg = growth_config(Method::SpecSmoothed, seed);
    cfg.eta = c.sweep_eta;
    cfg.beta = c.sweep_beta;
    cfg.lambda = lambda;
    cfg.stop_loss = 0.0;
    cfg.stop_grad_norm = c.reg_stop_grad_norm;
    cfg.max_steps = c.reg_max_steps;
    cfg.log_stride = 10;
    cfg.retain_factors = true;
    TrajectoryLog log = run(cfg, target);

    FactorState final_state;
    final_state.factors = log.factor_snapshots.back();
    const std::vector<Matrix> grads = gradients(final_state, target, lambda);
    double sq = 0.0;
    for (const Matrix& g : grads) sq += g.squaredNorm();
    nlohmann::json& s = result.summary[key];
    s["lambda"] = lambda;
    s["final_grad_norm"] = std::sqrt(sq);
    s["steps"] = log.records.back().step;
    const Vector sv = log.records.back().product_singular_values;
    double worst_retained = 0.0;
    for (int i = 0; i < target.rank_star(); ++i) {
      s["sv"][i] = sv(i);
      if (target.sigma(i) > lambda) {
        worst_retained = std::max(
            worst_retained, std::abs(sv(i) - (target.sigma(i) - lambda)));
      }
    }
    s["max_retained_sv_error"] = worst_retained;
    s["last_sv"] = sv(target.rank_star() - 1);
    result.logs[key] = std::move(log);
  };

  const double lambda = options.lambda >= 0.0 ? options.lambda : c.reg_lambda;
  reg_run(lambda, "main");
  reg_run(c.reg_suppress_lambda, "suppress");

  const auto& main = result.summary["main"];
  add_check(result, "converged_grad_norm_le_1e-6",
            main["final_grad_norm"].get<double>() <= c.reg_stop_grad_norm,
            "");
  add_check(result, "retained_sv_match_sigma_minus_lambda",
            main["max_retained_sv_error"].get<double>() <= 5e-3, "");
  add_check(result, "large_lambda_suppresses_last_mode",
            result.summary["suppress"]["last_sv"].get<double>() <= 1e-3, "");
  return result;
}

ScenarioResult scenario_rank1_ode(std::uint64_t seed, const ScenarioOptions&) {
  const auto& c = kConstants;
  (void)seed; // the suite is fully deterministic
  ScenarioResult result;
  nlohmann::json& s = result.summary;

  auto derivative_gap = [](const Rank1Trajectory& traj, const Rank1State& base) {
    double sup = 0.0;
    Rank1State w = base;
    for (const auto& smp : traj.samples) {
      w.a = smp.a;
      w.b = smp.b;
      w.c = smp.c;
      const auto d = rank1_rhs(w);
      sup = std::max(sup, std::abs(d[0] - d[1]));
    }
    return sup;
  };

  std::vector<double> sup_gaps;
  for (double gamma : c.ode_gamma_grid) {
    Rank1State init;
    init.sigma = c.ode_sigma;
    init.beta = c.ode_beta;
    init.alpha = c.ode_alpha;
    init.a = 0.0;
    init.b = gamma * c.ode_alpha;
    init.c = gamma * std::sqrt(1.0 - c.ode_alpha * c.ode_alpha);
    if (!rank1_gamma_admissible(gamma, c.ode_alpha, c.ode_sigma, c.ode_beta)) {
      throw std::runtime_error("rank1_ode: gamma grid point inadmissible");
    }
    const Rank1Trajectory traj = integrate_rank1(init, c.ode_t_end, c.ode_dt);
    double sup_ab = 0.0;
    double min_c_step = 0.0; // most positive increase of c between samples
    bool loss_monotone = true, m_negative = true;
    double prev_loss = std::numeric_limits<double>::infinity();
    double prev_c = init.c;
    for (const auto& smp : traj.samples) {
      sup_ab = std::max(sup_ab, std::abs(smp.a - smp.b));
      if (smp.loss > prev_loss) loss_monotone = false;
      prev_loss = smp.loss;
      min_c_step = std::max(min_c_step, smp.c - prev_c);
      prev_c = smp.c;
      if (std::abs(smp.ab - c.ode_sigma) > 1e-3) {
        const double m =
            (smp.ab - c.ode_sigma) * smp.b + smp.a * smp.c * smp.c;
        if (!(m < 0.0)) m_negative = false;
      }
    }
    std::ostringstream key;
    key << "gamma_" << gamma;
    nlohmann::json& g = s[key.str()];
    g["sup_a_minus_b"] = sup_ab;
    g["sup_da_minus_db"] = derivative_gap(traj, init);
    g["final_ab_gap"] = std::abs(traj.samples.back().ab - c.ode_sigma);
    g["final_c"] = traj.samples.back().c;
    g["loss_monotone"] = loss_monotone;
    g["m_negative_until_saturation"] = m_negative;
    g["c_max_increase"] = min_c_step;
    g["halvings"] = traj.halvings;
    g["saturated_stop"] = traj.saturated;
    sup_gaps.push_back(sup_ab);
  }
  bool monotone_in_gamma = true;
  for (std::size_t i = 1; i < sup_gaps.size(); ++i) {
    monotone_in_gamma = monotone_in_gamma && sup_gaps[i] < sup_gaps[i - 1];
  }
  s["sup_gap_monotone_in_gamma"] = monotone_in_gamma;
  bool shrink_5x = true;
  for (std::size_t i = 1; i < sup_gaps.size(); ++i) {
    shrink_5x = shrink_5x && sup_gaps[i] * 5.0 <= sup_gaps[i - 1];
  }
  s["sup_gap_shrinks_5x_per_decade"] = shrink_5x;

  // Degenerate aligned start: c stays identically zero, a meets b.
  {
    Rank1State init;
    init.sigma = c.ode_sigma;
    init.beta = c.ode_beta;
    init.alpha = 1.0;
    init.a = 0.0;
    init.b = 1e-3;
    init.c = 0.0;
    const Rank1Trajectory traj = integrate_rank1(init, c.ode_t_end, c.ode_dt);
    double sup_c = 0.0, sup_ab = 0.0;
    for (const auto& smp : traj.samples) {
      sup_c = std::max(sup_c, std::abs(smp.c));
      sup_ab = std::max(sup_ab, std::abs(smp.a - smp.b));
    }
    s["aligned"]["sup_c"] = sup_c;
    s["aligned"]["sup_a_minus_b"] = sup_ab;
    s["aligned"]["final_ab_gap"] =
        std::abs(traj.samples.back().ab - c.ode_sigma);
  }

  // Spectral-initialization scalar pair.
  {
    ModePair init;
    init.sa = init.sb = 0.01;
    init.sigma_i = 3.0;
    init.beta = c.ode_beta;
    const ModePairTrajectory traj =
        integrate_mode_pair(init, c.ode_t_end, c.ode_pair_dt);
    double sup_gap = 0.0, sup_product = 0.0;
    for (const auto& smp : traj.samples) {
      sup_gap = std::max(sup_gap, std::abs(smp.sa - smp.sb));
      sup_product = std::max(sup_product, smp.product);
    }
    s["pair"]["final_product_gap"] =
        std::abs(traj.samples.back().product - init.sigma_i);
    s["pair"]["sup_sa_minus_sb"] = sup_gap;
    s["pair"]["initial_gap"] = 0.0;
    s["pair"]["sup_product"] = sup_product;

    // Two decoupled modes advance their sqrt-coordinates at the same speed
    // before saturation.
    auto pre_saturation_slope = [&](double sigma_i) {
      ModePair ini;
      ini.sa = ini.sb = 0.01;
      ini.sigma_i = sigma_i;
      ini.beta = c.ode_beta;
      const ModePairTrajectory tr =
          integrate_mode_pair(ini, c.ode_t_end, c.ode_pair_dt);
      std::vector<double> t, y;
      for (const auto& smp : tr.samples) {
        if (smp.product > 0.0 && smp.product <= sigma_i - 0.05) {
          t.push_back(smp.t);
          y.push_back(std::sqrt(smp.product));
        }
      }
      return fit_line(t, y).slope;
    };
    const double s3 = pre_saturation_slope(3.0);
    const double s1 = pre_saturation_slope(1.0);
    s["pair"]["slope_sigma_3"] = s3;
    s["pair"]["slope_sigma_1"] = s1;
    s["pair"]["slope_gap"] = std::abs(s3 - s1);
  }

  add_check(result, "final_ab_within_1e-4",
            s["gamma_0.001"]["final_ab_gap"].get<double>() <= 1e-4, "");
  add_check(result, "sup_gap_monotone_in_gamma", monotone_in_gamma, "");
  add_check(result, "pair_product_within_1e-4",
            s["pair"]["final_product_gap"].get<double>() <= 1e-4, "");
  return result;
}

using ScenarioFn =
    std::function<ScenarioResult(std::uint64_t, const ScenarioOptions&)>;

const std::vector<std::pair<ScenarioInfo, ScenarioFn>>& registry() {
  static const std::vector<std::pair<ScenarioInfo, ScenarioFn>> entries = {
      {{"uniform_growth",
        "Orthogonalized vs plain GD on the 60x70 reference target: slopes, "
        "convergence order, alignment, loss comparison"},
       scenario_uniform_growth},
      {{"momentum_sweep_exact",
        "Momentum grid {0,0.3,0.5,0.9} with exact orthogonalization"},
       [](std::uint64_t seed, const ScenarioOptions&) {
         return scenario_momentum_sweep(seed, Method::SpecExact);
       }},
      {{"momentum_sweep_ns",
        "Momentum grid {0,0.3,0.5,0.9} with Newton-Schulz orthogonalization"},
       [](std::uint64_t seed, const ScenarioOptions&) {
         return scenario_momentum_sweep(seed, Method::MuonNS);
       }},
      {{"rank_sweep",
        "Factor rank r in {1,2,3,4}: convergence to the best rank-r "
        "approximation"},
       scenario_rank_sweep},
      {{"depth_sweep",
        "Chain depth L in {2,3,4,5}: L-th-root singular-value growth"},
       scenario_depth_sweep},
      {{"basin",
        "Perturbed restarts around converged minima on the 9x9 target "
        "(CI scale 5x10; full 20x50 behind --full-scale)"},
       scenario_basin},
      {{"invariant_drift",
        "Balancedness drift of orthogonalized updates vs its conservation "
        "under plain GD"},
       scenario_invariant_drift},
      {{"regularized",
        "l2-regularized runs: stationary spectrum sigma_i - lambda and mode "
        "suppression"},
       scenario_regularized},
      {{"rank1_ode",
        "Decoupled scalar flows: rank-1 (a,b,c) system and spectral-init "
        "mode pairs"},
       scenario_rank1_ode},
  };
  return entries;
}

} // namespace

const ScenarioConstants& scenario_constants() { return kConstants; }

std::vector<ScenarioInfo> list_scenarios() {
  std::vector<ScenarioInfo> out;
  for (const auto& [info, fn] : registry()) out.push_back(info);
  return out;
}

ScenarioResult run_scenario(const std::string& name, std::uint64_t seed,
                            const ScenarioOptions& options) {
  for (const auto& [info, fn] : registry()) {
    if (info.name == name) {
      ScenarioResult result = fn(seed, options);
      result.name = name;
      result.seed = seed;
      return result;
    }
  }
  throw std::invalid_argument("unknown scenario: " + name);
}

} // namespace specfact
