#pragma once

// Scenario registry: named, seeded, deterministic experiment procedures
// (uniform growth, momentum/NS/rank/depth sweeps, basin probe, invariant
// drift, regularized runs, rank-1 ODE suite) producing trajectory logs and
// summary statistics.

#include "specfact/optimize.hpp"
#include "specfact/scalar_ode.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace specfact {

// Desk-scale calibration constants shared by scenarios and their checks.
struct ScenarioConstants {
  // Reference uniform-growth configuration.
  int ug_m = 60, ug_n = 70;
  std::vector<double> ug_sigma = {8.0, 5.0, 3.0, 1.5, 0.7};
  double ug_eta = 0.01;
  double ug_gamma = 1e-3;
  double ug_beta = 1e-8;
  int ug_max_steps = 2000;
  double ug_stop_loss = 1e-6;
  int comparison_max_steps = 50000; // loss-comparison step cap

  // Sweeps.
  std::vector<double> momentum_grid = {0.0, 0.3, 0.5, 0.9};
  std::vector<int> rank_grid = {1, 2, 3, 4};
  std::vector<int> depth_grid = {2, 3, 4, 5};
  double sweep_eta = 1e-3;   // rank sweep / regularized step size
  double sweep_beta = 1e-2;  // beta large enough for a stable linear tail
  int sweep_max_steps = 60000;
  int depth_max_steps = 3000;

  // Basin probe.
  int basin_m = 9, basin_n = 9, basin_rank = 4;
  std::vector<double> basin_sigma = {1.0, 0.5, 0.2, 0.05};
  double basin_gamma = 5e-4;
  double basin_eta = 1e-4;
  double basin_beta = 1e-8;
  double basin_converged_loss = 1e-8;
  int basin_max_steps = 400000;
  int basin_bases_full = 20, basin_perturbations_full = 50;
  int basin_bases_ci = 5, basin_perturbations_ci = 10;

  // Invariant-drift probe (asymmetric block construction padded to rank 3).
  double drift_a = 1.0, drift_b = 0.5, drift_sigma = 2.0;
  std::vector<double> drift_sigma_list = {2.0, 1.999, 1.998};
  double drift_eta = 1e-5;       // block-construction step size
  double drift_eta_lora = 1e-3;  // zero-init contrast step size
  int drift_steps = 1000;

  // Regularized runs.
  double reg_lambda = 0.1;
  double reg_suppress_lambda = 1.0;
  double reg_stop_grad_norm = 1e-6;
  int reg_max_steps = 40000;

  // Rank-1 ODE suite.
  std::vector<double> ode_gamma_grid = {1e-2, 1e-3, 1e-4};
  double ode_alpha = 0.8;
  double ode_sigma = 2.0;
  double ode_beta = 1e-8;
  double ode_t_end = 8.0;
  double ode_dt = 1e-3;
  double ode_pair_dt = 1e-4; // pairs need the finer step (discrete fixed point)

  // Acceptance-style thresholds.
  double slope_gap_growth = 0.15;
  double slope_gap_sweep = 0.2;
  double alignment_bound_factor = 100.0;
  double drift_ratio = 100.0;
  double r2_loss_tail = 0.9;
  double r2_depth = 0.95;
};

const ScenarioConstants& scenario_constants();

struct ScenarioCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ScenarioResult {
  std::string name;
  std::uint64_t seed = 0;
  std::map<std::string, TrajectoryLog> logs;
  nlohmann::json summary;
  std::vector<ScenarioCheck> checks;
};

struct BasinRun {
  bool converged = false;
  double final_loss = 0.0;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  double decrement = 0.0;
};

struct ScenarioOptions {
  bool full_scale = false; // basin: 20x50 instead of the CI 5x10
  int workers = 1;
  double lambda = -1.0; // regularized scenario override; <0 keeps the default
};

struct ScenarioInfo {
  std::string name;
  std::string description;
};

std::vector<ScenarioInfo> list_scenarios();

// Runs a registered scenario. Throws std::invalid_argument for unknown names
// and propagates DivergenceError where a scenario treats divergence as fatal.
ScenarioResult run_scenario(const std::string& name, std::uint64_t seed,
                            const ScenarioOptions& options = {});

} // namespace specfact
