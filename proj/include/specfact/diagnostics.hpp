#pragma once

// Every quantity the trajectory analysis predicates on: core variables,
// diagonal surrogates d_i, alignment norms, active sets, effective rank,
// square-root-coordinate slopes, convergence order, and balancedness drift.

#include "specfact/problem.hpp"

#include <map>
#include <string>
#include <vector>

namespace specfact {

// Default active-set tolerance as a fraction of the smallest target value.
inline constexpr double kActiveEpsilonFraction = 0.05;

// Core coordinates X = U_r^T A, Z = B V_r, Z_perp = B V_perp, G = X Z.
struct CoreSnapshot {
  Matrix x;
  Matrix z;
  Matrix z_perp;
  Matrix g;
  Vector d; // diagonal of g
  Vector e; // d_i - sigma_i
  double off_g_fro = 0.0;   // ||g - Diag(d)||_F
  double xz_perp_fro = 0.0; // ||x z_perp||_F
};

struct StepDiagnostics {
  int step = 0;
  double time = 0.0; // step * eta
  double loss = 0.0;
  Vector product_singular_values; // top r* values of prod(W)
  CoreSnapshot core;
  std::vector<int> active_set; // {i : |e_i| > epsilon}, 0-based
  double effective_rank = 0.0;
  double balancedness_drift = 0.0;
  std::vector<double> per_factor_fro_norms;
};

// Ordered per-step diagnostics with enough metadata to re-run bitwise.
struct TrajectoryLog {
  std::map<std::string, std::string> metadata; // resolved config, seed, version
  double eta = 0.0;
  double epsilon = 0.0; // active-set tolerance used
  int depth = 2;
  Vector sigma; // target spectrum the run tracked
  std::vector<StepDiagnostics> records;
  // Factor snapshots per record, retained only when requested (drift tests).
  std::vector<std::vector<Matrix>> factor_snapshots;
};

// Least-squares line fit with coefficient of determination.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Core variables for a two-factor state. Throws for depth > 2.
CoreSnapshot core_variables(const FactorState& state, const TargetMatrix& target);

// Product-level core quantities (equal to core_variables' G-side fields at
// depth 2 when A stays in col(U_r)); used by the run loop for any depth.
CoreSnapshot product_core(const Matrix& product, const TargetMatrix& target);

// Max over a greedy matching (descending d_i, nearest unused singular value)
// of |sigma_pi(i)(AB) - d_i|.
double diagonal_surrogate_error(const CoreSnapshot& snapshot,
                                const Vector& product_svals);

// exp(entropy) of the normalized spectrum above the rank cutoff.
// Throws for an all-zero spectrum.
double effective_rank(const Vector& singular_values);

// Slope of sqrt(d_i(t)) vs time over records [begin, end), per mode.
// Requires at least 3 records and d_i > 0 on the window.
Vector sqrt_coordinate_slopes(const TrajectoryLog& log, int begin, int end);

// Contiguous record range [begin, end) on which every mode satisfies
// e_i <= -epsilon and d_i > 0 (the all-active growth phase).
std::pair<int, int> active_window(const TrajectoryLog& log, double epsilon);

struct ConvergenceOrder {
  std::vector<int> order;              // 1-based mode indices, first-settled first
  std::vector<int> settle_record;      // record index where each settled
  std::vector<int> non_converged;      // 1-based modes that never settle
  std::vector<double> last_abs_e;      // final |e_i| per mode
};
// Modes sorted by the first record index at which |e_i| <= epsilon and stays
// there for the rest of the log.
ConvergenceOrder convergence_order(const TrajectoryLog& log, double epsilon);

// ||(A^T A - B B^T)(t) - (A^T A - B B^T)(0)||_F per retained record.
// Requires a depth-2 log with factor snapshots.
std::vector<double> balancedness_drift(const TrajectoryLog& log);

} // namespace specfact
