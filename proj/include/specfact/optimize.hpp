#pragma once

// Discrete-time steppers: vanilla GD, SpecGD with exact or smoothed
// orthogonalization, and Muon (momentum + Newton-Schulz), for two-factor and
// depth-L chains, plus the run loop that records per-step diagnostics.

#include "specfact/diagnostics.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace specfact {

inline constexpr double kDefaultBeta = 1e-8;
inline constexpr double kDivergenceNormCap = 1e8;
inline const std::string kCodeVersion = "specfact-1.0";

enum class Method { GD, SpecExact, SpecSmoothed, MuonNS };

enum class InitKind { LoRA, Spectral, Explicit };

struct InitSpec {
  InitKind kind = InitKind::LoRA;
  double gamma = 1e-3;
  Vector spectral_sigma_a; // diagonal entries, Spectral only
  Vector spectral_sigma_b;
  std::vector<Matrix> explicit_factors; // Explicit only
};

struct RunConfig {
  Method method = Method::SpecExact;
  double eta = 0.01;
  double mu = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  int max_steps = 2000;
  double stop_loss = 0.0;
  double stop_grad_norm = 0.0; // 0 disables gradient-norm stopping
  std::uint64_t seed = 0;
  InitSpec init;
  int depth = 2;
  int rank = 0; // 0 means "use the target's r*"
  int ns_iterations = kNewtonSchulzIterations;
  std::array<double, 3> ns_coeffs = kNewtonSchulzCoeffs;
  int log_stride = 1;
  bool retain_factors = false;
  double epsilon_active = -1.0; // <0 means 0.05 * sigma_r
};

// Raised when a factor turns non-finite or exceeds the norm cap; carries the
// step index and the diagnostics recorded up to that point.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int step, TrajectoryLog partial)
      : std::runtime_error("divergence at step " + std::to_string(step)),
        step_index(step),
        partial_log(std::move(partial)) {}
  int step_index;
  TrajectoryLog partial_log;
};

std::string method_name(Method m);

// Validates cross-field constraints (beta vs method, ranges). Throws
// std::invalid_argument naming the offending field.
void validate_config(const RunConfig& config);

// Builds the initial factor chain. LoRA: first factor zero, the rest
// gamma * Gaussian. Spectral (depth 2): A = U_r S_A Q^T, B = Q S_B V_r^T with
// a seeded random orthogonal Q. Explicit: pass-through. Momentum zeroed.
FactorState initialize(const RunConfig& config, const TargetMatrix& target);

// One simultaneous update: gradients at the pre-step state, momentum
// M_l <- g_l + mu M_l, direction per method, W_l <- W_l - eta D_l.
void step(FactorState& state, const TargetMatrix& target,
          const RunConfig& config);

// Iterates `step` until loss <= stop_loss (or the gradient norm stop, when
// enabled) or max_steps, recording StepDiagnostics at the configured stride
// (the initial and final states are always recorded).
TrajectoryLog run(const RunConfig& config, const TargetMatrix& target);

} // namespace specfact
