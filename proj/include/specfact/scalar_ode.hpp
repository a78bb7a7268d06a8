#pragma once

// High-accuracy integration of the analytically decoupled flows: the rank-1
// three-scalar system (a, b, c) under smoothed orthogonalization, and the
// per-mode scalar pairs arising from spectral initialization.

#include <array>
#include <vector>

namespace specfact {

// Loss level below which a step-size-limited integration is treated as
// saturated and terminated instead of raising a step-size failure.
inline constexpr double kOdeSaturationLoss = 1e-12;
inline constexpr int kOdeMaxHalvings = 10;

struct Rank1State {
  double a = 0.0; // coefficient of u in A
  double b = 0.0; // coefficient of v in B
  double c = 0.0; // coefficient of z in B
  double sigma = 1.0;
  double beta = 1e-8;
  double alpha = 1.0; // <v, w> of the initial direction
};

struct ModePair {
  double sa = 0.0;
  double sb = 0.0;
  double sigma_i = 1.0;
  double beta = 1e-8;
};

struct Rank1Sample {
  double t, a, b, c, ab, loss;
};

struct ModePairSample {
  double t, sa, sb, product, loss;
};

template <typename Sample>
struct OdeTrajectory {
  std::vector<Sample> samples;
  int halvings = 0;        // total persistent dt halvings applied
  bool saturated = false;  // stopped early at the saturation floor
  double final_dt = 0.0;
};

using Rank1Trajectory = OdeTrajectory<Rank1Sample>;
using ModePairTrajectory = OdeTrajectory<ModePairSample>;

// Right-hand side of the rank-1 flow:
//   da = -m / sqrt(m^2 + beta),            m = (ab - sigma) b + a c^2
//   db = -a (ab - sigma) / sqrt(a^2 ||d||^2 + beta)
//   dc = -a^2 c / sqrt(a^2 ||d||^2 + beta), ||d||^2 = (ab-sigma)^2 + (ac)^2
std::array<double, 3> rank1_rhs(const Rank1State& state);

// Classic 4th-order fixed-step integration with a per-step loss-monotonicity
// guard: a violating step halves dt (persistently) and retries, up to
// kOdeMaxHalvings total; a violation at the minimum dt terminates the
// integration when loss <= kOdeSaturationLoss and throws otherwise.
Rank1Trajectory integrate_rank1(const Rank1State& init, double t_end, double dt);

ModePairTrajectory integrate_mode_pair(const ModePair& init, double t_end,
                                       double dt);

// The admissibility condition on gamma for the rank-1 LoRA start
// (a=0, b=gamma*alpha, c=gamma*sqrt(1-alpha^2)):
// with T = (sqrt(1-alpha^2)/alpha)(1 + 4 sqrt(beta)/sigma), require
// gamma^2 < alpha*sigma / (4 (1-alpha^2)^{3/2}) and
// gamma < min{ (sigma/2) / (sqrt(1-alpha^2) (alpha + T)), 1 }.
bool rank1_gamma_admissible(double gamma, double alpha, double sigma,
                            double beta);

} // namespace specfact
