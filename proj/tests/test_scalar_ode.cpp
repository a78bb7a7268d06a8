#include "specfact/scalar_ode.hpp"

#include "specfact/optimize.hpp"

#include <doctest.h>

#include <cmath>

using namespace specfact;

TEST_CASE("rank1_rhs at the LoRA start moves only a") {
  Rank1State s;
  s.sigma = 2.0;
  s.beta = 1e-8;
  s.alpha = 0.8;
  s.a = 0.0;
  s.b = 1e-3 * 0.8;
  s.c = 1e-3 * 0.6;
  const auto d = rank1_rhs(s);
  CHECK(d[0] > 0.0); // m = -sigma*gamma*alpha < 0 so da > 0
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 0.0);
}

TEST_CASE("rank1_rhs vanishes at the stationary point") {
  Rank1State s;
  s.sigma = 2.0;
  s.beta = 1e-8;
  s.a = 1.0; // ab = sigma exactly in floating point
  s.b = 2.0;
  s.c = 0.0;
  const auto d = rank1_rhs(s);
  CHECK(std::abs(d[0]) < 1e-12);
  CHECK(std::abs(d[1]) < 1e-12);
  CHECK(std::abs(d[2]) < 1e-12);
}

TEST_CASE("rank1_rhs matches the embedded matrix flow") {
  // Embed a = coefficient of u in A, (b, c) = coefficients of (v, z) in B
  // and compare against one tiny SpecSmoothed step on the matrices.
  Rank1State s;
  s.sigma = 2.0;
  s.beta = 1e-4;
  s.a = 0.3;
  s.b = 0.5;
  s.c = 0.2;

  Matrix u(3, 1);
  u << 1, 0, 0;
  Vector sig = Vector::Constant(1, s.sigma);
  const TargetMatrix t = make_target_from_svd(u, sig, u, 1);
  const Matrix v = t.v_r;            // = u by construction
  const Matrix z = t.v_perp.col(0);  // any unit vector orthogonal to v

  RunConfig cfg;
  cfg.method = Method::SpecSmoothed;
  cfg.beta = s.beta;
  cfg.eta = 1e-7;
  cfg.init.kind = InitKind::Explicit;
  cfg.init.explicit_factors = {
      s.a * u, s.b * v.transpose() + s.c * z.transpose()};
  FactorState state = initialize(cfg, t);
  step(state, t, cfg);

  const double da = (u.transpose() * state.factors[0])(0, 0) - s.a;
  const double db = (state.factors[1] * v)(0, 0) - s.b;
  const double dc = (state.factors[1] * z)(0, 0) - s.c;
  const auto d = rank1_rhs(s);
  CHECK(std::abs(da / cfg.eta - d[0]) < 1e-6);
  CHECK(std::abs(db / cfg.eta - d[1]) < 1e-6);
  CHECK(std::abs(dc / cfg.eta - d[2]) < 1e-6);
}

TEST_CASE("rank-1 integration converges with vanishing imbalance") {
  const double gamma = 1e-3, alpha = 0.8, sigma = 2.0, beta = 1e-8;
  REQUIRE(rank1_gamma_admissible(gamma, alpha, sigma, beta));
  Rank1State init;
  init.sigma = sigma;
  init.beta = beta;
  init.alpha = alpha;
  init.a = 0.0;
  init.b = gamma * alpha;
  init.c = gamma * std::sqrt(1.0 - alpha * alpha);
  const Rank1Trajectory traj = integrate_rank1(init, 8.0, 1e-3);

  double sup_gap = 0.0, prev_loss = std::numeric_limits<double>::infinity();
  for (const auto& smp : traj.samples) {
    sup_gap = std::max(sup_gap, std::abs(smp.a - smp.b));
    CHECK(smp.loss <= prev_loss);
    prev_loss = smp.loss;
    CHECK(smp.a >= -1e-12);
    CHECK(smp.b >= -1e-12);
    CHECK(smp.c >= -1e-12);
  }
  CHECK(std::abs(traj.samples.back().ab - sigma) <= 1e-4);
  CHECK(traj.samples.back().c <= 1e-6);
  CHECK(sup_gap <= 10.0 * gamma);

  // Shrinking gamma by 10x shrinks the imbalance by at least 5x.
  Rank1State finer = init;
  finer.b = 0.1 * gamma * alpha;
  finer.c = 0.1 * gamma * std::sqrt(1.0 - alpha * alpha);
  const Rank1Trajectory traj2 = integrate_rank1(finer, 8.0, 1e-3);
  double sup_gap2 = 0.0;
  for (const auto& smp : traj2.samples) {
    sup_gap2 = std::max(sup_gap2, std::abs(smp.a - smp.b));
  }
  CHECK(5.0 * sup_gap2 <= sup_gap);
}

TEST_CASE("aligned start keeps c identically zero") {
  Rank1State init;
  init.sigma = 2.0;
  init.beta = 1e-8;
  init.alpha = 1.0;
  init.a = 0.0;
  init.b = 1e-3;
  init.c = 0.0;
  const Rank1Trajectory traj = integrate_rank1(init, 8.0, 1e-3);
  for (const auto& smp : traj.samples) CHECK(smp.c == 0.0);
  CHECK(std::abs(traj.samples.back().ab - 2.0) <= 1e-4);
}

TEST_CASE("mode pair keeps the gap and converges to sigma") {
  ModePair init;
  init.sa = init.sb = 0.01;
  init.sigma_i = 3.0;
  init.beta = 1e-8;
  const ModePairTrajectory traj = integrate_mode_pair(init, 8.0, 1e-4);
  for (const auto& smp : traj.samples) {
    CHECK(std::abs(smp.sa - smp.sb) <= 1e-9);
    CHECK(smp.product <= init.sigma_i + 1e-9);
  }
  CHECK(std::abs(traj.samples.back().product - 3.0) <= 1e-4);
}

TEST_CASE("mode pair at the fixed point stays constant") {
  ModePair init;
  init.sa = init.sb = std::sqrt(3.0);
  init.sigma_i = 3.0;
  init.beta = 1e-8;
  const ModePairTrajectory traj = integrate_mode_pair(init, 1.0, 1e-3);
  for (const auto& smp : traj.samples) {
    CHECK(std::abs(smp.sa - std::sqrt(3.0)) < 1e-12);
    CHECK(std::abs(smp.sb - std::sqrt(3.0)) < 1e-12);
  }
}

TEST_CASE("gamma admissibility") {
  CHECK(rank1_gamma_admissible(1e-2, 0.8, 2.0, 1e-8));
  CHECK(rank1_gamma_admissible(1e-4, 0.8, 2.0, 1e-8));
  CHECK_FALSE(rank1_gamma_admissible(10.0, 0.8, 2.0, 1e-8));
  // alpha = 1 makes both bounds infinite; only gamma < 1 binds.
  CHECK(rank1_gamma_admissible(0.5, 1.0, 2.0, 1e-8));
  CHECK_FALSE(rank1_gamma_admissible(1.5, 1.0, 2.0, 1e-8));
}
