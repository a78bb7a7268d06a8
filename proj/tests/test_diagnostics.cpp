#include "specfact/diagnostics.hpp"

#include <doctest.h>

#include <cmath>

using namespace specfact;

namespace {

FactorState make_state(std::vector<Matrix> factors) {
  FactorState s;
  s.factors = std::move(factors);
  return s;
}

} // namespace

TEST_CASE("core variables at A = 0") {
  const TargetMatrix t = construct_target(6, 7, {3.0, 1.0}, 1);
  const FactorState s =
      make_state({Matrix::Zero(6, 2), sample_gaussian(2, 7, 2)});
  const CoreSnapshot c = core_variables(s, t);
  CHECK(c.x.norm() == 0.0);
  CHECK(c.g.norm() == 0.0);
  CHECK(c.d.norm() == 0.0);
  CHECK((c.e + t.sigma).norm() == 0.0);
}

TEST_CASE("spectral-style state gives a diagonal core") {
  const TargetMatrix t = construct_target(8, 9, {3.0, 1.0}, 3);
  Vector d(2);
  d << 0.2, 0.1;
  const FactorState s = make_state(
      {t.u_r * d.asDiagonal(), d.asDiagonal() * t.v_r.transpose()});
  const CoreSnapshot c = core_variables(s, t);
  CHECK(c.off_g_fro < 1e-14);
  CHECK(c.xz_perp_fro < 1e-14);
  CHECK(c.d(0) == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(c.d(1) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("core diagonal matches the brute-force triple product") {
  const TargetMatrix t = construct_target(6, 7, {3.0, 1.0}, 5);
  const FactorState s =
      make_state({sample_gaussian(6, 2, 6), sample_gaussian(2, 7, 7)});
  const CoreSnapshot c = core_variables(s, t);
  const Matrix g =
      t.u_r.transpose() * s.factors[0] * s.factors[1] * t.v_r;
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(c.d(i) - g(i, i)) < 1e-12);
  }
  CHECK((c.g - c.x * c.z).norm() < 1e-12);
  CHECK(c.off_g_fro ==
        doctest::Approx((c.g - Matrix(c.d.asDiagonal())).norm())
            .epsilon(1e-12));
  CHECK_THROWS_AS(
      core_variables(make_state({Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                 Matrix::Identity(2, 2)}),
                     construct_target(2, 2, {1.0}, 1)),
      std::invalid_argument);
}

TEST_CASE("diagonal surrogate error") {
  const TargetMatrix t = construct_target(6, 7, {3.0, 1.0}, 9);
  Vector d(2);
  d << 0.5, 0.3;
  FactorState s = make_state(
      {t.u_r * d.asDiagonal(), d.asDiagonal() * t.v_r.transpose()});
  CoreSnapshot c = core_variables(s, t);
  Vector sv(2);
  sv << 0.25, 0.09;
  CHECK(diagonal_surrogate_error(c, sv) <= 1e-10);

  // A small off-diagonal perturbation moves the matched values by O(0.01).
  Matrix g(2, 2);
  g << 3.0, 0.01, 0.01, 1.0;
  CoreSnapshot synth;
  synth.g = g;
  synth.d = g.diagonal();
  const SvdTriple decomposition = svd_compact(g);
  CHECK(diagonal_surrogate_error(synth, decomposition.singular_values) <=
        0.03);
}

TEST_CASE("effective rank") {
  Vector uniform = Vector::Ones(4);
  CHECK(effective_rank(uniform) == doctest::Approx(4.0).epsilon(1e-12));
  Vector single(3);
  single << 1.0, 0.0, 0.0;
  CHECK(effective_rank(single) == doctest::Approx(1.0).epsilon(1e-12));
  Vector spectrum(5);
  spectrum << 8, 5, 3, 1.5, 0.7;
  // Independent scalar computation of exp(entropy).
  const double total = spectrum.sum();
  double entropy = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double p = spectrum(i) / total;
    entropy -= p * std::log(p);
  }
  CHECK(effective_rank(spectrum) ==
        doctest::Approx(std::exp(entropy)).epsilon(1e-12));
  CHECK_THROWS_AS(effective_rank(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("fit_line and sqrt coordinate slopes on synthetic data") {
  TrajectoryLog log;
  log.eta = 0.1;
  log.sigma = Vector::Constant(2, 100.0);
  for (int k = 1; k <= 20; ++k) {
    StepDiagnostics rec;
    rec.step = k;
    rec.time = 0.1 * k;
    rec.core.d = Vector::Constant(2, rec.time * rec.time); // sqrt(d) = t
    rec.core.e = rec.core.d - log.sigma;
    log.records.push_back(rec);
  }
  const Vector slopes =
      sqrt_coordinate_slopes(log, 0, static_cast<int>(log.records.size()));
  CHECK(std::abs(slopes(0) - 1.0) < 1e-6);
  CHECK(std::abs(slopes(1) - 1.0) < 1e-6);
  CHECK_THROWS_AS(sqrt_coordinate_slopes(log, 0, 2), std::invalid_argument);

  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {1, 3, 5, 7};
  const LineFit fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("convergence order on a single-mode log") {
  TrajectoryLog log;
  log.sigma = Vector::Constant(1, 1.0);
  for (int k = 0; k < 10; ++k) {
    StepDiagnostics rec;
    rec.step = k;
    rec.time = k;
    rec.core.d = Vector::Constant(1, k >= 5 ? 1.0 : 0.0);
    rec.core.e = rec.core.d - log.sigma;
    log.records.push_back(rec);
  }
  const ConvergenceOrder order = convergence_order(log, 0.05);
  REQUIRE(order.order.size() == 1);
  CHECK(order.order[0] == 1);
  CHECK(order.settle_record[0] == 5);
  CHECK(order.non_converged.empty());
}

TEST_CASE("active_window finds the contiguous all-active range") {
  TrajectoryLog log;
  log.sigma = Vector::Constant(1, 4.0);
  for (int k = 0; k < 10; ++k) {
    StepDiagnostics rec;
    rec.step = k;
    rec.time = k;
    const double d = k == 0 ? 0.0 : (k < 7 ? 1.0 : 3.99);
    rec.core.d = Vector::Constant(1, d);
    rec.core.e = rec.core.d - log.sigma;
    log.records.push_back(rec);
  }
  const auto [begin, end] = active_window(log, 0.05);
  CHECK(begin == 1);
  CHECK(end == 7);
}

TEST_CASE("balancedness_drift requires snapshots and depth 2") {
  TrajectoryLog log;
  log.depth = 3;
  CHECK_THROWS_AS(balancedness_drift(log), std::invalid_argument);
}
