#include "specfact/scalar_ode.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace specfact {

namespace {

// Shared RK4 driver over a small fixed-size state with a loss-monotonicity
// guard; dt halvings persist for the remainder of the integration.
template <int N, typename Rhs, typename Loss, typename Record>
void integrate(std::array<double, N> y, double t_end, double dt, Rhs rhs,
               Loss loss_of, Record record, int& halvings, bool& saturated,
               double& final_dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw std::invalid_argument("integrate: t_end and dt must be > 0");
  }
  auto axpy = [](const std::array<double, N>& base, double h,
                 const std::array<double, N>& k) {
    std::array<double, N> out;
    for (int i = 0; i < N; ++i) out[i] = base[i] + h * k[i];
    return out;
  };
  auto rk4 = [&](const std::array<double, N>& y0, double h) {
    const auto k1 = rhs(y0);
    const auto k2 = rhs(axpy(y0, h / 2, k1));
    const auto k3 = rhs(axpy(y0, h / 2, k2));
    const auto k4 = rhs(axpy(y0, h, k3));
    std::array<double, N> out;
    for (int i = 0; i < N; ++i) {
      out[i] = y0[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return out;
  };

  halvings = 0;
  saturated = false;
  double t = 0.0;
  record(t, y);
  while (t < t_end) {
    const double h = std::min(dt, t_end - t);
    const double loss0 = loss_of(y);
    const auto y1 = rk4(y, h);
    if (loss_of(y1) > loss0) {
      if (halvings >= kOdeMaxHalvings) {
        if (loss0 <= kOdeSaturationLoss) {
          saturated = true;
          break;
        }
        throw std::runtime_error(
            "integrate: persistent loss-monotonicity violation (step-size "
            "failure)");
      }
      dt /= 2;
      ++halvings;
      continue;
    }
    y = y1;
    t += h;
    record(t, y);
  }
  final_dt = dt;
}

} // namespace

std::array<double, 3> rank1_rhs(const Rank1State& s) {
  if (!(s.beta > 0.0)) {
    throw std::invalid_argument("rank1_rhs: beta must be > 0");
  }
  const double gap = s.a * s.b - s.sigma;
  const double m = gap * s.b + s.a * s.c * s.c;
  const double d2 = gap * gap + (s.a * s.c) * (s.a * s.c);
  const double den = std::sqrt(s.a * s.a * d2 + s.beta);
  return {-m / std::sqrt(m * m + s.beta), -s.a * gap / den,
          -s.a * s.a * s.c / den};
}

Rank1Trajectory integrate_rank1(const Rank1State& init, double t_end,
                                double dt) {
  Rank1Trajectory traj;
  Rank1State work = init;
  auto rhs = [&](const std::array<double, 3>& y) {
    work.a = y[0];
    work.b = y[1];
    work.c = y[2];
    return rank1_rhs(work);
  };
  auto loss_of = [&](const std::array<double, 3>& y) {
    const double gap = y[0] * y[1] - init.sigma;
    const double ac = y[0] * y[2];
    return 0.5 * (gap * gap + ac * ac);
  };
  auto record = [&](double t, const std::array<double, 3>& y) {
    traj.samples.push_back(
        {t, y[0], y[1], y[2], y[0] * y[1], loss_of(y)});
  };
  integrate<3>({init.a, init.b, init.c}, t_end, dt, rhs, loss_of, record,
               traj.halvings, traj.saturated, traj.final_dt);
  return traj;
}

ModePairTrajectory integrate_mode_pair(const ModePair& init, double t_end,
                                       double dt) {
  if (!(init.beta > 0.0)) {
    throw std::invalid_argument("integrate_mode_pair: beta must be > 0");
  }
  ModePairTrajectory traj;
  auto f = [&](double x) { return x / std::sqrt(x * x + init.beta); };
  auto rhs = [&](const std::array<double, 2>& y) -> std::array<double, 2> {
    const double gap = y[0] * y[1] - init.sigma_i;
    return {-f(gap * y[1]), -f(gap * y[0])};
  };
  auto loss_of = [&](const std::array<double, 2>& y) {
    const double gap = y[0] * y[1] - init.sigma_i;
    return 0.5 * gap * gap;
  };
  auto record = [&](double t, const std::array<double, 2>& y) {
    traj.samples.push_back({t, y[0], y[1], y[0] * y[1], loss_of(y)});
  };
  integrate<2>({init.sa, init.sb}, t_end, dt, rhs, loss_of, record,
               traj.halvings, traj.saturated, traj.final_dt);
  return traj;
}

bool rank1_gamma_admissible(double gamma, double alpha, double sigma,
                            double beta) {
  if (!(gamma > 0.0) || !(alpha > 0.0) || alpha > 1.0 || !(sigma > 0.0) ||
      !(beta > 0.0)) {
    return false;
  }
  const double s = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
  const double inf = std::numeric_limits<double>::infinity();
  const double bound1 = s > 0.0 ? alpha * sigma / (4.0 * s * s * s) : inf;
  const double t_cap = (s / alpha) * (1.0 + 4.0 * std::sqrt(beta) / sigma);
  const double bound2 = s > 0.0 ? (sigma / 2.0) / (s * (alpha + t_cap)) : inf;
  return gamma * gamma < bound1 && gamma < std::min(bound2, 1.0);
}

} // namespace specfact
