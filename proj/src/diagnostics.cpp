#include "specfact/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace specfact {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need >= 2 matched points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

CoreSnapshot core_variables(const FactorState& state,
                            const TargetMatrix& target) {
  if (state.depth() != 2) {
    throw std::invalid_argument(
        "core_variables: only defined for two-factor states");
  }
  const Matrix& a = state.factors[0];
  const Matrix& b = state.factors[1];
  CoreSnapshot s;
  s.x = target.u_r.transpose() * a;
  s.z = b * target.v_r;
  s.z_perp = b * target.v_perp;
  s.g = s.x * s.z;
  const int r = target.rank_star();
  s.d = s.g.diagonal().head(std::min<long>(r, s.g.rows()));
  s.e = s.d - target.sigma.head(s.d.size());
  Matrix off = s.g;
  for (int i = 0; i < std::min(off.rows(), off.cols()); ++i) off(i, i) = 0.0;
  s.off_g_fro = off.norm();
  s.xz_perp_fro = (s.x * s.z_perp).norm();
  return s;
}

CoreSnapshot product_core(const Matrix& product, const TargetMatrix& target) {
  CoreSnapshot s;
  s.g = target.u_r.transpose() * product * target.v_r;
  s.d = s.g.diagonal();
  s.e = s.d - target.sigma;
  Matrix off = s.g;
  for (int i = 0; i < std::min(off.rows(), off.cols()); ++i) off(i, i) = 0.0;
  s.off_g_fro = off.norm();
  s.xz_perp_fro = (target.u_r.transpose() * product * target.v_perp).norm();
  return s;
}

double diagonal_surrogate_error(const CoreSnapshot& snapshot,
                                const Vector& product_svals) {
  const int r = static_cast<int>(snapshot.d.size());
  std::vector<int> order(r);
  for (int i = 0; i < r; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return snapshot.d(i) > snapshot.d(j);
  });
  std::vector<bool> used(static_cast<std::size_t>(product_svals.size()), false);
  double worst = 0.0;
  for (int i : order) {
    int best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < product_svals.size(); ++j) {
      if (used[j]) continue;
      const double gap = std::abs(product_svals(j) - snapshot.d(i));
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best < 0) {
      // More diagonal entries than singular values: unmatched d_i counts whole.
      best_gap = std::abs(snapshot.d(i));
    } else {
      used[best] = true;
    }
    worst = std::max(worst, best_gap);
  }
  return worst;
}

double effective_rank(const Vector& singular_values) {
  const double top = singular_values.size() ? singular_values.maxCoeff() : 0.0;
  if (!(top > 0.0)) {
    throw std::invalid_argument("effective_rank: all-zero spectrum");
  }
  const double cutoff = kRankCutoff * top;
  double total = 0.0;
  for (int i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > cutoff) total += singular_values(i);
  }
  double entropy = 0.0;
  for (int i = 0; i < singular_values.size(); ++i) {
    if (singular_values(i) > cutoff) {
      const double p = singular_values(i) / total;
      entropy -= p * std::log(p);
    }
  }
  return std::exp(entropy);
}

Vector sqrt_coordinate_slopes(const TrajectoryLog& log, int begin, int end) {
  if (begin < 0 || end > static_cast<int>(log.records.size()) ||
      end - begin < 3) {
    throw std::invalid_argument(
        "sqrt_coordinate_slopes: window must hold >= 3 records");
  }
  const int r = static_cast<int>(log.sigma.size());
  Vector slopes(r);
  std::vector<double> t(end - begin), y(end - begin);
  for (int i = 0; i < r; ++i) {
    for (int k = begin; k < end; ++k) {
      const double d = log.records[k].core.d(i);
      if (!(d > 0.0)) {
        throw std::invalid_argument(
            "sqrt_coordinate_slopes: d_i must be positive on the window");
      }
      t[k - begin] = log.records[k].time;
      y[k - begin] = std::sqrt(d);
    }
    slopes(i) = fit_line(t, y).slope;
  }
  return slopes;
}

std::pair<int, int> active_window(const TrajectoryLog& log, double epsilon) {
  const int n = static_cast<int>(log.records.size());
  auto all_active = [&](const StepDiagnostics& rec) {
    for (int i = 0; i < rec.core.e.size(); ++i) {
      if (!(rec.core.e(i) <= -epsilon)) return false;
      if (!(rec.core.d(i) > 0.0)) return false;
    }
    return rec.core.e.size() > 0;
  };
  int begin = 0;
  while (begin < n && !all_active(log.records[begin])) ++begin;
  int end = begin;
  while (end < n && all_active(log.records[end])) ++end;
  return {begin, end};
}

ConvergenceOrder convergence_order(const TrajectoryLog& log, double epsilon) {
  const int n = static_cast<int>(log.records.size());
  const int r = static_cast<int>(log.sigma.size());
  if (n == 0) throw std::invalid_argument("convergence_order: empty log");
  ConvergenceOrder out;
  out.settle_record.assign(r, -1);
  out.last_abs_e.assign(r, 0.0);
  for (int i = 0; i < r; ++i) {
    out.last_abs_e[i] = std::abs(log.records.back().core.e(i));
    // Last record where the mode is out of tolerance; it settles just after.
    int last_bad = -1;
    for (int k = 0; k < n; ++k) {
      if (std::abs(log.records[k].core.e(i)) > epsilon) last_bad = k;
    }
    if (last_bad + 1 < n) {
      out.settle_record[i] = last_bad + 1;
    } else {
      out.non_converged.push_back(i + 1);
    }
  }
  std::vector<int> modes;
  for (int i = 0; i < r; ++i) {
    if (out.settle_record[i] >= 0) modes.push_back(i);
  }
  std::stable_sort(modes.begin(), modes.end(), [&](int i, int j) {
    return out.settle_record[i] < out.settle_record[j];
  });
  for (int i : modes) out.order.push_back(i + 1);
  return out;
}

std::vector<double> balancedness_drift(const TrajectoryLog& log) {
  if (log.depth != 2) {
    throw std::invalid_argument("balancedness_drift: depth-2 logs only");
  }
  if (log.factor_snapshots.size() != log.records.size() ||
      log.factor_snapshots.empty()) {
    throw std::invalid_argument(
        "balancedness_drift: factor snapshots were not retained");
  }
  auto balance = [](const std::vector<Matrix>& f) -> Matrix {
    return f[0].transpose() * f[0] - f[1] * f[1].transpose();
  };
  const Matrix base = balance(log.factor_snapshots.front());
  std::vector<double> drift;
  drift.reserve(log.records.size());
  for (const auto& f : log.factor_snapshots) {
    drift.push_back((balance(f) - base).norm());
  }
  return drift;
}

} // namespace specfact
