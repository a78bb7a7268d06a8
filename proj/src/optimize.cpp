#include "specfact/optimize.hpp"

#include <cmath>
#include <cstdio>

namespace specfact {

namespace {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double resolved_epsilon(const RunConfig& config, const TargetMatrix& target) {
  if (config.epsilon_active >= 0.0) return config.epsilon_active;
  return kActiveEpsilonFraction * target.sigma(target.rank_star() - 1);
}

Matrix balance_matrix(const FactorState& state) {
  return state.factors[0].transpose() * state.factors[0] -
         state.factors[1] * state.factors[1].transpose();
}

// Update direction for one factor's momentum buffer.
Matrix direction(const Matrix& m, const RunConfig& config) {
  switch (config.method) {
    case Method::GD:
      return m;
    case Method::SpecExact:
      return orthogonalize_exact(m);
    case Method::SpecSmoothed:
      return orthogonalize_smoothed(m, config.beta);
    case Method::MuonNS:
      // A zero buffer (e.g. the B-gradient at the A=0 start) maps to a zero
      // direction; newton_schulz itself rejects zero input.
      if (m.norm() == 0.0) return Matrix::Zero(m.rows(), m.cols());
      return newton_schulz(m, config.ns_iterations, config.ns_coeffs);
  }
  throw std::logic_error("direction: unknown method");
}

// Applies one simultaneous update from precomputed pre-step gradients.
void apply_step(FactorState& state, const RunConfig& config,
                const std::vector<Matrix>& grads) {
  std::vector<Matrix> dirs(grads.size());
  for (std::size_t l = 0; l < grads.size(); ++l) {
    state.momentum[l] = grads[l] + config.mu * state.momentum[l];
    dirs[l] = direction(state.momentum[l], config);
  }
  for (std::size_t l = 0; l < grads.size(); ++l) {
    state.factors[l] -= config.eta * dirs[l];
  }
  ++state.step_index;
}

bool diverged(const FactorState& state) {
  for (const Matrix& w : state.factors) {
    if (!w.allFinite() || w.norm() > kDivergenceNormCap) return true;
  }
  return false;
}

StepDiagnostics make_record(const FactorState& state,
                            const TargetMatrix& target,
                            const RunConfig& config, const Matrix& balance0,
                            double epsilon) {
  StepDiagnostics rec;
  rec.step = state.step_index;
  rec.time = state.step_index * config.eta;
  rec.loss = loss(state, target, config.lambda).value;

  const Matrix product = factor_product(state);
  const SvdTriple svd = svd_compact(product);
  const int r = target.rank_star();
  rec.product_singular_values = Vector::Zero(r);
  for (int i = 0; i < std::min(r, svd.rank()); ++i) {
    rec.product_singular_values(i) = svd.singular_values(i);
  }
  rec.core = state.depth() == 2 ? core_variables(state, target)
                                : product_core(product, target);
  for (int i = 0; i < rec.core.e.size(); ++i) {
    if (std::abs(rec.core.e(i)) > epsilon) rec.active_set.push_back(i);
  }
  rec.effective_rank =
      svd.rank() > 0 ? effective_rank(svd.singular_values) : 0.0;
  rec.balancedness_drift =
      state.depth() == 2 ? (balance_matrix(state) - balance0).norm() : 0.0;
  for (const Matrix& w : state.factors) {
    rec.per_factor_fro_norms.push_back(w.norm());
  }
  return rec;
}

} // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::GD:
      return "GD";
    case Method::SpecExact:
      return "SpecExact";
    case Method::SpecSmoothed:
      return "SpecSmoothed";
    case Method::MuonNS:
      return "MuonNS";
  }
  return "?";
}

void validate_config(const RunConfig& config) {
  if (!(config.eta > 0.0)) throw std::invalid_argument("config: eta must be > 0");
  if (config.mu < 0.0 || config.mu > 1.0) {
    throw std::invalid_argument("config: mu must be in [0, 1]");
  }
  if (config.beta < 0.0) throw std::invalid_argument("config: beta must be >= 0");
  if (config.method == Method::SpecSmoothed && !(config.beta > 0.0)) {
    throw std::invalid_argument("config: SpecSmoothed requires beta > 0");
  }
  if (config.method == Method::SpecExact && config.beta != 0.0) {
    throw std::invalid_argument("config: SpecExact requires beta = 0");
  }
  if (config.lambda < 0.0) {
    throw std::invalid_argument("config: lambda must be >= 0");
  }
  if (config.depth < 2) throw std::invalid_argument("config: depth must be >= 2");
  if (config.max_steps < 0) {
    throw std::invalid_argument("config: max_steps must be >= 0");
  }
  if (config.log_stride < 1) {
    throw std::invalid_argument("config: log_stride must be >= 1");
  }
  if (config.ns_iterations < 1) {
    throw std::invalid_argument("config: ns_iterations must be >= 1");
  }
  if (config.init.kind == InitKind::LoRA && !(config.init.gamma > 0.0)) {
    throw std::invalid_argument("config: LoRA init requires gamma > 0");
  }
}

FactorState initialize(const RunConfig& config, const TargetMatrix& target) {
  validate_config(config);
  const int m = target.rows();
  const int n = target.cols();
  const int r = config.rank > 0 ? config.rank : target.rank_star();
  FactorState state;

  switch (config.init.kind) {
    case InitKind::LoRA: {
      // Only the first (leftmost) factor starts at zero.
      state.factors.push_back(Matrix::Zero(m, r));
      for (int l = 1; l < config.depth; ++l) {
        const int rows = r;
        const int cols = l == config.depth - 1 ? n : r;
        state.factors.push_back(
            config.init.gamma *
            sample_gaussian(rows, cols,
                            config.seed + kSeedOffsetFactors +
                                131 * static_cast<std::uint64_t>(l)));
      }
      break;
    }
    case InitKind::Spectral: {
      if (config.depth != 2) {
        throw std::invalid_argument("initialize: spectral init is two-factor");
      }
      const Vector& sa = config.init.spectral_sigma_a;
      const Vector& sb = config.init.spectral_sigma_b;
      if (sa.size() != target.rank_star() || sb.size() != target.rank_star()) {
        throw std::invalid_argument(
            "initialize: spectral diagonals must have length r*");
      }
      const double bound = std::sqrt(target.sigma(target.rank_star() - 1));
      if (sa.maxCoeff() >= bound || sb.maxCoeff() >= bound ||
          sa.minCoeff() <= 0.0 || sb.minCoeff() <= 0.0) {
        throw std::invalid_argument(
            "initialize: spectral diagonals must lie in (0, sqrt(sigma_min))");
      }
      const Matrix q = sample_orthonormal(target.rank_star(), target.rank_star(),
                                          config.seed + kSeedOffsetQ);
      state.factors.push_back(target.u_r * sa.asDiagonal() * q.transpose());
      state.factors.push_back(q * sb.asDiagonal() * target.v_r.transpose());
      break;
    }
    case InitKind::Explicit: {
      if (config.init.explicit_factors.empty()) {
        throw std::invalid_argument("initialize: explicit factors missing");
      }
      state.factors = config.init.explicit_factors;
      break;
    }
  }

  for (const Matrix& w : state.factors) {
    state.momentum.push_back(Matrix::Zero(w.rows(), w.cols()));
  }
  state.step_index = 0;
  return state;
}

void step(FactorState& state, const TargetMatrix& target,
          const RunConfig& config) {
  const std::vector<Matrix> grads = gradients(state, target, config.lambda);
  apply_step(state, config, grads);
  if (diverged(state)) {
    throw DivergenceError(state.step_index, TrajectoryLog{});
  }
}

TrajectoryLog run(const RunConfig& config, const TargetMatrix& target) {
  FactorState state = initialize(config, target);
  const double epsilon = resolved_epsilon(config, target);
  const Matrix balance0 =
      state.depth() == 2 ? balance_matrix(state) : Matrix();

  TrajectoryLog log;
  log.eta = config.eta;
  log.epsilon = epsilon;
  log.depth = config.depth;
  log.sigma = target.sigma;
  log.metadata = {
      {"method", method_name(config.method)},
      {"eta", fmt_real(config.eta)},
      {"mu", fmt_real(config.mu)},
      {"beta", fmt_real(config.beta)},
      {"lambda", fmt_real(config.lambda)},
      {"max_steps", std::to_string(config.max_steps)},
      {"stop_loss", fmt_real(config.stop_loss)},
      {"stop_grad_norm", fmt_real(config.stop_grad_norm)},
      {"seed", std::to_string(config.seed)},
      {"depth", std::to_string(config.depth)},
      {"rank", std::to_string(config.rank > 0 ? config.rank
                                              : target.rank_star())},
      {"init", config.init.kind == InitKind::LoRA      ? "LoRA"
               : config.init.kind == InitKind::Spectral ? "Spectral"
                                                        : "Explicit"},
      {"gamma", fmt_real(config.init.gamma)},
      {"ns_iterations", std::to_string(config.ns_iterations)},
      {"log_stride", std::to_string(config.log_stride)},
      {"epsilon", fmt_real(epsilon)},
      {"version", kCodeVersion},
  };

  auto record = [&]() {
    log.records.push_back(
        make_record(state, target, config, balance0, epsilon));
    if (config.retain_factors) log.factor_snapshots.push_back(state.factors);
  };
  record(); // step 0

  int last_recorded = 0;
  for (int t = 0; t < config.max_steps; ++t) {
    const LossValue lv = loss(state, target, config.lambda);
    if (lv.value <= config.stop_loss) break;

    const std::vector<Matrix> grads = gradients(state, target, config.lambda);
    if (config.stop_grad_norm > 0.0) {
      double sq = 0.0;
      for (const Matrix& g : grads) sq += g.squaredNorm();
      if (std::sqrt(sq) <= config.stop_grad_norm) break;
    }

    apply_step(state, config, grads);
    if (diverged(state)) {
      throw DivergenceError(state.step_index, std::move(log));
    }
    if (state.step_index % config.log_stride == 0) {
      record();
      last_recorded = state.step_index;
    }
  }
  if (last_recorded != state.step_index) {
    record(); // make sure the final state is present
  }
  return log;
}

} // namespace specfact
