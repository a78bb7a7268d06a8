#include "specfact/problem.hpp"

#include <stdexcept>

namespace specfact {

namespace {

// Orthonormal completion of the columns of `basis` (n x r) to n - r further
// columns, from a seeded Gaussian projected off the basis.
Matrix complete_basis(const Matrix& basis, std::uint64_t seed) {
  const int n = static_cast<int>(basis.rows());
  const int r = static_cast<int>(basis.cols());
  if (n == r) return Matrix(n, 0);
  Matrix g = sample_gaussian(n, n - r, seed);
  g -= basis * (basis.transpose() * g);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n - r);
  const Matrix rm = qr.matrixQR().topRows(n - r);
  for (int j = 0; j < n - r; ++j) {
    if (rm(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

void validate_sigma(const Vector& sigma, int m, int n) {
  if (sigma.size() == 0 || sigma.size() > std::min(m, n)) {
    throw std::invalid_argument("target: sigma length must be in [1, min(m,n)]");
  }
  for (int i = 0; i < sigma.size(); ++i) {
    if (!(sigma(i) > 0.0)) {
      throw std::invalid_argument("target: sigma entries must be positive");
    }
    if (i > 0 && !(sigma(i) < sigma(i - 1))) {
      throw std::invalid_argument("target: sigma must be strictly decreasing");
    }
  }
}

} // namespace

TargetMatrix construct_target(int m, int n,
                              const std::vector<double>& sigma_list,
                              std::uint64_t seed) {
  Vector sigma = Eigen::Map<const Vector>(sigma_list.data(),
                                          static_cast<long>(sigma_list.size()));
  validate_sigma(sigma, m, n);
  const int r = static_cast<int>(sigma.size());
  TargetMatrix t;
  t.u_r = sample_orthonormal(m, r, seed + kSeedOffsetU);
  t.v_r = sample_orthonormal(n, r, seed + kSeedOffsetV);
  t.sigma = sigma;
  t.v_perp = complete_basis(t.v_r, seed + kSeedOffsetVPerp);
  t.y = t.u_r * sigma.asDiagonal() * t.v_r.transpose();
  return t;
}

TargetMatrix make_target_from_svd(const Matrix& u_r, const Vector& sigma,
                                  const Matrix& v_r, std::uint64_t seed) {
  validate_sigma(sigma, static_cast<int>(u_r.rows()),
                 static_cast<int>(v_r.rows()));
  if (u_r.cols() != sigma.size() || v_r.cols() != sigma.size()) {
    throw std::invalid_argument("target: basis/spectrum size mismatch");
  }
  TargetMatrix t;
  t.u_r = u_r;
  t.sigma = sigma;
  t.v_r = v_r;
  t.v_perp = complete_basis(v_r, seed + kSeedOffsetVPerp);
  t.y = u_r * sigma.asDiagonal() * v_r.transpose();
  return t;
}

Matrix factor_product(const FactorState& state) {
  if (state.factors.empty()) {
    throw std::invalid_argument("factor_product: empty chain");
  }
  Matrix p = state.factors.front();
  for (std::size_t l = 1; l < state.factors.size(); ++l) {
    if (p.cols() != state.factors[l].rows()) {
      throw std::invalid_argument("factor_product: chain dims do not compose");
    }
    p = p * state.factors[l];
  }
  return p;
}

LossValue loss(const FactorState& state, const TargetMatrix& target,
               double lambda) {
  const Matrix p = factor_product(state);
  if (p.rows() != target.y.rows() || p.cols() != target.y.cols()) {
    throw std::invalid_argument("loss: product shape does not match target");
  }
  LossValue out;
  out.residual_fro = (p - target.y).norm();
  out.value = 0.5 * out.residual_fro * out.residual_fro;
  if (lambda > 0.0) {
    for (const Matrix& w : state.factors) {
      out.value += 0.5 * lambda * w.squaredNorm();
    }
  }
  return out;
}

std::vector<Matrix> gradients(const FactorState& state,
                              const TargetMatrix& target, double lambda) {
  const int depth = state.depth();
  const Matrix residual = factor_product(state) - target.y;

  // prefix[l] = W_0 ... W_{l-1}; suffix[l] = W_{l+1} ... W_{L-1}.
  std::vector<Matrix> prefix(depth), suffix(depth);
  prefix[0] = Matrix::Identity(state.factors[0].rows(), state.factors[0].rows());
  for (int l = 1; l < depth; ++l) prefix[l] = prefix[l - 1] * state.factors[l - 1];
  suffix[depth - 1] =
      Matrix::Identity(state.factors[depth - 1].cols(), state.factors[depth - 1].cols());
  for (int l = depth - 2; l >= 0; --l) suffix[l] = state.factors[l + 1] * suffix[l + 1];

  std::vector<Matrix> grads(depth);
  for (int l = 0; l < depth; ++l) {
    grads[l] = prefix[l].transpose() * residual * suffix[l].transpose();
    if (lambda > 0.0) grads[l] += lambda * state.factors[l];
  }
  return grads;
}

Matrix best_rank_k_approx(const TargetMatrix& target, int k) {
  if (k < 1 || k > target.rank_star()) {
    throw std::invalid_argument("best_rank_k_approx: k out of range");
  }
  return target.u_r.leftCols(k) * target.sigma.head(k).asDiagonal() *
         target.v_r.leftCols(k).transpose();
}

} // namespace specfact
