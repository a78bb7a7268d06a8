#pragma once

// The low-rank factorization objective: target construction with a known
// singular spectrum, the (optionally l2-regularized) loss, its gradients for
// factor chains of any depth, and best rank-k truncation.

#include "specfact/linalg.hpp"

#include <cstdint>
#include <vector>

namespace specfact {

// Sub-seed offsets for deriving independent streams from a single run seed.
inline constexpr std::uint64_t kSeedOffsetU = 1000003;
inline constexpr std::uint64_t kSeedOffsetV = 2000003;
inline constexpr std::uint64_t kSeedOffsetVPerp = 3000003;
inline constexpr std::uint64_t kSeedOffsetQ = 4000003;
inline constexpr std::uint64_t kSeedOffsetFactors = 7000003;

// Ground-truth matrix with its stored compact SVD and an orthonormal
// completion of the right singular basis.
struct TargetMatrix {
  Matrix y;      // m x n
  Matrix u_r;    // m x r*
  Vector sigma;  // length r*, strictly decreasing, positive
  Matrix v_r;    // n x r*
  Matrix v_perp; // n x (n - r*)

  int rows() const { return static_cast<int>(y.rows()); }
  int cols() const { return static_cast<int>(y.cols()); }
  int rank_star() const { return static_cast<int>(sigma.size()); }
};

// Trainable factor chain [W_L, ..., W_1] (leftmost first) with optional
// momentum buffers of matching shapes.
struct FactorState {
  std::vector<Matrix> factors;
  std::vector<Matrix> momentum;
  int step_index = 0;

  int depth() const { return static_cast<int>(factors.size()); }
};

struct LossValue {
  double value = 0.0;        // full (regularized) objective
  double residual_fro = 0.0; // ||prod(W) - Y||_F
};

// Builds a target with random orthonormal singular bases drawn from
// sub-seeds of `seed`. sigma_list must be strictly decreasing and positive.
TargetMatrix construct_target(int m, int n, const std::vector<double>& sigma_list,
                              std::uint64_t seed);

// Builds a target from explicit singular bases (used by constructions that
// need identity-aligned bases). v_perp is completed from a seeded Gaussian.
TargetMatrix make_target_from_svd(const Matrix& u_r, const Vector& sigma,
                                  const Matrix& v_r, std::uint64_t seed);

// Product of the factor chain.
Matrix factor_product(const FactorState& state);

// 1/2 ||prod(W) - Y||_F^2 + (lambda/2) sum_l ||W_l||_F^2.
LossValue loss(const FactorState& state, const TargetMatrix& target,
               double lambda);

// Gradient per factor: (prod_{k>l} W_k)^T (prod W - Y) (prod_{k<l} W_k)^T
// + lambda W_l, in factor order.
std::vector<Matrix> gradients(const FactorState& state,
                              const TargetMatrix& target, double lambda);

// Truncated reconstruction U_r[:, :k] Diag(sigma_1..k) V_r[:, :k]^T.
Matrix best_rank_k_approx(const TargetMatrix& target, int k);

} // namespace specfact
