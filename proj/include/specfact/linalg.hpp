#pragma once

// Matrix primitives: exact and smoothed orthogonalization, Newton-Schulz
// approximation, and seeded random sampling with fixed conventions so that
// every downstream trajectory is bit-reproducible.

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace specfact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative cutoff below which singular values are treated as zero.
inline constexpr double kRankCutoff = 1e-12;

// Default Newton-Schulz quintic coefficients and iteration count.
inline constexpr std::array<double, 3> kNewtonSchulzCoeffs = {3.4445, -4.7750,
                                                              2.0315};
inline constexpr int kNewtonSchulzIterations = 5;

struct SvdTriple {
  Matrix left_vectors;    // m x k, orthonormal columns
  Vector singular_values; // length k, non-increasing, all > cutoff
  Matrix right_vectors;   // n x k, orthonormal columns

  int rank() const { return static_cast<int>(singular_values.size()); }
};

// Compact SVD retaining singular values > 1e-12 * sigma_max. Sign convention:
// the largest-magnitude entry of each left singular vector is nonnegative
// (ties broken toward the lowest index). Throws std::runtime_error if the
// decomposition fails to converge.
SvdTriple svd_compact(const Matrix& m);

// Exact orthogonalization: U V^T from the compact SVD. All nonzero singular
// values of the output are 1; the zero matrix maps to the zero matrix.
Matrix orthogonalize_exact(const Matrix& m);

// Smoothed orthogonalization (m m^T + beta I)^{-1/2} m, computed through the
// spectral map sigma -> sigma / sqrt(sigma^2 + beta). Requires beta > 0.
Matrix orthogonalize_smoothed(const Matrix& m, double beta);

// Newton-Schulz orthogonalization: Frobenius-normalize, then iterate
// X <- a X + b (X X^T) X + c (X X^T)^2 X. Throws on zero input.
Matrix newton_schulz(const Matrix& m, int iterations = kNewtonSchulzIterations,
                     const std::array<double, 3>& coeffs = kNewtonSchulzCoeffs);

// Deterministic standard-normal matrix for a given seed (Box-Muller over
// mt19937_64; std::normal_distribution is not portable bit-for-bit).
Matrix sample_gaussian(int rows, int cols, std::uint64_t seed);

// Orthonormal columns from the QR factorization of a seeded Gaussian matrix,
// with the diagonal of R made nonnegative so the result is unique.
// Requires cols <= rows.
Matrix sample_orthonormal(int rows, int cols, std::uint64_t seed);

} // namespace specfact
