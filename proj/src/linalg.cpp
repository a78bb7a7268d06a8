#include "specfact/linalg.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace specfact {

namespace {

// Uniform double in (0, 1), derived from the top 53 bits of the generator.
double uniform01(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 0.5) * 0x1p-53;
}

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) +
                                ": input contains NaN or Inf");
  }
}

} // namespace

SvdTriple svd_compact(const Matrix& m) {
  check_finite(m, "svd_compact");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("svd_compact: decomposition did not converge");
  }
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? kRankCutoff * s(0) : 0.0;
  int k = 0;
  while (k < s.size() && s(k) > cutoff && s(k) > 0.0) ++k;

  SvdTriple out;
  out.left_vectors = svd.matrixU().leftCols(k);
  out.singular_values = s.head(k);
  out.right_vectors = svd.matrixV().leftCols(k);

  // Sign convention: largest-|entry| of each left singular vector >= 0,
  // first occurrence winning ties.
  for (int j = 0; j < k; ++j) {
    int arg = 0;
    double best = std::abs(out.left_vectors(0, j));
    for (int i = 1; i < out.left_vectors.rows(); ++i) {
      const double a = std::abs(out.left_vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (out.left_vectors(arg, j) < 0.0) {
      out.left_vectors.col(j) = -out.left_vectors.col(j);
      out.right_vectors.col(j) = -out.right_vectors.col(j);
    }
  }
  return out;
}

Matrix orthogonalize_exact(const Matrix& m) {
  const SvdTriple svd = svd_compact(m);
  if (svd.rank() == 0) return Matrix::Zero(m.rows(), m.cols());
  return svd.left_vectors * svd.right_vectors.transpose();
}

Matrix orthogonalize_smoothed(const Matrix& m, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("orthogonalize_smoothed: beta must be > 0");
  }
  check_finite(m, "orthogonalize_smoothed");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error(
        "orthogonalize_smoothed: decomposition did not converge");
  }
  Vector s = svd.singularValues();
  for (int i = 0; i < s.size(); ++i) {
    s(i) = s(i) / std::sqrt(s(i) * s(i) + beta);
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Matrix newton_schulz(const Matrix& m, int iterations,
                     const std::array<double, 3>& coeffs) {
  check_finite(m, "newton_schulz");
  if (iterations < 1) {
    throw std::invalid_argument("newton_schulz: iterations must be >= 1");
  }
  const double fro = m.norm();
  if (fro == 0.0) {
    throw std::invalid_argument("newton_schulz: zero input matrix");
  }
  // Work on the wide orientation so X X^T is the smaller Gram matrix;
  // the iteration commutes with transposition.
  const bool tall = m.rows() > m.cols();
  Matrix x = tall ? Matrix(m.transpose() / fro) : Matrix(m / fro);
  const double a = coeffs[0], b = coeffs[1], c = coeffs[2];
  for (int it = 0; it < iterations; ++it) {
    const Matrix g = x * x.transpose();
    x = a * x + b * (g * x) + c * (g * (g * x));
  }
  return tall ? Matrix(x.transpose()) : x;
}

Matrix sample_gaussian(int rows, int cols, std::uint64_t seed) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("sample_gaussian: negative dimension");
  }
  std::mt19937_64 gen(seed);
  Matrix out(rows, cols);
  double spare = 0.0;
  bool have_spare = false;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (have_spare) {
        out(i, j) = spare;
        have_spare = false;
        continue;
      }
      const double u1 = uniform01(gen);
      const double u2 = uniform01(gen);
      const double r = std::sqrt(-2.0 * std::log(u1));
      out(i, j) = r * std::cos(2.0 * M_PI * u2);
      spare = r * std::sin(2.0 * M_PI * u2);
      have_spare = true;
    }
  }
  return out;
}

Matrix sample_orthonormal(int rows, int cols, std::uint64_t seed) {
  if (cols > rows) {
    throw std::invalid_argument("sample_orthonormal: cols must be <= rows");
  }
  const Matrix g = sample_gaussian(rows, cols, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols);
  for (int j = 0; j < cols; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

} // namespace specfact
