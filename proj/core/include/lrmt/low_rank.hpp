#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace lrmt {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest number of entries `LowRankMatrix::dense` will materialize by default.
inline constexpr std::int64_t kDefaultDensifyCap = 4'000'000;

/// Rank truncation parameters: keep singular values with sigma_j / sigma_1 > toltrank,
/// never more than maxrank of them.
struct TruncationConfig {
  double toltrank = 1e-10;
  Index maxrank = 50;

  void validate() const;
};

/// A matrix held as left * core * right^T.
///
/// Zero matrices use zero-width factors, so `LowRankMatrix::zero(m, n)` has a 0x0 core.
/// Values are immutable; every operation returns a new matrix.
class LowRankMatrix {
 public:
  LowRankMatrix() = default;
  LowRankMatrix(Matrix left, Matrix core, Matrix right, bool orthonormal = false);

  static LowRankMatrix zero(Index rows, Index cols);
  /// left * right^T with an identity core.
  static LowRankMatrix outer(Matrix left, Matrix right);

  Index rows() const { return left_.rows(); }
  Index cols() const { return right_.rows(); }
  Index left_rank() const { return left_.cols(); }
  Index right_rank() const { return right_.cols(); }
  /// Number of stored columns (the larger of the two inner dimensions).
  Index rank() const { return std::max(left_.cols(), right_.cols()); }

  const Matrix& left() const { return left_; }
  const Matrix& core() const { return core_; }
  const Matrix& right() const { return right_; }
  bool orthonormal() const { return orthonormal_; }
  bool empty() const { return left_.cols() == 0 || right_.cols() == 0; }

  /// Materializes the product; throws ConfigError above `cap` entries.
  Matrix dense(std::int64_t cap = kDefaultDensifyCap) const;

  /// Exact Frobenius norm computed from thin QR factors of left and right.
  double frobenius_norm() const;

  LowRankMatrix scaled(double factor) const;

 private:
  Matrix left_{0, 0};
  Matrix core_{0, 0};
  Matrix right_{0, 0};
  bool orthonormal_ = false;
};

/// Result of a truncation that also exposes the full singular spectrum of the
/// compressed core (before the rank cut).
struct TruncatedMatrix {
  LowRankMatrix matrix;
  Vector singular_values;
};

/// [X.left, P.left] * blkdiag(X.core, coeff) * [X.right, P.right]^T, untruncated.
/// P's own core is ignored; `coeff` must be P.left_rank() x P.right_rank().
LowRankMatrix factored_sum(const LowRankMatrix& x, const LowRankMatrix& p, const Matrix& coeff);

/// Number of leading singular values kept under `cfg`.
Index select_rank(const Vector& singular_values, const TruncationConfig& cfg);

/// QR of both factors, SVD of the small core, rank cut per `cfg`.
LowRankMatrix truncate(const LowRankMatrix& m, const TruncationConfig& cfg);
TruncatedMatrix truncate_with_spectrum(const LowRankMatrix& m, const TruncationConfig& cfg);

/// Singular values of left * core * right^T, computed without densifying.
Vector singular_values(const Matrix& left, const Matrix& core, const Matrix& right);

/// Thin orthonormal basis of the column span, dropping numerically dependent columns.
Matrix orthonormal_basis(const Matrix& v, double rel_tol = 1e-12);

struct ThinQR {
  Matrix q;  ///< rows x k, orthonormal columns, k = min(rows, cols)
  Matrix r;  ///< k x cols, upper trapezoidal
};
ThinQR thin_qr(const Matrix& v);

}  // namespace lrmt
