#include "lrmt/low_rank.hpp"

#include "lrmt/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace lrmt {

void TruncationConfig::validate() const {
  if (!(toltrank > 0.0 && toltrank < 1.0)) {
    throw ConfigError("toltrank must lie in (0, 1), got " + std::to_string(toltrank));
  }
  if (maxrank < 1) {
    throw ConfigError("maxrank must be >= 1, got " + std::to_string(maxrank));
  }
}

LowRankMatrix::LowRankMatrix(Matrix left, Matrix core, Matrix right, bool orthonormal)
    : left_(std::move(left)), core_(std::move(core)), right_(std::move(right)),
      orthonormal_(orthonormal) {
  if (core_.rows() != left_.cols() || core_.cols() != right_.cols()) {
    throw ShapeError("low-rank core is " + std::to_string(core_.rows()) + "x" +
                     std::to_string(core_.cols()) + " but factors have " +
                     std::to_string(left_.cols()) + " and " + std::to_string(right_.cols()) +
                     " columns");
  }
}

LowRankMatrix LowRankMatrix::zero(Index rows, Index cols) {
  return LowRankMatrix(Matrix(rows, 0), Matrix(0, 0), Matrix(cols, 0), true);
}

LowRankMatrix LowRankMatrix::outer(Matrix left, Matrix right) {
  if (left.cols() != right.cols()) {
    throw ShapeError("outer product factors need equal column counts");
  }
  const Index k = left.cols();
  return LowRankMatrix(std::move(left), Matrix::Identity(k, k), std::move(right));
}

Matrix LowRankMatrix::dense(std::int64_t cap) const {
  if (static_cast<std::int64_t>(rows()) * static_cast<std::int64_t>(cols()) > cap) {
    throw ConfigError("refusing to densify a " + std::to_string(rows()) + "x" +
                      std::to_string(cols()) + " matrix (cap " + std::to_string(cap) +
                      " entries)");
  }
  if (empty()) return Matrix::Zero(rows(), cols());
  return left_ * core_ * right_.transpose();
}

double LowRankMatrix::frobenius_norm() const {
  if (empty()) return 0.0;
  return singular_values(left_, core_, right_).norm();
}

LowRankMatrix LowRankMatrix::scaled(double factor) const {
  return LowRankMatrix(left_, core_ * factor, right_, orthonormal_);
}

ThinQR thin_qr(const Matrix& v) {
  const Index k = std::min(v.rows(), v.cols());
  ThinQR out;
  if (k == 0) {
    out.q = Matrix(v.rows(), 0);
    out.r = Matrix(0, v.cols());
    return out;
  }
  Eigen::HouseholderQR<Matrix> qr(v);
  out.q = qr.householderQ() * Matrix::Identity(v.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

Matrix orthonormal_basis(const Matrix& v, double rel_tol) {
  if (v.cols() == 0 || v.rows() == 0) return Matrix(v.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(v);
  qr.setThreshold(rel_tol);
  const Index r = qr.rank();
  if (r == 0) return Matrix(v.rows(), 0);
  return qr.householderQ() * Matrix::Identity(v.rows(), r);
}

Vector singular_values(const Matrix& left, const Matrix& core, const Matrix& right) {
  if (left.cols() == 0 || right.cols() == 0) return Vector(0);
  const ThinQR ql = thin_qr(left);
  const ThinQR qr = thin_qr(right);
  const Matrix small = ql.r * core * qr.r.transpose();
  Eigen::BDCSVD<Matrix> svd(small);
  return svd.singularValues();
}

Index select_rank(const Vector& sigma, const TruncationConfig& cfg) {
  if (sigma.size() == 0) return 0;
  const double lead = sigma(0);
  if (!(lead > 0.0) || !std::isfinite(lead)) return 0;
  Index keep = 0;
  while (keep < sigma.size() && sigma(keep) / lead > cfg.toltrank) ++keep;
  return std::min(keep, cfg.maxrank);
}

LowRankMatrix factored_sum(const LowRankMatrix& x, const LowRankMatrix& p, const Matrix& coeff) {
  if (x.rows() != p.rows() || x.cols() != p.cols()) {
    throw ShapeError("factored_sum: operands are " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + " and " + std::to_string(p.rows()) + "x" +
                     std::to_string(p.cols()));
  }
  if (coeff.rows() != p.left_rank() || coeff.cols() != p.right_rank()) {
    throw ShapeError("factored_sum: coefficient does not conform to the direction factors");
  }
  const Index rl = x.left_rank() + p.left_rank();
  const Index rr = x.right_rank() + p.right_rank();
  Matrix left(x.rows(), rl);
  left << x.left(), p.left();
  Matrix right(x.cols(), rr);
  right << x.right(), p.right();
  Matrix core = Matrix::Zero(rl, rr);
  core.topLeftCorner(x.left_rank(), x.right_rank()) = x.core();
  core.bottomRightCorner(p.left_rank(), p.right_rank()) = coeff;
  return LowRankMatrix(std::move(left), std::move(core), std::move(right));
}

TruncatedMatrix truncate_with_spectrum(const LowRankMatrix& m, const TruncationConfig& cfg) {
  cfg.validate();
  if (m.empty()) return {LowRankMatrix::zero(m.rows(), m.cols()), Vector(0)};

  const ThinQR ql = thin_qr(m.left());
  const ThinQR qr = thin_qr(m.right());
  const Matrix small = ql.r * m.core() * qr.r.transpose();
  Eigen::BDCSVD<Matrix> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sigma = svd.singularValues();

  const Index keep = select_rank(sigma, cfg);
  if (keep == 0) return {LowRankMatrix::zero(m.rows(), m.cols()), std::move(sigma)};

  Matrix left = ql.q * svd.matrixU().leftCols(keep);
  Matrix right = qr.q * svd.matrixV().leftCols(keep);
  Matrix core = sigma.head(keep).asDiagonal();
  return {LowRankMatrix(std::move(left), std::move(core), std::move(right), true),
          std::move(sigma)};
}

LowRankMatrix truncate(const LowRankMatrix& m, const TruncationConfig& cfg) {
  return truncate_with_spectrum(m, cfg).matrix;
}

}  // namespace lrmt
