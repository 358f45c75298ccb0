#pragma once

#include "lrmt/low_rank.hpp"

#include <Eigen/SparseCore>

#include <vector>

namespace lrmt {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// One coefficient pair (A_i, B_i) contributing A_i X B_i.
struct Term {
  SparseMatrix a;
  SparseMatrix b;
};

/// sum_i A_i X B_i = C D^T with sparse square A_i (n_A x n_A), B_i (n_B x n_B)
/// and tall dense right-hand side factors C (n_A x q), D (n_B x q).
class MultitermEquation {
 public:
  MultitermEquation(std::vector<Term> terms, Matrix c, Matrix d);

  const std::vector<Term>& terms() const { return terms_; }
  const Term& term(Index i) const { return terms_.at(static_cast<std::size_t>(i)); }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }

  Index p() const { return static_cast<Index>(terms_.size()); }
  Index q() const { return c_.cols(); }
  Index n_a() const { return c_.rows(); }
  Index n_b() const { return d_.rows(); }

  /// ||C D^T||_F, computed from the factors.
  double rhs_norm() const { return rhs_norm_; }
  LowRankMatrix rhs() const { return LowRankMatrix::outer(c_, d_); }

 private:
  std::vector<Term> terms_;
  Matrix c_;
  Matrix d_;
  double rhs_norm_ = 0.0;
};

/// [A_1 V, ..., A_p V]
Matrix left_bullet(const MultitermEquation& eq, const Matrix& v);
/// [A_1^T V, ..., A_p^T V]
Matrix left_bullet_adjoint(const MultitermEquation& eq, const Matrix& v);
/// [B_1^T W, ..., B_p^T W]
Matrix right_bullet(const MultitermEquation& eq, const Matrix& w);
/// [B_1 W, ..., B_p W]
Matrix right_bullet_adjoint(const MultitermEquation& eq, const Matrix& w);

/// L(X) = sum_i A_i X B_i in factored form: left = A_* . X.left,
/// right = B_*^T . X.right, core = I_p (x) X.core.
LowRankMatrix apply_L(const MultitermEquation& eq, const LowRankMatrix& x);

/// L*(X) = sum_i A_i^T X B_i^T in factored form.
LowRankMatrix apply_Lstar(const MultitermEquation& eq, const LowRankMatrix& x);

/// Factors of C D^T - L(X) without truncation:
/// [C, A_* . X.left] * blkdiag(I_q, -I_p (x) X.core) * [D, B_*^T . X.right]^T.
LowRankMatrix residual_factored(const MultitermEquation& eq, const LowRankMatrix& x);

/// I_copies (x) core.
Matrix block_diagonal_repeat(const Matrix& core, Index copies);

bool is_identity(const SparseMatrix& m);

}  // namespace lrmt
