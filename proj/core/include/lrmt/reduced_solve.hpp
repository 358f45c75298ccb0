#pragma once

#include "lrmt/low_rank.hpp"
#include "lrmt/multiterm.hpp"

#include <array>
#include <memory>
#include <optional>
#include <vector>

namespace lrmt {

/// Controls how the projected equations for the step coefficients are solved.
struct InnerSolveConfig {
  /// Assemble and Cholesky-factor the Kronecker matrix when q_l * q_r is below this.
  Index direct_threshold = 4000;
  double pcg_tol = 1e-4;
  int pcg_maxit = 200;
  /// Zero-based term pair whose diagonal Gram blocks precondition the inner PCG.
  std::optional<std::array<Index, 2>> inner_precond_terms;

  void validate(Index p) const;
};

/// The projected p^2-term operator
///   alpha -> P_l^T L*(L(P_l alpha P_r^T)) P_r = sum_ij G_ij alpha H_ji,
/// with G_ij = (A_i P_l)^T (A_j P_l) and H_ij = (B_i^T P_r)^T (B_j^T P_r).
/// In vectorized form the operator is sum_ij H_ij (x) G_ij.
class ReducedSystem {
 public:
  ReducedSystem(const MultitermEquation& eq, Matrix basis_left, Matrix basis_right);

  Index p() const { return p_; }
  Index left_dim() const { return basis_left_.cols(); }
  Index right_dim() const { return basis_right_.cols(); }
  Index unknowns() const { return left_dim() * right_dim(); }

  const Matrix& basis_left() const { return basis_left_; }
  const Matrix& basis_right() const { return basis_right_; }
  /// A_i P_l
  const Matrix& left_product(Index i) const { return left_products_[idx(i)]; }
  /// B_i^T P_r
  const Matrix& right_product(Index i) const { return right_products_[idx(i)]; }
  const Matrix& left_gram(Index i, Index j) const { return left_grams_[idx(i * p_ + j)]; }
  const Matrix& right_gram(Index i, Index j) const { return right_grams_[idx(i * p_ + j)]; }

  /// Set when either basis is numerically rank deficient.
  bool rank_deficient() const { return rank_deficient_; }

  /// Applies the operator in matrix form.
  Matrix apply(const Matrix& alpha) const;
  /// Dense Kronecker form of the operator (unknowns() x unknowns()).
  Matrix assemble() const;

 private:
  static std::size_t idx(Index i) { return static_cast<std::size_t>(i); }

  Index p_ = 0;
  Matrix basis_left_;
  Matrix basis_right_;
  std::vector<Matrix> left_products_;
  std::vector<Matrix> right_products_;
  std::vector<Matrix> left_grams_;
  std::vector<Matrix> right_grams_;
  bool rank_deficient_ = false;
};

ReducedSystem build_reduced(const MultitermEquation& eq, const Matrix& basis_left,
                            const Matrix& basis_right);

/// P_l^T L*(R) P_r, evaluated factor-wise.
Matrix alpha_rhs(const ReducedSystem& sys, const LowRankMatrix& r);

/// -P_l^T L*(L(Z)) P_r, evaluated factor-wise.
Matrix beta_rhs(const MultitermEquation& eq, const ReducedSystem& sys, const LowRankMatrix& z);

struct ReducedSolution {
  Matrix step;
  bool direct = true;
  int pcg_iterations = 0;
  bool converged = true;
  /// Cholesky failed and an eigenvalue-floored solve was used.
  bool regularized = false;
  double relative_residual = 0.0;
};

/// Solves the reduced system for any number of right-hand sides, reusing the
/// Cholesky factor (direct path) or the inner preconditioner (PCG path).
/// Keeps a reference to `sys`, which must outlive the solver.
class ReducedSolver {
 public:
  ReducedSolver(const ReducedSystem& sys, InnerSolveConfig cfg);
  ~ReducedSolver();
  ReducedSolver(ReducedSolver&&) noexcept;
  ReducedSolver& operator=(ReducedSolver&&) noexcept;

  bool uses_direct() const;
  ReducedSolution solve(const Matrix& rhs);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

ReducedSolution solve_reduced(const ReducedSystem& sys, const Matrix& rhs,
                              const InnerSolveConfig& cfg);

}  // namespace lrmt
