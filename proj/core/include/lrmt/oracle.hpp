#pragma once

#include "lrmt/multiterm.hpp"

#include <vector>

namespace lrmt::oracle {

inline constexpr Index kMaxUnknowns = 10000;

/// Dense Kronecker form sum_i B_i^T (x) A_i and b = vec(C D^T).
struct KroneckerSystem {
  Matrix a;
  Vector b;
  Index n_a = 0;
  Index n_b = 0;
};

KroneckerSystem assemble_kron(const MultitermEquation& eq, Index max_unknowns = kMaxUnknowns);

/// LU solve of the Kronecker system, reshaped to n_A x n_B.
Matrix direct_solve(const KroneckerSystem& sys);

/// sum_i A_i X B_i on a dense X.
Matrix dense_apply(const MultitermEquation& eq, const Matrix& x);

Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Index rows, Index cols);

struct IterationResult {
  Vector x;
  /// ||b - A x_k||_2 for k = 0, 1, ...
  std::vector<double> history;
  int iterations = 0;
  bool converged = false;
  bool breakdown = false;
};

IterationResult vector_mr(const KroneckerSystem& sys, double tol, int maxit);
IterationResult vector_mr(const Matrix& a, const Vector& b, const Vector& x0, double tol,
                          int maxit);
IterationResult vector_orthomin1(const KroneckerSystem& sys, double tol, int maxit);
IterationResult vector_orthomin1(const Matrix& a, const Vector& b, const Vector& x0, double tol,
                                 int maxit);

struct SpectralQuantities {
  /// lambda_min of the symmetric part.
  double mu = 0.0;
  /// Largest singular value.
  double norm = 0.0;
};

SpectralQuantities spectral_quantities(const Matrix& a);
SpectralQuantities spectral_quantities(const KroneckerSystem& sys);

/// Dense A X + X B = C via complex Schur forms of A and B.
Matrix dense_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

}  // namespace lrmt::oracle
