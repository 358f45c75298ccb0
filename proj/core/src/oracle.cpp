#include "lrmt/oracle.hpp"

#include "lrmt/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <complex>

namespace lrmt::oracle {

KroneckerSystem assemble_kron(const MultitermEquation& eq, Index max_unknowns) {
  const Index na = eq.n_a();
  const Index nb = eq.n_b();
  const Index n = na * nb;
  if (n > max_unknowns) {
    throw ConfigError("Kronecker oracle limited to " + std::to_string(max_unknowns) +
                      " unknowns, got " + std::to_string(n));
  }
  KroneckerSystem sys;
  sys.n_a = na;
  sys.n_b = nb;
  sys.a = Matrix::Zero(n, n);
  for (const Term& t : eq.terms()) {
    const Matrix a = Matrix(t.a);
    const Matrix bt = Matrix(t.b.transpose());
    for (Index c = 0; c < nb; ++c) {
      for (Index r = 0; r < nb; ++r) {
        if (bt(r, c) != 0.0) sys.a.block(r * na, c * na, na, na) += bt(r, c) * a;
      }
    }
  }
  sys.b = vec(eq.c() * eq.d().transpose());
  return sys;
}

Matrix direct_solve(const KroneckerSystem& sys) {
  Eigen::PartialPivLU<Matrix> lu(sys.a);
  const double det_scale = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(det_scale > 0.0)) throw NumericalError("Kronecker matrix is singular");
  return unvec(lu.solve(sys.b), sys.n_a, sys.n_b);
}

Matrix dense_apply(const MultitermEquation& eq, const Matrix& x) {
  Matrix out = Matrix::Zero(eq.n_a(), eq.n_b());
  for (const Term& t : eq.terms()) out += t.a * (x * t.b);
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw ShapeError("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

IterationResult vector_mr(const Matrix& a, const Vector& b, const Vector& x0, double tol,
                          int maxit) {
  IterationResult out;
  out.x = x0;
  Vector r = b - a * out.x;
  const double target = tol * b.norm();
  out.history.push_back(r.norm());
  while (out.iterations < maxit && out.history.back() > target) {
    const Vector ar = a * r;
    const double denom = ar.squaredNorm();
    if (!(denom > 0.0)) {
      out.breakdown = true;
      break;
    }
    const double alpha = ar.dot(r) / denom;
    out.x += alpha * r;
    r -= alpha * ar;
    ++out.iterations;
    out.history.push_back(r.norm());
  }
  out.converged = out.history.back() <= target;
  return out;
}

IterationResult vector_mr(const KroneckerSystem& sys, double tol, int maxit) {
  return vector_mr(sys.a, sys.b, Vector::Zero(sys.b.size()), tol, maxit);
}

IterationResult vector_orthomin1(const Matrix& a, const Vector& b, const Vector& x0, double tol,
                                 int maxit) {
  IterationResult out;
  out.x = x0;
  Vector r = b - a * out.x;
  Vector p = r;
  Vector ap = a * p;
  const double target = tol * b.norm();
  out.history.push_back(r.norm());
  while (out.iterations < maxit && out.history.back() > target) {
    const double denom = ap.squaredNorm();
    if (!(denom > 0.0)) {
      out.breakdown = true;
      break;
    }
    const double alpha = r.dot(ap) / denom;
    out.x += alpha * p;
    r -= alpha * ap;
    ++out.iterations;
    out.history.push_back(r.norm());
    const Vector ar = a * r;
    const double beta = -ar.dot(ap) / denom;
    p = r + beta * p;
    ap = ar + beta * ap;
  }
  out.converged = out.history.back() <= target;
  return out;
}

IterationResult vector_orthomin1(const KroneckerSystem& sys, double tol, int maxit) {
  return vector_orthomin1(sys.a, sys.b, Vector::Zero(sys.b.size()), tol, maxit);
}

SpectralQuantities spectral_quantities(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  Eigen::BDCSVD<Matrix> svd(a);
  return {es.eigenvalues()(0), svd.singularValues()(0)};
}

SpectralQuantities spectral_quantities(const KroneckerSystem& sys) {
  return spectral_quantities(sys.a);
}

Matrix dense_sylvester(const Matrix& a, const Matrix& b, const Matrix& c) {
  using CMatrix = Eigen::MatrixXcd;
  using CVector = Eigen::VectorXcd;
  if (a.rows() != a.cols() || b.rows() != b.cols() || c.rows() != a.rows() ||
      c.cols() != b.rows()) {
    throw ShapeError("dense_sylvester: shapes do not conform");
  }
  Eigen::ComplexSchur<CMatrix> sa(a.cast<std::complex<double>>());
  Eigen::ComplexSchur<CMatrix> sb(b.cast<std::complex<double>>());
  const CMatrix& u = sa.matrixU();
  const CMatrix& t = sa.matrixT();
  const CMatrix& v = sb.matrixU();
  const CMatrix& s = sb.matrixT();
  const CMatrix f = u.adjoint() * c.cast<std::complex<double>>() * v;
  const Index m = a.rows();
  CMatrix y(m, b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    CVector rhs = f.col(j);
    for (Index k = 0; k < j; ++k) rhs -= s(k, j) * y.col(k);
    CMatrix shifted = t;
    shifted.diagonal().array() += s(j, j);
    y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * y * v.adjoint()).real();
}

}  // namespace lrmt::oracle
