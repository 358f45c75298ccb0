#include "lrmt/multiterm.hpp"

#include "lrmt/errors.hpp"

#include <string>

namespace lrmt {

namespace {

void check_square(const SparseMatrix& m, Index n, const char* what, std::size_t i) {
  if (m.rows() != n || m.cols() != n) {
    throw ShapeError(std::string(what) + std::to_string(i + 1) + " is " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     ", expected " + std::to_string(n) + "x" + std::to_string(n));
  }
}

void check_conforming(const MultitermEquation& eq, const LowRankMatrix& x) {
  if (x.rows() != eq.n_a() || x.cols() != eq.n_b()) {
    throw ShapeError("operand is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     ", operator acts on " + std::to_string(eq.n_a()) + "x" +
                     std::to_string(eq.n_b()));
  }
}

}  // namespace

MultitermEquation::MultitermEquation(std::vector<Term> terms, Matrix c, Matrix d)
    : terms_(std::move(terms)), c_(std::move(c)), d_(std::move(d)) {
  if (terms_.empty()) throw ShapeError("a multiterm equation needs at least one term");
  if (c_.cols() != d_.cols()) {
    throw ShapeError("right-hand side factors C and D have " + std::to_string(c_.cols()) +
                     " and " + std::to_string(d_.cols()) + " columns");
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    check_square(terms_[i].a, c_.rows(), "A", i);
    check_square(terms_[i].b, d_.rows(), "B", i);
    terms_[i].a.makeCompressed();
    terms_[i].b.makeCompressed();
  }
  rhs_norm_ = LowRankMatrix::outer(c_, d_).frobenius_norm();
}

Matrix left_bullet(const MultitermEquation& eq, const Matrix& v) {
  const Index k = v.cols();
  Matrix out(v.rows(), eq.p() * k);
  for (Index i = 0; i < eq.p(); ++i) out.middleCols(i * k, k) = eq.term(i).a * v;
  return out;
}

Matrix left_bullet_adjoint(const MultitermEquation& eq, const Matrix& v) {
  const Index k = v.cols();
  Matrix out(v.rows(), eq.p() * k);
  for (Index i = 0; i < eq.p(); ++i) out.middleCols(i * k, k) = eq.term(i).a.transpose() * v;
  return out;
}

Matrix right_bullet(const MultitermEquation& eq, const Matrix& w) {
  const Index k = w.cols();
  Matrix out(w.rows(), eq.p() * k);
  for (Index i = 0; i < eq.p(); ++i) out.middleCols(i * k, k) = eq.term(i).b.transpose() * w;
  return out;
}

Matrix right_bullet_adjoint(const MultitermEquation& eq, const Matrix& w) {
  const Index k = w.cols();
  Matrix out(w.rows(), eq.p() * k);
  for (Index i = 0; i < eq.p(); ++i) out.middleCols(i * k, k) = eq.term(i).b * w;
  return out;
}

Matrix block_diagonal_repeat(const Matrix& core, Index copies) {
  Matrix out = Matrix::Zero(copies * core.rows(), copies * core.cols());
  for (Index i = 0; i < copies; ++i) {
    out.block(i * core.rows(), i * core.cols(), core.rows(), core.cols()) = core;
  }
  return out;
}

LowRankMatrix apply_L(const MultitermEquation& eq, const LowRankMatrix& x) {
  check_conforming(eq, x);
  if (x.empty()) return LowRankMatrix::zero(eq.n_a(), eq.n_b());
  return LowRankMatrix(left_bullet(eq, x.left()), block_diagonal_repeat(x.core(), eq.p()),
                       right_bullet(eq, x.right()));
}

LowRankMatrix apply_Lstar(const MultitermEquation& eq, const LowRankMatrix& x) {
  check_conforming(eq, x);
  if (x.empty()) return LowRankMatrix::zero(eq.n_a(), eq.n_b());
  return LowRankMatrix(left_bullet_adjoint(eq, x.left()),
                       block_diagonal_repeat(x.core(), eq.p()),
                       right_bullet_adjoint(eq, x.right()));
}

LowRankMatrix residual_factored(const MultitermEquation& eq, const LowRankMatrix& x) {
  check_conforming(eq, x);
  if (x.empty()) return eq.rhs();
  const Index q = eq.q();
  const Index rl = x.left_rank();
  const Index rr = x.right_rank();
  const Index p = eq.p();

  Matrix left(eq.n_a(), q + p * rl);
  left << eq.c(), left_bullet(eq, x.left());
  Matrix right(eq.n_b(), q + p * rr);
  right << eq.d(), right_bullet(eq, x.right());

  Matrix core = Matrix::Zero(q + p * rl, q + p * rr);
  core.topLeftCorner(q, q).setIdentity();
  for (Index i = 0; i < p; ++i) core.block(q + i * rl, q + i * rr, rl, rr) = -x.core();
  return LowRankMatrix(std::move(left), std::move(core), std::move(right));
}

bool is_identity(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  Index diagonal_ones = 0;
  for (Index col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      if (it.value() == 0.0) continue;
      if (it.row() != it.col() || it.value() != 1.0) return false;
      ++diagonal_ones;
    }
  }
  return diagonal_ones == m.rows();
}

}  // namespace lrmt
