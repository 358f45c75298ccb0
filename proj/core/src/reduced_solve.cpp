#include "lrmt/reduced_solve.hpp"

#include "lrmt/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <string>

namespace lrmt {

void InnerSolveConfig::validate(Index p) const {
  if (direct_threshold < 1) throw ConfigError("direct_threshold must be positive");
  if (!(pcg_tol > 0.0)) throw ConfigError("pcg_tol must be positive");
  if (pcg_maxit < 1) throw ConfigError("pcg_maxit must be positive");
  if (inner_precond_terms) {
    for (Index t : *inner_precond_terms) {
      if (t < 0 || t >= p) {
        throw ConfigError("inner preconditioner term " + std::to_string(t + 1) +
                          " outside 1.." + std::to_string(p));
      }
    }
    if ((*inner_precond_terms)[0] == (*inner_precond_terms)[1]) {
      throw ConfigError("inner preconditioner needs two distinct terms");
    }
  }
}

namespace {

bool has_full_column_rank(const Matrix& v) {
  if (v.cols() == 0) return true;
  if (v.cols() > v.rows()) return false;
  Eigen::ColPivHouseholderQR<Matrix> qr(v);
  qr.setThreshold(1e-12);
  return qr.rank() == v.cols();
}

}  // namespace

ReducedSystem::ReducedSystem(const MultitermEquation& eq, Matrix basis_left, Matrix basis_right)
    : p_(eq.p()), basis_left_(std::move(basis_left)), basis_right_(std::move(basis_right)) {
  if (basis_left_.rows() != eq.n_a() || basis_right_.rows() != eq.n_b()) {
    throw ShapeError("reduced system bases do not conform to the operator");
  }
  const auto pp = static_cast<std::size_t>(p_);
  left_products_.resize(pp);
  right_products_.resize(pp);
  for (Index i = 0; i < p_; ++i) {
    left_products_[idx(i)] = eq.term(i).a * basis_left_;
    right_products_[idx(i)] = eq.term(i).b.transpose() * basis_right_;
  }
  left_grams_.resize(pp * pp);
  right_grams_.resize(pp * pp);
  for (Index i = 0; i < p_; ++i) {
    for (Index j = i; j < p_; ++j) {
      left_grams_[idx(i * p_ + j)] = left_products_[idx(i)].transpose() * left_products_[idx(j)];
      right_grams_[idx(i * p_ + j)] =
          right_products_[idx(i)].transpose() * right_products_[idx(j)];
      if (i != j) {
        left_grams_[idx(j * p_ + i)] = left_grams_[idx(i * p_ + j)].transpose();
        right_grams_[idx(j * p_ + i)] = right_grams_[idx(i * p_ + j)].transpose();
      }
    }
  }
  rank_deficient_ = !has_full_column_rank(basis_left_) || !has_full_column_rank(basis_right_);
}

Matrix ReducedSystem::apply(const Matrix& alpha) const {
  Matrix out = Matrix::Zero(left_dim(), right_dim());
  for (Index i = 0; i < p_; ++i) {
    for (Index j = 0; j < p_; ++j) {
      out.noalias() += left_gram(i, j) * alpha * right_gram(j, i);
    }
  }
  return out;
}

Matrix ReducedSystem::assemble() const {
  const Index ql = left_dim();
  const Index qr = right_dim();
  Matrix t = Matrix::Zero(ql * qr, ql * qr);
  for (Index i = 0; i < p_; ++i) {
    for (Index j = i; j < p_; ++j) {
      const Matrix& g = left_gram(i, j);
      const Matrix& h = right_gram(i, j);
      for (Index b = 0; b < qr; ++b) {
        for (Index a = 0; a < qr; ++a) {
          auto block = t.block(a * ql, b * ql, ql, ql);
          block += h(a, b) * g;
          if (i != j) block += h(b, a) * g.transpose();
        }
      }
    }
  }
  return t;
}

ReducedSystem build_reduced(const MultitermEquation& eq, const Matrix& basis_left,
                            const Matrix& basis_right) {
  return ReducedSystem(eq, basis_left, basis_right);
}

Matrix alpha_rhs(const ReducedSystem& sys, const LowRankMatrix& r) {
  Matrix out = Matrix::Zero(sys.left_dim(), sys.right_dim());
  if (r.empty()) return out;
  for (Index i = 0; i < sys.p(); ++i) {
    const Matrix m = sys.left_product(i).transpose() * r.left();
    const Matrix n = r.right().transpose() * sys.right_product(i);
    out.noalias() += m * r.core() * n;
  }
  return out;
}

Matrix beta_rhs(const MultitermEquation& eq, const ReducedSystem& sys, const LowRankMatrix& z) {
  Matrix out = Matrix::Zero(sys.left_dim(), sys.right_dim());
  if (z.empty()) return out;
  for (Index j = 0; j < eq.p(); ++j) {
    const Matrix az = eq.term(j).a * z.left();
    const Matrix bz = eq.term(j).b.transpose() * z.right();
    for (Index i = 0; i < eq.p(); ++i) {
      const Matrix m = sys.left_product(i).transpose() * az;
      const Matrix n = bz.transpose() * sys.right_product(i);
      out.noalias() -= m * z.core() * n;
    }
  }
  return out;
}

namespace {

double frob_dot(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

/// Inverse of alpha -> G1 alpha H1 + G2 alpha H2 for symmetric positive (semi)definite
/// blocks, via simultaneous diagonalization of (G1, G2) and (H2, H1).
class TwoTermInverse {
 public:
  TwoTermInverse(const Matrix& g1, const Matrix& h1, const Matrix& g2, const Matrix& h2) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> left(symmetrize(g1), definite(g2));
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> right(symmetrize(h2), definite(h1));
    v_ = left.eigenvectors();
    w_ = right.eigenvectors();
    const Vector& lam = left.eigenvalues();
    const Vector& mu = right.eigenvalues();
    denom_.resize(lam.size(), mu.size());
    const double scale = std::max(lam.cwiseAbs().maxCoeff() + mu.cwiseAbs().maxCoeff(), 1e-300);
    for (Index j = 0; j < mu.size(); ++j) {
      for (Index i = 0; i < lam.size(); ++i) {
        denom_(i, j) = std::max(lam(i) + mu(j), 1e-14 * scale);
      }
    }
  }

  Matrix apply(const Matrix& g) const {
    const Matrix y = (v_.transpose() * g * w_).cwiseQuotient(denom_);
    return v_ * y * w_.transpose();
  }

 private:
  static Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

  static Matrix definite(const Matrix& m) {
    Matrix s = symmetrize(m);
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() == Eigen::Success) return s;
    const double ridge = 1e-12 * std::max(s.trace() / static_cast<double>(s.rows()), 1e-300);
    s.diagonal().array() += ridge;
    return s;
  }

  Matrix v_;
  Matrix w_;
  Matrix denom_;
};

}  // namespace

struct ReducedSolver::State {
  const ReducedSystem* sys = nullptr;
  InnerSolveConfig cfg;
  bool direct = true;
  bool factored = false;
  bool regularized = false;
  Eigen::LLT<Matrix> llt;
  Matrix eig_vectors;
  Vector eig_values;
  std::optional<TwoTermInverse> precond;

  void factor() {
    const Matrix t = sys->assemble();
    llt.compute(t);
    if (llt.info() != Eigen::Success) {
      regularized = true;
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      const double floor = 1e-14 * std::max(t.trace(), 0.0) / static_cast<double>(t.rows());
      eig_vectors = es.eigenvectors();
      eig_values = es.eigenvalues().cwiseMax(std::max(floor, std::numeric_limits<double>::min()));
    }
    factored = true;
  }

  ReducedSolution solve_direct(const Matrix& rhs) {
    if (!factored) factor();
    const Index ql = sys->left_dim();
    const Index qr = sys->right_dim();
    const Eigen::Map<const Vector> b(rhs.data(), rhs.size());
    Vector x;
    if (regularized) {
      x = eig_vectors * (eig_vectors.transpose() * b).cwiseQuotient(eig_values);
    } else {
      x = llt.solve(b);
    }
    ReducedSolution out;
    out.step = Eigen::Map<const Matrix>(x.data(), ql, qr);
    out.direct = true;
    out.regularized = regularized;
    const double bn = rhs.norm();
    out.relative_residual = bn > 0.0 ? (sys->apply(out.step) - rhs).norm() / bn : 0.0;
    return out;
  }

  Matrix precondition(const Matrix& r) const { return precond ? precond->apply(r) : r; }

  ReducedSolution solve_pcg(const Matrix& rhs) {
    ReducedSolution out;
    out.direct = false;
    const double bn = rhs.norm();
    Matrix x = Matrix::Zero(rhs.rows(), rhs.cols());
    if (bn == 0.0) {
      out.step = x;
      return out;
    }
    Matrix r = rhs;
    Matrix z = precondition(r);
    Matrix d = z;
    double rz = frob_dot(r, z);
    // CG residual norms are not monotone; keep the best iterate after the first step.
    Matrix best = x;
    double best_res = std::numeric_limits<double>::infinity();
    out.converged = false;
    int it = 0;
    while (it < cfg.pcg_maxit) {
      ++it;
      const Matrix td = sys->apply(d);
      const double curvature = frob_dot(d, td);
      if (!(curvature > 0.0)) break;
      const double step = rz / curvature;
      x += step * d;
      r -= step * td;
      const double res = r.norm();
      if (res < best_res) {
        best_res = res;
        best = x;
      }
      if (res <= cfg.pcg_tol * bn) {
        out.converged = true;
        break;
      }
      z = precondition(r);
      const double rz_next = frob_dot(r, z);
      d = z + (rz_next / rz) * d;
      rz = rz_next;
    }
    out.step = std::move(best);
    out.pcg_iterations = it;
    out.relative_residual = std::isfinite(best_res) ? best_res / bn : 1.0;
    return out;
  }
};

ReducedSolver::ReducedSolver(const ReducedSystem& sys, InnerSolveConfig cfg)
    : state_(std::make_unique<State>()) {
  cfg.validate(sys.p());
  state_->sys = &sys;
  state_->cfg = cfg;
  state_->direct = sys.unknowns() < cfg.direct_threshold;
  if (!state_->direct && cfg.inner_precond_terms) {
    const auto [a, b] = *cfg.inner_precond_terms;
    state_->precond.emplace(sys.left_gram(a, a), sys.right_gram(a, a), sys.left_gram(b, b),
                            sys.right_gram(b, b));
  }
}

ReducedSolver::~ReducedSolver() = default;
ReducedSolver::ReducedSolver(ReducedSolver&&) noexcept = default;
ReducedSolver& ReducedSolver::operator=(ReducedSolver&&) noexcept = default;

bool ReducedSolver::uses_direct() const { return state_->direct; }

ReducedSolution ReducedSolver::solve(const Matrix& rhs) {
  if (rhs.rows() != state_->sys->left_dim() || rhs.cols() != state_->sys->right_dim()) {
    throw ShapeError("reduced right-hand side does not conform to the projected system");
  }
  if (state_->sys->unknowns() == 0) return ReducedSolution{rhs, true, 0, true, false, 0.0};
  return state_->direct ? state_->solve_direct(rhs) : state_->solve_pcg(rhs);
}

ReducedSolution solve_reduced(const ReducedSystem& sys, const Matrix& rhs,
                              const InnerSolveConfig& cfg) {
  ReducedSolver solver(sys, cfg);
  return solver.solve(rhs);
}

}  // namespace lrmt
