#include "generators.hpp"

#include "lrmt/convdiff.hpp"
#include "lrmt/errors.hpp"
#include "lrmt/oracle.hpp"
#include "lrmt/reduced_solve.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

namespace lrmt {
namespace {

using testing::gaussian;
using testing::Rng;

Matrix basis(Index n, Index k, Rng& rng) { return orthonormal_basis(gaussian(n, k, rng)); }

Matrix dense_lstar(const MultitermEquation& eq, const Matrix& x) {
  Matrix out = Matrix::Zero(eq.n_a(), eq.n_b());
  for (const Term& t : eq.terms()) out += t.a.transpose() * x * t.b.transpose();
  return out;
}

TEST(ReducedSolve, IdentityOperatorGramsAreIdentity) {
  Rng rng(21);
  std::vector<Term> terms{{testing::sparse_identity(9), testing::sparse_identity(7)}};
  const MultitermEquation eq(terms, gaussian(9, 1, rng), gaussian(7, 1, rng));
  const ReducedSystem sys(eq, basis(9, 3, rng), basis(7, 3, rng));
  EXPECT_NEAR((sys.left_gram(0, 0) - Matrix::Identity(3, 3)).norm(), 0.0, 1e-14);
  EXPECT_NEAR((sys.right_gram(0, 0) - Matrix::Identity(3, 3)).norm(), 0.0, 1e-14);
  EXPECT_FALSE(sys.rank_deficient());
}

TEST(ReducedSolve, AssembledMatchesKroneckerNormalEquations) {
  Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const MultitermEquation eq = testing::random_equation({10, 10, 2, 1}, rng);
    const Index ql = testing::uniform_index(1, 3, rng);
    const Index qr = testing::uniform_index(1, 3, rng);
    const Matrix pl = basis(10, ql, rng);
    const Matrix pr = basis(10, qr, rng);
    const ReducedSystem sys(eq, pl, pr);
    const Matrix w = Eigen::kroneckerProduct(pr, pl);
    const Matrix aw = oracle::assemble_kron(eq).a * w;
    const Matrix expect = aw.transpose() * aw;
    EXPECT_LE(testing::relative_error(sys.assemble(), expect), 1e-12);
    const Matrix alpha = gaussian(ql, qr, rng);
    const Vector applied = expect * oracle::vec(alpha);
    EXPECT_LE((oracle::vec(sys.apply(alpha)) - applied).norm(), 1e-12 * applied.norm());
  }
}

TEST(ReducedSolve, ScalarCaseIsSquaredNorm) {
  Rng rng(23);
  const MultitermEquation eq = testing::random_equation({8, 6, 3, 1}, rng);
  const Matrix pl = basis(8, 1, rng);
  const Matrix pr = basis(6, 1, rng);
  const ReducedSystem sys(eq, pl, pr);
  const Matrix aw = oracle::dense_apply(eq, pl * pr.transpose());
  EXPECT_NEAR(sys.assemble()(0, 0), aw.squaredNorm(), 1e-12 * aw.squaredNorm());
  const Matrix rhs = Matrix::Constant(1, 1, 2.5);
  const ReducedSolution sol = solve_reduced(sys, rhs, {});
  EXPECT_NEAR(sol.step(0, 0), 2.5 / aw.squaredNorm(), 1e-12 * std::abs(sol.step(0, 0)));
}

TEST(ReducedSolve, AlphaRhsMatchesDense) {
  Rng rng(24);
  const MultitermEquation eq = testing::random_equation({12, 9, 3, 2}, rng);
  const Matrix pl = basis(12, 3, rng);
  const Matrix pr = basis(9, 2, rng);
  const ReducedSystem sys(eq, pl, pr);
  const LowRankMatrix r = testing::random_low_rank(12, 9, 3, rng);
  const Matrix expect = pl.transpose() * dense_lstar(eq, r.dense()) * pr;
  EXPECT_LE(testing::relative_error(alpha_rhs(sys, r), expect), 1e-12);
  EXPECT_EQ(alpha_rhs(sys, LowRankMatrix::zero(12, 9)).norm(), 0.0);
}

TEST(ReducedSolve, BetaRhsMatchesDense) {
  Rng rng(25);
  const MultitermEquation eq = testing::random_equation({10, 11, 2, 1}, rng);
  const Matrix pl = basis(10, 2, rng);
  const Matrix pr = basis(11, 3, rng);
  const ReducedSystem sys(eq, pl, pr);
  const LowRankMatrix z = testing::random_low_rank(10, 11, 2, rng);
  const Matrix expect =
      -pl.transpose() * dense_lstar(eq, oracle::dense_apply(eq, z.dense())) * pr;
  EXPECT_LE(testing::relative_error(beta_rhs(eq, sys, z), expect), 1e-12);
  EXPECT_EQ(beta_rhs(eq, sys, LowRankMatrix::zero(10, 11)).norm(), 0.0);
}

TEST(ReducedSolve, BetaRhsIdentityOperator) {
  Rng rng(26);
  std::vector<Term> terms{{testing::sparse_identity(8), testing::sparse_identity(8)}};
  const MultitermEquation eq(terms, gaussian(8, 1, rng), gaussian(8, 1, rng));
  const Matrix pl = basis(8, 2, rng);
  const Matrix pr = basis(8, 2, rng);
  const ReducedSystem sys(eq, pl, pr);
  const LowRankMatrix z = testing::random_low_rank(8, 8, 2, rng);
  EXPECT_LE(testing::relative_error(beta_rhs(eq, sys, z), -pl.transpose() * z.dense() * pr),
            1e-13);
}

TEST(ReducedSolve, DirectSolveResidual) {
  Rng rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    const MultitermEquation eq = testing::random_definite_equation({15, 12, 3, 1}, rng);
    const ReducedSystem sys(eq, basis(15, 5, rng), basis(12, 4, rng));
    const Matrix rhs = gaussian(5, 4, rng);
    const ReducedSolution sol = solve_reduced(sys, rhs, {});
    EXPECT_TRUE(sol.direct);
    EXPECT_FALSE(sol.regularized);
    const Vector res = sys.assemble() * oracle::vec(sol.step) - oracle::vec(rhs);
    EXPECT_LE(res.norm(), 1e-10 * rhs.norm());
    EXPECT_LE(sol.relative_residual, 1e-10);
  }
}

TEST(ReducedSolve, DirectAndPcgAgree) {
  Rng rng(28);
  for (int trial = 0; trial < 10; ++trial) {
    const MultitermEquation eq = testing::random_definite_equation({20, 18, 3, 1}, rng);
    const ReducedSystem sys(eq, basis(20, 6, rng), basis(18, 5, rng));
    const Matrix rhs = gaussian(6, 5, rng);
    const ReducedSolution direct = solve_reduced(sys, rhs, {});
    InnerSolveConfig cfg;
    cfg.direct_threshold = 1;
    const ReducedSolution pcg = solve_reduced(sys, rhs, cfg);
    EXPECT_FALSE(pcg.direct);
    EXPECT_TRUE(pcg.converged);
    EXPECT_LE(testing::relative_error(pcg.step, direct.step), 1e-3);
  }
}

TEST(ReducedSolve, InnerPreconditionerSpeedsUpPcg) {
  Rng rng(29);
  const MultitermEquation eq = build_convdiff({34, 0.1, 1.0});
  const ReducedSystem sys(eq, basis(32, 8, rng), basis(32, 8, rng));
  const Matrix rhs = gaussian(8, 8, rng);
  const ReducedSolution direct = solve_reduced(sys, rhs, {});
  InnerSolveConfig plain;
  plain.direct_threshold = 1;
  plain.pcg_tol = 1e-8;
  plain.pcg_maxit = 2000;
  InnerSolveConfig pre = plain;
  pre.inner_precond_terms = std::array<Index, 2>{0, 1};
  const ReducedSolution a = solve_reduced(sys, rhs, plain);
  const ReducedSolution b = solve_reduced(sys, rhs, pre);
  EXPECT_TRUE(b.converged);
  EXPECT_LT(b.pcg_iterations, a.pcg_iterations);
  EXPECT_LE(testing::relative_error(b.step, direct.step), 1e-5);
}

TEST(ReducedSolve, MinimizerProperty) {
  Rng rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    const MultitermEquation eq = testing::random_definite_equation({10, 9, 2, 2}, rng);
    const Matrix pl = basis(10, 3, rng);
    const Matrix pr = basis(9, 3, rng);
    const ReducedSystem sys(eq, pl, pr);
    const LowRankMatrix r = testing::random_low_rank(10, 9, 2, rng);
    const Matrix alpha = solve_reduced(sys, alpha_rhs(sys, r), {}).step;
    const auto objective = [&](const Matrix& a) {
      return (r.dense() - oracle::dense_apply(eq, pl * a * pr.transpose())).norm();
    };
    const double best = objective(alpha);
    for (int k = 0; k < 20; ++k) {
      Matrix delta = gaussian(3, 3, rng);
      delta *= 1e-3 / delta.norm();
      EXPECT_GE(objective(alpha + delta), best);
    }
  }
}

TEST(ReducedSolve, BetaEnforcesOperatorOrthogonality) {
  Rng rng(31);
  const MultitermEquation eq = testing::random_definite_equation({11, 10, 3, 1}, rng);
  const Matrix pl = basis(11, 3, rng);
  const Matrix pr = basis(10, 2, rng);
  const ReducedSystem sys(eq, pl, pr);
  const LowRankMatrix z = testing::random_low_rank(11, 10, 2, rng);
  const Matrix beta = solve_reduced(sys, beta_rhs(eq, sys, z), {}).step;
  const Matrix lnext = oracle::dense_apply(eq, z.dense() + pl * beta * pr.transpose());
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 2; ++j) {
      const Matrix e = pl.col(i) * pr.col(j).transpose();
      const Matrix le = oracle::dense_apply(eq, e);
      EXPECT_LE(std::abs((lnext.array() * le.array()).sum()), 1e-10 * lnext.norm() * le.norm());
    }
  }
}

TEST(ReducedSolve, RankDeficientBasisIsFlagged) {
  Rng rng(32);
  const MultitermEquation eq = testing::random_equation({8, 8, 1, 1}, rng);
  Matrix pl = gaussian(8, 3, rng);
  pl.col(2) = pl.col(0) + pl.col(1);
  const ReducedSystem sys(eq, pl, basis(8, 2, rng));
  EXPECT_TRUE(sys.rank_deficient());
  const ReducedSolution sol = solve_reduced(sys, gaussian(3, 2, rng), {});
  EXPECT_TRUE(sol.step.allFinite());
}

TEST(ReducedSolve, ConfigValidation) {
  InnerSolveConfig cfg;
  cfg.inner_precond_terms = std::array<Index, 2>{0, 3};
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.inner_precond_terms = std::array<Index, 2>{1, 1};
  EXPECT_THROW(cfg.validate(2), ConfigError);
  cfg.inner_precond_terms.reset();
  cfg.pcg_tol = 0.0;
  EXPECT_THROW(cfg.validate(2), ConfigError);
}

}  // namespace
}  // namespace lrmt
