#include "generators.hpp"

#include "lrmt/convdiff.hpp"
#include "lrmt/errors.hpp"
#include "lrmt/oracle.hpp"
#include "lrmt/preconditioner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace lrmt {
namespace {

using testing::gaussian;
using testing::Rng;
using testing::to_sparse;

MultitermEquation sylvester_equation(const SparseMatrix& a, const SparseMatrix& b, Rng& rng) {
  std::vector<Term> terms{{a, testing::sparse_identity(b.rows())},
                          {testing::sparse_identity(a.rows()), b}};
  return MultitermEquation(std::move(terms), gaussian(a.rows(), 1, rng), gaussian(b.rows(), 1, rng));
}

double sylvester_residual(const SparseMatrix& a, const SparseMatrix& b, const Matrix& z,
                          const Matrix& r) {
  return (a * z + z * b - r).norm() / r.norm();
}

/// max over a grid of |prod_j (x - p_j)(y - q_j) / ((x + q_j)(y + p_j))|.
double adi_error(const AdiShifts& s, const SpectralInterval& ex, const SpectralInterval& ey) {
  double worst = 0.0;
  const int grid = 400;
  for (int i = 0; i <= grid; ++i) {
    const double x = ex.lo * std::pow(ex.hi / ex.lo, i / static_cast<double>(grid));
    for (int j = 0; j <= grid; j += 8) {
      const double y = ey.lo * std::pow(ey.hi / ey.lo, j / static_cast<double>(grid));
      double r = 1.0;
      for (Index k = 0; k < s.size(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        r *= (x - s.p[ks]) * (y - s.q[ks]) / ((x + s.q[ks]) * (y + s.p[ks]));
      }
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

TEST(Preconditioner, NoneIsIdentity) {
  Rng rng(61);
  const MultitermEquation eq = testing::random_equation({6, 5, 2, 1}, rng);
  const Preconditioner pre(eq, NoPreconditioner{});
  EXPECT_TRUE(pre.is_identity());
  const LowRankMatrix r = testing::random_low_rank(6, 5, 2, rng);
  EXPECT_EQ(pre.apply(r).dense(), r.dense());
  EXPECT_EQ(pre.shifts(), nullptr);
  EXPECT_EQ(describe(NoPreconditioner{}), "none");
}

TEST(Preconditioner, OneTermMatchesDenseSolve) {
  Rng rng(62);
  const Matrix a = testing::definite_matrix(9, 1.0, 3.0, 0.5, rng);
  const Matrix b = testing::spd_matrix(7, 1.0, 2.0, rng);
  std::vector<Term> terms{{to_sparse(a), to_sparse(b)},
                          {testing::sparse_identity(9), testing::sparse_identity(7)}};
  const MultitermEquation eq(std::move(terms), gaussian(9, 1, rng), gaussian(7, 1, rng));
  const Preconditioner pre(eq, OneTermSpec{0});
  const LowRankMatrix r = testing::random_low_rank(9, 7, 3, rng);
  const Matrix expect = a.lu().solve(r.dense()) * b.inverse();
  EXPECT_LE(testing::relative_error(pre.apply(r).dense(), expect), 1e-12);
  EXPECT_EQ(describe(OneTermSpec{0}), "one-term(1)");
}

TEST(Preconditioner, OneTermIdentitySideUntouched) {
  Rng rng(63);
  const Matrix a = testing::spd_matrix(8, 1.0, 4.0, rng);
  std::vector<Term> terms{{to_sparse(a), testing::sparse_identity(6)}};
  const MultitermEquation eq(std::move(terms), gaussian(8, 1, rng), gaussian(6, 1, rng));
  const Preconditioner pre(eq, OneTermSpec{0});
  const LowRankMatrix r = testing::random_low_rank(8, 6, 2, rng);
  const LowRankMatrix z = pre.apply(r);
  EXPECT_EQ(z.right(), r.right());
  EXPECT_EQ(z.core(), r.core());
  const LowRankMatrix zero = pre.apply(LowRankMatrix::zero(8, 6));
  EXPECT_TRUE(zero.empty());
}

TEST(Preconditioner, SpecValidation) {
  EXPECT_THROW(validate(OneTermSpec{2}, 2), ConfigError);
  TwoTermAdiSpec adi;
  adi.terms = {0, 0};
  EXPECT_THROW(validate(adi, 2), ConfigError);
  adi.terms = {0, 1};
  adi.t_adi = 0;
  EXPECT_THROW(validate(adi, 2), ConfigError);
  adi.t_adi = 4;
  EXPECT_NO_THROW(validate(adi, 2));
  EXPECT_THROW(validate(adi, 1), ConfigError);
}

TEST(Wachspress, DegenerateIntervalGivesExactShift) {
  const AdiShifts s = wachspress_shifts({1.0, 1.0}, {1.0, 1.0}, 1);
  ASSERT_EQ(s.size(), 1);
  EXPECT_DOUBLE_EQ(s.p[0], 1.0);
  EXPECT_DOUBLE_EQ(s.q[0], 1.0);
  EXPECT_EQ(adi_error(s, {1.0, 1.0}, {1.0, 1.0}), 0.0);
}

TEST(Wachspress, ShiftsInsideIntervalsAndMonotone) {
  const AdiShifts s = wachspress_shifts({1.0, 100.0}, {1.0, 100.0}, 8);
  ASSERT_EQ(s.size(), 8);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_GE(s.p[j], 1.0 - 1e-10);
    EXPECT_LE(s.p[j], 100.0 + 1e-8);
    EXPECT_GE(s.q[j], 1.0 - 1e-10);
    EXPECT_LE(s.q[j], 100.0 + 1e-8);
    if (j > 0) {
      EXPECT_LT(s.p[j], s.p[j - 1]);
    }
  }
  // Equal intervals give equal shift sets.
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(s.p[j], s.q[j], 1e-8 * s.p[j]);
}

TEST(Wachspress, ErrorBelowZolotarevBound) {
  const std::vector<std::pair<SpectralInterval, SpectralInterval>> cases{
      {{1.0, 100.0}, {1.0, 100.0}},
      {{0.5, 40.0}, {2.0, 1e4}},
      {{1e-3, 1.0}, {1e-2, 10.0}},
      {{3.0, 3.5}, {1.0, 1e3}},
  };
  for (const auto& [ex, ey] : cases) {
    const double m = (ex.lo + ey.hi) * (ex.hi + ey.lo) / ((ex.lo + ey.lo) * (ex.hi + ey.hi));
    double previous = 2.0;
    for (int t : {1, 2, 4, 8, 12}) {
      const AdiShifts s = wachspress_shifts(ex, ey, t);
      const double err = adi_error(s, ex, ey);
      const double bound = 4.0 * std::exp(-std::numbers::pi * std::numbers::pi * t /
                                          std::log(16.0 * m));
      EXPECT_LE(err, bound * (1.0 + 1e-6)) << ex.lo << " " << ey.hi << " t=" << t;
      EXPECT_LT(err, previous);
      previous = err;
    }
  }
}

TEST(Wachspress, RejectsBadInput) {
  EXPECT_THROW(wachspress_shifts({1.0, 2.0}, {1.0, 2.0}, 0), ConfigError);
  EXPECT_THROW(wachspress_shifts({-1.0, 2.0}, {1.0, 2.0}, 4), NumericalError);
  EXPECT_THROW(wachspress_shifts({3.0, 2.0}, {1.0, 2.0}, 4), ConfigError);
}

TEST(Shifts, AnalyticLaplacianMatchesDenseEigenvalues) {
  for (Index m : {1, 2, 5, 64, 256}) {
    const double scale = 3.7;
    const SparseMatrix t = second_difference(m, scale);
    const SpectralInterval iv = laplacian_interval(t);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig{Matrix(t)};
    EXPECT_NEAR(iv.lo, eig.eigenvalues().minCoeff(), 1e-10 * eig.eigenvalues().maxCoeff()) << m;
    EXPECT_NEAR(iv.hi, eig.eigenvalues().maxCoeff(), 1e-10 * eig.eigenvalues().maxCoeff()) << m;
  }
}

TEST(Shifts, AnalyticRejectsOtherOperators) {
  Rng rng(64);
  EXPECT_THROW(laplacian_interval(to_sparse(testing::spd_matrix(5, 1.0, 2.0, rng))), ConfigError);
  SparseMatrix t = second_difference(6, 1.0);
  t.coeffRef(2, 2) = 3.0;
  EXPECT_THROW(laplacian_interval(t), ConfigError);
}

TEST(Shifts, EstimatedIntervalEnclosesSpectrum) {
  Rng rng(65);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = testing::spd_matrix(40, 0.5, 20.0, rng);
    const SpectralInterval iv = estimate_interval(to_sparse(a));
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    EXPECT_GT(iv.lo, 0.0);
    EXPECT_LE(iv.lo, lo * 1.0001);
    EXPECT_GE(iv.hi, hi * 0.98);
    EXPECT_GE(iv.lo, 0.5 * lo);
    EXPECT_LE(iv.hi, 1.2 * hi);
  }
}

TEST(Shifts, IndefiniteOperatorIsRejected) {
  Vector diag(4);
  diag << -2.0, -1.0, 1.0, 2.0;
  const SparseMatrix a = to_sparse(Matrix(diag.asDiagonal()));
  EXPECT_THROW(estimate_interval(a), NumericalError);
}

TEST(Adi, LaplacianSylvesterConverges) {
  Rng rng(66);
  const Index m = 64;
  const SparseMatrix t = second_difference(m, 1.0 / ((2.0 / (m + 1)) * (2.0 / (m + 1))));
  const MultitermEquation eq = sylvester_equation(t, t, rng);
  TwoTermAdiSpec spec;
  spec.t_adi = 20;
  spec.shift_source = ShiftSource::analytic_laplacian;
  const Preconditioner pre(eq, spec);
  ASSERT_TRUE(pre.is_adi());
  ASSERT_NE(pre.shifts(), nullptr);
  const LowRankMatrix r = testing::random_low_rank(m, m, 2, rng);
  const LowRankMatrix z = pre.apply(r);
  EXPECT_EQ(z.rank(), 20 * 2);
  EXPECT_LE(sylvester_residual(t, t, z.dense(), r.dense()), 1e-8);
  EXPECT_LE(testing::relative_error(z.dense(), oracle::dense_sylvester(Matrix(t), Matrix(t),
                                                                       r.dense())),
            1e-7);
}

TEST(Adi, TermOrderDoesNotMatter) {
  Rng rng(67);
  const SparseMatrix a = second_difference(20, 2.0);
  const SparseMatrix b = second_difference(15, 5.0);
  const MultitermEquation eq = sylvester_equation(a, b, rng);
  std::vector<Term> swapped{eq.term(1), eq.term(0)};
  const MultitermEquation eq2(std::move(swapped), eq.c(), eq.d());
  TwoTermAdiSpec spec;
  spec.t_adi = 10;
  const LowRankMatrix r = testing::random_low_rank(20, 15, 1, rng);
  const Matrix z1 = Preconditioner(eq, spec).apply(r).dense();
  const Matrix z2 = Preconditioner(eq2, spec).apply(r).dense();
  EXPECT_LE(testing::relative_error(z1, z2), 1e-13);
  EXPECT_LE(sylvester_residual(a, b, z1, r.dense()), 1e-6);
}

TEST(Adi, NegativeDefiniteIsFlipped) {
  Rng rng(68);
  const SparseMatrix a = -second_difference(12, 1.0);
  const SparseMatrix b = -second_difference(10, 1.0);
  const MultitermEquation eq = sylvester_equation(a, b, rng);
  TwoTermAdiSpec spec;
  spec.t_adi = 16;
  spec.shift_source = ShiftSource::estimated;
  const LowRankMatrix r = testing::random_low_rank(12, 10, 2, rng);
  const Matrix z = Preconditioner(eq, spec).apply(r).dense();
  EXPECT_LE(sylvester_residual(a, b, z, r.dense()), 1e-6);
}

TEST(Adi, EightSweepsOnConvectionDiffusionLaplacian) {
  Rng rng(69);
  const MultitermEquation eq = build_convdiff({130, 0.1, 1.0});
  TwoTermAdiSpec spec;
  spec.t_adi = 8;
  const Preconditioner pre(eq, spec);
  const LowRankMatrix r = testing::random_low_rank(eq.n_a(), eq.n_b(), 2, rng);
  const Matrix z = pre.apply(r).dense();
  EXPECT_LE(sylvester_residual(eq.term(0).a, eq.term(1).b, z, r.dense()), 1e-2);
}

TEST(Adi, ZeroResidualGivesZero) {
  Rng rng(70);
  const SparseMatrix t = second_difference(10, 1.0);
  const MultitermEquation eq = sylvester_equation(t, t, rng);
  const Preconditioner pre(eq, TwoTermAdiSpec{});
  const LowRankMatrix z = pre.apply(LowRankMatrix::zero(10, 10));
  EXPECT_EQ(z.rows(), 10);
  EXPECT_EQ(z.cols(), 10);
  EXPECT_TRUE(z.empty());
}

TEST(Adi, RequiresSylvesterStructure) {
  Rng rng(71);
  const MultitermEquation eq = testing::random_equation({6, 6, 2, 1}, rng);
  EXPECT_THROW(Preconditioner(eq, TwoTermAdiSpec{}), ConfigError);
  const SparseMatrix a = second_difference(6, 1.0);
  const SparseMatrix b = -second_difference(6, 1.0);
  const MultitermEquation mixed = sylvester_equation(a, b, rng);
  TwoTermAdiSpec spec;
  spec.shift_source = ShiftSource::estimated;
  EXPECT_THROW(Preconditioner(mixed, spec), NumericalError);
}

}  // namespace
}  // namespace lrmt
