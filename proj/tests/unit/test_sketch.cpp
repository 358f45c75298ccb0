#include "generators.hpp"

#include "lrmt/errors.hpp"
#include "lrmt/oracle.hpp"
#include "lrmt/sketch.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace lrmt {
namespace {

using testing::gaussian;
using testing::Rng;

Matrix dense_dct(Index n) {
  Matrix c(n, n);
  const double pi = std::acos(-1.0);
  for (Index k = 0; k < n; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (Index j = 0; j < n; ++j) {
      c(k, j) = scale * std::cos(pi * k * (2.0 * j + 1.0) / (2.0 * n));
    }
  }
  return c;
}

Matrix dense_sketch(const SketchOperator& s) {
  const Index n = s.n();
  const Matrix c = dense_dct(n);
  Matrix out(s.s(), n);
  for (Index r = 0; r < s.s(); ++r) {
    const Index row = s.row_subset()[static_cast<std::size_t>(r)];
    for (Index j = 0; j < n; ++j) {
      out(r, j) = c(row, j) * s.sign_flips()[static_cast<std::size_t>(j)];
    }
  }
  return out * std::sqrt(static_cast<double>(n) / static_cast<double>(s.s()));
}

TEST(Sketch, MatchesDenseDefinition) {
  Rng rng(41);
  for (Index n : {1, 2, 7, 16, 33}) {
    const SketchOperator s(n, std::min<Index>(n, 5), 9);
    const Matrix v = gaussian(n, 3, rng);
    EXPECT_LE(testing::relative_error(s.apply(v), dense_sketch(s) * v), 1e-12) << n;
  }
}

TEST(Sketch, RowSubsetSortedAndDistinct) {
  const SketchOperator s(100, 30, 3);
  const auto& rows = s.row_subset();
  ASSERT_EQ(rows.size(), 30U);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
  EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
  EXPECT_GE(rows.front(), 0);
  EXPECT_LT(rows.back(), 100);
  for (double sign : s.sign_flips()) EXPECT_EQ(std::abs(sign), 1.0);
}

TEST(Sketch, FullSizeIsIsometry) {
  Rng rng(42);
  const SketchOperator s(64, 64, 5);
  const Matrix v = gaussian(64, 4, rng);
  const Matrix sv = s.apply(v);
  EXPECT_LE(testing::relative_error(sv.transpose() * sv, v.transpose() * v), 1e-12);
}

TEST(Sketch, DeterministicForSeed) {
  Rng rng(43);
  const Matrix v = gaussian(80, 3, rng);
  const SketchOperator a(80, 20, 77);
  const SketchOperator b(80, 20, 77);
  const SketchOperator c(80, 20, 78);
  EXPECT_EQ(a.apply(v), b.apply(v));
  EXPECT_NE(a.apply(v), c.apply(v));
}

TEST(Sketch, NormPreservedOnAverage) {
  Rng rng(44);
  const Vector v = gaussian(256, 1, rng);
  double sum = 0.0;
  const int draws = 400;
  for (int seed = 0; seed < draws; ++seed) {
    const SketchOperator s(256, 32, static_cast<std::uint64_t>(seed));
    sum += s.apply(v).squaredNorm() / v.squaredNorm();
  }
  const double mean = sum / draws;
  EXPECT_GE(mean, 0.9);
  EXPECT_LE(mean, 1.1);
}

TEST(Sketch, SubspaceEmbedding) {
  Rng rng(45);
  const Index n = 1024;
  const Index k = 5;
  const Matrix basis = orthonormal_basis(gaussian(n, k, rng));
  int good = 0;
  for (int seed = 0; seed < 50; ++seed) {
    const SketchOperator s(n, 4 * k * 5, static_cast<std::uint64_t>(seed));
    const Eigen::JacobiSVD<Matrix> svd(s.apply(basis));
    const Vector sv = svd.singularValues();
    if (sv(0) <= std::sqrt(3.0) && sv(k - 1) >= std::sqrt(1.0 / 3.0)) ++good;
  }
  EXPECT_GE(good, 45);
}

TEST(Sketch, InvalidSizes) {
  EXPECT_THROW(SketchOperator(10, 11, 1), ConfigError);
  EXPECT_THROW(SketchOperator(10, 0, 1), ConfigError);
  EXPECT_THROW(SketchOperator(0, 0, 1), ConfigError);
  const SketchOperator s(10, 4, 1);
  EXPECT_THROW((void)s.apply(Matrix::Zero(9, 2)), ShapeError);
}

TEST(Sketch, PolicyChoosesSides) {
  const SketchPolicy both = SketchPolicy::choose(1022, 1022, 4, 50, 2);
  EXPECT_EQ(both.s, 2 * (4 * 50 + 2));
  EXPECT_EQ(both.mode, SketchMode::two_sided);
  EXPECT_EQ(SketchPolicy::choose(1022, 100, 4, 50, 2).mode, SketchMode::left_only);
  EXPECT_EQ(SketchPolicy::choose(100, 1022, 4, 50, 2).mode, SketchMode::right_only);
  EXPECT_EQ(SketchPolicy::choose(100, 100, 4, 50, 2).mode, SketchMode::exact);
  EXPECT_EQ(to_string(SketchMode::two_sided), "two_sided");
}

MultitermEquation identity_equation(Index n, Index q, Rng& rng) {
  std::vector<Term> terms{{testing::sparse_identity(n), testing::sparse_identity(n)}};
  return MultitermEquation(std::move(terms), gaussian(n, q, rng), gaussian(n, q, rng));
}

TEST(Sketch, ExactModeMatchesTruncateWithSpectrum) {
  Rng rng(46);
  const MultitermEquation eq = testing::random_equation({30, 25, 3, 2}, rng);
  const LowRankMatrix x = testing::random_low_rank(30, 25, 3, rng);
  TruncationConfig cfg;
  cfg.maxrank = 6;
  const SketchedResidual sr = sketched_residual_truncate(eq, x, nullptr, nullptr, cfg);
  const TruncatedMatrix ref = truncate_with_spectrum(residual_factored(eq, x), cfg);
  EXPECT_EQ(sr.mode, SketchMode::exact);
  EXPECT_EQ(sr.residual.left(), ref.matrix.left());
  EXPECT_EQ(sr.residual.core(), ref.matrix.core());
  EXPECT_EQ(sr.residual.right(), ref.matrix.right());
  EXPECT_EQ(sr.singular_values, ref.singular_values);
  EXPECT_NEAR(sr.estimate, residual_factored(eq, x).frobenius_norm(), 1e-10 * sr.estimate);
}

TEST(Sketch, EstimateEqualsSpectrumNorm) {
  Vector sigma(3);
  sigma << 3.0, 4.0, 0.0;
  EXPECT_DOUBLE_EQ(residual_norm_estimate(sigma), 5.0);
  EXPECT_EQ(residual_norm_estimate(Vector()), 0.0);
}

TEST(Sketch, TwoSidedEstimateWithinFactorTwo) {
  Rng rng(47);
  const Index n = 600;
  const MultitermEquation eq = identity_equation(n, 3, rng);
  const LowRankMatrix x(eq.c().leftCols(2), 0.5 * Matrix::Identity(2, 2), eq.d().leftCols(2));
  const double truth = residual_factored(eq, x).frobenius_norm();
  TruncationConfig cfg;
  cfg.maxrank = 10;
  int good = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const SketchOperator sa(n, 26, static_cast<std::uint64_t>(seed));
    const SketchOperator sb(n, 26, static_cast<std::uint64_t>(seed) + 1000);
    const SketchedResidual sr = sketched_residual_truncate(eq, x, &sa, &sb, cfg);
    EXPECT_EQ(sr.mode, SketchMode::two_sided);
    const double ratio = sr.estimate / truth;
    if (ratio >= 0.5 && ratio <= 2.0) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(Sketch, LeftOnlyEstimateWithinFactorTwo) {
  Rng rng(48);
  const MultitermEquation eq = testing::random_equation({500, 40, 2, 2}, rng);
  const LowRankMatrix x = testing::random_low_rank(500, 40, 2, rng);
  const double truth = residual_factored(eq, x).frobenius_norm();
  TruncationConfig cfg;
  cfg.maxrank = 8;
  int good = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const SketchOperator sa(500, 2 * (2 * 8 + 2), static_cast<std::uint64_t>(seed));
    const SketchedResidual sr = sketched_residual_truncate(eq, x, &sa, nullptr, cfg);
    EXPECT_EQ(sr.mode, SketchMode::left_only);
    const double ratio = sr.estimate / truth;
    if (ratio >= 0.5 && ratio <= 2.0) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(Sketch, SketchedResidualApproximatesDominantPart) {
  Rng rng(49);
  const Index n = 400;
  const MultitermEquation eq = identity_equation(n, 3, rng);
  const LowRankMatrix x = LowRankMatrix::zero(n, n);
  TruncationConfig cfg;
  cfg.maxrank = 10;
  const SketchOperator sa(n, 2 * (10 + 3), 1);
  const SketchOperator sb(n, 2 * (10 + 3), 2);
  const SketchedResidual sr = sketched_residual_truncate(eq, x, &sa, &sb, cfg);
  // The residual is exactly rank three; a full-rank sketch recovers it.
  EXPECT_LE(testing::relative_error(sr.residual.dense(), eq.c() * eq.d().transpose()), 1e-8);
  EXPECT_FALSE(sr.pseudo_inverse);
}

TEST(Sketch, ZeroResidual) {
  Rng rng(50);
  const MultitermEquation eq = identity_equation(50, 2, rng);
  const LowRankMatrix x = LowRankMatrix::outer(eq.c(), eq.d());
  const SketchedResidual sr = sketched_residual_truncate(eq, x, nullptr, nullptr, {});
  EXPECT_LE(sr.estimate, 1e-12 * eq.rhs_norm());
}

}  // namespace
}  // namespace lrmt
