#pragma once

#include "lrmt/low_rank.hpp"
#include "lrmt/multiterm.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace lrmt {

enum class SketchMode { exact, left_only, right_only, two_sided };

std::string to_string(SketchMode mode);

struct SketchPolicy {
  SketchMode mode = SketchMode::exact;
  Index s = 0;

  /// s = 2 (p * maxrank + q); a side is sketched when its dimension is at least s.
  static SketchPolicy choose(Index n_a, Index n_b, Index p, Index maxrank, Index q);
};

/// Subsampled randomized DCT-II:
///   S v = sqrt(n / s) * (C_n diag(signs) v)[rows],
/// with C_n the orthonormal DCT-II and `rows` a sorted random subset of size s.
class SketchOperator {
 public:
  SketchOperator(Index n, Index s, std::uint64_t seed);

  Index n() const { return n_; }
  Index s() const { return s_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& sign_flips() const { return signs_; }
  const std::vector<Index>& row_subset() const { return rows_; }

  /// Applies S to every column of v (n x k), returning s x k.
  Matrix apply(const Matrix& v) const;

 private:
  struct Plan;

  Index n_;
  Index s_;
  std::uint64_t seed_;
  std::vector<double> signs_;
  std::vector<Index> rows_;
  std::shared_ptr<const Plan> plan_;
};

SketchOperator make_sketch(Index n, Index s, std::uint64_t seed);

struct SketchedResidual {
  LowRankMatrix residual;
  /// ||Sigma||_F over the full spectrum of the sketched core.
  double estimate = 0.0;
  Vector singular_values;
  SketchMode mode = SketchMode::exact;
  bool pseudo_inverse = false;
};

/// Truncated factored residual C D^T - L(X). A null sketch leaves that side exact.
/// With both sketches null the result equals truncate_with_spectrum(residual_factored(eq, x)).
SketchedResidual sketched_residual_truncate(const MultitermEquation& eq, const LowRankMatrix& x,
                                            const SketchOperator* s_a, const SketchOperator* s_b,
                                            const TruncationConfig& cfg);

double residual_norm_estimate(const Vector& singular_values);

}  // namespace lrmt
