#pragma once

#include "lrmt/low_rank.hpp"
#include "lrmt/multiterm.hpp"
#include "lrmt/preconditioner.hpp"
#include "lrmt/reduced_solve.hpp"
#include "lrmt/sketch.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lrmt {

enum class Method { ss_mr, ss_gcr1 };
enum class SolveStatus { converged, maxit_reached };

std::string to_string(Method method);
std::string to_string(SolveStatus status);
/// Accepts "ss-mr"/"ss_mr"/"mr" and "ss-gcr1"/"ss_gcr1"/"gcr".
Method parse_method(const std::string& text);

struct SolverConfig {
  Method method = Method::ss_gcr1;
  double tol = 1e-6;
  int maxit = 100;
  TruncationConfig truncation;
  InnerSolveConfig inner;
  std::uint64_t sketch_seed = 42;
  PreconditionerSpec preconditioner = NoPreconditioner{};
  /// When false the residual is always truncated exactly (no sketching).
  bool sketching = true;
  bool compute_true_residual = false;

  void validate(Index p) const;
};

struct RankTriple {
  Index x = 0;
  Index r = 0;
  Index p = 0;
};

struct PhaseTimes {
  double setup = 0.0;
  double preconditioner = 0.0;
  double reduced = 0.0;
  double update = 0.0;
  double residual = 0.0;
  double total = 0.0;
};

struct SolveReport {
  int iterations = 0;
  SolveStatus status = SolveStatus::maxit_reached;
  double rhs_norm = 0.0;
  /// Relative residual estimates; entry k belongs to X_k, so the size is iterations + 1.
  std::vector<double> residual_estimates;
  std::vector<RankTriple> ranks;
  /// Per iteration min/max inner PCG iterations over the alpha and beta solves (0 when direct).
  std::vector<int> inner_pcg_min;
  std::vector<int> inner_pcg_max;
  std::optional<double> true_final_residual;
  PhaseTimes wall_times;
  SketchPolicy sketch;
  std::vector<std::string> warnings;
};

/// State after an accepted step k -> k+1.
struct IterationSnapshot {
  int k = 0;
  const LowRankMatrix& x;
  const LowRankMatrix& residual;
  /// Orthonormal bases of the direction used in this step and its coefficient.
  const Matrix& basis_left;
  const Matrix& basis_right;
  const Matrix& alpha;
  /// Next direction P_{k+1}; empty once the iteration has converged.
  const LowRankMatrix& next_direction;
  double estimate = 0.0;
};

using IterationObserver = std::function<void(const IterationSnapshot&)>;

struct SolveResult {
  LowRankMatrix x;
  SolveReport report;
};

SolveResult solve(const MultitermEquation& eq, const SolverConfig& cfg,
                  const std::optional<LowRankMatrix>& x0 = std::nullopt,
                  const IterationObserver& observer = {});

/// ||C D^T - L(X)||_F / ||C D^T||_F from the factored residual, without densifying.
double true_residual(const MultitermEquation& eq, const LowRankMatrix& x);

}  // namespace lrmt
