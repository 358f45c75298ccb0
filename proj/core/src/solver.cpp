#include "lrmt/solver.hpp"

#include "lrmt/errors.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace lrmt {

std::string to_string(Method method) {
  return method == Method::ss_mr ? "ss-mr" : "ss-gcr1";
}

std::string to_string(SolveStatus status) {
  return status == SolveStatus::converged ? "converged" : "maxit_reached";
}

Method parse_method(const std::string& text) {
  if (text == "ss-mr" || text == "ss_mr" || text == "mr") return Method::ss_mr;
  if (text == "ss-gcr1" || text == "ss_gcr1" || text == "gcr" || text == "ss-gcr") {
    return Method::ss_gcr1;
  }
  throw ConfigError("unknown method '" + text + "' (expected ss-mr or ss-gcr1)");
}

void SolverConfig::validate(Index p) const {
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (maxit < 1) throw ConfigError("maxit must be >= 1");
  truncation.validate();
  inner.validate(p);
  lrmt::validate(preconditioner, p);
}

double true_residual(const MultitermEquation& eq, const LowRankMatrix& x) {
  const double rhs = eq.rhs_norm();
  if (rhs == 0.0) return 0.0;
  return residual_factored(eq, x).frobenius_norm() / rhs;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kRightSeedMix = 0x9E3779B97F4A7C15ULL;

}  // namespace

SolveResult solve(const MultitermEquation& eq, const SolverConfig& cfg,
                  const std::optional<LowRankMatrix>& x0, const IterationObserver& observer) {
  const auto t_start = Clock::now();
  cfg.validate(eq.p());

  SolveResult result;
  SolveReport& rep = result.report;
  rep.rhs_norm = eq.rhs_norm();
  const double rhs_norm = rep.rhs_norm;
  const double target = cfg.tol * rhs_norm;

  const Preconditioner precond(eq, cfg.preconditioner);
  rep.sketch = SketchPolicy::choose(eq.n_a(), eq.n_b(), eq.p(), cfg.truncation.maxrank, eq.q());
  if (!cfg.sketching) rep.sketch.mode = SketchMode::exact;
  std::optional<SketchOperator> s_a;
  std::optional<SketchOperator> s_b;
  const SketchMode mode = rep.sketch.mode;
  if (mode == SketchMode::two_sided || mode == SketchMode::left_only) {
    s_a.emplace(eq.n_a(), rep.sketch.s, cfg.sketch_seed);
  }
  if (mode == SketchMode::two_sided || mode == SketchMode::right_only) {
    s_b.emplace(eq.n_b(), rep.sketch.s, cfg.sketch_seed ^ kRightSeedMix);
  }
  const SketchOperator* sa = s_a ? &*s_a : nullptr;
  const SketchOperator* sb = s_b ? &*s_b : nullptr;
  rep.wall_times.setup = seconds_since(t_start);

  LowRankMatrix x = x0 ? *x0 : LowRankMatrix::zero(eq.n_a(), eq.n_b());
  if (x.rows() != eq.n_a() || x.cols() != eq.n_b()) {
    throw ShapeError("initial guess does not conform to the equation");
  }

  auto t_phase = Clock::now();
  LowRankMatrix r;
  double estimate = 0.0;
  if (x.empty()) {
    r = eq.rhs();
    estimate = rhs_norm;
  } else {
    SketchedResidual sr = sketched_residual_truncate(eq, x, sa, sb, cfg.truncation);
    r = std::move(sr.residual);
    estimate = sr.estimate;
  }
  rep.wall_times.residual += seconds_since(t_phase);

  const auto precondition = [&](const LowRankMatrix& res) {
    const auto t0 = Clock::now();
    LowRankMatrix z = precond.apply(res);
    if (precond.is_adi()) z = truncate(z, cfg.truncation);
    rep.wall_times.preconditioner += seconds_since(t0);
    return z;
  };

  const auto relative = [&](double value) { return rhs_norm > 0.0 ? value / rhs_norm : 0.0; };
  LowRankMatrix best_x = x;
  double best_estimate = estimate;

  LowRankMatrix p = precondition(r);
  rep.residual_estimates.push_back(relative(estimate));
  rep.ranks.push_back({x.rank(), r.rank(), p.rank()});

  if (estimate <= target) {
    rep.status = SolveStatus::converged;
  } else {
    bool redrawn = false;
    int attempts = 0;
    while (rep.iterations < cfg.maxit && attempts < 2 * cfg.maxit + 2) {
      ++attempts;
      const int k = rep.iterations;
      t_phase = Clock::now();
      Matrix ql = orthonormal_basis(p.left());
      Matrix qr = orthonormal_basis(p.right());
      const ReducedSystem sys(eq, ql, qr);
      ReducedSolver reduced(sys, cfg.inner);
      ReducedSolution alpha = reduced.solve(alpha_rhs(sys, r));
      rep.wall_times.reduced += seconds_since(t_phase);

      const double x_scale = x.empty() ? 0.0 : x.core().norm();
      const bool stalled = sys.unknowns() == 0 || alpha.step.norm() <= 1e-16 * x_scale;
      if (stalled) {
        if (!redrawn) {
          redrawn = true;
          rep.warnings.push_back("iteration " + std::to_string(k + 1) +
                                 ": step stalled, restarting from the residual");
          p = r;
          continue;
        }
        rep.warnings.push_back("iteration " + std::to_string(k + 1) +
                               ": step stalled twice, stopping");
        break;
      }
      redrawn = false;
      if (alpha.regularized) {
        rep.warnings.push_back("iteration " + std::to_string(k + 1) +
                               ": reduced system numerically singular, regularized");
      }
      if (!alpha.converged) {
        rep.warnings.push_back("iteration " + std::to_string(k + 1) +
                               ": inner PCG did not reach its tolerance for alpha");
      }
      int pcg_min = alpha.pcg_iterations;
      int pcg_max = alpha.pcg_iterations;

      t_phase = Clock::now();
      const LowRankMatrix basis(ql, Matrix::Zero(ql.cols(), qr.cols()), qr);
      x = truncate(factored_sum(x, basis, alpha.step), cfg.truncation);
      rep.wall_times.update += seconds_since(t_phase);

      t_phase = Clock::now();
      SketchedResidual sr = sketched_residual_truncate(eq, x, sa, sb, cfg.truncation);
      r = std::move(sr.residual);
      estimate = sr.estimate;
      rep.wall_times.residual += seconds_since(t_phase);
      ++rep.iterations;
      if (estimate < best_estimate) {
        best_estimate = estimate;
        best_x = x;
      }

      const bool done = estimate <= target;
      LowRankMatrix next = LowRankMatrix::zero(eq.n_a(), eq.n_b());
      if (!done) {
        LowRankMatrix z = precondition(r);
        if (cfg.method == Method::ss_gcr1) {
          t_phase = Clock::now();
          ReducedSolution beta = reduced.solve(beta_rhs(eq, sys, z));
          pcg_min = std::min(pcg_min, beta.pcg_iterations);
          pcg_max = std::max(pcg_max, beta.pcg_iterations);
          rep.wall_times.reduced += seconds_since(t_phase);
          t_phase = Clock::now();
          next = truncate(factored_sum(z, basis, beta.step), cfg.truncation);
          rep.wall_times.update += seconds_since(t_phase);
        } else {
          next = std::move(z);
        }
      }
      rep.residual_estimates.push_back(relative(estimate));
      rep.ranks.push_back({x.rank(), r.rank(), next.rank()});
      rep.inner_pcg_min.push_back(pcg_min);
      rep.inner_pcg_max.push_back(pcg_max);
      if (observer) {
        observer(IterationSnapshot{k, x, r, ql, qr, alpha.step, next, relative(estimate)});
      }
      if (done) {
        rep.status = SolveStatus::converged;
        break;
      }
      p = std::move(next);
    }
  }

  result.x = rep.status == SolveStatus::converged ? std::move(x) : std::move(best_x);
  if (cfg.compute_true_residual) rep.true_final_residual = true_residual(eq, result.x);
  rep.wall_times.total = seconds_since(t_start);
  return result;
}

}  // namespace lrmt
