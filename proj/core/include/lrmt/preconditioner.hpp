#pragma once

#include "lrmt/low_rank.hpp"
#include "lrmt/multiterm.hpp"

#include <array>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace lrmt {

/// `automatic` uses the analytic interval when the operator is a scaled Dirichlet
/// Laplacian and falls back to estimation otherwise.
enum class ShiftSource { analytic_laplacian, estimated, automatic };

std::string to_string(ShiftSource source);

struct NoPreconditioner {};

/// Z = A_i^{-1} R B_i^{-1}. Identity sides are detected and skipped.
struct OneTermSpec {
  Index term = 0;
};

/// Z approximately solves A Z + Z B = R where the two chosen terms are (A, I) and (I, B)
/// in either order; t_adi factored ADI sweeps with Wachspress shifts.
struct TwoTermAdiSpec {
  std::array<Index, 2> terms{0, 1};
  int t_adi = 8;
  ShiftSource shift_source = ShiftSource::automatic;
};

using PreconditionerSpec = std::variant<NoPreconditioner, OneTermSpec, TwoTermAdiSpec>;

std::string describe(const PreconditionerSpec& spec);
void validate(const PreconditionerSpec& spec, Index p);

struct SpectralInterval {
  double lo = 1.0;
  double hi = 1.0;

  bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
};

struct AdiShifts {
  /// Applied on the right operator side ((B^T + p_k I) solves); they track eig(A).
  std::vector<double> p;
  /// Applied on the left operator side ((A + q_k I) solves); they track eig(B).
  std::vector<double> q;
  SpectralInterval left;
  SpectralInterval right;

  Index size() const { return static_cast<Index>(p.size()); }
};

/// Wachspress parameters for A Z + Z B with eig(A) in `left` = [a, b] and
/// eig(B) in `right` = [c, d], all positive.
AdiShifts wachspress_shifts(const SpectralInterval& left, const SpectralInterval& right,
                            int t_adi);

/// Extreme eigenvalues of a scaled Dirichlet Laplacian c * tridiag(-1, 2, -1);
/// throws ConfigError if `a` does not have that structure.
SpectralInterval laplacian_interval(const SparseMatrix& a);

/// Power and inverse-power iteration on the symmetric part, inflated by `inflate`.
SpectralInterval estimate_interval(const SparseMatrix& a, int iterations = 20, double tol = 1e-2,
                                   double inflate = 0.05);

/// Setup-time factorizations plus the application map R -> Z.
class Preconditioner {
 public:
  Preconditioner();
  Preconditioner(const MultitermEquation& eq, const PreconditionerSpec& spec);

  const PreconditionerSpec& spec() const;
  bool is_identity() const;
  bool is_adi() const;
  /// Shifts in use; null unless the spec is two-term ADI.
  const AdiShifts* shifts() const;

  LowRankMatrix apply(const LowRankMatrix& r) const;

 private:
  friend LowRankMatrix apply_one_term(const Preconditioner&, const LowRankMatrix&);
  friend LowRankMatrix apply_two_term_adi(const Preconditioner&, const LowRankMatrix&);

  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

LowRankMatrix apply_one_term(const Preconditioner& precond, const LowRankMatrix& r);
LowRankMatrix apply_two_term_adi(const Preconditioner& precond, const LowRankMatrix& r);

}  // namespace lrmt
