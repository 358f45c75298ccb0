#include "lrmt/sketch.hpp"

#include "lrmt/errors.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>

namespace lrmt {

std::string to_string(SketchMode mode) {
  switch (mode) {
    case SketchMode::exact: return "exact";
    case SketchMode::left_only: return "left_only";
    case SketchMode::right_only: return "right_only";
    case SketchMode::two_sided: return "two_sided";
  }
  return "unknown";
}

SketchPolicy SketchPolicy::choose(Index n_a, Index n_b, Index p, Index maxrank, Index q) {
  SketchPolicy out;
  out.s = 2 * (p * maxrank + q);
  const bool left = n_a >= out.s;
  const bool right = n_b >= out.s;
  if (left && right) {
    out.mode = SketchMode::two_sided;
  } else if (left) {
    out.mode = SketchMode::left_only;
  } else if (right) {
    out.mode = SketchMode::right_only;
  } else {
    out.mode = SketchMode::exact;
  }
  return out;
}

namespace {

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct SketchOperator::Plan {
  fftw_plan plan = nullptr;
  Index n = 0;

  explicit Plan(Index size) : n(size) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    double* buf = fftw_alloc_real(static_cast<std::size_t>(n));
    plan = fftw_plan_r2r_1d(static_cast<int>(n), buf, buf, FFTW_REDFT10,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (plan == nullptr) throw NumericalError("FFTW could not plan a DCT of size " + std::to_string(n));
  }

  ~Plan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void execute(double* data) const { fftw_execute_r2r(plan, data, data); }
};

SketchOperator::SketchOperator(Index n, Index s, std::uint64_t seed) : n_(n), s_(s), seed_(seed) {
  if (n < 1) throw ConfigError("sketch source dimension must be positive");
  if (s < 1 || s > n) {
    throw ConfigError("sketch dimension " + std::to_string(s) + " outside 1.." +
                      std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  signs_.resize(static_cast<std::size_t>(n));
  for (auto& v : signs_) v = (rng() >> 63) ? 1.0 : -1.0;

  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < s; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  rows_.assign(perm.begin(), perm.begin() + s);
  std::sort(rows_.begin(), rows_.end());
  plan_ = std::make_shared<const Plan>(n);
}

Matrix SketchOperator::apply(const Matrix& v) const {
  if (v.rows() != n_) {
    throw ShapeError("sketch expects " + std::to_string(n_) + " rows, got " +
                     std::to_string(v.rows()));
  }
  Matrix out(s_, v.cols());
  // REDFT10 is unnormalized: y_k = 2 sum_j x_j cos(pi k (2j+1) / 2n).
  const double nd = static_cast<double>(n_);
  const double sample = std::sqrt(nd / static_cast<double>(s_));
  const double scale0 = std::sqrt(1.0 / (4.0 * nd)) * sample;
  const double scale = std::sqrt(1.0 / (2.0 * nd)) * sample;
  Vector buf(n_);
  for (Index j = 0; j < v.cols(); ++j) {
    for (Index i = 0; i < n_; ++i) buf(i) = signs_[static_cast<std::size_t>(i)] * v(i, j);
    plan_->execute(buf.data());
    for (Index r = 0; r < s_; ++r) {
      const Index k = rows_[static_cast<std::size_t>(r)];
      out(r, j) = (k == 0 ? scale0 : scale) * buf(k);
    }
  }
  return out;
}

SketchOperator make_sketch(Index n, Index s, std::uint64_t seed) {
  return SketchOperator(n, s, seed);
}

double residual_norm_estimate(const Vector& singular_values) { return singular_values.norm(); }

namespace {

/// One side of the sketched factorization F = K R, with K having (approximately)
/// orthonormal columns. Exact sides keep K = Q explicitly; sketched sides keep F
/// and recover K U as F R^+ U on demand.
struct SideFactor {
  Matrix r;
  Matrix q;
  const Matrix* source = nullptr;
  bool sketched = false;
  bool pseudo = false;
  Matrix pinv;

  Matrix recover(const Matrix& u) const {
    if (!sketched) return q * u;
    if (pseudo) return *source * (pinv * u);
    return *source * r.triangularView<Eigen::Upper>().solve(u);
  }
};

SideFactor factor_side(const Matrix& f, const SketchOperator* sketch) {
  SideFactor side;
  if (sketch == nullptr) {
    ThinQR qr = thin_qr(f);
    side.q = std::move(qr.q);
    side.r = std::move(qr.r);
    return side;
  }
  side.sketched = true;
  side.source = &f;
  side.r = thin_qr(sketch->apply(f)).r;
  const bool square = side.r.rows() == side.r.cols();
  bool ill = !square;
  Eigen::BDCSVD<Matrix> svd;
  if (square) {
    svd.compute(side.r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv(0) : 0.0;
    const double bottom = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
    ill = !(bottom > 0.0) || top / bottom > 1e12;
  } else {
    svd.compute(side.r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  }
  if (ill) {
    side.pseudo = true;
    const Vector& sv = svd.singularValues();
    const double cut = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
    Vector inv = Vector::Zero(sv.size());
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > cut) inv(i) = 1.0 / sv(i);
    }
    side.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  }
  return side;
}

}  // namespace

SketchedResidual sketched_residual_truncate(const MultitermEquation& eq, const LowRankMatrix& x,
                                            const SketchOperator* s_a, const SketchOperator* s_b,
                                            const TruncationConfig& cfg) {
  cfg.validate();
  if (s_a != nullptr && s_a->n() != eq.n_a()) throw ShapeError("left sketch does not match n_A");
  if (s_b != nullptr && s_b->n() != eq.n_b()) throw ShapeError("right sketch does not match n_B");

  SketchedResidual out;
  out.mode = s_a ? (s_b ? SketchMode::two_sided : SketchMode::left_only)
                 : (s_b ? SketchMode::right_only : SketchMode::exact);
  const LowRankMatrix full = residual_factored(eq, x);

  if (out.mode == SketchMode::exact) {
    TruncatedMatrix t = truncate_with_spectrum(full, cfg);
    out.residual = std::move(t.matrix);
    out.singular_values = std::move(t.singular_values);
    out.estimate = residual_norm_estimate(out.singular_values);
    return out;
  }
  if (full.empty()) {
    out.residual = LowRankMatrix::zero(eq.n_a(), eq.n_b());
    out.singular_values = Vector(0);
    return out;
  }

  const SideFactor left = factor_side(full.left(), s_a);
  const SideFactor right = factor_side(full.right(), s_b);
  out.pseudo_inverse = left.pseudo || right.pseudo;

  const Matrix rho = left.r * full.core() * right.r.transpose();
  Eigen::BDCSVD<Matrix> svd(rho, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_values = svd.singularValues();
  out.estimate = residual_norm_estimate(out.singular_values);

  const Index keep = select_rank(out.singular_values, cfg);
  if (keep == 0) {
    out.residual = LowRankMatrix::zero(eq.n_a(), eq.n_b());
    return out;
  }
  Matrix lf = left.recover(svd.matrixU().leftCols(keep));
  Matrix rf = right.recover(svd.matrixV().leftCols(keep));
  Matrix core = out.singular_values.head(keep).asDiagonal();
  out.residual = LowRankMatrix(std::move(lf), std::move(core), std::move(rf));
  return out;
}

}  // namespace lrmt
