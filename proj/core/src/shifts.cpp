#include "lrmt/errors.hpp"
#include "lrmt/preconditioner.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseLU>
#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lrmt {

namespace {

void check_interval(const SpectralInterval& iv, const char* side) {
  if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
    throw ConfigError(std::string(side) + " spectral interval is malformed");
  }
  if (!(iv.lo > 0.0)) {
    throw NumericalError(std::string(side) + " spectral interval [" + std::to_string(iv.lo) +
                         ", " + std::to_string(iv.hi) + "] is not positive; ADI is inapplicable");
  }
}

/// Complete elliptic integral of the first kind from the complementary modulus,
/// via the arithmetic-geometric mean; accurate when k' is tiny and k rounds to 1.
double complete_k_from_complement(double kp) {
  double a = 1.0;
  double g = kp;
  for (int i = 0; i < 64 && std::abs(a - g) > 1e-16 * a; ++i) {
    const double next = 0.5 * (a + g);
    g = std::sqrt(a * g);
    a = next;
  }
  return std::numbers::pi / (2.0 * a);
}

}  // namespace

AdiShifts wachspress_shifts(const SpectralInterval& left, const SpectralInterval& right,
                            int t_adi) {
  if (t_adi < 1) throw ConfigError("t_adi must be >= 1");
  check_interval(left, "left");
  check_interval(right, "right");
  AdiShifts out;
  out.left = left;
  out.right = right;
  const auto t = static_cast<std::size_t>(t_adi);

  const double a = left.lo;
  const double b = left.hi;
  const double c = right.lo;
  const double d = right.hi;
  const double rel = 1e-14;
  if (b - a <= rel * b || d - c <= rel * d) {
    // One operator is a multiple of the identity: a single sweep is exact.
    out.p.assign(t, a);
    out.q.assign(t, c);
    return out;
  }

  const double m = (a + d) * (b + c) / ((a + c) * (b + d));
  const double w = 2.0 * m - 1.0;
  const double kp = 1.0 / (w + std::sqrt((w - 1.0) * (w + 1.0)));
  const double k = std::sqrt((1.0 - kp) * (1.0 + kp));
  const double big_k = kp > 1e-6 ? std::comp_ellint_1(k) : complete_k_from_complement(kp);

  // Moebius map x -> (al x + be) / (ga x + de) sending -1 -> -d, k' -> a, 1 -> b.
  Eigen::Matrix<double, 3, 4> sys;
  sys << -1.0, 1.0, -d, d,
      kp, 1.0, -a * kp, -a,
      1.0, 1.0, -b, -b;
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 4>> svd(sys, Eigen::ComputeFullV);
  const Eigen::Vector4d coef = svd.matrixV().col(3);
  const auto mobius = [&](double x) {
    return (coef(0) * x + coef(1)) / (coef(2) * x + coef(3));
  };

  out.p.resize(t);
  out.q.resize(t);
  for (std::size_t j = 0; j < t; ++j) {
    const double u = (2.0 * static_cast<double>(j) + 1.0) * big_k / (2.0 * t_adi);
    const double dn = boost::math::jacobi_dn(k, u);
    out.p[j] = mobius(dn);
    out.q[j] = -mobius(-dn);
  }
  return out;
}

SpectralInterval laplacian_interval(const SparseMatrix& a) {
  const Index m = a.rows();
  if (m < 1 || a.cols() != m) throw ConfigError("analytic shifts need a square operator");
  const double diag = a.coeff(0, 0);
  const double tol = 1e-12 * std::abs(diag);
  if (!(diag > 0.0)) throw ConfigError("analytic shifts need a positive Laplacian diagonal");
  for (Index col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const Index off = it.row() - it.col();
      double expected = 0.0;
      if (off == 0) {
        expected = diag;
      } else if (off == 1 || off == -1) {
        expected = -0.5 * diag;
      }
      if (std::abs(it.value() - expected) > tol) {
        throw ConfigError("operator is not a scaled tridiag(-1, 2, -1); use estimated shifts");
      }
    }
  }
  if (m > 1 && std::abs(a.coeff(1, 0) + 0.5 * diag) > tol) {
    throw ConfigError("operator is not a scaled tridiag(-1, 2, -1); use estimated shifts");
  }
  const double scale = 0.5 * diag;
  const double angle = std::numbers::pi / (2.0 * static_cast<double>(m + 1));
  const auto eig = [&](Index j) {
    const double s = std::sin(static_cast<double>(j) * angle);
    return 4.0 * scale * s * s;
  };
  return {eig(1), eig(m)};
}

SpectralInterval estimate_interval(const SparseMatrix& a, int iterations, double tol,
                                   double inflate) {
  const Index n = a.rows();
  if (n < 1 || a.cols() != n) throw ConfigError("spectral estimation needs a square operator");
  SparseMatrix sym = SparseMatrix(a.transpose());
  sym = 0.5 * (sym + a);
  sym.makeCompressed();

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector start(n);
  for (Index i = 0; i < n; ++i) start(i) = unif(rng);
  start.normalize();

  const auto rayleigh = [&](auto&& step) {
    Vector v = start;
    double lambda = v.dot(sym * v);
    for (int it = 0; it < iterations; ++it) {
      Vector w = step(v);
      const double nw = w.norm();
      if (!(nw > 0.0) || !std::isfinite(nw)) break;
      v = w / nw;
      const double next = v.dot(sym * v);
      const bool done = std::abs(next - lambda) <= tol * std::abs(next);
      lambda = next;
      if (done) break;
    }
    return lambda;
  };

  const double big = rayleigh([&](const Vector& v) { return Vector(sym * v); });
  // Power iteration on sym - big I reaches the opposite end of the spectrum; this catches
  // indefinite operators whose extreme eigenvalues have equal magnitude.
  const double other = rayleigh([&](const Vector& v) { return Vector(sym * v - big * v); });
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(sym);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("symmetric part is singular; the operator is not definite");
  }
  const double small = rayleigh([&](const Vector& v) { return Vector(lu.solve(v)); });

  double lo = std::min({big, small, other});
  double hi = std::max({big, small, other});
  if (lo <= 0.0 && hi >= 0.0) {
    throw NumericalError("estimated spectral interval [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "] contains 0");
  }
  const double grow = 1.0 + inflate;
  if (lo > 0.0) {
    lo /= grow;
    hi *= grow;
  } else {
    lo *= grow;
    hi /= grow;
  }
  return {lo, hi};
}

}  // namespace lrmt
