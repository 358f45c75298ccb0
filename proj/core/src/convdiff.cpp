#include "lrmt/convdiff.hpp"

#include "lrmt/errors.hpp"

#include <string>
#include <vector>

namespace lrmt {

void ConvDiffSpec::validate() const {
  if (n < 4) throw ConfigError("convection-diffusion grid needs n >= 4, got " + std::to_string(n));
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Index m, const std::vector<Triplet>& t) {
  SparseMatrix out(m, m);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

SparseMatrix diagonal(const Vector& d) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d(i));
  return from_triplets(d.size(), t);
}

SparseMatrix identity(Index m) {
  SparseMatrix id(m, m);
  id.setIdentity();
  return id;
}

}  // namespace

SparseMatrix second_difference(Index m, double scale) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(3 * m));
  for (Index i = 0; i < m; ++i) {
    t.emplace_back(i, i, 2.0 * scale);
    if (i > 0) t.emplace_back(i, i - 1, -scale);
    if (i + 1 < m) t.emplace_back(i, i + 1, -scale);
  }
  return from_triplets(m, t);
}

SparseMatrix centered_difference(Index m, double h) {
  const double c = 1.0 / (2.0 * h);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(2 * m));
  for (Index i = 0; i < m; ++i) {
    if (i > 0) t.emplace_back(i, i - 1, -c);
    if (i + 1 < m) t.emplace_back(i, i + 1, c);
  }
  return from_triplets(m, t);
}

MultitermEquation build_convdiff(const ConvDiffSpec& spec) {
  spec.validate();
  const Index m = spec.unknowns_per_dim();
  const double h = spec.h();
  const double w = spec.wind_scale;

  Vector grid(m);
  for (Index i = 0; i < m; ++i) grid(i) = -1.0 + static_cast<double>(i + 1) * h;

  const SparseMatrix t = second_difference(m, spec.eps / (h * h));
  const SparseMatrix id = identity(m);

  std::vector<Term> terms;
  terms.push_back({t, id});
  terms.push_back({id, t});

  const Vector phi1 = 1.0 - grid.array().square();
  const Vector psi1 = 2.0 * grid.array();
  const Vector phi2 = -2.0 * grid.array();
  const Vector psi2 = 1.0 - grid.array().square();
  if (w != 0.0) {
    const SparseMatrix e = centered_difference(m, h);
    terms.push_back({SparseMatrix(diagonal(w * phi1) * e), diagonal(psi1)});
    terms.push_back({diagonal(phi2), SparseMatrix(SparseMatrix(e.transpose()) * diagonal(w * psi2))});
  }

  // Dirichlet value 1 on x = -1 enters row 1 through the diffusion and x-convection stencils.
  Matrix c = Matrix::Zero(m, 2);
  c.col(0).setOnes();
  c(0, 1) = 1.0;
  Matrix d(m, 2);
  d.col(0).setOnes();
  const double x1 = grid(0);
  for (Index j = 0; j < m; ++j) {
    d(j, 1) = spec.eps / (h * h) + w * (1.0 - x1 * x1) * psi1(j) / (2.0 * h);
  }
  return MultitermEquation(std::move(terms), std::move(c), std::move(d));
}

}  // namespace lrmt
