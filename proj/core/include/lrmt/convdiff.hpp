#pragma once

#include "lrmt/multiterm.hpp"

namespace lrmt {

/// -eps Lap(u) + w . grad(u) = 1 on (-1, 1)^2 with u(-1, y) = 1 and u = 0 on the other
/// sides, w(x, y) = wind_scale * (2y (1 - x^2), -2x (1 - y^2)).
/// n grid points per dimension including the boundary, h = 2 / (n - 1).
struct ConvDiffSpec {
  Index n = 1024;
  double eps = 0.1;
  double wind_scale = 1.0;

  void validate() const;
  double h() const { return 2.0 / static_cast<double>(n - 1); }
  Index unknowns_per_dim() const { return n - 2; }
};

/// Centered differences on the interior grid x_i = -1 + i h, i = 1..n-2. Terms:
///   1: (T, I)   2: (I, T)   3: (Phi1 E, Psi1)   4: (Phi2, E^T Psi2)
/// with T = eps/h^2 tridiag(-1, 2, -1), E = 1/(2h) tridiag(-1, 0, 1),
/// Phi1 = diag(1 - x^2), Psi1 = diag(2y), Phi2 = diag(-2x), Psi2 = diag(1 - y^2).
/// Terms 3 and 4 are omitted when wind_scale is 0. C = [1, e_1], D = [1, g].
MultitermEquation build_convdiff(const ConvDiffSpec& spec);

SparseMatrix second_difference(Index m, double scale);
SparseMatrix centered_difference(Index m, double h);

}  // namespace lrmt
