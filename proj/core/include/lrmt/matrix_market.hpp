#pragma once

#include "lrmt/low_rank.hpp"
#include "lrmt/multiterm.hpp"

#include <filesystem>

namespace lrmt {

/// Reads a real/integer/pattern Matrix Market file in coordinate or array layout
/// (general, symmetric or skew-symmetric). Errors name file:line.
SparseMatrix read_sparse(const std::filesystem::path& path);
Matrix read_dense(const std::filesystem::path& path);

/// Coordinate real general, 1-based indices, %.17g values.
void write_sparse(const std::filesystem::path& path, const SparseMatrix& m);
/// Array real general, column-major, %.17g values.
void write_dense(const std::filesystem::path& path, const Matrix& m);

}  // namespace lrmt
