#include "lrmt/matrix_market.hpp"

#include "lrmt/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace lrmt {

namespace {

enum class Layout { coordinate, array };
enum class Field { real, integer, pattern };
enum class Symmetry { general, symmetric, skew };

struct Entry {
  Index row;
  Index col;
  double value;
};

struct Parsed {
  Index rows = 0;
  Index cols = 0;
  Layout layout = Layout::coordinate;
  std::vector<Entry> entries;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open " + path.string());
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  }

  /// Next line that is neither blank nor a comment.
  bool next_data(std::string& line) {
    while (next(line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '%') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(path_.string() + ":" + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  long line_no_ = 0;
};

Parsed parse(const std::filesystem::path& path) {
  Reader reader(path);
  std::string line;
  if (!reader.next(line)) reader.fail("empty file");

  std::istringstream banner(line);
  std::string tag, object, layout, field, symmetry;
  banner >> tag >> object >> layout >> field >> symmetry;
  if (tag != "%%MatrixMarket") reader.fail("missing %%MatrixMarket header");
  if (lower(object) != "matrix") reader.fail("unsupported object '" + object + "'");

  Parsed out;
  const std::string lay = lower(layout);
  if (lay == "coordinate") {
    out.layout = Layout::coordinate;
  } else if (lay == "array") {
    out.layout = Layout::array;
  } else {
    reader.fail("unsupported layout '" + layout + "'");
  }
  Field fld = Field::real;
  const std::string f = lower(field);
  if (f == "real" || f == "double") {
    fld = Field::real;
  } else if (f == "integer") {
    fld = Field::integer;
  } else if (f == "pattern" && out.layout == Layout::coordinate) {
    fld = Field::pattern;
  } else {
    reader.fail("unsupported field '" + field + "'");
  }
  Symmetry sym = Symmetry::general;
  const std::string s = lower(symmetry);
  if (s == "general") {
    sym = Symmetry::general;
  } else if (s == "symmetric") {
    sym = Symmetry::symmetric;
  } else if (s == "skew-symmetric") {
    sym = Symmetry::skew;
  } else {
    reader.fail("unsupported symmetry '" + symmetry + "'");
  }

  if (!reader.next_data(line)) reader.fail("missing size line");
  std::istringstream size_line(line);
  long long rows = -1, cols = -1, nnz = -1;
  size_line >> rows >> cols;
  if (out.layout == Layout::coordinate) size_line >> nnz;
  if (!size_line || rows < 0 || cols < 0 || (out.layout == Layout::coordinate && nnz < 0)) {
    reader.fail("malformed size line");
  }
  if (sym != Symmetry::general && rows != cols) reader.fail("symmetric matrix must be square");
  out.rows = static_cast<Index>(rows);
  out.cols = static_cast<Index>(cols);

  const auto push = [&](Index i, Index j, double v) {
    out.entries.push_back({i, j, v});
    if (sym != Symmetry::general && i != j) {
      out.entries.push_back({j, i, sym == Symmetry::skew ? -v : v});
    }
  };

  if (out.layout == Layout::coordinate) {
    out.entries.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
      if (!reader.next_data(line)) reader.fail("expected " + std::to_string(nnz) + " entries");
      std::istringstream es(line);
      long long i = 0, j = 0;
      double v = 1.0;
      es >> i >> j;
      if (fld != Field::pattern) es >> v;
      if (!es) reader.fail("malformed entry");
      if (i < 1 || i > rows || j < 1 || j > cols) reader.fail("index out of range");
      if (sym == Symmetry::skew && i == j) reader.fail("skew-symmetric diagonal entry");
      push(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
    }
  } else {
    for (long long j = 0; j < cols; ++j) {
      const long long start = sym == Symmetry::general ? 0 : (sym == Symmetry::skew ? j + 1 : j);
      for (long long i = start; i < rows; ++i) {
        if (!reader.next_data(line)) reader.fail("array data ended early");
        std::istringstream es(line);
        double v = 0.0;
        es >> v;
        if (!es) reader.fail("malformed value");
        if (v != 0.0 || sym == Symmetry::general) {
          push(static_cast<Index>(i), static_cast<Index>(j), v);
        }
      }
    }
  }
  if (reader.next_data(line)) reader.fail("unexpected trailing data");
  return out;
}

void write_or_throw(std::FILE* f, const std::filesystem::path& path) {
  if (std::ferror(f) != 0) {
    std::fclose(f);
    throw Error("write failed for " + path.string());
  }
  if (std::fclose(f) != 0) throw Error("write failed for " + path.string());
}

std::FILE* open_for_write(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (f == nullptr) throw Error("cannot open " + path.string() + " for writing");
  return f;
}

}  // namespace

SparseMatrix read_sparse(const std::filesystem::path& path) {
  const Parsed p = parse(path);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(p.entries.size());
  for (const Entry& e : p.entries) t.emplace_back(e.row, e.col, e.value);
  SparseMatrix out(p.rows, p.cols);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

Matrix read_dense(const std::filesystem::path& path) {
  const Parsed p = parse(path);
  Matrix out = Matrix::Zero(p.rows, p.cols);
  for (const Entry& e : p.entries) out(e.row, e.col) += e.value;
  return out;
}

void write_sparse(const std::filesystem::path& path, const SparseMatrix& m) {
  SparseMatrix c = m;
  c.makeCompressed();
  std::FILE* f = open_for_write(path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(f, "%lld %lld %lld\n", static_cast<long long>(c.rows()),
               static_cast<long long>(c.cols()), static_cast<long long>(c.nonZeros()));
  for (Index col = 0; col < c.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(c, col); it; ++it) {
      std::fprintf(f, "%lld %lld %.17g\n", static_cast<long long>(it.row() + 1),
                   static_cast<long long>(it.col() + 1), it.value());
    }
  }
  write_or_throw(f, path);
}

void write_dense(const std::filesystem::path& path, const Matrix& m) {
  std::FILE* f = open_for_write(path);
  std::fprintf(f, "%%%%MatrixMarket matrix array real general\n");
  std::fprintf(f, "%lld %lld\n", static_cast<long long>(m.rows()),
               static_cast<long long>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) std::fprintf(f, "%.17g\n", m(i, j));
  }
  write_or_throw(f, path);
}

}  // namespace lrmt
