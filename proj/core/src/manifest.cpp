#include "lrmt/manifest.hpp"

#include "lrmt/errors.hpp"
#include "lrmt/matrix_market.hpp"

#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <fstream>

namespace lrmt {

namespace {

using nlohmann::json;

constexpr const char* kIdentity = "identity";
constexpr int kVersion = 1;

std::array<Index, 2> read_pair(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": '" + key + "' must be [i, j]");
  std::array<Index, 2> out{};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto v = j.at(k).get<long long>();
    if (v < 1) throw ParseError(where + ": '" + key + "' indices are 1-based");
    out[k] = static_cast<Index>(v - 1);
  }
  return out;
}

Index read_dim(const json& root, const char* key, const std::string& where) {
  if (!root.contains(key)) throw ParseError(where + ": missing '" + key + "'");
  const auto v = root.at(key).get<long long>();
  if (v < 1) throw ParseError(where + ": '" + std::string(key) + "' must be positive");
  return static_cast<Index>(v);
}

SparseMatrix load_operator(const EquationManifest& m, const std::string& ref, Index n) {
  if (ref == kIdentity) {
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
  }
  return read_sparse(m.directory / ref);
}

void check_shape(Index rows, Index cols, Index er, Index ec, const std::string& what) {
  if (rows != er || cols != ec) {
    throw ShapeError(what + " is " + std::to_string(rows) + "x" + std::to_string(cols) +
                     ", manifest expects " + std::to_string(er) + "x" + std::to_string(ec));
  }
}

}  // namespace

EquationManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  const std::string where = path.string();
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
  EquationManifest m;
  m.directory = path.parent_path();
  try {
    if (root.contains("version") && root.at("version").get<int>() != kVersion) {
      throw ParseError(where + ": unsupported manifest version");
    }
    m.p = read_dim(root, "p", where);
    m.q = read_dim(root, "q", where);
    m.n_a = read_dim(root, "n_a", where);
    m.n_b = read_dim(root, "n_b", where);
    const json& terms = root.at("terms");
    if (!terms.is_array()) throw ParseError(where + ": 'terms' must be an array");
    for (const json& t : terms) m.terms.push_back({t.at("a").get<std::string>(), t.at("b").get<std::string>()});
    if (static_cast<Index>(m.terms.size()) != m.p) {
      throw ShapeError(where + ": p = " + std::to_string(m.p) + " but " +
                       std::to_string(m.terms.size()) + " terms are listed");
    }
    m.c = root.at("c").get<std::string>();
    m.d = root.at("d").get<std::string>();
    if (root.contains("hints")) {
      const json& h = root.at("hints");
      if (h.contains("preconditioner")) m.hints.preconditioner = h.at("preconditioner").get<std::string>();
      if (h.contains("terms")) m.hints.terms = read_pair(h.at("terms"), "terms", where);
      if (h.contains("t_adi")) m.hints.t_adi = h.at("t_adi").get<int>();
      if (h.contains("shifts")) m.hints.shifts = h.at("shifts").get<std::string>();
      if (h.contains("inner_precond_terms")) {
        m.hints.inner_precond_terms = read_pair(h.at("inner_precond_terms"), "inner_precond_terms", where);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  return m;
}

MultitermEquation load_equation(const EquationManifest& m, std::vector<std::string>* warnings) {
  std::vector<Term> terms;
  terms.reserve(m.terms.size());
  for (std::size_t i = 0; i < m.terms.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    Term t{load_operator(m, m.terms[i].a, m.n_a), load_operator(m, m.terms[i].b, m.n_b)};
    check_shape(t.a.rows(), t.a.cols(), m.n_a, m.n_a, "A_" + idx);
    check_shape(t.b.rows(), t.b.cols(), m.n_b, m.n_b, "B_" + idx);
    terms.push_back(std::move(t));
  }
  Matrix c = read_dense(m.directory / m.c);
  Matrix d = read_dense(m.directory / m.d);
  check_shape(c.rows(), c.cols(), m.n_a, m.q, "C");
  check_shape(d.rows(), d.cols(), m.n_b, m.q, "D");
  if (warnings != nullptr) {
    for (const auto& [name, f] : {std::pair<const char*, const Matrix*>{"C", &c}, {"D", &d}}) {
      Eigen::ColPivHouseholderQR<Matrix> qr(*f);
      qr.setThreshold(1e-12);
      if (qr.rank() < f->cols()) {
        warnings->push_back(std::string(name) + " has numerical column rank " +
                            std::to_string(qr.rank()) + " < q = " + std::to_string(f->cols()));
      }
    }
  }
  return MultitermEquation(std::move(terms), std::move(c), std::move(d));
}

MultitermEquation load_manifest(const std::filesystem::path& path,
                                std::vector<std::string>* warnings) {
  return load_equation(read_manifest(path), warnings);
}

std::filesystem::path save_manifest(const MultitermEquation& eq, const std::filesystem::path& dir,
                                    const ManifestHints& hints) {
  std::filesystem::create_directories(dir);
  json root;
  root["format"] = "lrmt-equation";
  root["version"] = kVersion;
  root["p"] = eq.p();
  root["q"] = eq.q();
  root["n_a"] = eq.n_a();
  root["n_b"] = eq.n_b();
  json terms = json::array();
  for (Index i = 0; i < eq.p(); ++i) {
    const std::string idx = std::to_string(i + 1);
    const std::string a = "A" + idx + ".mtx";
    const std::string b = "B" + idx + ".mtx";
    write_sparse(dir / a, eq.term(i).a);
    write_sparse(dir / b, eq.term(i).b);
    terms.push_back({{"a", a}, {"b", b}});
  }
  root["terms"] = terms;
  write_dense(dir / "C.mtx", eq.c());
  write_dense(dir / "D.mtx", eq.d());
  root["c"] = "C.mtx";
  root["d"] = "D.mtx";
  if (!hints.empty()) {
    json h = json::object();
    if (hints.preconditioner) h["preconditioner"] = *hints.preconditioner;
    if (hints.terms) h["terms"] = {(*hints.terms)[0] + 1, (*hints.terms)[1] + 1};
    if (hints.t_adi) h["t_adi"] = *hints.t_adi;
    if (hints.shifts) h["shifts"] = *hints.shifts;
    if (hints.inner_precond_terms) {
      h["inner_precond_terms"] = {(*hints.inner_precond_terms)[0] + 1,
                                  (*hints.inner_precond_terms)[1] + 1};
    }
    root["hints"] = h;
  }
  const std::filesystem::path out = dir / "manifest.json";
  std::ofstream f(out);
  if (!f) throw Error("cannot write " + out.string());
  f << root.dump(2) << '\n';
  if (!f) throw Error("write failed for " + out.string());
  return out;
}

}  // namespace lrmt
