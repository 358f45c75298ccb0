#include "lrmt/preconditioner.hpp"

#include "lrmt/errors.hpp"

#include <Eigen/SparseLU>

#include <optional>

namespace lrmt {

std::string to_string(ShiftSource source) {
  switch (source) {
    case ShiftSource::analytic_laplacian: return "analytic";
    case ShiftSource::estimated: return "estimated";
    case ShiftSource::automatic: return "auto";
  }
  return "unknown";
}

std::string describe(const PreconditionerSpec& spec) {
  if (std::holds_alternative<NoPreconditioner>(spec)) return "none";
  if (const auto* one = std::get_if<OneTermSpec>(&spec)) {
    return "one-term(" + std::to_string(one->term + 1) + ")";
  }
  const auto& adi = std::get<TwoTermAdiSpec>(spec);
  return "two-term-adi(" + std::to_string(adi.terms[0] + 1) + "," +
         std::to_string(adi.terms[1] + 1) + ";t=" + std::to_string(adi.t_adi) + ";" +
         to_string(adi.shift_source) + ")";
}

void validate(const PreconditionerSpec& spec, Index p) {
  const auto check = [p](Index t) {
    if (t < 0 || t >= p) {
      throw ConfigError("preconditioner term " + std::to_string(t + 1) + " outside 1.." +
                        std::to_string(p));
    }
  };
  if (const auto* one = std::get_if<OneTermSpec>(&spec)) check(one->term);
  if (const auto* adi = std::get_if<TwoTermAdiSpec>(&spec)) {
    check(adi->terms[0]);
    check(adi->terms[1]);
    if (adi->terms[0] == adi->terms[1]) throw ConfigError("ADI needs two distinct terms");
    if (adi->t_adi < 1) throw ConfigError("t_adi must be >= 1");
  }
}

namespace {

using SparseLU = Eigen::SparseLU<SparseMatrix>;

std::unique_ptr<SparseLU> factorize(const SparseMatrix& m, const std::string& what) {
  auto lu = std::make_unique<SparseLU>();
  lu->analyzePattern(m);
  lu->factorize(m);
  if (lu->info() != Eigen::Success) throw NumericalError(what + " is singular");
  return lu;
}

SparseMatrix shifted(const SparseMatrix& m, double shift) {
  SparseMatrix id(m.rows(), m.cols());
  id.setIdentity();
  SparseMatrix out = m + shift * id;
  out.makeCompressed();
  return out;
}

SpectralInterval interval_for(const SparseMatrix& m, ShiftSource source) {
  switch (source) {
    case ShiftSource::analytic_laplacian: return laplacian_interval(m);
    case ShiftSource::estimated: return estimate_interval(m);
    case ShiftSource::automatic:
      try {
        return laplacian_interval(m);
      } catch (const ConfigError&) {
        return estimate_interval(m);
      }
  }
  return estimate_interval(m);
}

}  // namespace

struct Preconditioner::Impl {
  PreconditionerSpec spec;
  // one-term
  std::unique_ptr<SparseLU> left_lu;
  std::unique_ptr<SparseLU> right_lu;  // of B_i^T
  // two-term ADI for sign * (A Z + Z B) = sign * R
  double sign = 1.0;
  AdiShifts shifts;
  std::vector<std::unique_ptr<SparseLU>> a_solves;   // (sign A + q_k I)
  std::vector<std::unique_ptr<SparseLU>> bt_solves;  // (sign B^T + p_k I)
  Index n_a = 0;
  Index n_b = 0;
};

Preconditioner::Preconditioner() : impl_(std::make_shared<Impl>()) {}

Preconditioner::Preconditioner(const MultitermEquation& eq, const PreconditionerSpec& spec) {
  validate(spec, eq.p());
  auto impl = std::make_shared<Impl>();
  impl->spec = spec;
  impl->n_a = eq.n_a();
  impl->n_b = eq.n_b();

  if (const auto* one = std::get_if<OneTermSpec>(&spec)) {
    const Term& t = eq.term(one->term);
    const std::string name = std::to_string(one->term + 1);
    if (!lrmt::is_identity(t.a)) impl->left_lu = factorize(t.a, "A_" + name);
    if (!lrmt::is_identity(t.b)) {
      impl->right_lu = factorize(SparseMatrix(t.b.transpose()), "B_" + name);
    }
  } else if (const auto* adi = std::get_if<TwoTermAdiSpec>(&spec)) {
    const Term& t0 = eq.term(adi->terms[0]);
    const Term& t1 = eq.term(adi->terms[1]);
    const SparseMatrix* a = nullptr;
    const SparseMatrix* b = nullptr;
    if (lrmt::is_identity(t0.b) && lrmt::is_identity(t1.a)) {
      a = &t0.a;
      b = &t1.b;
    } else if (lrmt::is_identity(t0.a) && lrmt::is_identity(t1.b)) {
      a = &t1.a;
      b = &t0.b;
    } else {
      throw ConfigError("ADI preconditioner needs terms of the form (A, I) and (I, B)");
    }
    SpectralInterval left = interval_for(*a, adi->shift_source);
    SpectralInterval right = interval_for(*b, adi->shift_source);
    if (left.hi < 0.0 && right.hi < 0.0) {
      impl->sign = -1.0;
      left = {-left.hi, -left.lo};
      right = {-right.hi, -right.lo};
    } else if (left.contains_zero() || right.contains_zero() || left.lo * right.lo < 0.0) {
      throw NumericalError("ADI preconditioner needs A and B definite with the same sign");
    }
    impl->shifts = wachspress_shifts(left, right, adi->t_adi);
    const SparseMatrix sa = impl->sign * (*a);
    const SparseMatrix sbt = impl->sign * SparseMatrix(b->transpose());
    for (Index k = 0; k < impl->shifts.size(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const std::string tag = "shifted solve " + std::to_string(k + 1);
      impl->a_solves.push_back(factorize(shifted(sa, impl->shifts.q[ks]), tag + " (left)"));
      impl->bt_solves.push_back(factorize(shifted(sbt, impl->shifts.p[ks]), tag + " (right)"));
    }
  }
  impl_ = std::move(impl);
}

const PreconditionerSpec& Preconditioner::spec() const { return impl_->spec; }

bool Preconditioner::is_identity() const {
  return std::holds_alternative<NoPreconditioner>(impl_->spec);
}

bool Preconditioner::is_adi() const { return std::holds_alternative<TwoTermAdiSpec>(impl_->spec); }

const AdiShifts* Preconditioner::shifts() const { return is_adi() ? &impl_->shifts : nullptr; }

LowRankMatrix Preconditioner::apply(const LowRankMatrix& r) const {
  if (std::holds_alternative<OneTermSpec>(impl_->spec)) return apply_one_term(*this, r);
  if (is_adi()) return apply_two_term_adi(*this, r);
  return r;
}

LowRankMatrix apply_one_term(const Preconditioner& precond, const LowRankMatrix& r) {
  const auto& impl = *precond.impl_;
  if (!std::holds_alternative<OneTermSpec>(impl.spec)) {
    throw ConfigError("apply_one_term called on a " + describe(impl.spec) + " preconditioner");
  }
  if (r.empty()) return r;
  Matrix left = impl.left_lu ? Matrix(impl.left_lu->solve(r.left())) : r.left();
  Matrix right = impl.right_lu ? Matrix(impl.right_lu->solve(r.right())) : r.right();
  return LowRankMatrix(std::move(left), r.core(), std::move(right));
}

LowRankMatrix apply_two_term_adi(const Preconditioner& precond, const LowRankMatrix& r) {
  const auto& impl = *precond.impl_;
  if (!precond.is_adi()) {
    throw ConfigError("apply_two_term_adi called on a " + describe(impl.spec) +
                      " preconditioner");
  }
  if (r.empty()) return LowRankMatrix::zero(r.rows(), r.cols());
  // Factored ADI on sign*A Z + Z sign*B = F G^T with F = sign*R.left*R.core, G = R.right.
  Matrix f = impl.sign * (r.left() * r.core());
  Matrix g = r.right();
  const Index w = f.cols();
  const Index t = impl.shifts.size();
  Matrix left(r.rows(), t * w);
  Matrix right(r.cols(), t * w);
  Matrix core = Matrix::Zero(t * w, t * w);
  for (Index k = 0; k < t; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double weight = impl.shifts.p[ks] + impl.shifts.q[ks];
    Matrix v = impl.a_solves[ks]->solve(f);
    Matrix wh = impl.bt_solves[ks]->solve(g);
    if (impl.a_solves[ks]->info() != Eigen::Success ||
        impl.bt_solves[ks]->info() != Eigen::Success) {
      throw NumericalError("ADI shifted solve " + std::to_string(k + 1) + " failed");
    }
    f -= weight * v;
    g -= weight * wh;
    left.middleCols(k * w, w) = std::move(v);
    right.middleCols(k * w, w) = std::move(wh);
    core.block(k * w, k * w, w, w).diagonal().setConstant(weight);
  }
  return LowRankMatrix(std::move(left), std::move(core), std::move(right));
}

}  // namespace lrmt
