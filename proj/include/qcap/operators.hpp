// Labeled operators over a SystemLayout, plus the standard states used
// throughout: maximally mixed, computational basis projectors, maximally
// entangled pairs. DensityMatrix adds the usual validity checks.

#pragma once

#include <complex>
#include <utility>

#include "qcap/layout.hpp"
#include "qcap/linalg.hpp"

namespace qcap {

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPsdTolerance = 1e-10;

// General complex matrix over a layout. Hermiticity and unitarity are
// predicates, not invariants, so the same container holds observables,
// density blocks and twisting unitaries.
class Operator {
 public:
  Operator() = default;
  Operator(SystemLayout layout, CMatrix entries)
      : layout_(std::move(layout)), mat_(std::move(entries)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() != layout_.total_dim())
      throw PreconditionError("Operator: matrix size does not match layout");
  }

  const SystemLayout& layout() const { return layout_; }
  const CMatrix& matrix() const { return mat_; }
  CMatrix& matrix() { return mat_; }
  Index dim() const { return mat_.rows(); }

  std::complex<double> trace() const { return mat_.trace(); }

  bool is_hermitian(double tol = kHermiticityTolerance) const {
    return hermiticity_drift<double>(mat_) <= tol;
  }

  bool is_unitary(double tol = 1e-10) const {
    return (mat_ * mat_.adjoint() - CMatrix::Identity(dim(), dim()))
               .cwiseAbs()
               .maxCoeff() <= tol;
  }

  Operator relabeled(const std::vector<std::string>& labels) const {
    return Operator(layout_.relabeled(labels), mat_);
  }

 private:
  SystemLayout layout_;
  CMatrix mat_;
};

inline Operator tensor(const Operator& a, const Operator& b) {
  return Operator(a.layout().concat(b.layout()), kron(a.matrix(), b.matrix()));
}

inline Operator partial_trace(const Operator& op,
                              const std::vector<Index>& traced) {
  return Operator(op.layout().without(traced),
                  partial_trace(op.matrix(), op.layout().dims(), traced));
}

inline Operator partial_transpose(const Operator& op,
                                  const std::vector<Index>& transposed) {
  return Operator(op.layout(), partial_transpose(op.matrix(),
                                                 op.layout().dims(),
                                                 transposed));
}

inline Operator permute_factors(const Operator& op,
                                const std::vector<Index>& order) {
  return Operator(op.layout().permuted(order),
                  permute_factors(op.matrix(), op.layout().dims(), order));
}

// Permutes `op` so its factor labels appear in the order given; all labels
// must be present. Convenience for comparing states built along different
// construction routes.
inline Operator permuted_to(const Operator& op,
                            const std::vector<std::string>& labels) {
  std::vector<Index> order;
  order.reserve(labels.size());
  for (const auto& l : labels) {
    auto i = op.layout().index_of(l);
    if (!i) throw PreconditionError("permuted_to: missing label '" + l + "'");
    order.push_back(static_cast<Index>(*i));
  }
  if (order.size() != op.layout().size())
    throw PreconditionError("permuted_to: label list must cover all factors");
  return permute_factors(op, order);
}

inline EighResult<double> eig_hermitian(const Operator& op) {
  return eig_hermitian<double>(op.matrix());
}

inline double trace_norm(const Operator& op) {
  return trace_norm<double>(op.matrix());
}

// Hermitian, unit-trace, PSD operator over a layout.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  // Full validation: Hermitian within 1e-12 (max-entry), trace within 1e-10
  // of 1, minimum eigenvalue >= -1e-10.
  DensityMatrix(SystemLayout layout, CMatrix entries)
      : op_(std::move(layout), std::move(entries)) {
    validate_full();
  }

  explicit DensityMatrix(Operator op) : op_(std::move(op)) { validate_full(); }

  // Fast path for states produced by maps that preserve positivity by
  // construction (channel application, partial trace, convex mixing).
  // Checks Hermiticity and trace, symmetrizes roundoff, skips the eigensolve.
  static DensityMatrix assume_psd(Operator op) {
    DensityMatrix dm;
    if (hermiticity_drift<double>(op.matrix()) > kPsdTolerance)
      throw PreconditionError("DensityMatrix: Hermiticity drift too large");
    CMatrix sym = (op.matrix() + op.matrix().adjoint()) / 2.0;
    if (std::abs(sym.trace().real() - 1.0) > 1e-9 ||
        std::abs(sym.trace().imag()) > 1e-9)
      throw PreconditionError("DensityMatrix: trace is not 1");
    dm.op_ = Operator(op.layout(), std::move(sym));
    return dm;
  }

  const SystemLayout& layout() const { return op_.layout(); }
  const CMatrix& matrix() const { return op_.matrix(); }
  const Operator& op() const { return op_; }
  Index dim() const { return op_.dim(); }

  double min_eigenvalue() const {
    return eig_hermitian_values<double>(op_.matrix()).minCoeff();
  }

 private:
  void validate_full() {
    if (!op_.is_hermitian())
      throw PreconditionError("DensityMatrix: not Hermitian within 1e-12");
    if (std::abs(op_.trace().real() - 1.0) > kTraceTolerance ||
        std::abs(op_.trace().imag()) > kTraceTolerance)
      throw PreconditionError("DensityMatrix: trace is not 1 within 1e-10");
    if (min_eigenvalue() < -kPsdTolerance)
      throw PreconditionError("DensityMatrix: negative eigenvalue below tolerance");
  }

  Operator op_;
};

inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   const std::vector<Index>& traced) {
  return DensityMatrix::assume_psd(partial_trace(rho.op(), traced));
}

inline DensityMatrix permute_factors(const DensityMatrix& rho,
                                     const std::vector<Index>& order) {
  return DensityMatrix::assume_psd(permute_factors(rho.op(), order));
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::assume_psd(tensor(a.op(), b.op()));
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy<double>(rho.matrix());
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (!a.layout().same_dims(b.layout()))
    throw PreconditionError("trace_distance: layout dims differ");
  return trace_distance<double>(a.matrix(), b.matrix());
}

// ---- standard states ---------------------------------------------------

inline DensityMatrix maximally_mixed(SystemLayout layout) {
  Index d = layout.total_dim();
  return DensityMatrix::assume_psd(
      Operator(std::move(layout), CMatrix::Identity(d, d) / double(d)));
}

inline DensityMatrix maximally_mixed(const std::string& label, Index dim) {
  return maximally_mixed(SystemLayout::single(label, dim));
}

inline DensityMatrix pure_state(SystemLayout layout, const CVector& ket) {
  if (ket.size() != layout.total_dim())
    throw PreconditionError("pure_state: ket size does not match layout");
  const double n = ket.norm();
  if (std::abs(n - 1.0) > 1e-10)
    throw PreconditionError("pure_state: ket is not normalized");
  return DensityMatrix::assume_psd(
      Operator(std::move(layout), ket * ket.adjoint()));
}

inline DensityMatrix basis_state(SystemLayout layout, Index index) {
  CVector ket = CVector::Zero(layout.total_dim());
  ket[index] = 1.0;
  return pure_state(std::move(layout), ket);
}

// |phi+> between two equal-dimension halves (first factor group vs second);
// the layout must split evenly at `split` factors.
inline DensityMatrix max_entangled(SystemLayout layout, std::size_t split) {
  std::vector<Index> left, right;
  for (std::size_t i = 0; i < layout.size(); ++i)
    (i < split ? left : right).push_back(layout.factor(i).dim);
  const Index dl = product_of(left), dr = product_of(right);
  if (dl != dr)
    throw PreconditionError("max_entangled: halves have different dims");
  CVector ket = CVector::Zero(dl * dr);
  for (Index i = 0; i < dl; ++i) ket[i * dr + i] = 1.0 / std::sqrt(double(dl));
  return pure_state(std::move(layout), ket);
}

inline DensityMatrix max_entangled_pair(const std::string& label_a,
                                        const std::string& label_b, Index d) {
  return max_entangled(SystemLayout({{label_a, d}, {label_b, d}}), 1);
}

// <phi|rho|phi> for a pure target.
inline double fidelity_with_pure(const DensityMatrix& rho,
                                 const DensityMatrix& pure) {
  if (rho.dim() != pure.dim())
    throw PreconditionError("fidelity_with_pure: dimension mismatch");
  return (pure.matrix() * rho.matrix()).trace().real();
}

}  // namespace qcap
