// Dense complex linear algebra kernels over tensor-factored index spaces.
//
// Everything here works on plain Eigen matrices plus a vector of factor
// dimensions; the labeled-operator layer lives in operators.hpp. Row-major
// multi-index convention throughout: for factors (f_0, ..., f_{n-1}) the
// flat index is sum_i idx_i * stride_i with stride_i = prod_{j>i} dim_j,
// i.e. the first factor is the most significant (Kronecker order).

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcap {

using Index = Eigen::Index;

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CMatrix = ComplexMatrix<double>;
using CVector = ComplexVector<double>;
using RVector = RealVector<double>;

// Base error type for the library; everything numeric-precondition shaped
// derives from it so callers can map failures to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionCapError : public Error {
 public:
  using Error::Error;
};

inline Index product_of(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index d : dims) p *= d;
  return p;
}

inline std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

// Kronecker product in factor order: index of (i_a, i_b) is i_a*cols(b)+i_b.
template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Result =
      Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Four-index middle exchange: input m over rows (d0*d1) and cols (d2*d3)
// seen as m[(i,j),(k,l)], output over rows (d0*d2), cols (d1*d3) with
// out[(i,k),(j,l)] = m[(i,j),(k,l)]. This single reshuffle converts between
// Choi matrices and transfer (superoperator) matrices and back.
template <typename Derived>
auto exchange_mid(const Eigen::MatrixBase<Derived>& m, Index d0, Index d1,
                  Index d2, Index d3) {
  using Result =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != d0 * d1 || m.cols() != d2 * d3)
    throw PreconditionError("exchange_mid: dimension mismatch");
  Result out(d0 * d2, d1 * d3);
  for (Index i = 0; i < d0; ++i)
    for (Index j = 0; j < d1; ++j)
      for (Index k = 0; k < d2; ++k)
        for (Index l = 0; l < d3; ++l)
          out(i * d2 + k, j * d3 + l) = m(i * d1 + j, k * d3 + l);
  return out;
}

namespace detail {

inline void check_factor_dims(const Eigen::Index total,
                              const std::vector<Index>& dims,
                              const char* where) {
  if (product_of(dims) != total)
    throw PreconditionError(std::string(where) +
                            ": factor dims do not match matrix size");
}

// Decomposes flat into per-factor components.
inline void unravel(Index flat, const std::vector<Index>& dims,
                    std::vector<Index>& out) {
  for (std::size_t i = dims.size(); i-- > 0;) {
    out[i] = flat % dims[i];
    flat /= dims[i];
  }
}

}  // namespace detail

// Reorders tensor factors; order[i] gives the old position of the factor
// that ends up at new position i.
template <typename Derived>
auto permute_factors(const Eigen::MatrixBase<Derived>& m,
                     const std::vector<Index>& dims,
                     const std::vector<Index>& order) {
  using Result =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_factor_dims(m.rows(), dims, "permute_factors");
  if (m.rows() != m.cols())
    throw PreconditionError("permute_factors: matrix must be square");
  const std::size_t n = dims.size();
  if (order.size() != n)
    throw PreconditionError("permute_factors: order size mismatch");
  std::vector<bool> seen(n, false);
  for (Index o : order) {
    if (o < 0 || static_cast<std::size_t>(o) >= n || seen[o])
      throw PreconditionError("permute_factors: invalid permutation");
    seen[o] = true;
  }
  const auto old_strides = strides_of(dims);
  std::vector<Index> new_dims(n);
  for (std::size_t i = 0; i < n; ++i) new_dims[i] = dims[order[i]];
  const auto new_strides = strides_of(new_dims);

  // map[old_flat] = new_flat
  const Index total = m.rows();
  std::vector<Index> map(total);
  std::vector<Index> comps(n);
  for (Index flat = 0; flat < total; ++flat) {
    detail::unravel(flat, dims, comps);
    Index nf = 0;
    for (std::size_t i = 0; i < n; ++i) nf += comps[order[i]] * new_strides[i];
    map[flat] = nf;
  }
  Result out(total, total);
  for (Index r = 0; r < total; ++r)
    for (Index c = 0; c < total; ++c) out(map[r], map[c]) = m(r, c);
  return out;
}

// Partial trace over the factors listed in `traced` (indices into dims).
template <typename Derived>
auto partial_trace(const Eigen::MatrixBase<Derived>& m,
                   const std::vector<Index>& dims,
                   const std::vector<Index>& traced) {
  using Result =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_factor_dims(m.rows(), dims, "partial_trace");
  if (m.rows() != m.cols())
    throw PreconditionError("partial_trace: matrix must be square");
  const std::size_t n = dims.size();
  std::vector<bool> is_traced(n, false);
  for (Index t : traced) {
    if (t < 0 || static_cast<std::size_t>(t) >= n)
      throw PreconditionError("partial_trace: factor index out of range");
    if (is_traced[t])
      throw PreconditionError("partial_trace: duplicate factor index");
    is_traced[t] = true;
  }
  std::vector<Index> kept_dims, traced_dims;
  std::vector<Index> kept_idx, traced_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_traced[i]) {
      traced_dims.push_back(dims[i]);
      traced_idx.push_back(static_cast<Index>(i));
    } else {
      kept_dims.push_back(dims[i]);
      kept_idx.push_back(static_cast<Index>(i));
    }
  }
  const auto strides = strides_of(dims);
  const Index dk = product_of(kept_dims);
  const Index dt = product_of(traced_dims);

  // base offsets of kept (row/col) and traced (diagonal) multi-indices
  std::vector<Index> kept_off(dk, 0), traced_off(dt, 0);
  {
    std::vector<Index> comps(kept_dims.size());
    for (Index f = 0; f < dk; ++f) {
      detail::unravel(f, kept_dims, comps);
      Index o = 0;
      for (std::size_t i = 0; i < kept_idx.size(); ++i)
        o += comps[i] * strides[kept_idx[i]];
      kept_off[f] = o;
    }
    comps.resize(traced_dims.size());
    for (Index f = 0; f < dt; ++f) {
      detail::unravel(f, traced_dims, comps);
      Index o = 0;
      for (std::size_t i = 0; i < traced_idx.size(); ++i)
        o += comps[i] * strides[traced_idx[i]];
      traced_off[f] = o;
    }
  }
  Result out = Result::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c) {
      typename Derived::Scalar acc{};
      for (Index t = 0; t < dt; ++t)
        acc += m(kept_off[r] + traced_off[t], kept_off[c] + traced_off[t]);
      out(r, c) = acc;
    }
  return out;
}

// Transposes the listed factors in place (indices into dims).
template <typename Derived>
auto partial_transpose(const Eigen::MatrixBase<Derived>& m,
                       const std::vector<Index>& dims,
                       const std::vector<Index>& transposed) {
  using Result =
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  detail::check_factor_dims(m.rows(), dims, "partial_transpose");
  if (m.rows() != m.cols())
    throw PreconditionError("partial_transpose: matrix must be square");
  const std::size_t n = dims.size();
  std::vector<bool> flip(n, false);
  for (Index t : transposed) {
    if (t < 0 || static_cast<std::size_t>(t) >= n)
      throw PreconditionError("partial_transpose: factor index out of range");
    flip[t] = true;
  }
  const auto strides = strides_of(dims);
  const Index total = m.rows();
  Result out(total, total);
  std::vector<Index> rc(n), cc(n);
  for (Index r = 0; r < total; ++r) {
    detail::unravel(r, dims, rc);
    for (Index c = 0; c < total; ++c) {
      detail::unravel(c, dims, cc);
      Index nr = 0, nc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        nr += (flip[i] ? cc[i] : rc[i]) * strides[i];
        nc += (flip[i] ? rc[i] : cc[i]) * strides[i];
      }
      out(nr, nc) = m(r, c);
    }
  }
  return out;
}

template <typename Scalar>
Scalar hermiticity_drift(const ComplexMatrix<Scalar>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// Symmetrizes before the eigensolve when drift is within tolerance;
// larger drift is treated as data corruption, not roundoff.
template <typename Scalar>
struct EighResult {
  RealVector<Scalar> eigenvalues;  // descending
  ComplexMatrix<Scalar> eigenvectors;
};

template <typename Scalar>
EighResult<Scalar> eig_hermitian(const ComplexMatrix<Scalar>& m,
                                 Scalar drift_tol = Scalar(1e-10)) {
  if (hermiticity_drift(m) > drift_tol)
    throw PreconditionError("eig_hermitian: input is not Hermitian");
  ComplexMatrix<Scalar> h = (m + m.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> solver(h);
  if (solver.info() != Eigen::Success)
    throw Error("eig_hermitian: eigensolver failed");
  const Index n = m.rows();
  EighResult<Scalar> r;
  r.eigenvalues = solver.eigenvalues().reverse();
  r.eigenvectors.resize(n, n);
  for (Index i = 0; i < n; ++i)
    r.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  return r;
}

template <typename Scalar>
RealVector<Scalar> eig_hermitian_values(const ComplexMatrix<Scalar>& m,
                                        Scalar drift_tol = Scalar(1e-10)) {
  if (hermiticity_drift(m) > drift_tol)
    throw PreconditionError("eig_hermitian_values: input is not Hermitian");
  ComplexMatrix<Scalar> h = (m + m.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Scalar>> solver(
      h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error("eig_hermitian_values: eigensolver failed");
  return solver.eigenvalues().reverse();
}

inline constexpr double kEntropyEigenvalueCutoff = 1e-12;
inline constexpr double kNegativityTolerance = 1e-10;

// S = -sum_i lambda_i log2 lambda_i, eigenvalues below the cutoff contribute 0.
template <typename Scalar>
Scalar entropy_of_eigenvalues(const RealVector<Scalar>& eigenvalues) {
  Scalar s = 0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const Scalar ev = eigenvalues[i];
    if (ev < -Scalar(kNegativityTolerance))
      throw PreconditionError(
          "entropy_of_eigenvalues: eigenvalue below negativity tolerance");
    if (ev < Scalar(kEntropyEigenvalueCutoff)) continue;
    s -= ev * std::log2(ev);
  }
  return s;
}

template <typename Scalar>
Scalar von_neumann_entropy(const ComplexMatrix<Scalar>& rho) {
  return entropy_of_eigenvalues<Scalar>(eig_hermitian_values<Scalar>(rho));
}

// Sum of singular values. Hermitian inputs take the eigenvalue path,
// which is considerably faster than an SVD at the sizes we use.
template <typename Scalar>
Scalar trace_norm(const ComplexMatrix<Scalar>& m) {
  if (m.rows() == m.cols() && hermiticity_drift(m) <= Scalar(1e-12)) {
    return eig_hermitian_values<Scalar>(m).cwiseAbs().sum();
  }
  Eigen::JacobiSVD<ComplexMatrix<Scalar>> svd(m);
  return svd.singularValues().sum();
}

template <typename Scalar>
Scalar trace_distance(const ComplexMatrix<Scalar>& a,
                      const ComplexMatrix<Scalar>& b) {
  return trace_norm<Scalar>(a - b) / Scalar(2);
}

template <typename Scalar>
Scalar binary_entropy(Scalar x) {
  if (x < Scalar(0) || x > Scalar(1))
    throw PreconditionError("binary_entropy: argument outside [0,1]");
  if (x == Scalar(0) || x == Scalar(1)) return Scalar(0);
  return -x * std::log2(x) - (Scalar(1) - x) * std::log2(Scalar(1) - x);
}

}  // namespace qcap
