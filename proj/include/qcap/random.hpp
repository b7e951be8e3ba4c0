// Seeded randomness for tests, verification suites and optimizer restarts.
// A single 64-bit seed drives everything; per-worker streams are derived
// with splitmix64 so concurrent use cannot change results.

#pragma once

#include <cstdint>
#include <random>

#include "qcap/operators.hpp"

namespace qcap {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Deterministic substream for worker `index`.
  Rng substream(std::uint64_t index) const {
    return Rng(splitmix64(seed_base_ ^ splitmix64(index + 1)));
  }

  static Rng seeded(std::uint64_t seed) {
    Rng r(splitmix64(seed));
    r.seed_base_ = seed;
    return r;
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t integer() { return engine_(); }

  std::complex<double> complex_normal() {
    return {normal(), normal()};
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_base_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline CMatrix ginibre(Rng& rng, Index rows, Index cols) {
  CMatrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = rng.complex_normal();
  return g;
}

// Haar-distributed unitary via QR of a Ginibre matrix with the standard
// phase correction.
inline CMatrix haar_unitary(Rng& rng, Index d) {
  CMatrix g = ginibre(rng, d, d);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    std::complex<double> rii = r(i, i);
    q.col(i) *= (std::abs(rii) > 0) ? rii / std::abs(rii)
                                    : std::complex<double>(1.0, 0.0);
  }
  return q;
}

inline DensityMatrix random_density_matrix(Rng& rng, SystemLayout layout) {
  const Index d = layout.total_dim();
  CMatrix g = ginibre(rng, d, d);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::assume_psd(Operator(std::move(layout), std::move(rho)));
}

inline DensityMatrix random_density_matrix(Rng& rng, const std::string& label,
                                           Index dim) {
  return random_density_matrix(rng, SystemLayout::single(label, dim));
}

inline CVector random_ket(Rng& rng, Index d) {
  CVector v(d);
  for (Index i = 0; i < d; ++i) v[i] = rng.complex_normal();
  v.normalize();
  return v;
}

}  // namespace qcap
