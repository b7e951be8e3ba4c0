// Hiding states, perfect pbits with twisting unitaries, the approximate-pbit
// Choi state zeta with its reduced state, and the scalar bound chain
// (epsilon, delta(epsilon), tau) that controls how close the reduced state is
// to a perfect pbit.

#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "qcap/coherent_info.hpp"

namespace qcap {

// ---- symmetric / antisymmetric subspace states ------------------------------

// mu+ = 2 P_sym / (d(d+1)) over a pair of d-dimensional factors.
inline DensityMatrix symmetric_state(Index d, const std::string& label_a = "A",
                                     const std::string& label_b = "B") {
  if (d < 2) throw PreconditionError("symmetric_state: d must be >= 2");
  CMatrix swap = CMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
  CMatrix p_sym = (CMatrix::Identity(d * d, d * d) + swap) / 2.0;
  return DensityMatrix::assume_psd(
      Operator(SystemLayout({{label_a, d}, {label_b, d}}),
               2.0 * p_sym / double(d * (d + 1))));
}

// mu- = 2 P_anti / (d(d-1)).
inline DensityMatrix antisymmetric_state(Index d,
                                         const std::string& label_a = "A",
                                         const std::string& label_b = "B") {
  if (d < 2) throw PreconditionError("antisymmetric_state: d must be >= 2");
  CMatrix swap = CMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
  CMatrix p_anti = (CMatrix::Identity(d * d, d * d) - swap) / 2.0;
  return DensityMatrix::assume_psd(
      Operator(SystemLayout({{label_a, d}, {label_b, d}}),
               2.0 * p_anti / double(d * (d - 1))));
}

// Eggeling-Werner data hiding pair over N*r pair slots:
// omega = (x)_s (mu+ + mu-)/2,  sigma = (x)_s mu+.
// Factors are granular, interleaved (A_1, B_1, ..., A_t, B_t), each dim d.
struct HidingPair {
  DensityMatrix omega;
  DensityMatrix sigma;
};

inline HidingPair hiding_pair(Index d, Index n_shares, Index r,
                              Index dim_cap = kDefaultDimCap) {
  if (n_shares < 1 || r < 1)
    throw PreconditionError("hiding_pair: N and r must be >= 1");
  const Index t = n_shares * r;
  Index total = 1;
  for (Index i = 0; i < 2 * t; ++i) {
    total *= d;
    check_dim_cap(total, dim_cap, "hiding_pair");
  }
  auto sym = symmetric_state(d, "A1", "B1");
  auto anti = antisymmetric_state(d, "A1", "B1");
  CMatrix omega_slot = (sym.matrix() + anti.matrix()) / 2.0;
  CMatrix sigma_slot = sym.matrix();
  CMatrix om = CMatrix::Identity(1, 1), sg = CMatrix::Identity(1, 1);
  std::vector<Factor> fs;
  for (Index s = 1; s <= t; ++s) {
    om = kron(om, omega_slot);
    sg = kron(sg, sigma_slot);
    fs.push_back({"A" + std::to_string(s), d});
    fs.push_back({"B" + std::to_string(s), d});
  }
  SystemLayout layout(fs);
  return {DensityMatrix::assume_psd(Operator(layout, std::move(om))),
          DensityMatrix::assume_psd(Operator(layout, std::move(sg)))};
}

// ---- perfect pbits ----------------------------------------------------------

// A perfect pbit gamma = U (phi+ (x) sigma) U^dag with the twisting unitary
// U = sum_{ij} |i><i|^a |j><j|^b (x) U_ij acting on the shield.
struct PbitSpec {
  SystemLayout shield;                 // shield factors (Alice's and Bob's)
  std::vector<Index> alice_factors;    // indices into `shield` held by Alice
  std::array<Operator, 4> twisting;    // U_ij at index 2*i + j
  DensityMatrix shield_state;          // sigma over `shield`

  void validate() const {
    if (!(shield_state.layout() == shield))
      throw PreconditionError("PbitSpec: shield state layout mismatch");
    for (const auto& u : twisting) {
      if (!(u.layout().total_dim() == shield.total_dim()))
        throw PreconditionError("PbitSpec: twisting dimension mismatch");
      if (!u.is_unitary(1e-10))
        throw PreconditionError("PbitSpec: twisting is not unitary");
    }
    for (Index i : alice_factors)
      if (i < 0 || static_cast<std::size_t>(i) >= shield.size())
        throw PreconditionError("PbitSpec: Alice factor index out of range");
  }
};

inline PbitSpec trivial_pbit_spec(SystemLayout shield,
                                  std::vector<Index> alice_factors,
                                  DensityMatrix shield_state) {
  const Index ds = shield.total_dim();
  Operator id(shield, CMatrix::Identity(ds, ds));
  return PbitSpec{std::move(shield), std::move(alice_factors),
                  {id, id, id, id}, std::move(shield_state)};
}

inline PbitSpec random_pbit_spec(Rng& rng, SystemLayout shield,
                                 std::vector<Index> alice_factors,
                                 std::optional<DensityMatrix> shield_state = {}) {
  const Index ds = shield.total_dim();
  std::array<Operator, 4> us = {
      Operator(shield, haar_unitary(rng, ds)),
      Operator(shield, haar_unitary(rng, ds)),
      Operator(shield, haar_unitary(rng, ds)),
      Operator(shield, haar_unitary(rng, ds))};
  DensityMatrix sigma =
      shield_state ? *shield_state : random_density_matrix(rng, shield);
  return PbitSpec{std::move(shield), std::move(alice_factors), std::move(us),
                  std::move(sigma)};
}

// gamma over (a, b, shield...): assembled from the key-block form
// (1/2) sum_{k,l} |kk><ll|^{ab} (x) U_kk sigma U_ll^dag.
inline DensityMatrix perfect_pbit(const PbitSpec& spec) {
  spec.validate();
  const Index ds = spec.shield.total_dim();
  CMatrix gamma = CMatrix::Zero(4 * ds, 4 * ds);
  const auto& sigma = spec.shield_state.matrix();
  for (Index k = 0; k < 2; ++k)
    for (Index l = 0; l < 2; ++l) {
      const auto& uk = spec.twisting[2 * k + k].matrix();
      const auto& ul = spec.twisting[2 * l + l].matrix();
      gamma.block(3 * k * ds, 3 * l * ds, ds, ds) =
          0.5 * uk * sigma * ul.adjoint();
    }
  SystemLayout layout =
      SystemLayout({{"a", 2}, {"b", 2}}).concat(spec.shield);
  return DensityMatrix::assume_psd(Operator(std::move(layout), std::move(gamma)));
}

// Bob unterwists with U^dag = sum_j |j><j|^b (x) U_jj^dag and the key marginal
// becomes exactly maximally entangled; returns that fidelity.
inline double pbit_key_recovery_check(const PbitSpec& spec) {
  DensityMatrix gamma = perfect_pbit(spec);
  const Index ds = spec.shield.total_dim();
  CMatrix v = CMatrix::Zero(2 * ds, 2 * ds);
  for (Index j = 0; j < 2; ++j)
    v.block(j * ds, j * ds, ds, ds) = spec.twisting[2 * j + j].matrix().adjoint();
  CMatrix full = kron(CMatrix::Identity(2, 2), v);
  CMatrix untwisted = full * gamma.matrix() * full.adjoint();
  std::vector<Index> shield_idx;
  for (std::size_t i = 0; i < spec.shield.size(); ++i)
    shield_idx.push_back(static_cast<Index>(i) + 2);
  CMatrix key = partial_trace(untwisted, gamma.layout().dims(), shield_idx);
  auto phi = max_entangled_pair("a", "b", 2);
  return (phi.matrix() * key).trace().real();
}

// gamma with Alice's shield part discarded and replaced by the maximally
// mixed state, in gamma's factor order.
inline DensityMatrix pbit_with_maximally_mixed_alice_shield(
    const PbitSpec& spec) {
  DensityMatrix gamma = perfect_pbit(spec);
  std::vector<Index> alice_in_gamma;
  for (Index i : spec.alice_factors) alice_in_gamma.push_back(i + 2);
  DensityMatrix rest = partial_trace(gamma, alice_in_gamma);
  DensityMatrix mu = maximally_mixed(spec.shield.subset(spec.alice_factors));
  DensityMatrix prod = tensor(rest, mu);
  // restore gamma's original factor order
  std::vector<std::string> order;
  for (const auto& f : gamma.layout().factors()) order.push_back(f.label);
  return DensityMatrix::assume_psd(permuted_to(prod.op(), order));
}

// ---- the zeta state ---------------------------------------------------------

struct ZetaParams {
  double q = 1.0 / 3.0;
  Index d = 2;
  Index r = 1;
  Index m = 1;
  Index n_shares = 1;  // N
  Index dim_cap = kDefaultDimCap;

  Index shield_pairs() const { return n_shares * r * m; }
  Index shield_dim() const {  // d^(2 r m N), capped
    Index total = 1;
    for (Index i = 0; i < 2 * shield_pairs(); ++i) {
      total *= d;
      check_dim_cap(4 * total, dim_cap, "ZetaParams");
    }
    return total;
  }
  Index total_dim() const { return 4 * shield_dim(); }

  void validate() const {
    if (!(q > 0.0 && q < 0.5))
      throw PreconditionError("ZetaParams: q must lie in (0, 1/2)");
    if (d < 2) throw PreconditionError("ZetaParams: d must be >= 2");
    if (r < 1 || m < 1 || n_shares < 1)
      throw PreconditionError("ZetaParams: r, m, N must be >= 1");
    (void)shield_dim();
  }
};

// The PPT condition: 0 < q <= 1/3 and (1-q)/q >= (d/(d-1))^(rN), evaluated in
// the log domain so large exponents cannot overflow.
inline bool zeta_ppt_condition(double q, Index d, Index r, Index n_shares) {
  if (!(q > 0.0 && q <= 1.0 / 3.0)) return false;
  const double lhs = std::log((1.0 - q) / q);
  const double rhs =
      double(r) * double(n_shares) * std::log1p(1.0 / double(d - 1));
  return lhs >= rhs;
}

inline bool zeta_ppt_condition(const ZetaParams& p) {
  return zeta_ppt_condition(p.q, p.d, p.r, p.n_shares);
}

// Factor order: (a, b, then per (i,j,k) in lexicographic order the pair
// A{i}.{j}.{k}, B{i}.{j}.{k}). The key blocks are built per k (they do not
// factorize over shares) and the shield is then permuted into this order.
inline SystemLayout zeta_layout(const ZetaParams& p) {
  std::vector<Factor> fs = {{"a", 2}, {"b", 2}};
  for (Index i = 1; i <= p.n_shares; ++i)
    for (Index j = 1; j <= p.r; ++j)
      for (Index k = 1; k <= p.m; ++k) {
        std::string sfx = std::to_string(i) + "." + std::to_string(j) + "." +
                          std::to_string(k);
        fs.push_back({"A" + sfx, p.d});
        fs.push_back({"B" + sfx, p.d});
      }
  return SystemLayout(std::move(fs));
}

inline DensityMatrix zeta_state(const ZetaParams& p) {
  p.validate();
  const Index t = p.n_shares * p.r;  // pair slots per k-block
  const Index ds = p.shield_dim();

  auto sym = symmetric_state(p.d);
  auto anti = antisymmetric_state(p.d);
  CMatrix omega_slot = (sym.matrix() + anti.matrix()) / 2.0;
  CMatrix sigma_slot = sym.matrix();

  CMatrix omega_k = CMatrix::Identity(1, 1), sigma_k = CMatrix::Identity(1, 1);
  for (Index s = 0; s < t; ++s) {
    omega_k = kron(omega_k, omega_slot);
    sigma_k = kron(sigma_k, sigma_slot);
  }

  const double q = p.q;
  CMatrix blk_p = CMatrix::Identity(1, 1);  // (x)_k (q/2)(omega + sigma)
  CMatrix blk_m = CMatrix::Identity(1, 1);  // (x)_k (q/2)(omega - sigma)
  CMatrix blk_s = CMatrix::Identity(1, 1);  // (x)_k (1/2 - q) sigma
  for (Index k = 0; k < p.m; ++k) {
    blk_p = kron(blk_p, (q / 2.0) * (omega_k + sigma_k));
    blk_m = kron(blk_m, (q / 2.0) * (omega_k - sigma_k));
    blk_s = kron(blk_s, (0.5 - q) * sigma_k);
  }

  // permute pairs from construction order (k, i, j) to (i, j, k)
  const Index pairs = p.shield_pairs();
  std::vector<Index> pair_order;
  pair_order.reserve(pairs);
  for (Index i = 0; i < p.n_shares; ++i)
    for (Index j = 0; j < p.r; ++j)
      for (Index k = 0; k < p.m; ++k)
        pair_order.push_back(k * t + i * p.r + j);
  std::vector<Index> order;
  order.reserve(2 * pairs);
  for (Index pr : pair_order) {
    order.push_back(2 * pr);
    order.push_back(2 * pr + 1);
  }
  const std::vector<Index> pair_dims(2 * pairs, p.d);
  blk_p = permute_factors(blk_p, pair_dims, order);
  blk_m = permute_factors(blk_m, pair_dims, order);
  blk_s = permute_factors(blk_s, pair_dims, order);

  CMatrix z = CMatrix::Zero(4 * ds, 4 * ds);
  z.block(0 * ds, 0 * ds, ds, ds) = blk_p;      // |00><00|
  z.block(3 * ds, 3 * ds, ds, ds) = blk_p;      // |11><11|
  z.block(0 * ds, 3 * ds, ds, ds) = blk_m;      // |00><11|
  z.block(3 * ds, 0 * ds, ds, ds) = blk_m;      // |11><00|
  z.block(1 * ds, 1 * ds, ds, ds) = blk_s;      // |01><01|
  z.block(2 * ds, 2 * ds, ds, ds) = blk_s;      // |10><10|

  const double norm =
      2.0 * std::pow(q, double(p.m)) + 2.0 * std::pow(0.5 - q, double(p.m));
  z /= norm;
  if (std::abs(z.trace().real() - 1.0) > 1e-10)
    throw Error("zeta_state: analytic normalization disagrees with the trace");
  return DensityMatrix::assume_psd(Operator(zeta_layout(p), std::move(z)));
}

// Factor indices of shield share i (1-based) within the zeta layout.
inline std::vector<Index> zeta_share_factors(const ZetaParams& p, Index share) {
  std::vector<Index> idx;
  for (Index j = 0; j < p.r; ++j)
    for (Index k = 0; k < p.m; ++k) {
      const Index pair = ((share - 1) * p.r + j) * p.m + k;
      idx.push_back(2 + 2 * pair);
      idx.push_back(3 + 2 * pair);
    }
  return idx;
}

// Alice-side (A) factor indices within the zeta layout, across all shares.
inline std::vector<Index> zeta_alice_factors(const ZetaParams& p) {
  std::vector<Index> idx = {0};  // key a
  for (Index pair = 0; pair < p.shield_pairs(); ++pair)
    idx.push_back(2 + 2 * pair);
  return idx;
}

inline std::vector<Index> zeta_bob_factors(const ZetaParams& p) {
  std::vector<Index> idx = {1};  // key b
  for (Index pair = 0; pair < p.shield_pairs(); ++pair)
    idx.push_back(3 + 2 * pair);
  return idx;
}

// tr over shares 2..N of both shields; for N = 1 this is the identity map.
inline DensityMatrix reduced_first_share(const DensityMatrix& zeta,
                                         const ZetaParams& p) {
  if (p.n_shares == 1) return zeta;
  std::vector<Index> traced;
  for (Index share = 2; share <= p.n_shares; ++share)
    for (Index f : zeta_share_factors(p, share)) traced.push_back(f);
  return partial_trace(zeta, traced);
}

// Trace norm of the <00| . |11> key block (key = leading 2 (x) 2 pair).
inline double block_offdiagonal_norm(const DensityMatrix& state) {
  const auto& l = state.layout();
  if (l.size() < 2 || l.factor(0).dim != 2 || l.factor(1).dim != 2)
    throw PreconditionError(
        "block_offdiagonal_norm: key must be the leading 2x2 factor pair");
  const Index ds = state.dim() / 4;
  CMatrix blk = state.matrix().block(0, 3 * ds, ds, ds);
  return trace_norm<double>(blk);
}

// ---- scalar bound chain -----------------------------------------------------

// 1/2 - ||A_0011||_1 in closed form:
// (1/2) (1 - (1 - 2^-r)^m / (1 + ((1-2q)/(2q))^m)).
inline double epsilon_closed_form(double q, Index r, Index m) {
  if (!(q > 0.0 && q < 0.5))
    throw PreconditionError("epsilon_closed_form: q must lie in (0, 1/2)");
  if (r < 1 || m < 1)
    throw PreconditionError("epsilon_closed_form: r, m must be >= 1");
  const double num = std::pow(1.0 - std::pow(2.0, -double(r)), double(m));
  const double den = 1.0 + std::pow((1.0 - 2.0 * q) / (2.0 * q), double(m));
  return 0.5 * (1.0 - num / den);
}

struct DeltaBound {
  double exact;                      // 2 (8 sqrt(2e) + h(2 sqrt(2e)))^1/2 + 2 sqrt(2e)
  std::optional<double> simplified;  // 2^{5/2} (sqrt(8e) log2(1/(8e)))^{1/2}, e < 1/32
};

inline DeltaBound delta_of_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 0.125))
    throw PreconditionError("delta_of_epsilon: epsilon must lie in (0, 1/8)");
  const double s = 2.0 * std::sqrt(2.0 * eps);
  DeltaBound b{2.0 * std::sqrt(4.0 * s + binary_entropy(s)) + s, std::nullopt};
  if (eps < 1.0 / 32.0) {
    const double root8e = std::sqrt(8.0 * eps);
    b.simplified = std::pow(2.0, 2.5) *
                   std::sqrt(root8e * std::log2(1.0 / (8.0 * eps)));
  }
  return b;
}

// tau <= 16 sqrt(m) 2^{-m/4}, valid for m > 5.
inline double tau_bound(Index m) {
  if (m <= 5) throw PreconditionError("tau_bound: requires m > 5");
  return 16.0 * std::sqrt(double(m)) * std::pow(2.0, -double(m) / 4.0);
}

}  // namespace qcap
