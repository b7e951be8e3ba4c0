// Coherent information I_coh(N, rho) = I(R>B) = S(B) - S(RB) for a
// purification of the input, its flagged/switched decomposition identities,
// and numerical maximization over channel inputs.

#pragma once

#include <atomic>
#include <cmath>
#include <thread>
#include <utility>

#include "qcap/channel.hpp"

namespace qcap {

// Canonical purification: eigendecompose rho and build
// |phi> = sum_i sqrt(lambda_i) |v_i>^A |i>^R with dim(R) = dim(A).
// I(R>B) does not depend on this choice; fixing one keeps runs reproducible.
inline DensityMatrix purify(const DensityMatrix& rho,
                            const std::string& ref_label = "R") {
  const Index d = rho.dim();
  auto eig = eig_hermitian<double>(rho.matrix());
  CVector ket = CVector::Zero(d * d);
  for (Index i = 0; i < d; ++i) {
    const double ev = std::max(0.0, eig.eigenvalues[i]);
    if (ev <= 0.0) continue;
    const double amp = std::sqrt(ev);
    for (Index a = 0; a < d; ++a)
      ket[a * d + i] += amp * eig.eigenvectors(a, i);
  }
  ket.normalize();
  SystemLayout layout = rho.layout().concat(
      SystemLayout::single(fresh_label(ref_label, rho.layout()), d));
  return pure_state(std::move(layout), ket);
}

// S(out) - S(out u ref) of a state, with the factor sets given by index.
inline double coherent_information_of_state(const DensityMatrix& state,
                                            const std::vector<Index>& ref_factors,
                                            const std::vector<Index>& out_factors) {
  std::set<Index> seen;
  for (Index i : ref_factors)
    if (!seen.insert(i).second)
      throw PreconditionError("coherent_information_of_state: duplicate factor");
  for (Index i : out_factors)
    if (!seen.insert(i).second)
      throw PreconditionError(
          "coherent_information_of_state: ref and out factors overlap");
  if (seen.size() != state.layout().size())
    throw PreconditionError(
        "coherent_information_of_state: factors must partition the layout");
  // S(out): trace out the reference; S(out u ref): the state itself
  const double s_out =
      von_neumann_entropy(partial_trace(state, ref_factors));
  const double s_all = von_neumann_entropy(state);
  return s_out - s_all;
}

// Convenience overload: reference factors by label, everything else is output.
inline double coherent_information_of_state(const DensityMatrix& state,
                                            const std::vector<std::string>& ref_labels) {
  std::vector<Index> ref, out;
  std::set<Index> rset;
  for (const auto& l : ref_labels) {
    auto i = state.layout().index_of(l);
    if (!i)
      throw PreconditionError("coherent_information_of_state: no factor '" +
                              l + "'");
    ref.push_back(static_cast<Index>(*i));
    rset.insert(static_cast<Index>(*i));
  }
  for (std::size_t i = 0; i < state.layout().size(); ++i)
    if (!rset.count(static_cast<Index>(i))) out.push_back(static_cast<Index>(i));
  return coherent_information_of_state(state, ref, out);
}

// I_coh(N, rho) = S(B) - S(RB) with the channel acting on the non-reference
// half of the canonical purification of rho.
inline double coherent_information(const QuantumChannel& channel,
                                   const DensityMatrix& rho) {
  if (rho.dim() != channel.in_dim())
    throw PreconditionError("coherent_information: input dim mismatch");
  std::string ref = "R";
  while (rho.layout().contains(ref) || channel.out_layout().contains(ref))
    ref += "'";
  DensityMatrix phi = purify(rho, ref);
  std::vector<Index> targets(rho.layout().size());
  for (std::size_t i = 0; i < rho.layout().size(); ++i)
    targets[i] = static_cast<Index>(i);
  DensityMatrix joint = apply(channel, phi, targets);
  // joint = (out factors..., R); reference is the last factor
  std::vector<Index> ref_idx = {static_cast<Index>(joint.layout().size() - 1)};
  const double s_rb = von_neumann_entropy(joint);
  const double s_b = von_neumann_entropy(partial_trace(joint, ref_idx));
  return s_b - s_rb;
}

// Both sides of the flagged-channel identity
// I_coh(flagged, rho) = sum_i p_i I_coh(N_i, rho).
inline std::pair<double, double> verify_flagged_identity(
    const std::vector<std::pair<double, QuantumChannel>>& branches,
    const DensityMatrix& rho) {
  auto flagged = flagged_channel(branches);
  const double lhs = coherent_information(flagged, rho);
  double rhs = 0.0;
  for (const auto& [p, ch] : branches)
    rhs += p * coherent_information(ch, rho);
  return {lhs, rhs};
}

// Data-processing: I_coh(first, rho) >= I_coh(second o first, rho).
inline std::pair<double, double> verify_data_processing(
    const QuantumChannel& first, const QuantumChannel& second,
    const DensityMatrix& rho) {
  const double before = coherent_information(first, rho);
  const double after = coherent_information(compose(second, first), rho);
  return {before, after};
}

// ---- fast evaluation --------------------------------------------------------

// Evaluates I_coh(N, rho) many times for one fixed channel. S(RB) is computed
// as the entropy of the complementary-channel output S(N_c(rho)), which equals
// the joint-output entropy for any purification but lives in dimension
// rank(Choi) instead of dim(out) * dim(in). Kraus operators are extracted once
// from the Choi eigendecomposition. Thread-safe after construction.
class CoherentInfoEvaluator {
 public:
  explicit CoherentInfoEvaluator(const QuantumChannel& channel)
      : din_(channel.in_dim()), dout_(channel.out_dim()) {
    transfer_ = channel.transfer_matrix();
    auto eig = eig_hermitian<double>(channel.choi_matrix());
    std::vector<Index> kept;
    for (Index k = 0; k < eig.eigenvalues.size(); ++k)
      if (eig.eigenvalues[k] > kEntropyEigenvalueCutoff) kept.push_back(k);
    // rows of kraus_stack_: vec of K_k (row-major), scaled by sqrt(lambda_k)
    kraus_stack_.resize(static_cast<Index>(kept.size()), dout_ * din_);
    for (std::size_t i = 0; i < kept.size(); ++i) {
      const double s = std::sqrt(eig.eigenvalues[kept[i]]);
      kraus_stack_.row(static_cast<Index>(i)) =
          s * eig.eigenvectors.col(kept[i]).transpose();
    }
  }

  double operator()(const CMatrix& rho) const {
    // S(B)
    CVector v(din_ * din_);
    for (Index x = 0; x < din_; ++x)
      for (Index xp = 0; xp < din_; ++xp) v[x * din_ + xp] = rho(x, xp);
    CVector w = transfer_ * v;
    CMatrix out(dout_, dout_);
    for (Index b = 0; b < dout_; ++b)
      for (Index bp = 0; bp < dout_; ++bp) out(b, bp) = w[b * dout_ + bp];
    const double s_b = entropy_of_symmetrized(out);

    // S(RB) = S(N_c(rho)): C_{kl} = Tr(K_k rho K_l^dag)
    const Index e = kraus_stack_.rows();
    CMatrix stacked_b(e, dout_ * din_);
    for (Index k = 0; k < e; ++k) {
      CMatrix kk(dout_, din_);
      for (Index b = 0; b < dout_; ++b)
        for (Index x = 0; x < din_; ++x)
          kk(b, x) = kraus_stack_(k, b * din_ + x);
      CMatrix bk = kk * rho;
      for (Index b = 0; b < dout_; ++b)
        for (Index x = 0; x < din_; ++x)
          stacked_b(k, b * din_ + x) = bk(b, x);
    }
    CMatrix comp = stacked_b * kraus_stack_.adjoint();
    const double s_rb = entropy_of_symmetrized(comp);
    return s_b - s_rb;
  }

  double operator()(const DensityMatrix& rho) const { return (*this)(rho.matrix()); }

 private:
  static double entropy_of_symmetrized(const CMatrix& m) {
    CMatrix h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    RVector ev = es.eigenvalues();
    return entropy_of_eigenvalues<double>(ev);
  }

  Index din_, dout_;
  CMatrix transfer_;
  CMatrix kraus_stack_;
};

// ---- maximization ----------------------------------------------------------

struct MaximizeOptions {
  int restarts = 16;
  int max_iters = 500;
  double tol = 1e-6;          // gradient-norm stopping threshold
  double fd_step = 1e-5;      // central-difference step
  std::uint64_t seed = 0;
  int threads = 0;            // 0 = hardware concurrency
  Index dim_cap = kDefaultDimCap;
};

struct CoherentInfoResult {
  double value = 0.0;
  DensityMatrix input;
  int restarts_used = 0;
  int iterations = 0;          // iterations of the winning restart
  double gradient_norm = 0.0;  // at exit of the winning restart
  double raw_best = 0.0;       // best ascent value before the pure-input floor
};

namespace detail {

// Input parameterized as rho = G G^dag / tr(G G^dag); scale-invariant in G.
inline DensityMatrix state_from_gram(const SystemLayout& layout,
                                     const CMatrix& g) {
  CMatrix rho = g * g.adjoint();
  const double tr = rho.trace().real();
  rho /= tr;
  return DensityMatrix::assume_psd(Operator(layout, std::move(rho)));
}

struct RestartOutcome {
  double value = -1e300;
  CMatrix g;
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Deterministic non-random starting points: the maximally mixed state
// (restart 0) and a pure state pattern entangling the two balanced halves
// of the input factors (restart 1).
inline CMatrix deterministic_seed(const QuantumChannel& channel, int which) {
  const Index d = channel.in_dim();
  if (which == 0) return CMatrix::Identity(d, d);
  const auto& in = channel.in_layout();
  if (in.size() >= 2) {
    // balanced split by accumulated dimension
    Index dl = 1;
    double best = 1e300;
    Index acc = 1;
    for (std::size_t i = 0; i + 1 < in.size(); ++i) {
      acc *= in.factor(i).dim;
      double imbalance = std::abs(std::log(double(acc)) -
                                  std::log(double(d) / double(acc)));
      if (imbalance < best) {
        best = imbalance;
        dl = acc;
      }
    }
    const Index dr = d / dl;
    const Index k = std::min(dl, dr);
    CVector ket = CVector::Zero(d);
    for (Index i = 0; i < k; ++i) ket[i * dr + i] = 1.0 / std::sqrt(double(k));
    CMatrix g = CMatrix::Zero(d, d);
    g.col(0) = ket;
    return g;
  }
  CMatrix g = CMatrix::Zero(d, d);
  g(0, 0) = 1.0;
  return g;
}

inline RestartOutcome run_restart(const QuantumChannel& channel,
                                  const CoherentInfoEvaluator& evaluator,
                                  const MaximizeOptions& opts, int restart,
                                  Rng base_rng) {
  const Index d = channel.in_dim();
  CMatrix g;
  if (restart < 2) {
    g = deterministic_seed(channel, restart);
  } else {
    Rng rng = base_rng.substream(static_cast<std::uint64_t>(restart));
    g = ginibre(rng, d, d);
  }
  g /= g.norm();

  auto eval = [&](const CMatrix& gm) {
    CMatrix rho = gm * gm.adjoint();
    rho /= rho.trace().real();
    return evaluator(rho);
  };

  double f = eval(g);
  const double h = opts.fd_step;
  RestartOutcome out;
  out.value = f;
  out.g = g;

  CMatrix grad(d, d);
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    // central-difference gradient over the real and imaginary parts of G
    for (Index r = 0; r < d; ++r)
      for (Index c = 0; c < d; ++c) {
        CMatrix gp = g, gm = g;
        gp(r, c) += h;
        gm(r, c) -= h;
        const double dre = (eval(gp) - eval(gm)) / (2 * h);
        gp = g;
        gm = g;
        gp(r, c) += std::complex<double>(0, h);
        gm(r, c) -= std::complex<double>(0, h);
        const double dim_ = (eval(gp) - eval(gm)) / (2 * h);
        grad(r, c) = std::complex<double>(dre, dim_);
      }
    const double gnorm = grad.norm();
    out.gradient_norm = gnorm;
    if (gnorm < opts.tol) break;

    // backtracking line search (Armijo)
    const double slope = gnorm * gnorm;
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      CMatrix cand = g + t * grad;
      cand /= cand.norm();
      const double fc = eval(cand);
      if (fc >= f + 1e-4 * t * slope) {
        g = cand;
        f = fc;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left at this resolution
  }
  out.value = f;
  out.g = g;
  out.iterations = iter;
  return out;
}

}  // namespace detail

// Multistart finite-difference ascent. The result is a certified lower bound
// on max_rho I_coh (every evaluation is exact up to numerics), floored at 0
// because a pure product input always attains I_coh = 0.
inline CoherentInfoResult maximize_coherent_information(
    const QuantumChannel& channel, const MaximizeOptions& opts = {}) {
  check_dim_cap(channel.in_dim() * channel.out_dim(), opts.dim_cap,
                "maximize_coherent_information");
  if (opts.restarts < 1)
    throw PreconditionError("maximize_coherent_information: restarts < 1");

  Rng base = Rng::seeded(opts.seed);
  CoherentInfoEvaluator evaluator(channel);
  std::vector<detail::RestartOutcome> outcomes(opts.restarts);
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  const int nthreads =
      std::max(1, std::min(opts.threads > 0 ? opts.threads : hw, opts.restarts));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= opts.restarts) return;
      outcomes[idx] = detail::run_restart(channel, evaluator, opts, idx, base);
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // deterministic merge: first restart achieving the max within 1e-9 wins
  int best = 0;
  for (int i = 1; i < opts.restarts; ++i)
    if (outcomes[i].value > outcomes[best].value + 1e-9) best = i;

  CoherentInfoResult res;
  res.raw_best = outcomes[best].value;
  res.restarts_used = opts.restarts;
  res.iterations = outcomes[best].iterations;
  res.gradient_norm = outcomes[best].gradient_norm;
  if (res.raw_best >= 0.0) {
    res.value = res.raw_best;
    res.input = detail::state_from_gram(channel.in_layout(), outcomes[best].g);
  } else {
    // pure product input floor
    res.value = 0.0;
    res.input = basis_state(channel.in_layout(), 0);
  }
  return res;
}

// Both sides of the switched-channel reduction: the maximum over joint
// switch+input states equals the best branch maximum.
struct SwitchLemmaResult {
  double switched_max = 0.0;
  std::vector<double> branch_maxes;
};

inline SwitchLemmaResult verify_switch_lemma(
    const std::vector<QuantumChannel>& branches,
    const MaximizeOptions& opts = {}) {
  SwitchLemmaResult r;
  auto sw = switched_channel(branches);
  r.switched_max = maximize_coherent_information(sw, opts).value;
  for (const auto& b : branches)
    r.branch_maxes.push_back(maximize_coherent_information(b, opts).value);
  return r;
}

}  // namespace qcap
