// Quantum channels stored as Choi matrices with explicit input/output
// layouts. Factor ordering of the Choi matrix is (outputs..., inputs...)
// and the normalization is trace(choi) = dim(in), so trace preservation
// reads: partial trace over the output factors equals the identity on the
// input space.

#pragma once

#include <optional>
#include <utility>

#include "qcap/operators.hpp"
#include "qcap/random.hpp"

namespace qcap {

inline constexpr Index kDefaultDimCap = 4096;
inline constexpr double kChoiPsdTolerance = 1e-10;
inline constexpr double kTracePreservationTolerance = 1e-9;

inline void check_dim_cap(Index required, Index cap, const char* where) {
  if (required > cap)
    throw DimensionCapError(std::string(where) + ": required dimension " +
                            std::to_string(required) +
                            " exceeds the configured cap " +
                            std::to_string(cap));
}

class QuantumChannel {
 public:
  QuantumChannel() = default;
  QuantumChannel(SystemLayout in, SystemLayout out, CMatrix choi)
      : in_(std::move(in)), out_(std::move(out)), choi_(std::move(choi)) {
    const Index side = in_.total_dim() * out_.total_dim();
    if (choi_.rows() != side || choi_.cols() != side)
      throw PreconditionError("QuantumChannel: Choi size does not match layouts");
    if (hermiticity_drift<double>(choi_) > 1e-9)
      throw PreconditionError("QuantumChannel: Choi is not Hermitian");
    CMatrix sym = (choi_ + choi_.adjoint()) / 2.0;  // adjoint aliases choi_
    choi_ = std::move(sym);
    if (std::abs(choi_.trace().real() - double(in_.total_dim())) > 1e-7)
      throw PreconditionError("QuantumChannel: Choi trace must equal dim(in)");
  }

  const SystemLayout& in_layout() const { return in_; }
  const SystemLayout& out_layout() const { return out_; }
  const CMatrix& choi_matrix() const { return choi_; }
  Index in_dim() const { return in_.total_dim(); }
  Index out_dim() const { return out_.total_dim(); }

  // Layout of the Choi operator: output factors then input factors; input
  // labels that collide with output labels get primes (they are distinct
  // systems, the retained input copies).
  SystemLayout choi_layout() const {
    SystemLayout l = out_;
    for (const auto& f : in_.factors())
      l = l.concat(SystemLayout::single(fresh_label(f.label, l), f.dim));
    return l;
  }

  Operator choi_operator() const { return Operator(choi_layout(), choi_); }

  // Transfer matrix T[(b,b'),(x,x')] acting on row-major vectorized states.
  CMatrix transfer_matrix() const {
    return exchange_mid(choi_, out_dim(), in_dim(), out_dim(), in_dim());
  }

  QuantumChannel with_label_suffix(const std::string& suffix) const {
    return QuantumChannel(in_.with_suffix(suffix), out_.with_suffix(suffix),
                          choi_);
  }

  double min_choi_eigenvalue() const {
    return eig_hermitian_values<double>(choi_).minCoeff();
  }

  // max |Tr_out(choi) - I_in| entry; 0 for exactly trace-preserving maps.
  double trace_preservation_defect() const {
    std::vector<Index> out_idx(out_.size());
    for (std::size_t i = 0; i < out_.size(); ++i)
      out_idx[i] = static_cast<Index>(i);
    CMatrix m = partial_trace(choi_, choi_layout().dims(), out_idx);
    return (m - CMatrix::Identity(in_dim(), in_dim())).cwiseAbs().maxCoeff();
  }

  void validate(double psd_tol = kChoiPsdTolerance,
                double tp_tol = kTracePreservationTolerance) const {
    if (min_choi_eigenvalue() < -psd_tol)
      throw PreconditionError("QuantumChannel: Choi is not PSD");
    if (trace_preservation_defect() > tp_tol)
      throw PreconditionError("QuantumChannel: not trace-preserving");
  }

 private:
  SystemLayout in_;
  SystemLayout out_;
  CMatrix choi_;
};

// ---- application ---------------------------------------------------------

// Applies the channel to the factors of `rho` listed in `targets` (which must
// match the channel input dims factor by factor, in order); all other factors
// are carried along untouched. The result lives on (out factors..., reference
// factors in their original order).
inline DensityMatrix apply(const QuantumChannel& channel,
                           const DensityMatrix& rho,
                           std::optional<std::vector<Index>> targets = {}) {
  const SystemLayout& rl = rho.layout();
  std::vector<Index> tgt;
  if (targets) {
    tgt = *targets;
  } else {
    // default: locate the channel's input labels inside rho's layout
    for (const auto& f : channel.in_layout().factors()) {
      auto i = rl.index_of(f.label);
      if (!i)
        throw PreconditionError("apply: input factor '" + f.label +
                                "' not found in state layout");
      tgt.push_back(static_cast<Index>(*i));
    }
  }
  if (tgt.size() != channel.in_layout().size())
    throw PreconditionError("apply: target count does not match channel input");
  std::set<Index> seen;
  for (std::size_t i = 0; i < tgt.size(); ++i) {
    if (tgt[i] < 0 || tgt[i] >= static_cast<Index>(rl.size()))
      throw PreconditionError("apply: target index out of range");
    if (!seen.insert(tgt[i]).second)
      throw PreconditionError("apply: duplicate target index");
    if (rl.factor(tgt[i]).dim != channel.in_layout().factor(i).dim)
      throw PreconditionError("apply: target dims do not match channel input");
  }

  // permutation: targets first (in channel-input order), then the rest
  std::vector<Index> order = tgt;
  std::vector<Index> ref_idx;
  for (std::size_t i = 0; i < rl.size(); ++i)
    if (!seen.count(static_cast<Index>(i))) {
      order.push_back(static_cast<Index>(i));
      ref_idx.push_back(static_cast<Index>(i));
    }
  CMatrix perm = permute_factors(rho.matrix(), rl.dims(), order);

  const Index din = channel.in_dim();
  const Index dout = channel.out_dim();
  const Index dref = rho.dim() / din;

  CMatrix r2 = exchange_mid(perm, din, dref, din, dref);
  CMatrix o2 = channel.transfer_matrix() * r2;
  CMatrix out = exchange_mid(o2, dout, dout, dref, dref);

  SystemLayout out_layout = channel.out_layout();
  for (Index i : ref_idx) {
    const auto& f = rl.factor(i);
    if (out_layout.contains(f.label))
      throw PreconditionError(
          "apply: reference label '" + f.label +
          "' collides with a channel output label; relabel the channel");
    out_layout = out_layout.concat(SystemLayout::single(f.label, f.dim));
  }
  return DensityMatrix::assume_psd(Operator(std::move(out_layout), std::move(out)));
}

// ---- constructors ----------------------------------------------------------

inline QuantumChannel identity_channel(SystemLayout in, SystemLayout out) {
  if (in.total_dim() != out.total_dim())
    throw PreconditionError("identity_channel: dims differ");
  const Index d = in.total_dim();
  CMatrix choi = CMatrix::Zero(d * d, d * d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) choi(i * d + i, j * d + j) = 1.0;
  return QuantumChannel(std::move(in), std::move(out), std::move(choi));
}

inline QuantumChannel identity_channel(Index d) {
  if (d < 1) throw PreconditionError("identity_channel: d must be >= 1");
  return identity_channel(SystemLayout::single("A", d),
                          SystemLayout::single("B", d));
}

// E_p: with probability 1-p transmit, with probability p output the
// maximally mixed state; the binary flag factor (first output factor)
// records which happened.
inline QuantumChannel erasure_channel(double p, SystemLayout in,
                                      std::optional<SystemLayout> out_main = {},
                                      const std::string& flag_label = "F") {
  if (p < 0.0 || p > 1.0)
    throw PreconditionError("erasure_channel: p outside [0,1]");
  SystemLayout main = out_main ? *out_main : in;
  if (main.total_dim() != in.total_dim())
    throw PreconditionError("erasure_channel: output dims differ from input");
  const Index d = in.total_dim();
  CMatrix choi = CMatrix::Zero(2 * d * d, 2 * d * d);
  // flag 0 block: (1-p) * identity Choi; flag 1 block: p * mu_out (x) I_in
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      choi(i * d + i, j * d + j) += (1.0 - p);
  const Index off = d * d;  // flag=1 offset in the (F, B) output index
  for (Index b = 0; b < d; ++b)
    for (Index x = 0; x < d; ++x)
      choi(off + b * d + x, off + b * d + x) += p / double(d);
  SystemLayout out = SystemLayout::single(flag_label, 2).concat(main);
  return QuantumChannel(std::move(in), std::move(out), std::move(choi));
}

inline QuantumChannel erasure_channel(double p, Index d) {
  if (d < 1) throw PreconditionError("erasure_channel: d must be >= 1");
  return erasure_channel(p, SystemLayout::single("A", d),
                         SystemLayout::single("B", d));
}

inline QuantumChannel total_erasure_channel(SystemLayout in,
                                            std::optional<SystemLayout> out_main = {},
                                            const std::string& flag_label = "F") {
  return erasure_channel(1.0, std::move(in), std::move(out_main), flag_label);
}

// Discards the listed input factors (partial trace as a channel).
// Choi[(b, x), (b', x')] = sum over discarded values t of
// [x = embed(b, t)] [x' = embed(b', t)].
inline QuantumChannel trace_out_channel(SystemLayout in,
                                        const std::vector<Index>& discarded) {
  SystemLayout out = in.without(discarded);
  const Index din = in.total_dim();
  const Index dout = out.total_dim();
  std::vector<Index> kept;
  std::set<Index> drop(discarded.begin(), discarded.end());
  for (std::size_t i = 0; i < in.size(); ++i)
    if (!drop.count(static_cast<Index>(i))) kept.push_back(static_cast<Index>(i));
  const auto in_strides = strides_of(in.dims());
  const auto out_dims = out.dims();
  const auto disc_dims = in.subset(discarded).dims();
  const Index ddisc = product_of(disc_dims);

  // base offset in the full input index of each kept / discarded multi-index
  std::vector<Index> kept_off(dout, 0), disc_off(ddisc, 0);
  std::vector<Index> comps(out_dims.size());
  for (Index b = 0; b < dout; ++b) {
    detail::unravel(b, out_dims, comps);
    Index base = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
      base += comps[i] * in_strides[kept[i]];
    kept_off[b] = base;
  }
  comps.resize(disc_dims.size());
  for (Index t = 0; t < ddisc; ++t) {
    detail::unravel(t, disc_dims, comps);
    Index base = 0;
    for (std::size_t i = 0; i < discarded.size(); ++i)
      base += comps[i] * in_strides[discarded[i]];
    disc_off[t] = base;
  }

  CMatrix choi = CMatrix::Zero(dout * din, dout * din);
  for (Index b = 0; b < dout; ++b)
    for (Index bp = 0; bp < dout; ++bp)
      for (Index t = 0; t < ddisc; ++t)
        choi(b * din + kept_off[b] + disc_off[t],
             bp * din + kept_off[bp] + disc_off[t]) += 1.0;
  return QuantumChannel(std::move(in), std::move(out), std::move(choi));
}

// second ∘ first; the output dims of `first` must equal the input dims of
// `second` (labels are free to differ).
inline QuantumChannel compose(const QuantumChannel& second,
                              const QuantumChannel& first) {
  if (first.out_dim() != second.in_dim())
    throw PreconditionError("compose: intermediate dims differ");
  CMatrix t = second.transfer_matrix() * first.transfer_matrix();
  CMatrix choi = exchange_mid(t, second.out_dim(), second.out_dim(),
                              first.in_dim(), first.in_dim());
  return QuantumChannel(first.in_layout(), second.out_layout(), std::move(choi));
}

inline QuantumChannel tensor_channels(const QuantumChannel& a,
                                      const QuantumChannel& b) {
  // kron gives factor groups (out_a, in_a, out_b, in_b); regroup to
  // (out_a, out_b, in_a, in_b).
  CMatrix k = kron(a.choi_matrix(), b.choi_matrix());
  std::vector<Index> dims = {a.out_dim(), a.in_dim(), b.out_dim(), b.in_dim()};
  CMatrix choi = permute_factors(k, dims, {0, 2, 1, 3});
  return QuantumChannel(a.in_layout().concat(b.in_layout()),
                        a.out_layout().concat(b.out_layout()),
                        std::move(choi));
}

// Flagged channel sum_i p_i |i><i|^F (x) N_i; the flag is the first output
// factor, of dimension = number of branches.
inline QuantumChannel flagged_channel(
    const std::vector<std::pair<double, QuantumChannel>>& branches,
    const std::string& flag_label = "F") {
  if (branches.empty())
    throw PreconditionError("flagged_channel: no branches");
  double psum = 0.0;
  for (const auto& [p, ch] : branches) {
    if (p < 0.0) throw PreconditionError("flagged_channel: negative probability");
    psum += p;
    if (!(ch.in_layout() == branches[0].second.in_layout()) ||
        !(ch.out_layout() == branches[0].second.out_layout()))
      throw PreconditionError("flagged_channel: branches must share layouts");
  }
  if (std::abs(psum - 1.0) > 1e-12)
    throw PreconditionError("flagged_channel: probabilities must sum to 1");

  const Index nb = static_cast<Index>(branches.size());
  const Index din = branches[0].second.in_dim();
  const Index dout = branches[0].second.out_dim();
  const Index side = nb * dout * din;
  CMatrix choi = CMatrix::Zero(side, side);
  for (Index i = 0; i < nb; ++i) {
    const auto& c = branches[i].second.choi_matrix();
    choi.block(i * dout * din, i * dout * din, dout * din, dout * din) =
        branches[i].first * c;
  }
  SystemLayout out = SystemLayout::single(flag_label, nb)
                         .concat(branches[0].second.out_layout());
  return QuantumChannel(branches[0].second.in_layout(), std::move(out),
                        std::move(choi));
}

// Switched channel sum_i P_i (x) N_i: the leading input factor S selects the
// branch applied to the main input; S is dephased and retained in the output.
inline QuantumChannel switched_channel(
    const std::vector<QuantumChannel>& branches,
    const std::string& switch_label = "S") {
  if (branches.empty())
    throw PreconditionError("switched_channel: no branches");
  for (const auto& ch : branches)
    if (!(ch.in_layout() == branches[0].in_layout()) ||
        !(ch.out_layout() == branches[0].out_layout()))
      throw PreconditionError("switched_channel: branches must share layouts");
  const Index ns = static_cast<Index>(branches.size());
  const Index din = branches[0].in_dim();
  const Index dout = branches[0].out_dim();
  const Index side = ns * dout * ns * din;
  CMatrix choi = CMatrix::Zero(side, side);
  // Choi[(s_out, b, s_in, x), (...)]: only s_out = s_in = i survives, and the
  // (b, x) part is branch i's Choi.
  for (Index i = 0; i < ns; ++i) {
    const auto& c = branches[i].choi_matrix();
    for (Index bx = 0; bx < dout * din; ++bx)
      for (Index bx2 = 0; bx2 < dout * din; ++bx2) {
        const Index b = bx / din, x = bx % din;
        const Index b2 = bx2 / din, x2 = bx2 % din;
        choi((i * dout + b) * (ns * din) + i * din + x,
             (i * dout + b2) * (ns * din) + i * din + x2) = c(bx, bx2);
      }
  }
  SystemLayout s_in = SystemLayout::single(switch_label, ns);
  return QuantumChannel(s_in.concat(branches[0].in_layout()),
                        s_in.concat(branches[0].out_layout()),
                        std::move(choi));
}

// ---- Choi-state conversions ------------------------------------------------

// The state obtained by sending half of a maximally entangled state through
// the channel: choi / dim(in), over (out factors..., primed input copies...).
inline DensityMatrix choi_state(const QuantumChannel& channel) {
  return DensityMatrix::assume_psd(Operator(
      channel.choi_layout(), channel.choi_matrix() / double(channel.in_dim())));
}

// Builds the channel whose Choi state is `state`; `in_factors`/`out_factors`
// partition the state's factors. Requires the induced map to be
// trace-preserving: the marginal on the input copies must be maximally mixed.
inline QuantumChannel channel_from_choi_state(const DensityMatrix& state,
                                              const std::vector<Index>& in_factors,
                                              const std::vector<Index>& out_factors) {
  const auto& layout = state.layout();
  if (in_factors.size() + out_factors.size() != layout.size())
    throw PreconditionError(
        "channel_from_choi_state: factor sets must partition the layout");
  std::set<Index> all(in_factors.begin(), in_factors.end());
  for (Index i : out_factors)
    if (!all.insert(i).second)
      throw PreconditionError("channel_from_choi_state: factor sets overlap");

  SystemLayout in = layout.subset(in_factors);
  SystemLayout out = layout.subset(out_factors);
  const Index din = in.total_dim();

  CMatrix marginal = partial_trace(state.matrix(), layout.dims(), out_factors);
  if ((marginal - CMatrix::Identity(din, din) / double(din))
          .cwiseAbs()
          .maxCoeff() > kTracePreservationTolerance)
    throw PreconditionError(
        "channel_from_choi_state: input marginal is not maximally mixed "
        "(induced map would not be trace-preserving)");

  std::vector<Index> order = out_factors;
  order.insert(order.end(), in_factors.begin(), in_factors.end());
  CMatrix choi =
      double(din) * permute_factors(state.matrix(), layout.dims(), order);
  return QuantumChannel(std::move(in), std::move(out), std::move(choi));
}

// ---- randomized instances (verification suites, tests) ---------------------

inline QuantumChannel random_channel(Rng& rng, SystemLayout in,
                                     SystemLayout out) {
  const Index din = in.total_dim(), dout = out.total_dim();
  CMatrix g = ginibre(rng, dout * din, dout * din);
  CMatrix w = g * g.adjoint();
  CMatrix m = partial_trace(w, {dout, din}, {0});
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  CMatrix minv_half = es.operatorInverseSqrt();
  CMatrix corr = kron(CMatrix::Identity(dout, dout), minv_half);
  CMatrix choi = corr * w * corr.adjoint();
  return QuantumChannel(std::move(in), std::move(out), std::move(choi));
}

inline QuantumChannel random_channel(Rng& rng, Index din, Index dout) {
  return random_channel(rng, SystemLayout::single("A", din),
                        SystemLayout::single("B", dout));
}

}  // namespace qcap
