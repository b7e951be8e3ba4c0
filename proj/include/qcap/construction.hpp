// The switched channel M (erasure branch + PPT entanglement-binding branch),
// the converse threshold and bound, the achievability input/output states and
// their coherent-information bookkeeping, the parameter picker, and the
// (kappa, p) feasibility scan.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>

#include "qcap/pbit.hpp"

namespace qcap {

// ---- scalar bounds ----------------------------------------------------------

// p* = (1 + kappa^n)^(-1/n): at or above this erasure probability the
// coherent information of n uses vanishes.
inline double converse_threshold(Index n, double kappa) {
  if (n < 1) throw PreconditionError("converse_threshold: n must be >= 1");
  if (kappa < 0.0 || kappa > 1.0)
    throw PreconditionError("converse_threshold: kappa outside [0,1]");
  return 1.0 / std::pow(1.0 + std::pow(kappa, double(n)), 1.0 / double(n));
}

struct ConverseBound {
  double l_resolved;  // (-kappa^l p^(n-l) + 1 - p^(n-l)) * entropy
  double uniform;     // (1 - (1 + kappa^n) p^n) * entropy
};

inline ConverseBound converse_upper_bound(Index n, Index l, double kappa,
                                          double p, double entropy) {
  if (n < 1 || l < 0 || l > n)
    throw PreconditionError("converse_upper_bound: need 0 <= l <= n");
  if (kappa < 0.0 || kappa > 1.0 || p < 0.0 || p > 1.0)
    throw PreconditionError("converse_upper_bound: kappa, p outside [0,1]");
  if (entropy < 0.0)
    throw PreconditionError("converse_upper_bound: entropy must be >= 0");
  const double pl = std::pow(p, double(n - l));
  ConverseBound b;
  b.l_resolved = (-std::pow(kappa, double(l)) * pl + 1.0 - pl) * entropy;
  b.uniform = (1.0 - (1.0 + std::pow(kappa, double(n))) * std::pow(p, double(n))) *
              entropy;
  if (b.l_resolved > b.uniform + 1e-12)
    throw Error("converse_upper_bound: l-resolved bound exceeds uniform bound");
  return b;
}

// Alicki-Fannes penalty at reference dimension 2: Delta = 4 tau + 2 h(tau).
inline double alicki_fannes_delta(double tau) {
  if (tau < 0.0 || tau >= 1.0)
    throw PreconditionError("alicki_fannes_delta: tau must lie in [0, 1)");
  return 4.0 * tau + 2.0 * binary_entropy(tau);
}

// Delta <= 72 * 2^(-m/4) * m^(3/2), valid once 16 sqrt(m) 2^(-m/4) <= 1/2.
inline double delta_bound_unchecked(Index m) {
  return 72.0 * std::pow(2.0, -double(m) / 4.0) * std::pow(double(m), 1.5);
}

inline double delta_bound(Index m) {
  if (m <= 5 || tau_bound(m) > 0.5)
    throw PreconditionError(
        "delta_bound: requires 16 sqrt(m) 2^(-m/4) <= 1/2 (m >= 30)");
  return delta_bound_unchecked(m);
}

struct AchievabilityBound {
  double value;          // (1-kappa)(1 - p^N - Delta) - kappa
  bool requirement_met;  // Delta < 1 - p^N - kappa/(1-kappa)
};

inline AchievabilityBound achievability_lower_bound(double kappa, double p,
                                                    Index n_shares,
                                                    double delta) {
  if (kappa < 0.0 || kappa > 1.0 || p < 0.0 || p > 1.0 || delta < 0.0 ||
      n_shares < 1)
    throw PreconditionError("achievability_lower_bound: parameter out of range");
  const double pn = std::pow(p, double(n_shares));
  AchievabilityBound b;
  b.value = (1.0 - kappa) * (1.0 - pn - delta) - kappa;
  b.requirement_met =
      kappa < 1.0 && delta < 1.0 - pn - kappa / (1.0 - kappa);
  return b;
}

// ---- parameters -------------------------------------------------------------

struct ChannelParams {
  Index n = 1;         // number of uses with vanishing coherent information
  double kappa = 0.25;
  double p = 0.8;
  double q = 1.0 / 3.0;
  Index d = 2;
  Index r = 1;
  Index m = 1;
  Index n_shares = 1;  // N

  ZetaParams zeta(Index dim_cap = kDefaultDimCap) const {
    ZetaParams z;
    z.q = q;
    z.d = d;
    z.r = r;
    z.m = m;
    z.n_shares = n_shares;
    z.dim_cap = dim_cap;
    return z;
  }

  bool in_converse_regime() const {
    return p >= converse_threshold(n, kappa) && p <= 1.0;
  }
  bool in_achievability_regime() const {
    return kappa > 0.0 && kappa < 0.5 && p > 0.0 && p < 1.0;
  }
  bool ppt_certified_regime() const {
    return zeta_ppt_condition(q, d, r, n_shares);
  }
};

struct ParameterChecks {
  double p_star = 0.0;
  bool threshold_equality = false;
  double ppt_lhs = 0.0;  // ln((1-q)/q)
  double ppt_rhs = 0.0;  // r N ln(d/(d-1))
  bool ppt_ok = false;
  double delta_bound_value = 0.0;
  double delta_requirement_rhs = 0.0;  // 1 - p^N - kappa/(1-kappa)
  bool delta_ok = false;
  double lower_bound = 0.0;  // (1-kappa)(1 - p^N - Delta) - kappa
};

struct PickedParameters {
  ChannelParams params;
  ParameterChecks checks;
};

inline Index ceil_log2(Index m) {
  Index k = 0, v = 1;
  while (v < m) {
    v *= 2;
    ++k;
  }
  return k;
}

// The concrete instantiation: kappa = 1/4, p at the converse threshold,
// N = 2 n 4^n, m minimal with delta_bound(m) < 1/3, r = 2m + ceil(log2 m),
// d = 2 N r, q = 1/3. Exact integer arithmetic for N, r, d; the PPT
// inequality is checked in the log domain.
inline PickedParameters pick_parameters(Index n) {
  if (n < 1) throw PreconditionError("pick_parameters: n must be >= 1");
  if (n > 24)
    throw PreconditionError(
        "pick_parameters: N = 2n4^n overflows 64-bit integers beyond n = 24");
  ChannelParams cp;
  cp.n = n;
  cp.kappa = 0.25;
  cp.p = converse_threshold(n, cp.kappa);
  cp.q = 1.0 / 3.0;
  std::int64_t four_n = 1;
  for (Index i = 0; i < n; ++i) four_n *= 4;
  cp.n_shares = 2 * n * four_n;

  Index m = 6;
  while (tau_bound(m) > 0.5 || delta_bound_unchecked(m) >= 1.0 / 3.0) ++m;
  cp.m = m;
  cp.r = 2 * m + ceil_log2(m);
  cp.d = 2 * cp.n_shares * cp.r;

  ParameterChecks chk;
  chk.p_star = converse_threshold(n, cp.kappa);
  chk.threshold_equality = (cp.p == chk.p_star);
  chk.ppt_lhs = std::log((1.0 - cp.q) / cp.q);
  chk.ppt_rhs = double(cp.r) * double(cp.n_shares) *
                std::log1p(1.0 / double(cp.d - 1));
  chk.ppt_ok = chk.ppt_lhs >= chk.ppt_rhs;
  chk.delta_bound_value = delta_bound(cp.m);
  const double pn = std::pow(cp.p, double(cp.n_shares));
  chk.delta_requirement_rhs = 1.0 - pn - cp.kappa / (1.0 - cp.kappa);
  auto ach = achievability_lower_bound(cp.kappa, cp.p, cp.n_shares,
                                       chk.delta_bound_value);
  chk.delta_ok = ach.requirement_met;
  chk.lower_bound = ach.value;
  if (!chk.ppt_ok || !chk.delta_ok || !(chk.lower_bound > 0.0))
    throw Error("pick_parameters: feasibility certification failed");
  return {cp, chk};
}

// ---- the channel M ----------------------------------------------------------

// Gamma: the PPT entanglement-binding channel whose Choi state is zeta.
inline QuantumChannel gamma_channel(const DensityMatrix& zeta,
                                    const ZetaParams& zp) {
  return channel_from_choi_state(zeta, zeta_alice_factors(zp),
                                 zeta_bob_factors(zp));
}

// M = P_0 (x) (E_kappa o Gamma) + P_1 (x) E_p, switch retained in the output.
inline QuantumChannel build_M(const ChannelParams& cp,
                              Index dim_cap = kDefaultDimCap,
                              std::optional<DensityMatrix> zeta_override = {}) {
  ZetaParams zp = cp.zeta(dim_cap);
  // Choi side is 32 d^(2 r m N); report its magnitude when refusing, since
  // the interesting parameter tuples are astronomically past any cap.
  const double log10_side =
      std::log10(32.0) + 2.0 * double(zp.r) * double(zp.m) *
                             double(zp.n_shares) * std::log10(double(zp.d));
  if (log10_side > std::log10(double(dim_cap)) * 2 + 16) {
    std::ostringstream msg;
    msg << "build_M: required Choi dimension ~10^" << std::llround(log10_side)
        << " per side exceeds the configured cap " << dim_cap;
    throw DimensionCapError(msg.str());
  }
  DensityMatrix zeta = zeta_override ? *zeta_override : zeta_state(zp);
  QuantumChannel gamma = gamma_channel(zeta, zp);
  check_dim_cap(2 * gamma.in_dim() * 2 * 2 * gamma.out_dim(), dim_cap,
                "build_M");
  QuantumChannel noisy = compose(
      erasure_channel(cp.kappa, gamma.out_layout(), gamma.out_layout()),
      gamma);
  QuantumChannel erase_branch =
      erasure_channel(cp.p, gamma.in_layout(), gamma.out_layout());
  return switched_channel({noisy, erase_branch}, "S");
}

// max over joint inputs of I_coh(M^(x)n); in the converse regime with a
// PPT-certified zeta this is zero up to optimizer resolution.
inline CoherentInfoResult numeric_converse_check(
    const ChannelParams& cp, const MaximizeOptions& opts = {}) {
  QuantumChannel m1 = build_M(cp, opts.dim_cap);
  QuantumChannel total = m1.with_label_suffix("#1");
  for (Index u = 2; u <= cp.n; ++u) {
    check_dim_cap(total.in_dim() * m1.in_dim() * total.out_dim() * m1.out_dim(),
                  opts.dim_cap, "numeric_converse_check");
    total = tensor_channels(total,
                            m1.with_label_suffix("#" + std::to_string(u)));
  }
  return maximize_coherent_information(total, opts);
}

// ---- achievability ----------------------------------------------------------

// Layout of eta: (a, b, then per (j,k) the pair A'1.j.k, B1.j.k, then G, F0).
inline SystemLayout eta_layout(const ChannelParams& cp) {
  std::vector<Factor> fs = {{"a", 2}, {"b", 2}};
  for (Index j = 1; j <= cp.r; ++j)
    for (Index k = 1; k <= cp.m; ++k) {
      std::string sfx = "1." + std::to_string(j) + "." + std::to_string(k);
      fs.push_back({"A'" + sfx, cp.d});
      fs.push_back({"B" + sfx, cp.d});
    }
  fs.push_back({"G", 2});
  fs.push_back({"F0", 2});
  return SystemLayout(std::move(fs));
}

struct EtaResult {
  DensityMatrix eta;
  DensityMatrix branch_erased;     // weight kappa
  DensityMatrix branch_all_lost;   // weight (1-kappa) p^N
  DensityMatrix branch_delivered;  // weight (1-kappa)(1-p^N)
  double w_erased = 0.0, w_all_lost = 0.0, w_delivered = 0.0;
};

// Bob's post-processed state, built directly from its three-branch form.
inline EtaResult eta_state(const ChannelParams& cp,
                           Index dim_cap = kDefaultDimCap,
                           std::optional<DensityMatrix> zeta_override = {}) {
  ZetaParams zp = cp.zeta(dim_cap);
  DensityMatrix zeta = zeta_override ? *zeta_override : zeta_state(zp);
  DensityMatrix rho1 = reduced_first_share(zeta, zp);

  SystemLayout target = eta_layout(cp);
  std::vector<std::string> order;
  for (const auto& f : target.factors()) order.push_back(f.label);

  const double pn = std::pow(cp.p, double(cp.n_shares));
  auto ket_g = [&](int v) {
    return basis_state(SystemLayout::single("G", 2), v);
  };
  auto ket_f0 = [&](int v) {
    return basis_state(SystemLayout::single("F0", 2), v);
  };

  // rho1 carries zeta's share-1 labels A1.j.k / B1.j.k; rename A -> A'.
  std::vector<std::string> rho1_labels;
  for (const auto& f : rho1.layout().factors()) {
    std::string l = f.label;
    if (l.rfind("A1.", 0) == 0) l = "A'" + l.substr(1);
    rho1_labels.push_back(l);
  }
  DensityMatrix rho1_renamed = DensityMatrix::assume_psd(
      rho1.op().relabeled(rho1_labels));

  // delivered branch: zeta^{a b A'_1 B_1}
  DensityMatrix delivered = DensityMatrix::assume_psd(permuted_to(
      tensor(tensor(rho1_renamed, ket_g(0)), ket_f0(0)).op(), order));

  // all-lost branch: zeta^{a b B_1} (x) mu^{A'_1}
  std::vector<Index> alice_share;
  for (std::size_t i = 0; i < rho1_renamed.layout().size(); ++i)
    if (rho1_renamed.layout().factor(i).label.rfind("A'", 0) == 0)
      alice_share.push_back(static_cast<Index>(i));
  DensityMatrix z_abB = partial_trace(rho1_renamed, alice_share);
  DensityMatrix mu_ap =
      maximally_mixed(rho1_renamed.layout().subset(alice_share));
  DensityMatrix all_lost = DensityMatrix::assume_psd(permuted_to(
      tensor(tensor(tensor(z_abB, mu_ap), ket_g(1)), ket_f0(0)).op(), order));

  // erased branch: every kept system maximally mixed, G records whether any
  // later use transmitted.
  CMatrix g_mix = CMatrix::Zero(2, 2);
  g_mix(0, 0) = 1.0 - pn;
  g_mix(1, 1) = pn;
  DensityMatrix g_state = DensityMatrix::assume_psd(
      Operator(SystemLayout::single("G", 2), g_mix));
  DensityMatrix mu_rest = maximally_mixed(SystemLayout(
      std::vector<Factor>(target.factors().begin(),
                          target.factors().end() - 2)));
  DensityMatrix erased = DensityMatrix::assume_psd(permuted_to(
      tensor(tensor(mu_rest, g_state), ket_f0(1)).op(), order));

  EtaResult res;
  res.w_erased = cp.kappa;
  res.w_all_lost = (1.0 - cp.kappa) * pn;
  res.w_delivered = (1.0 - cp.kappa) * (1.0 - pn);
  res.branch_erased = erased;
  res.branch_all_lost = all_lost;
  res.branch_delivered = delivered;
  CMatrix mix = res.w_erased * erased.matrix() +
                res.w_all_lost * all_lost.matrix() +
                res.w_delivered * delivered.matrix();
  res.eta = DensityMatrix::assume_psd(Operator(target, std::move(mix)));
  return res;
}

// The pure input nu for N+1 uses: switch 0 on use 0, switch 1 on uses 1..N,
// phi+ on (a, a#0) and on (A#0 share i, A#i share 1), |0> elsewhere.
// Factor labels match build_M(...).with_label_suffix("#u") so the channel can
// be applied use by use.
inline DensityMatrix achievability_input(const ChannelParams& cp,
                                         Index dim_cap = kDefaultDimCap) {
  const Index n_sh = cp.n_shares;
  const Index share_dim_exp = cp.r * cp.m;  // factors per share

  // overflow-safe refusal before any layout arithmetic
  const double log2_total =
      1.0 + double(n_sh + 1) *
                (2.0 + double(n_sh) * double(share_dim_exp) *
                           std::log2(double(cp.d)));
  if (log2_total > std::log2(double(dim_cap)))
    throw DimensionCapError("achievability_input: input dimension 2^" +
                            std::to_string(log2_total) +
                            " exceeds the configured cap " +
                            std::to_string(dim_cap));

  Index share_dim = 1;
  for (Index i = 0; i < share_dim_exp; ++i) share_dim *= cp.d;

  std::vector<Factor> fs = {{"a", 2}};
  for (Index u = 0; u <= n_sh; ++u) {
    const std::string sfx = "#" + std::to_string(u);
    fs.push_back({"S" + sfx, 2});
    fs.push_back({"a" + sfx, 2});
    for (Index i = 1; i <= n_sh; ++i)
      for (Index j = 1; j <= cp.r; ++j)
        for (Index k = 1; k <= cp.m; ++k)
          fs.push_back({"A" + std::to_string(i) + "." + std::to_string(j) +
                            "." + std::to_string(k) + sfx,
                        cp.d});
  }
  SystemLayout layout(fs);
  check_dim_cap(layout.total_dim(), dim_cap, "achievability_input");

  const auto dims = layout.dims();
  const auto strides = strides_of(dims);
  auto stride_of = [&](const std::string& label) {
    auto i = layout.index_of(label);
    return strides[*i];
  };

  // per-use block strides: share i of use u occupies share_dim_exp factors
  // with a common contiguous stride pattern, so a share value v in [share_dim]
  // contributes v * stride(last factor of the share block).
  auto share_stride = [&](Index use, Index share) {
    const std::string last = "A" + std::to_string(share) + "." +
                             std::to_string(cp.r) + "." + std::to_string(cp.m) +
                             "#" + std::to_string(use);
    return stride_of(last);
  };

  CVector ket = CVector::Zero(layout.total_dim());
  double amp = 1.0 / std::sqrt(2.0 * std::pow(double(share_dim), double(n_sh)));

  std::vector<Index> v(n_sh, 0);
  for (Index x = 0; x < 2; ++x) {
    // iterate over all share assignments v_1..v_N
    std::fill(v.begin(), v.end(), 0);
    for (;;) {
      Index idx = x * stride_of("a") + x * stride_of("a#0");
      for (Index u = 1; u <= n_sh; ++u) idx += stride_of("S#" + std::to_string(u));
      for (Index i = 1; i <= n_sh; ++i) {
        idx += v[i - 1] * share_stride(0, i);   // A#0 share i
        idx += v[i - 1] * share_stride(i, 1);   // A#i share 1
      }
      ket[idx] += amp;
      // odometer over v
      Index pos = 0;
      while (pos < n_sh) {
        if (++v[pos] < share_dim) break;
        v[pos] = 0;
        ++pos;
      }
      if (pos == n_sh) break;
    }
  }
  return pure_state(std::move(layout), ket);
}

namespace detail {

// Projects the listed factors onto computational-basis values and removes
// them from the layout; the result is unnormalized.
inline Operator project_basis_factors(
    const Operator& op, const std::vector<std::pair<Index, Index>>& assignments) {
  const auto dims = op.layout().dims();
  const auto strides = strides_of(dims);
  std::vector<Index> fixed_idx;
  Index offset = 0;
  for (auto [f, val] : assignments) {
    fixed_idx.push_back(f);
    offset += val * strides[f];
  }
  std::set<Index> fixed(fixed_idx.begin(), fixed_idx.end());
  std::vector<Index> kept;
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (!fixed.count(static_cast<Index>(i))) kept.push_back(static_cast<Index>(i));
  std::vector<Index> kept_dims;
  for (Index k : kept) kept_dims.push_back(dims[k]);
  const Index dk = product_of(kept_dims);
  std::vector<Index> kept_off(dk, 0);
  std::vector<Index> comps(kept_dims.size());
  for (Index f = 0; f < dk; ++f) {
    detail::unravel(f, kept_dims, comps);
    Index o = 0;
    for (std::size_t i = 0; i < kept.size(); ++i)
      o += comps[i] * strides[kept[i]];
    kept_off[f] = o;
  }
  CMatrix out(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c)
      out(r, c) = op.matrix()(kept_off[r] + offset, kept_off[c] + offset);
  return Operator(op.layout().without(fixed_idx), std::move(out));
}

}  // namespace detail

struct AchievabilityCheck {
  double value = 0.0;       // I(a > b A'_1 B_1 G F0) of eta
  double i_erased = 0.0;    // branch coherent informations
  double i_all_lost = 0.0;
  double i_delivered = 0.0;
  double branch_sum = 0.0;  // kappa*(-1) + (1-k)p^N*I2 + (1-k)(1-p^N)*I3
  std::optional<double> channel_trace_distance;  // against-channel path
};

struct AchievabilityOptions {
  bool against_channel = false;
  Index dim_cap = kDefaultDimCap;
  std::optional<DensityMatrix> zeta_override;
};

// Applies M^(x)(N+1) to nu use by use, performs Bob's post-processing (flag
// measurement, share selection, relabeling) and returns the state on eta's
// canonical layout.
inline DensityMatrix apply_channel_and_postprocess(const ChannelParams& cp,
                                                   const AchievabilityOptions& opts) {
  QuantumChannel m = build_M(cp, opts.dim_cap, opts.zeta_override);
  DensityMatrix state = achievability_input(cp, opts.dim_cap);
  const Index n_sh = cp.n_shares;
  for (Index u = 0; u <= n_sh; ++u) {
    check_dim_cap((state.dim() / m.in_dim()) * m.out_dim(), opts.dim_cap,
                  "apply_channel_and_postprocess");
    state = apply(m.with_label_suffix("#" + std::to_string(u)), state);
  }

  const auto& layout = state.layout();
  auto idx = [&](const std::string& l) {
    auto i = layout.index_of(l);
    if (!i) throw Error("apply_channel_and_postprocess: missing factor " + l);
    return static_cast<Index>(*i);
  };

  SystemLayout target = eta_layout(cp);
  std::vector<std::string> order;
  for (const auto& f : target.factors()) order.push_back(f.label);

  CMatrix acc = CMatrix::Zero(target.total_dim(), target.total_dim());
  // sum over erasure-flag patterns of uses 1..N
  for (Index pattern = 0; pattern < (Index(1) << n_sh); ++pattern) {
    std::vector<std::pair<Index, Index>> assignments;
    Index j = 0;  // first unerased use, else 1
    for (Index i = 1; i <= n_sh; ++i) {
      const Index f_i = (pattern >> (i - 1)) & 1;
      assignments.emplace_back(idx("F#" + std::to_string(i)), f_i);
      if (j == 0 && f_i == 0) j = i;
    }
    if (j == 0) j = 1;
    const Index g_val = (pattern >> (j - 1)) & 1;

    Operator projected = detail::project_basis_factors(state.op(), assignments);

    // keep a, b#0, B{j}.*#0 (-> B1.*), B1.*#j (-> A'1.*), F#0; trace the rest
    std::map<std::string, std::string> rename;
    rename["a"] = "a";
    rename["b#0"] = "b";
    rename["F#0"] = "F0";
    for (Index jj = 1; jj <= cp.r; ++jj)
      for (Index kk = 1; kk <= cp.m; ++kk) {
        const std::string sfx =
            std::to_string(jj) + "." + std::to_string(kk);
        rename["B" + std::to_string(j) + "." + sfx + "#0"] = "B1." + sfx;
        rename["B1." + sfx + "#" + std::to_string(j)] = "A'1." + sfx;
      }
    std::vector<Index> traced;
    std::vector<std::string> new_labels;
    for (std::size_t i = 0; i < projected.layout().size(); ++i) {
      const auto& l = projected.layout().factor(i).label;
      auto it = rename.find(l);
      if (it == rename.end())
        traced.push_back(static_cast<Index>(i));
      else
        new_labels.push_back(it->second);
    }
    Operator kept = partial_trace(projected, traced);
    std::vector<std::string> relabeled;
    for (std::size_t i = 0; i < kept.layout().size(); ++i) {
      auto it = rename.find(kept.layout().factor(i).label);
      relabeled.push_back(it->second);
    }
    Operator named = kept.relabeled(relabeled);

    // append G = |f_j>, reorder to the canonical eta layout
    CMatrix g = CMatrix::Zero(2, 2);
    g(g_val, g_val) = 1.0;
    Operator with_g = tensor(named, Operator(SystemLayout::single("G", 2), g));
    acc += permuted_to(with_g, order).matrix();
  }
  return DensityMatrix::assume_psd(Operator(std::move(target), std::move(acc)));
}

inline AchievabilityCheck numeric_achievability_check(
    const ChannelParams& cp, const AchievabilityOptions& opts = {}) {
  EtaResult eta = eta_state(cp, opts.dim_cap, opts.zeta_override);
  AchievabilityCheck res;
  res.value = coherent_information_of_state(eta.eta, {"a"});
  res.i_erased = coherent_information_of_state(eta.branch_erased, {"a"});
  res.i_all_lost = coherent_information_of_state(eta.branch_all_lost, {"a"});
  res.i_delivered = coherent_information_of_state(eta.branch_delivered, {"a"});
  res.branch_sum = eta.w_erased * (-1.0) + eta.w_all_lost * res.i_all_lost +
                   eta.w_delivered * res.i_delivered;
  if (opts.against_channel) {
    DensityMatrix processed = apply_channel_and_postprocess(cp, opts);
    res.channel_trace_distance = trace_distance(processed, eta.eta);
  }
  return res;
}

// ---- feasibility scan --------------------------------------------------------

enum class FeasibilityZone { kNeither, kConverseOnly, kAchievableOnly, kBoth };

inline const char* to_string(FeasibilityZone z) {
  switch (z) {
    case FeasibilityZone::kNeither: return "neither";
    case FeasibilityZone::kConverseOnly: return "converse-only";
    case FeasibilityZone::kAchievableOnly: return "achievable-only";
    case FeasibilityZone::kBoth: return "both";
  }
  return "?";
}

struct FeasibilityReport {
  double kappa = 0.0;
  double p = 0.0;
  bool converse = false;
  bool achievable = false;
  FeasibilityZone zone = FeasibilityZone::kNeither;
  Index n_shares = 0;       // smallest ladder N that works (or the cap)
  Index m = 0;              // smallest valid m for that N (or the floor)
  double delta_bound_value = 0.0;
  double lower_bound = 0.0;
};

// Classifies one (kappa, p) point: converse iff p >= p*(n, kappa); achievable
// iff kappa < 1/2, 0 < p < 1, and some N in the doubling ladder up to 2n4^n
// admits m <= 10000 with delta_bound(m) < 1 - p^N - kappa/(1-kappa).
inline FeasibilityReport classify_feasibility_point(Index n, double kappa,
                                                    double p) {
  FeasibilityReport rep;
  rep.kappa = kappa;
  rep.p = p;
  rep.converse = (p >= converse_threshold(n, kappa));

  constexpr Index kMinValidM = 30;    // smallest m with tau_bound(m) <= 1/2
  constexpr Index kMaxM = 10000;
  std::int64_t four_n = 1;
  for (Index i = 0; i < n; ++i) four_n *= 4;
  const Index n_cap = 2 * n * four_n;

  rep.n_shares = n_cap;
  rep.m = kMinValidM;
  rep.delta_bound_value = delta_bound(kMinValidM);
  rep.lower_bound =
      achievability_lower_bound(kappa, p, n_cap, rep.delta_bound_value).value;

  if (kappa < 0.5 && p > 0.0 && p < 1.0) {
    for (Index nn = 1; nn <= n_cap; nn *= 2) {
      const double rhs =
          1.0 - std::pow(p, double(nn)) - kappa / (1.0 - kappa);
      if (rhs <= 0.0) continue;
      // delta_bound decreases beyond the validity floor; find the smallest
      // valid m that fits
      Index lo = kMinValidM, hi = kMaxM;
      if (delta_bound(hi) >= rhs) continue;
      while (lo < hi) {
        Index mid = (lo + hi) / 2;
        if (delta_bound(std::max(mid, kMinValidM)) < rhs)
          hi = mid;
        else
          lo = mid + 1;
      }
      rep.achievable = true;
      rep.n_shares = nn;
      rep.m = std::max(lo, kMinValidM);
      rep.delta_bound_value = delta_bound(rep.m);
      rep.lower_bound =
          achievability_lower_bound(kappa, p, nn, rep.delta_bound_value).value;
      break;
    }
  }
  rep.zone = rep.converse
                 ? (rep.achievable ? FeasibilityZone::kBoth
                                   : FeasibilityZone::kConverseOnly)
                 : (rep.achievable ? FeasibilityZone::kAchievableOnly
                                   : FeasibilityZone::kNeither);
  return rep;
}

// Lattice over kappa in [0, 1/2] and p in [0, 1]. The kappa range covers the
// whole region where achievability is possible and puts the reference point
// (1/4, 4/5) on the 11x11 grid.
inline std::vector<FeasibilityReport> feasibility_scan(Index n, Index grid) {
  if (grid < 2) throw PreconditionError("feasibility_scan: grid must be >= 2");
  std::vector<FeasibilityReport> out;
  out.reserve(grid * grid);
  for (Index i = 0; i < grid; ++i)
    for (Index j = 0; j < grid; ++j) {
      const double kappa = double(i) / double(2 * (grid - 1));
      const double p = double(j) / double(grid - 1);
      out.push_back(classify_feasibility_point(n, kappa, p));
    }
  return out;
}

}  // namespace qcap
