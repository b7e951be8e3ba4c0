// Runnable verification suites: each module's invariants as named checks over
// seeded random instances. The CLI `verify` command runs these and reports one
// line per check.

#pragma once

#include <functional>
#include <iostream>
#include <sstream>

#include "qcap/construction.hpp"

namespace qcap {

struct VerifyOptions {
  std::uint64_t seed = 0;
  int trials = 100;
  Index dim_cap = kDefaultDimCap;
  // Test-only hook: flips a sign in the flagged-decomposition check so suite
  // sensitivity itself can be exercised.
  bool inject_flagged_fault = false;
};

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace verify_detail {

using CheckFn = std::function<CheckResult(const VerifyOptions&)>;

inline CheckResult make_result(const std::string& suite, const std::string& name,
                               bool pass, const std::string& detail = "") {
  return {suite, name, pass, detail};
}

template <typename Body>
CheckResult bounded_check(const std::string& suite, const std::string& name,
                          const VerifyOptions& opts, Body body) {
  try {
    double worst = 0.0;
    bool pass = body(worst);
    std::ostringstream d;
    d << "worst " << worst;
    return make_result(suite, name, pass, d.str());
  } catch (const std::exception& e) {
    return make_result(suite, name, false, std::string("exception: ") + e.what());
  }
}

// ---- linalg ------------------------------------------------------------------

inline CheckResult check_tensor_trace(const VerifyOptions& o) {
  return bounded_check("linalg", "tensor-trace-multiplicative", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(1);
    for (int t = 0; t < o.trials; ++t) {
      CMatrix a = ginibre(rng, 3, 3), b = ginibre(rng, 4, 4);
      auto ta = Operator(SystemLayout::single("a", 3), a);
      auto tb = Operator(SystemLayout::single("b", 4), b);
      const double err =
          std::abs(tensor(ta, tb).trace() - ta.trace() * tb.trace());
      w = std::max(w, err);
    }
    return w <= 1e-10;
  });
}

inline CheckResult check_ptrace_tensor(const VerifyOptions& o) {
  return bounded_check("linalg", "partial-trace-recovers-tensor-factor", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(2);
    for (int t = 0; t < o.trials; ++t) {
      CMatrix a = ginibre(rng, 3, 3);
      CMatrix b = ginibre(rng, 2, 2);
      auto ta = Operator(SystemLayout::single("a", 3), a);
      auto tb = Operator(SystemLayout::single("b", 2), b);
      auto rec = partial_trace(tensor(ta, tb), {1});
      const double err =
          (rec.matrix() - a * b.trace()).cwiseAbs().maxCoeff();
      w = std::max(w, err);
    }
    return w <= 1e-10;
  });
}

inline CheckResult check_pt_eigsum(const VerifyOptions& o) {
  return bounded_check("linalg", "partial-transpose-preserves-trace", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(3);
    for (int t = 0; t < o.trials; ++t) {
      auto rho = random_density_matrix(rng, SystemLayout({{"x", 2}, {"y", 3}}));
      auto pt = partial_transpose(rho.op(), {t % 2});
      const double err = std::abs(eig_hermitian(pt).eigenvalues.sum() -
                                  rho.matrix().trace().real());
      w = std::max(w, err);
    }
    return w <= 1e-10;
  });
}

inline CheckResult check_entropy_unitary(const VerifyOptions& o) {
  return bounded_check("linalg", "entropy-unitary-invariance", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(4);
    for (int t = 0; t < o.trials; ++t) {
      auto rho = random_density_matrix(rng, "x", 5);
      CMatrix u = haar_unitary(rng, 5);
      CMatrix conj = u * rho.matrix() * u.adjoint();
      const double err = std::abs(von_neumann_entropy<double>(conj) -
                                  von_neumann_entropy(rho));
      w = std::max(w, err);
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_tracenorm_trace(const VerifyOptions& o) {
  return bounded_check("linalg", "trace-norm-dominates-trace", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(5);
    for (int t = 0; t < o.trials; ++t) {
      CMatrix g = ginibre(rng, 4, 4);
      CMatrix h = g + g.adjoint();
      const double gap = trace_norm<double>(h) - std::abs(h.trace().real());
      w = std::min(w, gap);  // most negative violation
    }
    return w >= -1e-12;
  });
}

inline CheckResult check_binary_entropy_bound(const VerifyOptions& o) {
  return bounded_check("linalg", "binary-entropy-log-bound", o, [&](double& w) {
    for (int i = 1; i <= 1000; ++i) {
      const double x = 0.5 * i / 1000.0;
      const double gap = x * std::log2(1.0 / (x * x)) - binary_entropy(x);
      w = std::min(w, gap);
    }
    return w >= -1e-12;
  });
}

// ---- channels ------------------------------------------------------------------

inline CheckResult check_channels_valid(const VerifyOptions& o) {
  return bounded_check("channels", "constructed-channels-psd-and-tp", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(6);
    std::vector<QuantumChannel> chans;
    chans.push_back(identity_channel(3));
    for (double p : {0.0, 0.3, 1.0}) chans.push_back(erasure_channel(p, 2));
    chans.push_back(switched_channel(
        {erasure_channel(0.2, 2), erasure_channel(0.8, 2)}));
    chans.push_back(flagged_channel({{0.4, random_channel(rng, 2, 3)},
                                     {0.6, random_channel(rng, 2, 3)}}));
    chans.push_back(compose(random_channel(rng, 3, 2), random_channel(rng, 2, 3)));
    chans.push_back(tensor_channels(
        random_channel(rng, SystemLayout::single("A1", 2),
                       SystemLayout::single("B1", 2)),
        random_channel(rng, SystemLayout::single("A2", 2),
                       SystemLayout::single("B2", 2))));
    for (const auto& ch : chans) {
      w = std::min(w, ch.min_choi_eigenvalue());
      if (ch.min_choi_eigenvalue() < -1e-10) return false;
      if (ch.trace_preservation_defect() > 1e-9) return false;
    }
    return true;
  });
}

inline CheckResult check_apply_trace(const VerifyOptions& o) {
  return bounded_check("channels", "apply-preserves-trace", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(7);
    for (int t = 0; t < o.trials; ++t) {
      auto ch = random_channel(rng, 3, 2);
      auto rho = random_density_matrix(rng, "A", 3);
      const double err =
          std::abs(apply(ch, rho).matrix().trace().real() - 1.0);
      w = std::max(w, err);
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_flagged_marginal(const VerifyOptions& o) {
  return bounded_check("channels", "flag-marginal-is-mixture", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(8);
    for (int t = 0; t < o.trials; ++t) {
      const double p0 = rng.uniform();
      auto b0 = random_channel(rng, 2, 3);
      auto b1 = random_channel(rng, 2, 3);
      auto fl = flagged_channel({{p0, b0}, {1 - p0, b1}});
      auto rho = random_density_matrix(rng, "A", 2);
      auto marg = partial_trace(apply(fl, rho), {0});
      CMatrix want = p0 * apply(b0, rho).matrix() +
                     (1 - p0) * apply(b1, rho).matrix();
      w = std::max(w, (marg.matrix() - want).cwiseAbs().maxCoeff());
    }
    return w <= 1e-10;
  });
}

inline CheckResult check_ppt_certification(const VerifyOptions& o) {
  return bounded_check("channels", "ppt-certification-primitive", o,
                       [&](double& w) {
    ZetaParams zp;
    zp.dim_cap = o.dim_cap;
    auto zeta = zeta_state(zp);
    auto pt = partial_transpose(zeta.op(), zeta_bob_factors(zp));
    const double zeta_min = eig_hermitian(pt).eigenvalues.minCoeff();
    w = zeta_min;
    if (zeta_min < -1e-10) return false;
    // contrast: the identity channel's Choi state is NPT
    auto cs = choi_state(identity_channel(2));
    auto ptid = partial_transpose(cs.op(), {0});
    return eig_hermitian(ptid).eigenvalues.minCoeff() < -0.4;
  });
}

// ---- coherent ------------------------------------------------------------------

inline CheckResult check_identity_entropy(const VerifyOptions& o) {
  return bounded_check("coherent", "identity-channel-gives-entropy", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(9);
    auto id = identity_channel(3);
    for (int t = 0; t < o.trials; ++t) {
      auto rho = random_density_matrix(rng, "A", 3);
      const double err = std::abs(coherent_information(id, rho) -
                                  von_neumann_entropy(rho));
      w = std::max(w, err);
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_total_erasure(const VerifyOptions& o) {
  return bounded_check("coherent", "total-erasure-gives-minus-entropy", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(10);
    auto e1 = erasure_channel(1.0, 2);
    for (int t = 0; t < o.trials; ++t) {
      auto rho = random_density_matrix(rng, "A", 2);
      const double err = std::abs(coherent_information(e1, rho) +
                                  von_neumann_entropy(rho));
      w = std::max(w, err);
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_flagged_decomposition(const VerifyOptions& o) {
  return bounded_check("coherent", "flagged-decomposition", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(11);
    const double sign = o.inject_flagged_fault ? -1.0 : 1.0;
    for (int t = 0; t < o.trials; ++t) {
      const double p0 = rng.uniform();
      std::vector<std::pair<double, QuantumChannel>> branches = {
          {p0, random_channel(rng, 2, 2)}, {1 - p0, random_channel(rng, 2, 2)}};
      auto rho = random_density_matrix(rng, "A", 2);
      auto [lhs, rhs] = verify_flagged_identity(branches, rho);
      w = std::max(w, std::abs(lhs - sign * rhs));
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_flagged_state_decomposition(const VerifyOptions& o) {
  return bounded_check("coherent", "flagged-state-decomposition", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(12);
    for (int t = 0; t < o.trials; ++t) {
      // state sum_i p_i rho_i^{RB} (x) |i><i|^F
      const double p0 = rng.uniform();
      auto r0 = random_density_matrix(rng, SystemLayout({{"R", 2}, {"B", 2}}));
      auto r1 = random_density_matrix(rng, SystemLayout({{"R", 2}, {"B", 2}}));
      CMatrix f0 = CMatrix::Zero(2, 2), f1 = CMatrix::Zero(2, 2);
      f0(0, 0) = 1;
      f1(1, 1) = 1;
      CMatrix joint = p0 * kron(r0.matrix(), f0) + (1 - p0) * kron(r1.matrix(), f1);
      auto state = DensityMatrix::assume_psd(
          Operator(SystemLayout({{"R", 2}, {"B", 2}, {"F", 2}}), joint));
      const double lhs = coherent_information_of_state(state, {0}, {1, 2});
      const double rhs = p0 * coherent_information_of_state(r0, {0}, {1}) +
                         (1 - p0) * coherent_information_of_state(r1, {0}, {1});
      w = std::max(w, std::abs(lhs - rhs));
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_optimizer_floor(const VerifyOptions& o) {
  return bounded_check("coherent", "optimizer-floor-and-dominance", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(13);
    MaximizeOptions mo;
    mo.restarts = 6;
    mo.max_iters = 120;
    mo.seed = o.seed;
    mo.dim_cap = o.dim_cap;
    for (int c = 0; c < 3; ++c) {
      auto ch = random_channel(rng, 2, 2);
      auto best = maximize_coherent_information(ch, mo);
      if (best.value < 0.0) return false;
      for (int probe = 0; probe < 20; ++probe) {
        auto rho = random_density_matrix(rng, "A", 2);
        const double gap = best.value - coherent_information(ch, rho);
        w = std::min(w, gap);
      }
    }
    return w >= -1e-6;
  });
}

inline CheckResult check_data_processing(const VerifyOptions& o) {
  return bounded_check("coherent", "data-processing-inequality", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(14);
    for (int t = 0; t < o.trials; ++t) {
      auto first = random_channel(rng, 2, 2);
      auto second = random_channel(rng, 2, 2);
      auto rho = random_density_matrix(rng, "A", 2);
      auto [before, after] = verify_data_processing(first, second, rho);
      w = std::min(w, before - after);
    }
    return w >= -1e-9;
  });
}

inline CheckResult check_trace_distance_monotone(const VerifyOptions& o) {
  return bounded_check("coherent", "trace-distance-monotonicity", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(15);
    for (int t = 0; t < o.trials; ++t) {
      auto ch = random_channel(rng, 3, 2);
      auto rho = random_density_matrix(rng, "A", 3);
      auto sig = random_density_matrix(rng, "A", 3);
      const double before = trace_distance(rho, sig);
      const double after = trace_distance(apply(ch, rho), apply(ch, sig));
      w = std::min(w, before - after);
    }
    return w >= -1e-9;
  });
}

// ---- pbit --------------------------------------------------------------------

inline CheckResult check_zeta_ppt_family(const VerifyOptions& o) {
  return bounded_check("pbit", "zeta-ppt-under-condition", o, [&](double& w) {
    w = 1.0;
    for (auto [q, d, r, m, n] : std::vector<std::array<double, 5>>{
             {1.0 / 3.0, 2, 1, 1, 1},
             {1.0 / 3.0, 2, 1, 2, 1},
             {0.25, 2, 2, 1, 1},
             {0.3, 2, 1, 1, 2},
             {1.0 / 3.0, 3, 2, 1, 1},
             {0.2, 3, 1, 2, 1}}) {
      ZetaParams p;
      p.q = q;
      p.d = Index(d);
      p.r = Index(r);
      p.m = Index(m);
      p.n_shares = Index(n);
      p.dim_cap = o.dim_cap;
      if (!zeta_ppt_condition(p)) continue;
      auto z = zeta_state(p);
      auto pt = partial_transpose(z.op(), zeta_bob_factors(p));
      w = std::min(w, eig_hermitian(pt).eigenvalues.minCoeff());
    }
    return w >= -1e-10;
  });
}

inline CheckResult check_pbit_value(const VerifyOptions& o) {
  return bounded_check("pbit", "perfect-pbit-coherent-information-one", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(16);
    SystemLayout shield({{"A1", 2}, {"B1", 2}});
    for (int t = 0; t < o.trials; ++t) {
      auto spec = random_pbit_spec(rng, shield, {0});
      const double v =
          coherent_information_of_state(perfect_pbit(spec), {"a"});
      w = std::max(w, std::abs(v - 1.0));
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_pbit_shield_replaced(const VerifyOptions& o) {
  return bounded_check("pbit", "pbit-nonnegative-with-mixed-alice-shield", o,
                       [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(17);
    SystemLayout shield({{"A1", 2}, {"B1", 2}});
    for (int t = 0; t < o.trials; ++t) {
      auto spec = random_pbit_spec(rng, shield, {0});
      const double v = coherent_information_of_state(
          pbit_with_maximally_mixed_alice_shield(spec), {"a"});
      w = std::min(w, v);
    }
    return w >= -1e-9;
  });
}

inline CheckResult check_epsilon_consistency(const VerifyOptions& o) {
  return bounded_check("pbit", "epsilon-closed-form-matches-construction", o,
                       [&](double& w) {
    for (auto [q, r, m] : std::vector<std::array<double, 3>>{
             {1.0 / 3.0, 1, 1}, {1.0 / 3.0, 1, 2}, {0.25, 2, 1}, {0.2, 2, 2}}) {
      ZetaParams p;
      p.q = q;
      p.r = Index(r);
      p.m = Index(m);
      p.dim_cap = o.dim_cap;
      auto z = zeta_state(p);
      const double constructed = 0.5 - block_offdiagonal_norm(z);
      const double closed = epsilon_closed_form(q, Index(r), Index(m));
      w = std::max(w, std::abs(constructed - closed));
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_bernoulli_inequality(const VerifyOptions& o) {
  return bounded_check("pbit", "one-minus-x-power-bound", o, [&](double& w) {
    Rng rng = Rng::seeded(o.seed).substream(18);
    for (int t = 0; t < o.trials * 10; ++t) {
      const double x = rng.uniform();
      const int m = 1 + int(rng.integer() % 64);
      const double gap = std::pow(1.0 - x, m) - (1.0 - m * x);
      w = std::min(w, gap);
    }
    return w >= -1e-12;
  });
}

// ---- construction --------------------------------------------------------------

inline CheckResult check_threshold_zero(const VerifyOptions& o) {
  return bounded_check("construction", "uniform-bound-vanishes-at-threshold", o,
                       [&](double& w) {
    for (Index n = 1; n <= 4; ++n)
      for (int i = 0; i <= 10; ++i) {
        const double kappa = i / 10.0;
        const double p = converse_threshold(n, kappa);
        auto b = converse_upper_bound(n, 0, kappa, p, 1.0);
        w = std::max(w, std::abs(b.uniform));
      }
    return w <= 1e-12;
  });
}

inline CheckResult check_picked_parameters(const VerifyOptions& o) {
  return bounded_check("construction", "picked-parameters-certify", o,
                       [&](double& w) {
    for (Index n = 1; n <= 6; ++n) {
      auto pk = pick_parameters(n);
      if (!pk.checks.threshold_equality || !pk.checks.ppt_ok ||
          !pk.checks.delta_ok || !(pk.checks.lower_bound > 0.0))
        return false;
      w = std::max(w, pk.checks.ppt_rhs);
    }
    return true;
  });
}

inline CheckResult check_eta_decomposition(const VerifyOptions& o) {
  return bounded_check("construction", "eta-branchwise-decomposition", o,
                       [&](double& w) {
    for (double kappa : {0.0, 0.25, 0.5}) {
      for (double p : {0.2, 0.8}) {
        ChannelParams c;
        c.kappa = kappa;
        c.p = p;
        AchievabilityOptions ao;
        ao.dim_cap = o.dim_cap;
        auto chk = numeric_achievability_check(c, ao);
        w = std::max(w, std::abs(chk.value - chk.branch_sum));
      }
    }
    return w <= 1e-9;
  });
}

inline CheckResult check_postprocessing_wiring(const VerifyOptions& o) {
  return bounded_check("construction", "channel-path-reproduces-eta", o,
                       [&](double& w) {
    for (double kappa : {0.0, 0.25, 0.5}) {
      for (double p : {0.2, 0.8}) {
        ChannelParams c;
        c.kappa = kappa;
        c.p = p;
        AchievabilityOptions ao;
        ao.against_channel = true;
        ao.dim_cap = o.dim_cap;
        auto chk = numeric_achievability_check(c, ao);
        w = std::max(w, *chk.channel_trace_distance);
      }
    }
    return w <= 1e-8;
  });
}

inline CheckResult check_numeric_converse(const VerifyOptions& o) {
  return bounded_check("construction", "converse-instance-has-zero-coherent-info",
                       o, [&](double& w) {
    ChannelParams cp;  // kappa = 1/4, p = 0.8, desk-scale zeta
    MaximizeOptions mo;
    mo.restarts = 4;
    mo.max_iters = 40;
    mo.seed = o.seed;
    mo.dim_cap = o.dim_cap;
    auto res = numeric_converse_check(cp, mo);
    w = res.value;
    return res.value <= 1e-4;
  });
}

inline const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> reg = {
      {"linalg", check_tensor_trace},
      {"linalg", check_ptrace_tensor},
      {"linalg", check_pt_eigsum},
      {"linalg", check_entropy_unitary},
      {"linalg", check_tracenorm_trace},
      {"linalg", check_binary_entropy_bound},
      {"channels", check_channels_valid},
      {"channels", check_apply_trace},
      {"channels", check_flagged_marginal},
      {"channels", check_ppt_certification},
      {"coherent", check_identity_entropy},
      {"coherent", check_total_erasure},
      {"coherent", check_flagged_decomposition},
      {"coherent", check_flagged_state_decomposition},
      {"coherent", check_optimizer_floor},
      {"coherent", check_data_processing},
      {"coherent", check_trace_distance_monotone},
      {"pbit", check_zeta_ppt_family},
      {"pbit", check_pbit_value},
      {"pbit", check_pbit_shield_replaced},
      {"pbit", check_epsilon_consistency},
      {"pbit", check_bernoulli_inequality},
      {"construction", check_threshold_zero},
      {"construction", check_picked_parameters},
      {"construction", check_eta_decomposition},
      {"construction", check_postprocessing_wiring},
      {"construction", check_numeric_converse},
  };
  return reg;
}

}  // namespace verify_detail

// Runs the selected suite ("all" or a module name); returns the results and
// streams one line per check to `out`.
inline std::vector<CheckResult> run_verification(const std::string& suite,
                                                 const VerifyOptions& opts,
                                                 std::ostream& out) {
  std::vector<CheckResult> results;
  for (const auto& [s, fn] : verify_detail::registry()) {
    if (suite != "all" && suite != s) continue;
    CheckResult r = fn(opts);
    results.push_back(r);
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.suite << "/" << r.name;
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << "\n";
  }
  return results;
}

}  // namespace qcap
