#include <cmath>

#include "doctest.h"
#include "qcap/construction.hpp"

using namespace qcap;

TEST_CASE("converse threshold") {
  CHECK(converse_threshold(1, 0.25) == 0.8);  // exact in double precision
  CHECK(converse_threshold(3, 0.0) == doctest::Approx(1.0));
  CHECK(converse_threshold(2, 0.5) ==
        doctest::Approx(0.8944271909999159).epsilon(1e-14));
  CHECK_THROWS_AS(converse_threshold(0, 0.5), PreconditionError);
  CHECK_THROWS_AS(converse_threshold(1, 1.5), PreconditionError);
}

TEST_CASE("converse upper bound") {
  // at the threshold the uniform bound vanishes
  for (Index n : {1, 2, 3}) {
    for (double kappa : {0.0, 0.1, 0.25, 0.7, 1.0}) {
      const double p = converse_threshold(n, kappa);
      auto b = converse_upper_bound(n, 0, kappa, p, 1.0);
      CHECK(std::abs(b.uniform) < 1e-12);
    }
  }

  auto b = converse_upper_bound(1, 0, 0.25, 0.8, 1.0);
  CHECK(std::abs(b.uniform) < 1e-12);           // 1 - 1.25 * 0.8
  CHECK(b.l_resolved == doctest::Approx(-0.6));  // 1 - 2p

  auto z = converse_upper_bound(2, 1, 0.3, 0.9, 0.0);
  CHECK(z.l_resolved == 0.0);
  CHECK(z.uniform == 0.0);

  // l-resolved <= uniform across a grid (the constructor asserts this too)
  for (double kappa : {0.0, 0.3, 1.0})
    for (double p : {0.0, 0.4, 0.8, 1.0})
      for (Index l = 0; l <= 3; ++l) {
        auto bb = converse_upper_bound(3, l, kappa, p, 1.7);
        CHECK(bb.l_resolved <= bb.uniform + 1e-12);
      }
}

TEST_CASE("alicki-fannes penalty and delta bound") {
  CHECK(alicki_fannes_delta(0.0) == 0.0);
  CHECK(alicki_fannes_delta(0.5) == doctest::Approx(4.0));
  CHECK(alicki_fannes_delta(tau_bound(68)) ==
        doctest::Approx(0.026973802441944251).epsilon(1e-10));
  CHECK_THROWS_AS(alicki_fannes_delta(1.0), PreconditionError);

  CHECK(delta_bound(68) == doctest::Approx(0.30802498082006937).epsilon(1e-12));
  CHECK(delta_bound(68) > 0.3080);
  CHECK(delta_bound(68) < 0.3081);
  CHECK(delta_bound(68) < 1.0 / 3.0);
  CHECK(delta_bound(67) == doctest::Approx(0.35825501051856270).epsilon(1e-12));
  CHECK(delta_bound(67) > 1.0 / 3.0);
  CHECK_THROWS_AS(delta_bound(20), PreconditionError);

  // the closed bound dominates the Alicki-Fannes chain it compresses
  for (Index m = 30; m <= 200; ++m)
    CHECK(delta_bound(m) >= alicki_fannes_delta(tau_bound(m)) - 1e-12);
}

TEST_CASE("achievability lower bound") {
  auto b0 = achievability_lower_bound(0.25, 0.8, 8, 0.0);
  CHECK(b0.value == doctest::Approx(0.37417088).epsilon(1e-12));
  CHECK(b0.requirement_met);

  auto b1 = achievability_lower_bound(0.25, 0.8, 8, 0.30807);
  CHECK(b1.value == doctest::Approx(0.14311838).epsilon(1e-10));
  CHECK(b1.requirement_met);

  for (double p : {0.1, 0.5, 0.9})
    for (double delta : {0.0, 0.2}) {
      auto b = achievability_lower_bound(0.5, p, 4, delta);
      CHECK(b.value <= 0.0);
    }
}

TEST_CASE("pick parameters") {
  auto pk = pick_parameters(1);
  CHECK(pk.params.kappa == 0.25);
  CHECK(pk.params.p == 0.8);
  CHECK(pk.params.n_shares == 8);
  CHECK(pk.params.m == 68);
  CHECK(pk.params.r == 143);
  CHECK(pk.params.d == 2288);
  CHECK(pk.params.q == doctest::Approx(1.0 / 3.0));
  CHECK(pk.checks.threshold_equality);
  CHECK(pk.checks.ppt_ok);
  CHECK(pk.checks.ppt_rhs == doctest::Approx(0.50010929758204073).epsilon(1e-9));
  CHECK(pk.checks.delta_ok);
  CHECK(pk.checks.lower_bound ==
        doctest::Approx(0.14315214438494797).epsilon(1e-10));

  auto pk2 = pick_parameters(2);
  CHECK(pk2.params.n_shares == 64);
  CHECK(pk2.params.p == doctest::Approx(0.97014250014533189).epsilon(1e-14));
  const double pn = std::pow(pk2.params.p, 64.0);
  CHECK(1.0 - pn == doctest::Approx(0.85629431112466820).epsilon(1e-10));
  CHECK(1.0 - pn >= 2.0 / 3.0);

  CHECK(pick_parameters(3).params.n_shares == 384);

  for (Index n = 1; n <= 6; ++n) {
    auto pkn = pick_parameters(n);
    CHECK(pkn.checks.threshold_equality);
    CHECK(pkn.checks.ppt_ok);
    CHECK(pkn.checks.delta_ok);
    CHECK(pkn.checks.lower_bound > 0.0);
  }
  CHECK_THROWS_AS(pick_parameters(0), PreconditionError);
}

TEST_CASE("build M at desk scale") {
  ChannelParams cp;  // q=1/3, d=2, r=m=N=1, kappa=1/4, p=0.8
  auto m = build_M(cp);
  CHECK(m.in_dim() == 8);
  CHECK(m.out_dim() == 16);
  m.validate();

  // kappa = 0, p = 1: branch 0 is Gamma with a constant transmit flag,
  // branch 1 is total erasure
  ChannelParams cp01 = cp;
  cp01.kappa = 0.0;
  cp01.p = 1.0;
  auto m01 = build_M(cp01);
  m01.validate();

  ZetaParams zp = cp01.zeta();
  auto zeta = zeta_state(zp);
  auto gamma = gamma_channel(zeta, zp);

  auto rng = Rng::seeded(40);
  auto rho = random_density_matrix(rng, gamma.in_layout());
  auto in0 = tensor(basis_state(SystemLayout::single("S", 2), 0), rho);
  auto out0 = apply(m01, in0);
  auto want0 = tensor(tensor(basis_state(SystemLayout::single("S", 2), 0),
                             basis_state(SystemLayout::single("F", 2), 0)),
                      apply(gamma, rho));
  CHECK(trace_distance(out0, want0) < 1e-10);

  auto in1 = tensor(basis_state(SystemLayout::single("S", 2), 1), rho);
  auto out1 = apply(m01, in1);
  auto want1 = tensor(tensor(basis_state(SystemLayout::single("S", 2), 1),
                             basis_state(SystemLayout::single("F", 2), 1)),
                      maximally_mixed(gamma.out_layout()));
  CHECK(trace_distance(out1, want1) < 1e-10);

  // the Gamma Choi state round-trips back to zeta
  auto cs = choi_state(gamma);  // (b, B..., a, A...)
  std::vector<std::string> zeta_order;
  for (const auto& f : zeta.layout().factors()) zeta_order.push_back(f.label);
  auto back = permuted_to(cs.op(), zeta_order);
  CHECK((back.matrix() - zeta.matrix()).cwiseAbs().maxCoeff() < 1e-10);

  // full-scale parameters must refuse loudly
  auto pk = pick_parameters(1);
  CHECK_THROWS_AS(build_M(pk.params), DimensionCapError);
  CHECK_THROWS_AS(achievability_input(pk.params), DimensionCapError);

  // two uses of the desk-scale channel already exceed the default Choi cap
  ChannelParams two = cp;
  two.n = 2;
  CHECK_THROWS_AS(numeric_converse_check(two), DimensionCapError);
}

TEST_CASE("numeric converse check at desk scale") {
  MaximizeOptions opts;
  opts.restarts = 3;
  opts.max_iters = 30;

  ChannelParams cp;  // kappa = 1/4, p = 0.8 sits exactly at the threshold
  CHECK(cp.in_converse_regime());
  CHECK(cp.ppt_certified_regime());
  auto res = numeric_converse_check(cp, opts);
  CHECK(res.value <= 1e-4);
  CHECK(res.value >= 0.0);

  ChannelParams strong = cp;
  strong.p = 1.0;
  CHECK(numeric_converse_check(strong, opts).value <= 1e-4);

  ChannelParams noiseless = cp;
  noiseless.kappa = 0.0;
  noiseless.p = 1.0;
  CHECK(numeric_converse_check(noiseless, opts).value <= 1e-4);

  // sensitivity: below the threshold the optimizer must find the positive
  // erasure-branch value (1-2p) log2(dim) = 0.8
  ChannelParams below = cp;
  below.p = 0.3;
  MaximizeOptions wide;
  wide.restarts = 3;
  wide.max_iters = 80;
  CHECK(numeric_converse_check(below, wide).value ==
        doctest::Approx(0.8).epsilon(1e-3));
}

TEST_CASE("eta state branches") {
  ChannelParams cp;
  cp.kappa = 0.0;
  cp.p = 0.0;
  auto eta = eta_state(cp);
  CHECK(eta.w_erased + eta.w_all_lost + eta.w_delivered ==
        doctest::Approx(1.0));
  // only the delivered branch survives: eta = zeta (x) |0><0|G (x) |0><0|F0
  CHECK(trace_distance(eta.eta, eta.branch_delivered) < 1e-14);

  ChannelParams cp1;
  cp1.kappa = 1.0;
  auto eta1 = eta_state(cp1);
  CHECK(coherent_information_of_state(eta1.eta, {"a"}) ==
        doctest::Approx(-1.0).epsilon(1e-9));

  // branchwise decomposition of the coherent information
  for (double kappa : {0.0, 0.25, 0.5}) {
    for (double p : {0.2, 0.8}) {
      ChannelParams c;
      c.kappa = kappa;
      c.p = p;
      auto chk = numeric_achievability_check(c);
      CHECK(std::abs(chk.value - chk.branch_sum) < 1e-9);
      CHECK(chk.i_erased == doctest::Approx(-1.0).epsilon(1e-9));
    }
  }

  // decomposition also holds with two shield shares
  ChannelParams c2;
  c2.n_shares = 2;
  c2.kappa = 0.25;
  c2.p = 0.8;
  auto chk2 = numeric_achievability_check(c2);
  CHECK(std::abs(chk2.value - chk2.branch_sum) < 1e-9);
}

TEST_CASE("achievability channel path reproduces eta") {
  for (double kappa : {0.0, 0.25, 0.5}) {
    for (double p : {0.2, 0.8}) {
      ChannelParams c;
      c.kappa = kappa;
      c.p = p;
      AchievabilityOptions opts;
      opts.against_channel = true;
      auto chk = numeric_achievability_check(c, opts);
      REQUIRE(chk.channel_trace_distance.has_value());
      CHECK(*chk.channel_trace_distance < 1e-8);
    }
  }
}

TEST_CASE("achievability with a perfect pbit in place of zeta") {
  ChannelParams c;
  c.kappa = 0.0;
  c.p = 0.2;
  ZetaParams zp = c.zeta();
  auto gamma = tensor(max_entangled_pair("a", "b", 2),
                      symmetric_state(2, "A1.1.1", "B1.1.1"));
  auto gamma_ordered = DensityMatrix::assume_psd(permuted_to(
      gamma.op(), {"a", "b", "A1.1.1", "B1.1.1"}));

  AchievabilityOptions opts;
  opts.against_channel = true;
  opts.zeta_override = gamma_ordered;
  auto chk = numeric_achievability_check(c, opts);
  CHECK(chk.i_delivered == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(chk.i_all_lost >= -1e-9);
  CHECK(chk.value >= (1.0 - c.p) * 1.0 - 1e-9);
  CHECK(chk.value == doctest::Approx((1 - c.p) + c.p * chk.i_all_lost)
                         .epsilon(1e-9));
  CHECK(*chk.channel_trace_distance < 1e-8);

  // kappa = 0, p = 0 with the ideal pbit: exactly one ebit
  ChannelParams c0;
  c0.kappa = 0.0;
  c0.p = 0.0;
  AchievabilityOptions opts0;
  opts0.zeta_override = gamma_ordered;
  CHECK(numeric_achievability_check(c0, opts0).value ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("nu input state") {
  ChannelParams cp;
  auto nu = achievability_input(cp);
  CHECK(nu.dim() == 128);
  CHECK(nu.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-12));

  // marginal on the reference a is maximally mixed
  std::vector<Index> others;
  for (std::size_t i = 1; i < nu.layout().size(); ++i)
    others.push_back(static_cast<Index>(i));
  auto marg = partial_trace(nu, others);
  CHECK((marg.matrix() - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff() <
        1e-12);

  // marginal on the entangled share pair (A1.1.1#0, A1.1.1#1) is phi+
  std::vector<Index> keep = {
      static_cast<Index>(*nu.layout().index_of("A1.1.1#0")),
      static_cast<Index>(*nu.layout().index_of("A1.1.1#1"))};
  std::vector<Index> rest;
  for (std::size_t i = 0; i < nu.layout().size(); ++i)
    if (static_cast<Index>(i) != keep[0] && static_cast<Index>(i) != keep[1])
      rest.push_back(static_cast<Index>(i));
  auto pair = partial_trace(nu, rest);
  auto phi = max_entangled(pair.layout(), 1);
  CHECK(trace_distance(pair, phi) < 1e-12);
}

TEST_CASE("feasibility classification and scan") {
  auto both = classify_feasibility_point(1, 0.25, 0.8);
  CHECK(both.converse);
  CHECK(both.achievable);
  CHECK(both.zone == FeasibilityZone::kBoth);

  CHECK_FALSE(classify_feasibility_point(1, 0.6, 0.3).achievable);
  CHECK_FALSE(classify_feasibility_point(1, 0.6, 0.99).achievable);
  CHECK_FALSE(classify_feasibility_point(1, 0.1, 0.5).converse);

  auto rows = feasibility_scan(1, 11);
  CHECK(rows.size() == 121);
  bool found = false;
  for (const auto& r : rows) {
    if (r.kappa == 0.25 && r.p == 0.8) {
      found = true;
      CHECK(r.zone == FeasibilityZone::kBoth);
    }
    if (r.kappa >= 0.5) CHECK_FALSE(r.achievable);
    if (r.p == 1.0) CHECK(r.converse);
  }
  CHECK(found);

  CHECK_THROWS_AS(feasibility_scan(1, 1), PreconditionError);
}
