#include <cstring>
#include <sstream>

#include "doctest.h"
#include "qcap/serialize.hpp"

using namespace qcap;

namespace {

bool bit_identical(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(),
                     sizeof(std::complex<double>) * a.size()) == 0;
}

}  // namespace

TEST_CASE("channel JSON round trip is bit exact") {
  auto rng = Rng::seeded(50);
  for (int t = 0; t < 5; ++t) {
    auto ch = random_channel(rng, SystemLayout({{"a", 2}, {"A", 3}}),
                             SystemLayout({{"F", 2}, {"b", 2}}));
    json j = channel_to_json(ch);
    // through text, as the CLI does
    json j2 = json::parse(j.dump());
    auto back = channel_from_json(j2);
    CHECK(bit_identical(back.choi_matrix(), ch.choi_matrix()));
    CHECK(back.in_layout() == ch.in_layout());
    CHECK(back.out_layout() == ch.out_layout());
  }
}

TEST_CASE("state JSON round trip is bit exact") {
  auto rng = Rng::seeded(51);
  for (int t = 0; t < 5; ++t) {
    auto rho = random_density_matrix(rng, SystemLayout({{"x", 2}, {"y", 4}}));
    json j2 = json::parse(state_to_json(rho).dump());
    auto back = state_from_json(j2);
    CHECK(bit_identical(back.matrix(), rho.matrix()));
    CHECK(back.layout() == rho.layout());
  }

  ZetaParams zp;
  auto z = zeta_state(zp);
  auto back = state_from_json(json::parse(state_to_json(z).dump()));
  CHECK(bit_identical(back.matrix(), z.matrix()));

  auto sigma = symmetric_state(2);
  auto gamma = perfect_pbit(trivial_pbit_spec(sigma.layout(), {0}, sigma));
  auto gback = state_from_json(json::parse(state_to_json(gamma).dump()));
  CHECK(bit_identical(gback.matrix(), gamma.matrix()));
}

TEST_CASE("malformed documents are rejected") {
  auto rng = Rng::seeded(52);
  auto rho = random_density_matrix(rng, "x", 2);
  json j = state_to_json(rho);
  j["version"] = 2;
  CHECK_THROWS_AS(state_from_json(j), PreconditionError);

  json j2 = state_to_json(rho);
  j2["matrix"]["entries"].erase(0);
  CHECK_THROWS_AS(state_from_json(j2), PreconditionError);

  // a non-PSD matrix is not a state
  json j3 = state_to_json(rho);
  j3["matrix"]["entries"][0][0] = 1.5;
  j3["matrix"]["entries"][3][0] = -0.5;
  j3["matrix"]["entries"][1][0] = 0.0;
  j3["matrix"]["entries"][1][1] = 0.0;
  j3["matrix"]["entries"][2][0] = 0.0;
  j3["matrix"]["entries"][2][1] = 0.0;
  CHECK_THROWS_AS(state_from_json(j3), PreconditionError);
}

TEST_CASE("params JSON carries exact integers and checks") {
  auto pk = pick_parameters(1);
  json j = json::parse(params_to_json(pk).dump());
  CHECK(j["N"] == 8);
  CHECK(j["m"] == 68);
  CHECK(j["r"] == 143);
  CHECK(j["d"] == 2288);
  CHECK(j["p"].get<double>() == 0.8);
  CHECK(j["checks"]["converse_threshold"]["equals_p"] == true);
  CHECK(j["checks"]["ppt_log_inequality"]["satisfied"] == true);
  CHECK(j["checks"]["delta_requirement"]["satisfied"] == true);

  auto cp = channel_params_from_json(j);
  CHECK(cp.n_shares == 8);
  CHECK(cp.m == 68);
  CHECK(cp.r == 143);
  CHECK(cp.d == 2288);
  CHECK(cp.p == pk.params.p);
  CHECK(cp.kappa == pk.params.kappa);
}

TEST_CASE("region CSV") {
  auto rows = feasibility_scan(1, 11);
  std::string csv = region_to_csv(rows);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "kappa,p,converse,achievable,zone,delta_bound,lower_bound");
  std::size_t count = 0;
  std::string line;
  bool saw_reference = false;
  const std::string ref_prefix =
      "0.25," + format_double(0.8) + ",true,true,both,";
  while (std::getline(in, line)) {
    ++count;
    if (line.rfind(ref_prefix, 0) == 0) saw_reference = true;
  }
  CHECK(count == 121);
  CHECK(saw_reference);
}

TEST_CASE("17-digit formatting round trips doubles") {
  for (double v : {1.0 / 3.0, std::sqrt(2.0), 0.1 + 0.2, 1e-300, -0.0,
                   0.30802498082006937}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
