// qcap: construct the switched erasure/entanglement-binding channel family,
// evaluate and maximize coherent information, certify PPT, compute the
// analytic bounds, and run the verification suites.
//
// Exit codes: 0 success, 1 usage, 2 numeric-precondition failure,
// 3 dimension cap exceeded.

#include <iostream>

#include "CLI11.hpp"
#include "qcap/serialize.hpp"
#include "qcap/verify.hpp"

namespace {

using namespace qcap;

struct CommonFlags {
  std::uint64_t seed = 0;
  Index dim_cap = kDefaultDimCap;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "random seed (default 0)");
  cmd->add_option("--dim-cap", flags.dim_cap,
                  "largest allowed Choi/state dimension per side")
      ->check(CLI::Range(Index(16), Index(1) << 40));
}

std::string fmt(double v) { return format_double(v); }

int cmd_params(Index n, const std::string& out_path) {
  auto pk = pick_parameters(n);
  json j = params_to_json(pk);
  std::cout << "n=" << n << ": kappa=" << fmt(pk.params.kappa)
            << " p=" << fmt(pk.params.p) << " q=" << fmt(pk.params.q)
            << " N=" << pk.params.n_shares << " m=" << pk.params.m
            << " r=" << pk.params.r << " d=" << pk.params.d << "\n";
  std::cout << "ppt log inequality: " << fmt(pk.checks.ppt_rhs)
            << " <= " << fmt(pk.checks.ppt_lhs)
            << (pk.checks.ppt_ok ? "  (satisfied)" : "  (VIOLATED)") << "\n";
  std::cout << "delta bound: " << fmt(pk.checks.delta_bound_value)
            << " < " << fmt(pk.checks.delta_requirement_rhs)
            << (pk.checks.delta_ok ? "  (satisfied)" : "  (VIOLATED)") << "\n";
  std::cout << "achievability lower bound: " << fmt(pk.checks.lower_bound)
            << "\n";
  if (!out_path.empty()) {
    write_json_file(out_path, j);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_build(const std::string& params_path, ChannelParams cp, bool have_flags,
              const std::string& out_path, const std::string& zeta_path,
              const CommonFlags& flags) {
  if (!params_path.empty()) {
    if (have_flags)
      throw CLI::ValidationError(
          "build", "--params conflicts with explicit parameter flags");
    cp = channel_params_from_json(read_json_file(params_path));
  }
  auto m = build_M(cp, flags.dim_cap);
  write_json_file(out_path, channel_to_json(m));
  std::cout << "wrote " << out_path << "  (in dim " << m.in_dim()
            << ", out dim " << m.out_dim() << ")\n";
  if (!zeta_path.empty()) {
    write_json_file(zeta_path, state_to_json(zeta_state(cp.zeta(flags.dim_cap))));
    std::cout << "wrote " << zeta_path << "\n";
  }
  return 0;
}

int cmd_coherent_info(const std::string& channel_path,
                      const std::string& input_path, bool optimize,
                      int restarts, int iters, double tol, int threads,
                      const std::string& report_path,
                      const CommonFlags& flags) {
  auto ch = channel_from_json(read_json_file(channel_path));
  json report;
  report["channel"] = channel_path;
  double value = 0.0;
  if (optimize) {
    MaximizeOptions mo;
    mo.restarts = restarts;
    mo.max_iters = iters;
    mo.tol = tol;
    mo.seed = flags.seed;
    mo.threads = threads;
    mo.dim_cap = flags.dim_cap;
    auto res = maximize_coherent_information(ch, mo);
    value = res.value;
    std::cout << "max coherent information: " << fmt(res.value) << "\n";
    std::cout << "restarts=" << res.restarts_used
              << " iterations=" << res.iterations
              << " gradient_norm=" << fmt(res.gradient_norm)
              << " raw_best=" << fmt(res.raw_best) << "\n";
    report["optimize"] = {{"restarts", res.restarts_used},
                          {"iterations", res.iterations},
                          {"gradient_norm", res.gradient_norm},
                          {"raw_best", res.raw_best}};
  } else {
    if (input_path.empty())
      throw CLI::ValidationError("coherent-info",
                                 "need --input FILE or --optimize");
    auto rho = state_from_json(read_json_file(input_path));
    value = coherent_information(ch, rho);
    std::cout << "coherent information: " << fmt(value) << "\n";
  }
  report["value"] = value;
  if (!report_path.empty()) write_json_file(report_path, report);
  return 0;
}

int cmd_ppt(const std::string& state_path, const std::string& channel_path,
            const std::string& transpose_labels, double tol) {
  DensityMatrix state =
      !state_path.empty()
          ? state_from_json(read_json_file(state_path))
          : choi_state(channel_from_json(read_json_file(channel_path)));

  std::vector<Index> transposed;
  std::stringstream ss(transpose_labels);
  std::string label;
  while (std::getline(ss, label, ',')) {
    auto i = state.layout().index_of(label);
    if (!i)
      throw PreconditionError("ppt: no factor labeled '" + label +
                              "' in " + state.layout().to_string());
    transposed.push_back(static_cast<Index>(*i));
  }
  if (transposed.empty())
    throw CLI::ValidationError("ppt", "--transpose needs at least one label");

  auto pt = partial_transpose(state.op(), transposed);
  const double min_eig = eig_hermitian(pt).eigenvalues.minCoeff();
  const bool pass = min_eig >= -tol;
  std::cout << "min partial-transpose eigenvalue: " << fmt(min_eig) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << " (tolerance " << fmt(tol) << ")\n";
  return pass ? 0 : 2;
}

int cmd_region(Index n, Index grid, const std::string& out_path) {
  auto rows = feasibility_scan(n, grid);
  write_text_file(out_path, region_to_csv(rows));
  std::size_t both = 0;
  for (const auto& r : rows)
    if (r.zone == FeasibilityZone::kBoth) ++both;
  std::cout << "wrote " << out_path << "  (" << rows.size() << " rows, "
            << both << " in zone both)\n";
  return 0;
}

int cmd_verify(const std::string& suite, int trials, bool inject_fault,
               const CommonFlags& flags) {
  VerifyOptions vo;
  vo.seed = flags.seed;
  vo.trials = trials;
  vo.dim_cap = flags.dim_cap;
  vo.inject_flagged_fault = inject_fault;
  auto results = run_verification(suite, vo, std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::cout << results.size() - failed << "/" << results.size()
            << " checks passed\n";
  return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coherent-information numerics for switched erasure / "
      "entanglement-binding channels"};
  app.require_subcommand(1);

  CommonFlags flags;

  // params
  auto* params = app.add_subcommand(
      "params", "compute the certified parameter tuple for a given n");
  Index params_n = 1;
  std::string params_out;
  params->add_option("--n", params_n, "number of uses with zero coherent information")
      ->required()
      ->check(CLI::PositiveNumber);
  params->add_option("--out", params_out, "write the parameter JSON here");

  // build
  auto* build = app.add_subcommand("build", "construct the switched channel");
  std::string build_params, build_out;
  ChannelParams build_cp;
  build->add_option("--params", build_params, "parameter JSON from `params`");
  auto* oq = build->add_option("--q", build_cp.q, "hiding-state weight");
  auto* od = build->add_option("--d", build_cp.d, "hiding-state local dimension");
  auto* orr = build->add_option("--r", build_cp.r, "hiding repetitions per key bit");
  auto* om = build->add_option("--m", build_cp.m, "key-bit repetitions");
  auto* on = build->add_option("--N", build_cp.n_shares, "shield shares");
  auto* ok = build->add_option("--kappa", build_cp.kappa, "branch-0 erasure probability");
  auto* op = build->add_option("--p", build_cp.p, "branch-1 erasure probability");
  build->add_option("--out", build_out, "channel JSON output path")->required();
  std::string build_zeta;
  build->add_option("--emit-zeta", build_zeta,
                    "also write the Choi state of the binding branch here");
  add_common(build, flags);

  // coherent-info
  auto* ci = app.add_subcommand("coherent-info",
                                "evaluate or maximize coherent information");
  std::string ci_channel, ci_input, ci_report;
  bool ci_optimize = false;
  int ci_restarts = 16, ci_iters = 500, ci_threads = 0;
  double ci_tol = 1e-6;
  ci->add_option("--channel", ci_channel, "channel JSON")->required();
  ci->add_option("--input", ci_input, "input state JSON");
  ci->add_flag("--optimize", ci_optimize, "maximize over inputs");
  ci->add_option("--restarts", ci_restarts, "optimizer restarts");
  ci->add_option("--iters", ci_iters, "optimizer iteration cap");
  ci->add_option("--tol", ci_tol, "gradient-norm stopping tolerance");
  ci->add_option("--threads", ci_threads, "restart workers (0 = auto)");
  ci->add_option("--report", ci_report, "write diagnostics JSON here");
  add_common(ci, flags);

  // ppt
  auto* ppt = app.add_subcommand("ppt", "partial-transpose positivity test");
  std::string ppt_state, ppt_channel, ppt_labels;
  double ppt_tol = 1e-10;
  ppt->add_option("--state", ppt_state, "state JSON");
  ppt->add_option("--channel", ppt_channel, "channel JSON (tests its Choi state)");
  ppt->add_option("--transpose", ppt_labels,
                  "comma-separated factor labels to transpose")
      ->required();
  ppt->add_option("--tol", ppt_tol, "negativity tolerance");

  // region
  auto* region = app.add_subcommand("region", "feasibility scan over (kappa, p)");
  Index region_n = 1, region_grid = 11;
  std::string region_out;
  region->add_option("--n", region_n, "uses with zero coherent information")
      ->check(CLI::PositiveNumber);
  region->add_option("--grid", region_grid, "lattice points per axis")
      ->check(CLI::Range(Index(2), Index(100000)));
  region->add_option("--out", region_out, "CSV output path")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "run invariant suites");
  std::string verify_suite = "all";
  int verify_trials = 100;
  bool verify_fault = false;
  verify->add_option("--suite", verify_suite, "suite to run")
      ->check(CLI::IsMember(
          {"linalg", "channels", "coherent", "pbit", "construction", "all"}));
  verify->add_option("--trials", verify_trials, "random instances per check")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--inject-fault", verify_fault,
                   "flip a sign in the flagged-decomposition check (suite "
                   "sensitivity test)");
  add_common(verify, flags);

  try {
    app.parse(argc, argv);
    if (params->parsed()) return cmd_params(params_n, params_out);
    if (build->parsed()) {
      const bool have_flags = *oq || *od || *orr || *om || *on || *ok || *op;
      return cmd_build(build_params, build_cp, have_flags, build_out,
                       build_zeta, flags);
    }
    if (ci->parsed())
      return cmd_coherent_info(ci_channel, ci_input, ci_optimize, ci_restarts,
                               ci_iters, ci_tol, ci_threads, ci_report, flags);
    if (ppt->parsed()) {
      if (ppt_state.empty() == ppt_channel.empty())
        throw CLI::ValidationError("ppt", "need exactly one of --state/--channel");
      return cmd_ppt(ppt_state, ppt_channel, ppt_labels, ppt_tol);
    }
    if (region->parsed()) return cmd_region(region_n, region_grid, region_out);
    if (verify->parsed())
      return cmd_verify(verify_suite, verify_trials, verify_fault, flags);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const DimensionCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
