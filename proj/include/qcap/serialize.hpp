// JSON serialization for channels, states and parameter sets, and the CSV
// writer for feasibility scans. Doubles survive a round trip bit-exactly
// (shortest round-trip decimal on write, strtod on read).

#pragma once

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qcap/construction.hpp"

namespace qcap {

using json = nlohmann::json;

inline json layout_to_json(const SystemLayout& layout) {
  json arr = json::array();
  for (const auto& f : layout.factors())
    arr.push_back({{"label", f.label}, {"dim", f.dim}});
  return arr;
}

inline SystemLayout layout_from_json(const json& arr) {
  std::vector<Factor> fs;
  for (const auto& e : arr)
    fs.push_back({e.at("label").get<std::string>(), e.at("dim").get<Index>()});
  return SystemLayout(std::move(fs));
}

inline json matrix_to_json(const CMatrix& m) {
  json entries = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"dim", m.rows()}, {"entries", std::move(entries)}};
}

inline CMatrix matrix_from_json(const json& j) {
  const Index dim = j.at("dim").get<Index>();
  const auto& entries = j.at("entries");
  if (static_cast<Index>(entries.size()) != dim * dim)
    throw PreconditionError("matrix_from_json: entry count mismatch");
  CMatrix m(dim, dim);
  Index i = 0;
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c, ++i)
      m(r, c) = {entries[i][0].get<double>(), entries[i][1].get<double>()};
  return m;
}

inline json channel_to_json(const QuantumChannel& ch) {
  return {{"version", 1},
          {"in_layout", layout_to_json(ch.in_layout())},
          {"out_layout", layout_to_json(ch.out_layout())},
          {"choi", matrix_to_json(ch.choi_matrix())}};
}

inline QuantumChannel channel_from_json(const json& j) {
  if (j.at("version").get<int>() != 1)
    throw PreconditionError("channel_from_json: unsupported version");
  return QuantumChannel(layout_from_json(j.at("in_layout")),
                        layout_from_json(j.at("out_layout")),
                        matrix_from_json(j.at("choi")));
}

inline json state_to_json(const DensityMatrix& rho) {
  return {{"version", 1},
          {"layout", layout_to_json(rho.layout())},
          {"matrix", matrix_to_json(rho.matrix())}};
}

inline DensityMatrix state_from_json(const json& j) {
  if (j.at("version").get<int>() != 1)
    throw PreconditionError("state_from_json: unsupported version");
  return DensityMatrix(layout_from_json(j.at("layout")),
                       matrix_from_json(j.at("matrix")));
}

inline json params_to_json(const PickedParameters& pk) {
  const auto& cp = pk.params;
  const auto& c = pk.checks;
  return {{"version", 1},
          {"n", cp.n},
          {"kappa", cp.kappa},
          {"p", cp.p},
          {"q", cp.q},
          {"N", cp.n_shares},
          {"m", cp.m},
          {"r", cp.r},
          {"d", cp.d},
          {"checks",
           {{"converse_threshold",
             {{"p_star", c.p_star}, {"equals_p", c.threshold_equality}}},
            {"ppt_log_inequality",
             {{"lhs", c.ppt_rhs},  // r N ln(d/(d-1)), must not exceed rhs
              {"rhs", c.ppt_lhs},  // ln((1-q)/q)
              {"satisfied", c.ppt_ok}}},
            {"delta_requirement",
             {{"delta_bound", c.delta_bound_value},
              {"rhs", c.delta_requirement_rhs},
              {"satisfied", c.delta_ok},
              {"achievability_lower_bound", c.lower_bound}}}}}};
}

inline ChannelParams channel_params_from_json(const json& j) {
  ChannelParams cp;
  cp.n = j.value("n", Index(1));
  cp.kappa = j.at("kappa").get<double>();
  cp.p = j.at("p").get<double>();
  cp.q = j.at("q").get<double>();
  cp.n_shares = j.at("N").get<Index>();
  cp.m = j.at("m").get<Index>();
  cp.r = j.at("r").get<Index>();
  cp.d = j.at("d").get<Index>();
  return cp;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  json j;
  in >> j;
  return j;
}

// 17 significant digits: round-trip exact for IEEE doubles.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string region_to_csv(const std::vector<FeasibilityReport>& rows) {
  std::ostringstream out;
  out << "kappa,p,converse,achievable,zone,delta_bound,lower_bound\n";
  for (const auto& r : rows) {
    out << format_double(r.kappa) << ',' << format_double(r.p) << ','
        << (r.converse ? "true" : "false") << ','
        << (r.achievable ? "true" : "false") << ',' << to_string(r.zone) << ','
        << format_double(r.delta_bound_value) << ','
        << format_double(r.lower_bound) << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
}

}  // namespace qcap
