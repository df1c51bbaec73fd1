#pragma once

#include <string>

#include "json.hpp"
#include "protocol.hpp"
#include "steering.hpp"

namespace steercost::io {

using json = nlohmann::json;

inline constexpr const char* kSchema = "v1";

inline json matrix_to_json(const CMat& m) {
  json arr = json::array();
  for (const auto& z : m.data()) arr.push_back({z.real(), z.imag()});
  return arr;
}

inline CMat matrix_from_json(const json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim * dim) throw Error(ErrorKind::Schema, "matrix must hold dim*dim entries");
  std::vector<cplx> data;
  data.reserve(dim * dim);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::Schema, "matrix entry must be [re, im]");
    data.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return CMat(dim, dim, std::move(data));
}

/// {schema, dimB, nSettings, nOutcomes, sigma}; sigma is setting-major, each
/// matrix a row-major list of [re, im] pairs.
inline json assemblage_to_json(const Assemblage& a) {
  json sigma = json::array();
  for (std::size_t x = 0; x < a.n_settings(); ++x)
    for (std::size_t o = 0; o < a.n_outcomes(); ++o) sigma.push_back(matrix_to_json(a(o, x)));
  return json{{"schema", kSchema},
              {"dimB", a.dim_b()},
              {"nSettings", a.n_settings()},
              {"nOutcomes", a.n_outcomes()},
              {"sigma", std::move(sigma)}};
}

inline Assemblage assemblage_from_json(const json& j, bool validate = true) {
  try {
    if (j.contains("schema") && j.at("schema") != kSchema) throw Error(ErrorKind::Schema, "unsupported schema");
    const auto d = j.at("dimB").get<std::size_t>();
    const auto nx = j.at("nSettings").get<std::size_t>();
    const auto na = j.at("nOutcomes").get<std::size_t>();
    const auto& sigma = j.at("sigma");
    if (!sigma.is_array() || sigma.size() != nx * na) throw Error(ErrorKind::Schema, "sigma must hold nSettings*nOutcomes matrices");
    Assemblage a(nx, na, d);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t o = 0; o < na; ++o) a(o, x) = matrix_from_json(sigma[x * na + o], d);
    if (validate) a.validate();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, e.what());
  }
}

/// {nu, tLowerBound, certificate?, residuals, solverStats}
inline json robustness_to_json(const RobustnessResult& r) {
  json j{{"schema", kSchema},
         {"nu", r.nu},
         {"tLowerBound", r.t_lower_bound},
         {"residuals", {{"primal", r.primal_residual}, {"dual", r.dual_residual}}},
         {"solverStats", {{"iterations", r.iterations}, {"status", std::string(sdp::to_string(r.status))}}}};
  if (r.dual_certificate) {
    j["certificate"] = assemblage_to_json(*r.dual_certificate);
    j["certificate"].erase("schema");
    j["certificateScale"] = r.certificate_scale;
  }
  return j;
}

inline json bound_to_json(const bounds::BoundReport& b) {
  json j{{"schema", kSchema},
         {"kind", std::string(bounds::to_string(b.kind))},
         {"params", b.params},
         {"t_bound", b.value},
         {"raw", b.raw},
         {"vacuous", b.vacuous}};
  json inter = json::object();
  for (const auto& [k, v] : b.intermediate) {
    if (std::isfinite(v)) inter[k] = v;
    else inter[k] = nullptr;
  }
  j["intermediate"] = std::move(inter);
  return j;
}

inline json report_to_json(const protocol::SimulationReport& r) {
  return json{{"schema", kSchema},
              {"tBits", r.t_bits},
              {"nDirections", r.n_directions},
              {"worstEps", r.worst_eps},
              {"meanEps", r.mean_eps},
              {"argWorst",
               {{"direction", {r.arg_worst_direction[0], r.arg_worst_direction[1], r.arg_worst_direction[2]}},
                {"outcome", r.arg_worst_outcome}}},
              {"seed", r.seed},
              {"boundEps", r.bound_eps},
              {"satisfied", r.satisfied},
              {"maxMarginalError", r.max_marginal_error}};
}

inline protocol::SimulationReport report_from_json(const json& j) {
  try {
    protocol::SimulationReport r;
    r.t_bits = j.at("tBits").get<int>();
    r.n_directions = j.at("nDirections").get<std::size_t>();
    r.worst_eps = j.at("worstEps").get<double>();
    r.mean_eps = j.at("meanEps").get<double>();
    const auto& dir = j.at("argWorst").at("direction");
    r.arg_worst_direction = {dir.at(0).get<double>(), dir.at(1).get<double>(), dir.at(2).get<double>()};
    r.arg_worst_outcome = j.at("argWorst").at("outcome").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.bound_eps = j.at("boundEps").get<double>();
    r.satisfied = j.at("satisfied").get<bool>();
    r.max_marginal_error = j.value("maxMarginalError", 0.0);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, e.what());
  }
}

/// CSV row for the simulation sweep file: t, worstEps, boundEps, satisfied, seed.
inline std::string report_csv_header() { return "t,worstEps,boundEps,satisfied,seed"; }

inline std::string report_csv_row(const protocol::SimulationReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s,%llu", r.t_bits, r.worst_eps, r.bound_eps,
                r.satisfied ? "true" : "false", static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace steercost::io
