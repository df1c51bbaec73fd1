#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "io.hpp"

namespace steercost::cli {

using json = nlohmann::json;

/// Options shared by every subcommand. Unset fields fall back to the config
/// file, then to the per-command defaults.
struct RunConfig {
  std::optional<std::string> state, meas, axes, net, out, format, csv, in, kind;
  std::optional<long> d, t, t_max, m, k, dirs, settings, jobs;
  std::optional<double> V, theta, eps;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_abs, eps_feas, penalty;
  std::optional<long> max_iter;

  /// Fields set in `over` replace those in *this.
  void merge_from(const RunConfig& over) {
    auto take = [](auto& dst, const auto& src) {
      if (src) dst = src;
    };
    take(state, over.state); take(meas, over.meas); take(axes, over.axes); take(net, over.net);
    take(out, over.out); take(format, over.format); take(csv, over.csv); take(in, over.in); take(kind, over.kind);
    take(d, over.d); take(t, over.t); take(t_max, over.t_max); take(m, over.m); take(k, over.k);
    take(dirs, over.dirs); take(settings, over.settings); take(jobs, over.jobs);
    take(V, over.V); take(theta, over.theta); take(eps, over.eps); take(seed, over.seed);
    take(eps_abs, over.eps_abs); take(eps_feas, over.eps_feas); take(penalty, over.penalty);
    take(max_iter, over.max_iter);
  }

  sdp::SolverConfig solver() const {
    sdp::SolverConfig c;
    if (eps_abs) c.eps_abs = *eps_abs;
    if (eps_feas) c.eps_feas = *eps_feas;
    if (penalty) c.penalty = *penalty;
    if (max_iter) c.max_iter = *max_iter;
    return c;
  }
};

/// Thrown for anything the user should fix on the command line (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat JSON config; unknown keys are rejected.
inline RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a flat JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "state") c.state = v.get<std::string>();
      else if (key == "meas") c.meas = v.get<std::string>();
      else if (key == "axes") c.axes = v.get<std::string>();
      else if (key == "net") c.net = v.get<std::string>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "csv") c.csv = v.get<std::string>();
      else if (key == "in") c.in = v.get<std::string>();
      else if (key == "kind") c.kind = v.get<std::string>();
      else if (key == "d") c.d = v.get<long>();
      else if (key == "t") c.t = v.get<long>();
      else if (key == "t_max") c.t_max = v.get<long>();
      else if (key == "m") c.m = v.get<long>();
      else if (key == "k") c.k = v.get<long>();
      else if (key == "dirs") c.dirs = v.get<long>();
      else if (key == "settings") c.settings = v.get<long>();
      else if (key == "jobs") c.jobs = v.get<long>();
      else if (key == "V") c.V = v.get<double>();
      else if (key == "theta") c.theta = v.get<double>();
      else if (key == "eps") c.eps = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "eps_abs") c.eps_abs = v.get<double>();
      else if (key == "eps_feas") c.eps_feas = v.get<double>();
      else if (key == "penalty") c.penalty = v.get<double>();
      else if (key == "max_iter") c.max_iter = v.get<long>();
      else throw UsageError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  try {
    return parse_config(json::parse(in));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
}

inline long default_jobs() {
  if (const char* env = std::getenv("STEERCOST_JOBS")) {
    try {
      const long j = std::stol(env);
      if (j >= 1) return j;
    } catch (...) {
    }
  }
  return 1;
}

/// Runs fn(i) for i in [0, n) on `jobs` workers. Results are written by index,
/// so the output order never depends on scheduling.
template <typename T>
std::vector<T> parallel_map(std::size_t n, long jobs, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace detail {

inline std::uint64_t require_seed(const RunConfig& c, const char* what) {
  if (!c.seed) throw UsageError(std::string(what) + " is randomized and requires --seed");
  return *c.seed;
}

inline double snap_theta(double theta) {
  // Inputs such as 0.7854 denote pi/4 rounded to four decimals.
  if (std::abs(theta - std::numbers::pi / 4) < 5e-5) return std::numbers::pi / 4;
  return theta;
}

inline DensityMatrix build_state(const RunConfig& c) {
  const std::string s = c.state.value_or("isotropic");
  const auto d = static_cast<std::size_t>(c.d.value_or(2));
  if (s == "isotropic") return isotropic_state(d, c.V.value_or(1.0));
  if (s == "pure-theta") return pure_theta_state(snap_theta(c.theta.value_or(std::numbers::pi / 4)));
  if (s == "antisymmetric") return antisymmetric_state(d);
  if (s == "product") {
    std::vector<cplx> zero(d);
    zero[0] = 1.0;
    return product_state(DensityMatrix::pure(zero), DensityMatrix::maximally_mixed(d));
  }
  if (s == "random") {
    std::mt19937_64 rng(require_seed(c, "--state random"));
    return random_density_matrix(d * d, rng);
  }
  throw UsageError("unknown --state '" + s + "' (isotropic|pure-theta|antisymmetric|product|random)");
}

inline MeasurementSet build_measurements(const RunConfig& c, std::size_t dim_a) {
  const std::string m = c.meas.value_or("mub");
  if (m == "mub") return mub_bases(dim_a);
  if (m == "clifford") {
    const long k = c.k.value_or(std::countr_zero(dim_a));
    if (std::size_t{1} << k != dim_a) throw UsageError("--meas clifford needs d = 2^k");
    const auto obs = clifford_observables(static_cast<int>(k));
    return dichotomic_povm_from_observables(obs);
  }
  if (m == "pauli") {
    if (dim_a != 2) throw UsageError("--meas pauli needs qubits");
    std::vector<Vec3> dirs;
    for (char ch : c.axes.value_or("zx")) {
      if (ch == 'x') dirs.push_back({1, 0, 0});
      else if (ch == 'y') dirs.push_back({0, 1, 0});
      else if (ch == 'z') dirs.push_back({0, 0, 1});
      else if (ch != ',') throw UsageError("--axes accepts x, y, z");
    }
    return bloch_projectors(dirs);
  }
  if (m == "random") {
    std::mt19937_64 rng(require_seed(c, "--meas random") ^ 0x9e3779b97f4a7c15ULL);
    MeasurementSet out;
    for (long x = 0; x < c.settings.value_or(3); ++x) out.settings.push_back(random_basis_measurement(dim_a, rng));
    return out;
  }
  throw UsageError("unknown --meas '" + m + "' (mub|clifford|pauli|random)");
}

inline Assemblage build_assemblage(const RunConfig& c) {
  if (c.in) {
    std::ifstream in(*c.in);
    if (!in) throw UsageError("cannot open assemblage file " + *c.in);
    try {
      return io::assemblage_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("assemblage file is not valid JSON: ") + e.what());
    }
  }
  const DensityMatrix state = build_state(c);
  const auto dim_a = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(state.dim()))));
  return compute_assemblage(state, build_measurements(c, dim_a));
}

inline json cmd_assemblage(const RunConfig& c) { return io::assemblage_to_json(build_assemblage(c)); }

/// Residual summary appended to stderr when a solve stops without converging.
inline void note_solver(std::string& diag, const char* what, const RobustnessResult& r) {
  if (r.status == sdp::Status::Optimal) return;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s solve: status=%s iterations=%ld primal_residual=%.3e dual_residual=%.3e\n", what,
                std::string(sdp::to_string(r.status)).c_str(), r.iterations, r.primal_residual, r.dual_residual);
  diag += buf;
}

inline json cmd_membership(const RunConfig& c, std::string& diag) {
  const Assemblage a = build_assemblage(c);
  note_solver(diag, "robustness", robustness_primal(a, c.solver()));
  if (!diag.empty()) return {};
  const auto res = lhs_membership(a, c.solver());
  json j{{"schema", io::kSchema}, {"isLHS", res.is_lhs}, {"nu", res.nu}};
  if (res.is_lhs) j["witnessResidual"] = res.witness_residual;
  return j;
}

inline json cmd_robustness(const RunConfig& c, std::string& diag) {
  const Assemblage a = build_assemblage(c);
  const auto primal = robustness_primal(a, c.solver());
  const auto dual = robustness_dual(a, c.solver());
  note_solver(diag, "primal", primal);
  note_solver(diag, "dual", dual);
  json j = io::robustness_to_json(dual);
  j["nu"] = primal.nu;
  j["tLowerBound"] = primal.t_lower_bound;
  j["nuPrimal"] = primal.nu;
  j["nuDual"] = dual.nu;
  j["dualityGap"] = std::abs(primal.nu - dual.nu);
  j["residuals"] = {{"primal", {{"primal", primal.primal_residual}, {"dual", primal.dual_residual}}},
                    {"dual", {{"primal", dual.primal_residual}, {"dual", dual.dual_residual}}}};
  j["solverStats"] = {
      {"primal", {{"iterations", primal.iterations}, {"status", std::string(sdp::to_string(primal.status))}}},
      {"dual", {{"iterations", dual.iterations}, {"status", std::string(sdp::to_string(dual.status))}}}};
  return j;
}

inline json cmd_sigma_star(const RunConfig& c, std::string& diag) {
  const Assemblage target = build_assemblage(c);
  const Protocol proto = copy_protocol(target);
  const Assemblage star = sigma_star(target, proto, uniform_response(target.n_settings(), target.n_outcomes()));
  const auto rob = robustness_primal(target, c.solver());
  note_solver(diag, "robustness", rob);
  const auto mem = lhs_membership(star, c.solver());
  json j{{"schema", io::kSchema},
         {"protocol", "copy"},
         {"tBits", proto.t_bits},
         {"nuTarget", rob.nu},
         {"tLowerBound", rob.t_lower_bound},
         {"boundHolds", proto.t_bits >= rob.t_lower_bound - 1e-6},
         {"nuStar", mem.nu},
         {"isLHS", mem.is_lhs},
         {"sigmaStar", io::assemblage_to_json(star)}};
  if (proto.t_bits >= 1) j["tildeSignallingDefect"] = tilde_component(star, target, proto.t_bits).signalling_defect();
  return j;
}

inline protocol::SphereNet build_net(const RunConfig& c, std::size_t n) {
  const std::string kind = c.net.value_or("fibonacci");
  if (kind == "fibonacci") return protocol::fibonacci_net(n);
  if (kind == "random") return protocol::random_net(n, require_seed(c, "--net random") ^ 0x5851f42d4c957f2dULL);
  throw UsageError("unknown --net '" + kind + "' (fibonacci|random)");
}

inline std::vector<protocol::SimulationReport> run_simulations(const RunConfig& c) {
  const std::uint64_t seed = require_seed(c, "simulate");
  const double theta = snap_theta(c.theta.value_or(std::numbers::pi / 4));
  const long t0 = c.t.value_or(4);
  const long t1 = c.t_max.value_or(t0);
  if (t0 < 1 || t1 < t0 || t1 > 20) throw UsageError("need 1 <= t <= t_max <= 20");
  const long ndirs = c.dirs.value_or(10000);
  if (ndirs < 1) throw UsageError("--dirs must be positive");
  const protocol::SphereNet probes = protocol::random_net(static_cast<std::size_t>(ndirs), seed);
  return parallel_map<protocol::SimulationReport>(
      static_cast<std::size_t>(t1 - t0 + 1), c.jobs.value_or(default_jobs()), [&](std::size_t i) {
        const long t = t0 + static_cast<long>(i);
        const auto proto = protocol::net_protocol(build_net(c, std::size_t{1} << t), theta);
        return protocol::evaluate_protocol(proto, probes);
      });
}

struct SweepRow {
  std::string kind;
  double d = NAN, m = NAN, V = NAN, eps = NAN;
  double bits = 0.0;
  bool vacuous = false;
};

inline std::vector<SweepRow> run_bounds_sweep(const RunConfig& c) {
  const std::string kind = c.kind.value_or("all");
  std::vector<std::function<SweepRow()>> tasks;
  const std::vector<double> vis{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  if (kind == "all" || kind == "mub") {
    for (int d : {2, 3, 5, 7, 11, 13, 101, 1009})
      for (double v : vis)
        tasks.emplace_back([d, v] {
          const auto b = bounds::mub_bound(d, v);
          return SweepRow{"mub", double(d), double(d + 1), v, NAN, b.value, b.vacuous};
        });
  }
  if (kind == "all" || kind == "clifford") {
    for (int m = 1; m <= 16; ++m)
      for (double v : vis)
        tasks.emplace_back([m, v] {
          const auto b = bounds::clifford_bound(m, v);
          return SweepRow{"clifford", std::ldexp(1.0, m), double(m), v, NAN, b.value, b.vacuous};
        });
  }
  if (kind == "all" || kind == "approx") {
    for (double e : {0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.001})
      tasks.emplace_back([e] {
        const auto b = bounds::approx_t_bound(e);
        return SweepRow{"approx", NAN, NAN, NAN, e, b.value, b.vacuous};
      });
  }
  if (tasks.empty()) throw UsageError("unknown --kind '" + kind + "' (all|mub|clifford|approx)");
  return parallel_map<SweepRow>(tasks.size(), c.jobs.value_or(default_jobs()),
                                [&](std::size_t i) { return tasks[i](); });
}

inline std::string format_num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "kind,d,m,V,eps,bound_bits,vacuous\n";
  for (const auto& r : rows)
    out += r.kind + "," + format_num(r.d) + "," + format_num(r.m) + "," + format_num(r.V) + "," + format_num(r.eps) +
           "," + format_num(r.bits) + "," + (r.vacuous ? "true" : "false") + "\n";
  return out;
}

inline bool is_usage_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::ThetaOutOfRange:
    case ErrorKind::VOutOfRange:
    case ErrorKind::EpsOutOfRange:
    case ErrorKind::NotPrime:
    case ErrorKind::KOutOfRange:
    case ErrorKind::NotUnitVector:
    case ErrorKind::NetSizeNotPowerOfTwo:
    case ErrorKind::TooManyStrategies:
    case ErrorKind::Schema:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

/// Help text of the innermost subcommand that was invoked.
inline std::string used_help(const CLI::App& app) {
  const CLI::App* cur = &app;
  for (bool descended = true; descended;) {
    descended = false;
    for (const CLI::App* sub : cur->get_subcommands())
      if (sub->parsed()) {
        cur = sub;
        descended = true;
        break;
      }
  }
  return cur->help();
}

/// Entry point of the `steercost` binary. Returns 0 on success, 1 on
/// computational failure and 2 on bad usage.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"steercost: classical communication cost of quantum steering"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat JSON config file; flags override it");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { flags.seed = v; }, "PRNG seed");
    sub->add_option_function<long>("--jobs", [&](const long& v) { flags.jobs = v; },
                                   "worker threads for sweeps (default: $STEERCOST_JOBS or 1)");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { flags.out = v; }, "output file");
    sub->add_option_function<std::string>("--format", [&](const std::string& v) { flags.format = v; }, "json|csv");
  };
  auto scenario = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--state", [&](const std::string& v) { flags.state = v; },
                                          "isotropic|pure-theta|antisymmetric|product|random");
    sub->add_option_function<std::string>("--meas", [&](const std::string& v) { flags.meas = v; },
                                          "mub|clifford|pauli|random");
    sub->add_option_function<std::string>("--axes", [&](const std::string& v) { flags.axes = v; },
                                          "Pauli axes for --meas pauli, e.g. zx");
    sub->add_option_function<std::string>("--in", [&](const std::string& v) { flags.in = v; },
                                          "read the assemblage from a JSON file");
    sub->add_option_function<long>("--d", [&](const long& v) { flags.d = v; }, "local dimension");
    sub->add_option_function<double>("--V", [&](const double& v) { flags.V = v; }, "visibility");
    sub->add_option_function<double>("--theta", [&](const double& v) { flags.theta = v; }, "pure-state angle");
    sub->add_option_function<long>("--k", [&](const long& v) { flags.k = v; }, "number of Clifford observables");
    sub->add_option_function<long>("--settings", [&](const long& v) { flags.settings = v; },
                                   "number of random settings");
    sub->add_option_function<double>("--eps-abs", [&](const double& v) { flags.eps_abs = v; }, "solver tolerance");
    sub->add_option_function<double>("--eps-feas", [&](const double& v) { flags.eps_feas = v; },
                                     "LHS decision threshold on nu");
    sub->add_option_function<long>("--max-iter", [&](const long& v) { flags.max_iter = v; }, "solver iteration cap");
    sub->add_option_function<double>("--penalty", [&](const double& v) { flags.penalty = v; }, "ADMM penalty");
  };

  auto* asm_cmd = app.add_subcommand("assemblage", "build and serialize an assemblage");
  auto* mem_cmd = app.add_subcommand("membership", "LHS membership test");
  auto* rob_cmd = app.add_subcommand("robustness", "LHS robustness (primal and dual) and the bit lower bound");
  auto* star_cmd = app.add_subcommand("sigma-star", "zero-communication assemblage from the copy protocol");
  for (auto* s : {asm_cmd, mem_cmd, rob_cmd, star_cmd}) {
    common(s);
    scenario(s);
  }

  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form communication bounds");
  bounds_cmd->require_subcommand(1);
  auto* b_approx = bounds_cmd->add_subcommand("approx", "bits needed for trace-distance error eps");
  auto* b_mub = bounds_cmd->add_subcommand("mub", "MUB bound for the isotropic state");
  auto* b_cliff = bounds_cmd->add_subcommand("clifford", "Clifford-observable bound for the isotropic state");
  auto* b_sweep = bounds_cmd->add_subcommand("sweep", "CSV grid over all bounds");
  auto* b_mineps = bounds_cmd->add_subcommand("min-eps", "smallest error reachable with t bits");
  for (auto* s : {b_approx, b_mub, b_cliff, b_sweep, b_mineps}) common(s);
  b_approx->add_option_function<double>("--eps", [&](const double& v) { flags.eps = v; }, "tolerated error")->required();
  b_mub->add_option_function<long>("--d", [&](const long& v) { flags.d = v; }, "dimension")->required();
  b_mub->add_option_function<double>("--V", [&](const double& v) { flags.V = v; }, "visibility");
  b_cliff->add_option_function<long>("--m", [&](const long& v) { flags.m = v; }, "observables")->required();
  b_cliff->add_option_function<double>("--V", [&](const double& v) { flags.V = v; }, "visibility");
  b_sweep->add_option_function<std::string>("--kind", [&](const std::string& v) { flags.kind = v; },
                                            "all|mub|clifford|approx");
  b_mineps->add_option_function<long>("--t", [&](const long& v) { flags.t = v; }, "bits")->required();

  auto* sim_cmd = app.add_subcommand("simulate", "evaluate net protocols against the pure-state assemblage");
  common(sim_cmd);
  sim_cmd->add_option_function<double>("--theta", [&](const double& v) { flags.theta = v; }, "pure-state angle");
  sim_cmd->add_option_function<long>("--t", [&](const long& v) { flags.t = v; }, "message bits");
  sim_cmd->add_option_function<long>("--t-max", [&](const long& v) { flags.t_max = v; }, "sweep t..t-max");
  sim_cmd->add_option_function<long>("--dirs", [&](const long& v) { flags.dirs = v; }, "probe directions");
  sim_cmd->add_option_function<std::string>("--net", [&](const std::string& v) { flags.net = v; },
                                            "fibonacci|random");
  sim_cmd->add_option_function<std::string>("--csv", [&](const std::string& v) { flags.csv = v; },
                                            "append rows to this CSV sweep file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    cfg.merge_from(flags);
    const std::string format = cfg.format.value_or("json");
    if (format != "json" && format != "csv") throw UsageError("--format must be json or csv");

    std::string text, diag;
    auto emit_json = [&](const json& j) { text = j.dump(2) + "\n"; };

    if (asm_cmd->parsed()) emit_json(detail::cmd_assemblage(cfg));
    else if (mem_cmd->parsed()) emit_json(detail::cmd_membership(cfg, diag));
    else if (rob_cmd->parsed()) emit_json(detail::cmd_robustness(cfg, diag));
    else if (star_cmd->parsed()) emit_json(detail::cmd_sigma_star(cfg, diag));
    else if (b_approx->parsed()) emit_json(io::bound_to_json(bounds::approx_t_bound(*cfg.eps)));
    else if (b_mub->parsed()) emit_json(io::bound_to_json(bounds::mub_bound(static_cast<int>(*cfg.d), cfg.V.value_or(1.0))));
    else if (b_cliff->parsed())
      emit_json(io::bound_to_json(bounds::clifford_bound(static_cast<int>(*cfg.m), cfg.V.value_or(1.0))));
    else if (b_mineps->parsed())
      emit_json({{"schema", io::kSchema}, {"t", *cfg.t}, {"eps_min", bounds::min_eps_for_t(static_cast<int>(*cfg.t))}});
    else if (b_sweep->parsed()) {
      const auto rows = detail::run_bounds_sweep(cfg);
      if (format == "csv") {
        text = detail::sweep_csv(rows);
      } else {
        json arr = json::array();
        for (const auto& r : rows) {
          json row{{"kind", r.kind}, {"bound_bits", r.bits}, {"vacuous", r.vacuous}};
          for (const auto& [name, v] : {std::pair{"d", r.d}, {"m", r.m}, {"V", r.V}, {"eps", r.eps}})
            row[name] = std::isnan(v) ? json(nullptr) : json(v);
          arr.push_back(std::move(row));
        }
        emit_json({{"schema", io::kSchema}, {"rows", std::move(arr)}});
      }
    } else if (sim_cmd->parsed()) {
      const auto reports = detail::run_simulations(cfg);
      if (cfg.csv) {
        const bool fresh = !std::ifstream(*cfg.csv).good();
        std::ofstream csv(*cfg.csv, std::ios::app);
        if (!csv) throw UsageError("cannot open CSV file " + *cfg.csv);
        if (fresh) csv << io::report_csv_header() << "\n";
        for (const auto& r : reports) csv << io::report_csv_row(r) << "\n";
      }
      if (format == "csv") {
        text = io::report_csv_header() + "\n";
        for (const auto& r : reports) text += io::report_csv_row(r) + "\n";
      } else if (reports.size() == 1) {
        emit_json(io::report_to_json(reports.front()));
      } else {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(io::report_to_json(r));
        emit_json({{"schema", io::kSchema}, {"reports", std::move(arr)}});
      }
    }

    if (!diag.empty()) {
      err << "error: solver did not converge\n" << diag;
      return 1;
    }
    if (cfg.out) {
      std::ofstream f(*cfg.out, std::ios::binary);
      if (!f) throw UsageError("cannot write " + *cfg.out);
      f << text;
    } else {
      out << text;
    }
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << used_help(app);
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (!detail::is_usage_kind(e.kind())) return 1;
    err << "\n" << used_help(app);
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace steercost::cli
