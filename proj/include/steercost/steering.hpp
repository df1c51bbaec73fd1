#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "quantum.hpp"
#include "sdp.hpp"

namespace steercost {

/// Deterministic response function D(a|x, lambda) = [a == responses[x]].
struct DeterministicStrategy {
  std::vector<std::size_t> responses;

  double operator()(std::size_t a, std::size_t x) const { return responses[x] == a ? 1.0 : 0.0; }
};

inline constexpr std::size_t kMaxStrategies = 1000000;

/// All n_outcomes^n_settings strategies, lexicographic with setting 0 most significant.
inline std::vector<DeterministicStrategy> enumerate_strategies(std::size_t n_settings, std::size_t n_outcomes) {
  if (n_settings == 0 || n_outcomes == 0) throw Error(ErrorKind::InvalidArgument, "empty scenario");
  double count = std::pow(static_cast<double>(n_outcomes), static_cast<double>(n_settings));
  if (count > static_cast<double>(kMaxStrategies))
    throw Error(ErrorKind::TooManyStrategies, "more than 1e6 deterministic strategies");
  const auto total = static_cast<std::size_t>(std::llround(count));
  std::vector<DeterministicStrategy> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    DeterministicStrategy s{std::vector<std::size_t>(n_settings)};
    std::size_t r = idx;
    for (std::size_t x = n_settings; x-- > 0;) {
      s.responses[x] = r % n_outcomes;
      r /= n_outcomes;
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Linear steering functional {F_{a,x}}, indexed like an assemblage.
using SteeringFunctional = Assemblage;

/// sum_{a,x} tr(F_{a,x} sigma_{a|x})
inline double evaluate_functional(const SteeringFunctional& f, const Assemblage& asm_) {
  if (f.n_settings() != asm_.n_settings() || f.n_outcomes() != asm_.n_outcomes() || f.dim_b() != asm_.dim_b())
    throw Error(ErrorKind::DimensionMismatch, "functional and assemblage shapes differ");
  double s = 0.0;
  for (std::size_t x = 0; x < f.n_settings(); ++x)
    for (std::size_t a = 0; a < f.n_outcomes(); ++a) s += trace_product_re(f(a, x), asm_(a, x));
  return s;
}

/// max over lambda of the operator norm of sum_{a,x} F_{a,x} D(a|x,lambda).
/// The functional satisfies the LHS constraint iff this is <= 1.
inline double functional_lhs_norm(const SteeringFunctional& f) {
  double worst = 0.0;
  for (const auto& s : enumerate_strategies(f.n_settings(), f.n_outcomes())) {
    CMat sum = CMat::zeros(f.dim_b());
    for (std::size_t x = 0; x < f.n_settings(); ++x) sum += f(s.responses[x], x);
    const auto ev = eigenvalues(sum);
    worst = std::max({worst, std::abs(ev.front()), std::abs(ev.back())});
  }
  return worst;
}

/// F_{a,x} = Pi^T_{a|x} / (1 + (m-1)/sqrt(d)) for projective settings Pi.
/// The transpose puts the functional on Bob's side, where a maximally
/// entangled state steers Pi into Pi^T.
inline SteeringFunctional mub_functional(const MeasurementSet& meas) {
  const std::size_t m = meas.size(), d = meas.dim();
  SteeringFunctional f(m, meas.outcomes(), d);
  const double scale = 1.0 / (1.0 + (static_cast<double>(m) - 1.0) / std::sqrt(static_cast<double>(d)));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t a = 0; a < meas.outcomes(); ++a) f(a, x) = meas.settings[x].effects[a].transpose() * scale;
  return f;
}

/// F_{a,x} = (-1)^{a+1} A_x^T / sqrt(2m) for dichotomic observables.
inline SteeringFunctional clifford_functional(std::span<const CMat> observables) {
  const std::size_t m = observables.size(), d = observables.front().rows();
  SteeringFunctional f(m, 2, d);
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(m));
  for (std::size_t x = 0; x < m; ++x) {
    f(0, x) = observables[x].transpose() * (-scale);
    f(1, x) = observables[x].transpose() * scale;
  }
  return f;
}

struct RobustnessResult {
  double nu = 0.0;
  double t_lower_bound = 0.0;
  std::optional<SteeringFunctional> dual_certificate;
  std::vector<CMat> rho;        // primal blocks rho_lambda
  std::vector<CMat> rho_tilde;  // primal blocks rho~_lambda
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  long iterations = 0;
  sdp::Status status = sdp::Status::MaxIterations;
  double certificate_scale = 1.0;  // factor applied to make the certificate exactly feasible
};

/// Communication lower bound log2(nu + 1) in bits.
inline double comm_lower_bound(double nu) {
  if (nu < 0.0) {
    if (nu < -1e-8) throw Error(ErrorKind::NegativeNu, "robustness must be nonnegative");
    nu = 0.0;
  }
  return std::log2(nu + 1.0);
}

/// min sum_l tr(rho_l) + tr(rho~_l)
/// s.t. sigma_{a|x} + sum_l D(a|x,l) rho_l = sum_l D(a|x,l) rho~_l.
/// The optimum equals 1 + 2 nu.
inline sdp::SdpProblem robustness_primal_problem(const Assemblage& asm_) {
  const auto strategies = enumerate_strategies(asm_.n_settings(), asm_.n_outcomes());
  const std::size_t d = asm_.dim_b();
  sdp::SdpProblem p;
  std::vector<std::size_t> rho(strategies.size()), rhot(strategies.size());
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    rho[l] = p.add_block("rho_" + std::to_string(l), d);
    rhot[l] = p.add_block("rhot_" + std::to_string(l), d);
    p.objective[rho[l]] = CMat::identity(d);
    p.objective[rhot[l]] = CMat::identity(d);
  }
  for (std::size_t x = 0; x < asm_.n_settings(); ++x)
    for (std::size_t a = 0; a < asm_.n_outcomes(); ++a) {
      sdp::MatrixConstraint c{{}, hermitian_part(asm_(a, x))};
      for (std::size_t l = 0; l < strategies.size(); ++l) {
        if (strategies[l].responses[x] != a) continue;
        c.terms.emplace_back(rhot[l], 1.0);
        c.terms.emplace_back(rho[l], -1.0);
      }
      p.constraints.emplace_back(std::move(c));
    }
  p.sense = sdp::Sense::Minimize;
  return p;
}

/// max sum tr(F_{a,x} sigma_{a|x})  s.t.  -1 <= sum F_{a,x} D(a|x,l) <= 1 for all l,
/// written with slack blocks S+_l = 1 - sum F D and S-_l = 1 + sum F D.
inline sdp::SdpProblem robustness_dual_problem(const Assemblage& asm_) {
  const auto strategies = enumerate_strategies(asm_.n_settings(), asm_.n_outcomes());
  const std::size_t d = asm_.dim_b();
  sdp::SdpProblem p;
  std::vector<std::size_t> fidx(asm_.n_settings() * asm_.n_outcomes());
  for (std::size_t x = 0; x < asm_.n_settings(); ++x)
    for (std::size_t a = 0; a < asm_.n_outcomes(); ++a) {
      const std::size_t b = p.add_block("F_" + std::to_string(a) + "_" + std::to_string(x), d, sdp::BlockKind::Free);
      fidx[x * asm_.n_outcomes() + a] = b;
      p.objective[b] = hermitian_part(asm_(a, x));
    }
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    const std::size_t sp = p.add_block("Splus_" + std::to_string(l), d);
    const std::size_t sm = p.add_block("Sminus_" + std::to_string(l), d);
    sdp::MatrixConstraint upper{{{sp, 1.0}}, CMat::identity(d)};
    sdp::MatrixConstraint lower{{{sm, 1.0}}, CMat::identity(d)};
    for (std::size_t x = 0; x < asm_.n_settings(); ++x) {
      const std::size_t f = fidx[x * asm_.n_outcomes() + strategies[l].responses[x]];
      upper.terms.emplace_back(f, 1.0);
      lower.terms.emplace_back(f, -1.0);
    }
    p.constraints.emplace_back(std::move(upper));
    p.constraints.emplace_back(std::move(lower));
  }
  p.sense = sdp::Sense::Maximize;
  return p;
}

/// Feasibility SDP: rho_l >= 0 with sum_l D(a|x,l) rho_l = sigma_{a|x}.
inline sdp::SdpProblem lhs_membership_problem(const Assemblage& asm_) {
  const auto strategies = enumerate_strategies(asm_.n_settings(), asm_.n_outcomes());
  sdp::SdpProblem p;
  for (std::size_t l = 0; l < strategies.size(); ++l) p.add_block("rho_" + std::to_string(l), asm_.dim_b());
  for (std::size_t x = 0; x < asm_.n_settings(); ++x)
    for (std::size_t a = 0; a < asm_.n_outcomes(); ++a) {
      sdp::MatrixConstraint c{{}, hermitian_part(asm_(a, x))};
      for (std::size_t l = 0; l < strategies.size(); ++l)
        if (strategies[l].responses[x] == a) c.terms.emplace_back(l, 1.0);
      p.constraints.emplace_back(std::move(c));
    }
  return p;
}

inline RobustnessResult robustness_primal(const Assemblage& asm_, const sdp::SolverConfig& cfg = {}) {
  asm_.validate();
  const auto problem = robustness_primal_problem(asm_);
  const auto sol = sdp::solve(problem, cfg);
  RobustnessResult r;
  r.status = sol.status;
  r.nu = 0.5 * (sol.objective - 1.0);
  r.t_lower_bound = comm_lower_bound(std::max(r.nu, 0.0));
  r.primal_residual = sol.primal_residual;
  r.dual_residual = sol.dual_residual;
  r.iterations = sol.iterations;
  const std::size_t n = problem.blocks.size() / 2;
  for (std::size_t l = 0; l < n; ++l) {
    r.rho.push_back(sol.block_values.at("rho_" + std::to_string(l)));
    r.rho_tilde.push_back(sol.block_values.at("rhot_" + std::to_string(l)));
  }
  return r;
}

/// Dual robustness. The returned functional is rescaled, if needed, so that it
/// satisfies the LHS constraint exactly; nu is computed from that functional
/// and is therefore a certified lower bound.
inline RobustnessResult robustness_dual(const Assemblage& asm_, const sdp::SolverConfig& cfg = {}) {
  asm_.validate();
  const auto problem = robustness_dual_problem(asm_);
  const auto sol = sdp::solve(problem, cfg);
  SteeringFunctional f(asm_.n_settings(), asm_.n_outcomes(), asm_.dim_b());
  for (std::size_t x = 0; x < asm_.n_settings(); ++x)
    for (std::size_t a = 0; a < asm_.n_outcomes(); ++a)
      f(a, x) = sol.block_values.at("F_" + std::to_string(a) + "_" + std::to_string(x));
  const double norm = functional_lhs_norm(f);
  RobustnessResult r;
  if (norm > 1.0) {
    r.certificate_scale = 1.0 / norm;
    for (std::size_t x = 0; x < f.n_settings(); ++x)
      for (std::size_t a = 0; a < f.n_outcomes(); ++a) f(a, x) *= r.certificate_scale;
  }
  r.status = sol.status;
  r.nu = 0.5 * (evaluate_functional(f, asm_) - 1.0);
  r.t_lower_bound = comm_lower_bound(std::max(r.nu, 0.0));
  r.primal_residual = sol.primal_residual;
  r.dual_residual = sol.dual_residual;
  r.iterations = sol.iterations;
  r.dual_certificate = std::move(f);
  return r;
}

struct MembershipResult {
  bool is_lhs = false;
  double nu = 0.0;
  std::vector<CMat> witness;       // rho_lambda, populated when is_lhs
  double witness_residual = 0.0;   // max Frobenius error of sum D rho_lambda vs sigma
};

/// Largest Frobenius deviation between sum_l D(a|x,l) rho_l and sigma_{a|x}.
inline double lhs_model_residual(const Assemblage& asm_, std::span<const CMat> rho) {
  const auto strategies = enumerate_strategies(asm_.n_settings(), asm_.n_outcomes());
  if (rho.size() != strategies.size()) throw Error(ErrorKind::DimensionMismatch, "one state per strategy expected");
  double worst = 0.0;
  for (std::size_t x = 0; x < asm_.n_settings(); ++x)
    for (std::size_t a = 0; a < asm_.n_outcomes(); ++a) {
      CMat s = asm_(a, x);
      for (std::size_t l = 0; l < strategies.size(); ++l)
        if (strategies[l].responses[x] == a) s -= rho[l];
      worst = std::max(worst, s.norm_fro());
    }
  return worst;
}

/// LHS membership decided through the robustness value: LHS iff nu <= eps_feas.
inline MembershipResult lhs_membership(const Assemblage& asm_, const sdp::SolverConfig& cfg = {}) {
  const RobustnessResult rob = robustness_primal(asm_, cfg);
  MembershipResult out;
  out.nu = rob.nu;
  out.is_lhs = rob.nu <= cfg.eps_feas;
  if (!out.is_lhs) return out;
  const auto sol = sdp::solve(lhs_membership_problem(asm_), cfg);
  std::vector<CMat> rho;
  for (std::size_t l = 0; l < rob.rho.size(); ++l) rho.push_back(sol.block_values.at("rho_" + std::to_string(l)));
  double res = lhs_model_residual(asm_, rho);
  if (sol.status != sdp::Status::Optimal) {
    // Fall back to the normalised LHS part of the robustness decomposition.
    std::vector<CMat> alt;
    for (const auto& r : rob.rho_tilde) alt.push_back(r / (1.0 + rob.nu));
    const double alt_res = lhs_model_residual(asm_, alt);
    if (alt_res < res) {
      rho = std::move(alt);
      res = alt_res;
    }
  }
  out.witness = std::move(rho);
  out.witness_residual = res;
  return out;
}

// ---------------------------------------------------------------------------
// Finite communication-assisted protocols

/// LHS model augmented with a t-bit message that is a deterministic function
/// of (x, lambda).
struct Protocol {
  int t_bits = 0;
  std::size_t n_settings = 0;
  std::size_t n_outcomes = 0;
  std::vector<double> lambda_weights;
  std::vector<std::vector<std::size_t>> message;               // [lambda][x]
  std::vector<std::vector<std::vector<double>>> response;      // [lambda][x][a]
  std::vector<std::vector<DensityMatrix>> bob_states;          // [lambda][message]

  std::size_t n_messages() const { return std::size_t{1} << t_bits; }
  std::size_t dim_b() const { return bob_states.front().front().dim(); }

  void validate() const {
    const std::size_t L = lambda_weights.size();
    if (L == 0 || message.size() != L || response.size() != L || bob_states.size() != L)
      throw Error(ErrorKind::InvalidArgument, "protocol tables have inconsistent lambda counts");
    double wsum = 0.0;
    for (double w : lambda_weights) {
      if (w < 0.0) throw Error(ErrorKind::InvalidArgument, "negative lambda weight");
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-10) throw Error(ErrorKind::InvalidArgument, "lambda weights do not sum to 1");
    for (std::size_t l = 0; l < L; ++l) {
      if (bob_states[l].size() != n_messages())
        throw Error(ErrorKind::InvalidArgument, "bob needs one state per message");
      if (message[l].size() != n_settings || response[l].size() != n_settings)
        throw Error(ErrorKind::InvalidArgument, "protocol tables have inconsistent setting counts");
      for (std::size_t x = 0; x < n_settings; ++x) {
        if (message[l][x] >= n_messages()) throw Error(ErrorKind::InvalidArgument, "message index exceeds 2^t");
        double rs = 0.0;
        for (double p : response[l][x]) rs += p;
        if (response[l][x].size() != n_outcomes || std::abs(rs - 1.0) > 1e-10)
          throw Error(ErrorKind::InvalidArgument, "response row does not sum to 1");
      }
    }
  }

  /// sigma^sim_{a|x} = sum_l mu(l) p(a|x,l) rho_{m(x,l), l}
  Assemblage simulate() const {
    validate();
    Assemblage out(n_settings, n_outcomes, dim_b());
    for (std::size_t l = 0; l < lambda_weights.size(); ++l)
      for (std::size_t x = 0; x < n_settings; ++x)
        for (std::size_t a = 0; a < n_outcomes; ++a) {
          const double w = lambda_weights[l] * response[l][x][a];
          if (w != 0.0) out(a, x).axpy(w, bob_states[l][message[l][x]].mat());
        }
    return out;
  }
};

inline double assemblage_distance(const Assemblage& a, const Assemblage& b) {
  if (a.n_settings() != b.n_settings() || a.n_outcomes() != b.n_outcomes() || a.dim_b() != b.dim_b())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t x = 0; x < a.n_settings(); ++x)
    for (std::size_t o = 0; o < a.n_outcomes(); ++o) worst = std::max(worst, (a(o, x) - b(o, x)).max_abs());
  return worst;
}

inline int bits_for(std::size_t n) {
  int t = 0;
  while ((std::size_t{1} << t) < n) ++t;
  return t;
}

/// Zero-communication protocol realising an explicit LHS model
/// sigma_{a|x} = sum_l w_l D(a|x,l) rho_l.
inline Protocol lhs_protocol(std::span<const double> weights, std::span<const DeterministicStrategy> strategies,
                             std::span<const DensityMatrix> states, std::size_t n_outcomes) {
  Protocol p;
  p.t_bits = 0;
  p.n_settings = strategies.front().responses.size();
  p.n_outcomes = n_outcomes;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    p.lambda_weights.push_back(weights[l]);
    p.message.emplace_back(p.n_settings, 0);
    std::vector<std::vector<double>> resp(p.n_settings, std::vector<double>(n_outcomes, 0.0));
    for (std::size_t x = 0; x < p.n_settings; ++x) resp[x][strategies[l].responses[x]] = 1.0;
    p.response.push_back(std::move(resp));
    p.bob_states.push_back({states[l]});
  }
  return p;
}

/// Protocol sending m = (x, a): lambda draws Alice's outcome for every setting
/// independently from p(a|x), and Bob prepares the normalised conditional
/// state rho_{a|x}. Unused messages map to the maximally mixed state.
inline Protocol copy_protocol(const Assemblage& asm_) {
  asm_.validate();
  const std::size_t X = asm_.n_settings(), A = asm_.n_outcomes(), d = asm_.dim_b();
  Protocol p;
  p.n_settings = X;
  p.n_outcomes = A;
  p.t_bits = bits_for(X * A);
  std::vector<DensityMatrix> states(p.n_messages(), DensityMatrix::maximally_mixed(d));
  for (std::size_t x = 0; x < X; ++x)
    for (std::size_t a = 0; a < A; ++a) {
      const double pa = asm_.prob(a, x);
      if (pa > Tolerances::zero_probability) {
        CMat s = hermitian_part(asm_(a, x)) / pa;
        s *= 1.0 / s.trace().real();
        states[x * A + a] = DensityMatrix(std::move(s));
      }
    }
  for (const auto& s : enumerate_strategies(X, A)) {
    double w = 1.0;
    for (std::size_t x = 0; x < X; ++x) w *= std::max(asm_.prob(s.responses[x], x), 0.0);
    if (w <= 0.0) continue;
    p.lambda_weights.push_back(w);
    std::vector<std::size_t> msg(X);
    std::vector<std::vector<double>> resp(X, std::vector<double>(A, 0.0));
    for (std::size_t x = 0; x < X; ++x) {
      msg[x] = x * A + s.responses[x];
      resp[x][s.responses[x]] = 1.0;
    }
    p.message.push_back(std::move(msg));
    p.response.push_back(std::move(resp));
    p.bob_states.push_back(states);
  }
  double total = 0.0;
  for (double w : p.lambda_weights) total += w;
  for (double& w : p.lambda_weights) w /= total;
  return p;
}

/// Uniform p~(a|x).
inline std::vector<std::vector<double>> uniform_response(std::size_t n_settings, std::size_t n_outcomes) {
  return std::vector<std::vector<double>>(n_settings,
                                          std::vector<double>(n_outcomes, 1.0 / static_cast<double>(n_outcomes)));
}

/// Zero-communication assemblage obtained by guessing the message uniformly:
/// sigma*_{a|x} = 2^-t [ sum_l mu(l) p(a|x,l) rho_{m,l}
///                      + sum_l mu(l) sum_{m~ != m} p~(a|x) rho_{m~,l} ].
inline Assemblage sigma_star(const Assemblage& asm_, const Protocol& proto,
                             const std::vector<std::vector<double>>& ptilde) {
  proto.validate();
  if (assemblage_distance(proto.simulate(), asm_) > 1e-8)
    throw Error(ErrorKind::ProtocolMismatch, "protocol does not reproduce the assemblage");
  if (ptilde.size() != proto.n_settings) throw Error(ErrorKind::InvalidArgument, "p~ needs one row per setting");
  for (const auto& row : ptilde) {
    double s = 0.0;
    for (double v : row) s += v;
    if (row.size() != proto.n_outcomes || std::abs(s - 1.0) > 1e-10)
      throw Error(ErrorKind::InvalidArgument, "p~ rows must sum to 1");
  }
  const double inv = 1.0 / static_cast<double>(proto.n_messages());
  Assemblage out(proto.n_settings, proto.n_outcomes, proto.dim_b());
  for (std::size_t l = 0; l < proto.lambda_weights.size(); ++l) {
    const double mu = proto.lambda_weights[l];
    for (std::size_t x = 0; x < proto.n_settings; ++x) {
      const std::size_t m = proto.message[l][x];
      CMat others = CMat::zeros(proto.dim_b());
      for (std::size_t mt = 0; mt < proto.n_messages(); ++mt)
        if (mt != m) others += proto.bob_states[l][mt].mat();
      for (std::size_t a = 0; a < proto.n_outcomes; ++a) {
        out(a, x).axpy(inv * mu * proto.response[l][x][a], proto.bob_states[l][m].mat());
        out(a, x).axpy(inv * mu * ptilde[x][a], others);
      }
    }
  }
  return out;
}

/// sigma~ = (sigma* - 2^-t sigma) / (1 - 2^-t); requires t >= 1.
inline Assemblage tilde_component(const Assemblage& star, const Assemblage& target, int t_bits) {
  if (t_bits < 1) throw Error(ErrorKind::InvalidArgument, "tilde component needs t >= 1");
  const double w = std::ldexp(1.0, -t_bits);
  Assemblage out(star.n_settings(), star.n_outcomes(), star.dim_b());
  for (std::size_t x = 0; x < star.n_settings(); ++x)
    for (std::size_t a = 0; a < star.n_outcomes(); ++a) out(a, x) = (star(a, x) - w * target(a, x)) / (1.0 - w);
  return out;
}

}  // namespace steercost
