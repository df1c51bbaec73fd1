#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "bounds.hpp"
#include "quantum.hpp"

namespace steercost::protocol {

enum class NetGenerator { Fibonacci, Random, Custom };

struct SphereNet {
  std::vector<Vec3> points;
  NetGenerator generator = NetGenerator::Custom;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return points.size(); }
};

inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double dist3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Golden-angle spiral with z running from +1 to -1 (both poles included for n >= 2).
inline SphereNet fibonacci_net(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "fibonacci_net requires n >= 1");
  SphereNet net;
  net.generator = NetGenerator::Fibonacci;
  if (n == 1) {
    net.points.push_back({0.0, 0.0, 1.0});
    return net;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    net.points.push_back({r * std::cos(phi), r * std::sin(phi), z});
  }
  return net;
}

/// Seeded uniform directions; random_net(n, s) is a prefix of random_net(2n, s).
inline SphereNet random_net(std::size_t n, std::uint64_t seed) {
  SphereNet net;
  net.generator = NetGenerator::Random;
  net.seed = seed;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) net.points.push_back(random_direction(rng));
  return net;
}

/// Largest angle from any probe direction to its nearest net point.
inline double covering_angle(const SphereNet& net, const SphereNet& probes) {
  double worst = 0.0;
  for (const auto& p : probes.points) {
    double best = -1.0;
    for (const auto& q : net.points) best = std::max(best, dot3(p, q));
    worst = std::max(worst, std::acos(std::clamp(best, -1.0, 1.0)));
  }
  return worst;
}

struct SteeredBloch {
  double prob;
  Vec3 bloch;
};

/// Bob's conditional state when Alice projects cos(theta)|00> + sin(theta)|11>
/// onto the Bloch direction (-1)^a n:
/// b = (sin2t n_x, -sin2t n_y, cos2t + n_z) / (1 + n_z cos2t), p = (1 + n_z cos2t)/2.
inline SteeredBloch steered_bloch(double theta, const Vec3& n, int a) {
  const double sgn = a == 0 ? 1.0 : -1.0;
  const Vec3 m{sgn * n[0], sgn * n[1], sgn * n[2]};
  const double c2 = std::cos(2.0 * theta), s2 = std::sin(2.0 * theta);
  const double denom = 1.0 + m[2] * c2;
  SteeredBloch out{0.5 * denom, {0.0, 0.0, 0.0}};
  if (denom <= 0.0) return out;
  out.bloch = {s2 * m[0] / denom, -s2 * m[1] / denom, (c2 + m[2]) / denom};
  return out;
}

/// Qubit trace distance between states with Bloch vectors r and s.
inline double bloch_trace_distance(const Vec3& r, const Vec3& s) { return 0.5 * dist3(r, s); }

/// Finite-message cheating strategy for the continuum of projective
/// measurements on a two-qubit pure state. Alice reproduces p(a|x) exactly,
/// then sends the index of the dictionary state closest to the true
/// conditional state; Bob prepares that state.
struct NetProtocol {
  int t_bits = 0;
  double theta = std::numbers::pi / 4;
  std::vector<Vec3> dictionary;  // Bloch vectors of Bob's states, |gamma| <= 1

  double outcome_prob(const Vec3& xhat, int a) const { return steered_bloch(theta, xhat, a).prob; }

  std::size_t message(const Vec3& xhat, int a) const {
    const Vec3 target = steered_bloch(theta, xhat, a).bloch;
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < dictionary.size(); ++m) {
      const double d = dist3(target, dictionary[m]);
      if (d < bd) {
        bd = d;
        best = m;
      }
    }
    return best;
  }

  DensityMatrix bob_state(std::size_t m) const { return bloch_state(dictionary.at(m)); }
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Protocol whose dictionary is the pure states of the net points.
inline NetProtocol net_protocol(const SphereNet& net, double theta) {
  if (!is_power_of_two(net.size())) throw Error(ErrorKind::NetSizeNotPowerOfTwo, "net size must be 2^t");
  if (!(theta > 0.0 && theta <= std::numbers::pi / 4 + 1e-12))
    throw Error(ErrorKind::ThetaOutOfRange, "theta must lie in (0, pi/4]");
  NetProtocol p;
  p.theta = theta;
  p.t_bits = static_cast<int>(std::countr_zero(net.size()));
  p.dictionary = net.points;
  return p;
}

/// Protocol over an arbitrary dictionary (mixed states allowed); t = ceil(log2 size).
inline NetProtocol dictionary_protocol(std::vector<Vec3> dictionary, double theta) {
  if (dictionary.empty()) throw Error(ErrorKind::InvalidArgument, "empty dictionary");
  for (const auto& v : dictionary)
    if (norm3(v) > 1.0 + 1e-10) throw Error(ErrorKind::InvalidArgument, "Bloch vector longer than 1");
  NetProtocol p;
  p.theta = theta;
  int t = 0;
  while ((std::size_t{1} << t) < dictionary.size()) ++t;
  p.t_bits = t;
  p.dictionary = std::move(dictionary);
  return p;
}

/// Scales every net point to length gamma (mixed dictionary states).
inline std::vector<Vec3> shrink(const SphereNet& net, double gamma) {
  std::vector<Vec3> out;
  for (const auto& p : net.points) out.push_back({gamma * p[0], gamma * p[1], gamma * p[2]});
  return out;
}

struct SimulationReport {
  int t_bits = 0;
  std::size_t n_directions = 0;
  double worst_eps = 0.0;
  double mean_eps = 0.0;
  Vec3 arg_worst_direction{0.0, 0.0, 1.0};
  int arg_worst_outcome = 0;
  std::uint64_t seed = 0;
  double bound_eps = 0.0;
  bool satisfied = false;
  double max_marginal_error = 0.0;
};

inline constexpr double kSamplingTolerance = 0.1;

/// Worst and mean trace distance between the true and simulated conditional
/// states over the probe directions and both outcomes with p(a|x) > 1e-12.
inline SimulationReport evaluate_protocol(const NetProtocol& proto, const SphereNet& directions,
                                          double tol = kSamplingTolerance) {
  if (directions.points.empty()) throw Error(ErrorKind::InvalidArgument, "no probe directions");
  SimulationReport r;
  r.t_bits = proto.t_bits;
  r.n_directions = directions.size();
  r.seed = directions.seed;
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& n : directions.points) {
    for (int a = 0; a < 2; ++a) {
      const SteeredBloch target = steered_bloch(proto.theta, n, a);
      if (target.prob <= Tolerances::zero_probability) continue;
      r.max_marginal_error = std::max(r.max_marginal_error, std::abs(proto.outcome_prob(n, a) - target.prob));
      const double eps = bloch_trace_distance(target.bloch, proto.dictionary[proto.message(n, a)]);
      total += eps;
      ++count;
      if (eps > r.worst_eps) {
        r.worst_eps = eps;
        r.arg_worst_direction = n;
        r.arg_worst_outcome = a;
      }
    }
  }
  r.mean_eps = count ? total / static_cast<double>(count) : 0.0;
  r.bound_eps = proto.t_bits >= 1 ? bounds::min_eps_for_t(proto.t_bits) : 0.5;
  r.satisfied = r.worst_eps >= r.bound_eps * (1.0 - tol);
  return r;
}

/// Conditional states of the pure state for both outcomes of seeded random directions.
inline std::vector<DensityMatrix> sample_steered_states(double theta, std::size_t n_directions, std::uint64_t seed) {
  const SphereNet dirs = random_net(n_directions, seed);
  std::vector<DensityMatrix> out;
  for (const auto& n : dirs.points)
    for (int a = 0; a < 2; ++a) {
      const SteeredBloch s = steered_bloch(theta, n, a);
      if (s.prob > Tolerances::zero_probability) out.push_back(bloch_state(s.bloch));
    }
  return out;
}

/// max over sampled targets of the distance to the nearest candidate state.
/// A positive value means no protocol whose Bob states are the candidates
/// can reproduce the sampled assemblage exactly.
inline double impossibility_scan(std::span<const DensityMatrix> candidates, double theta, std::size_t n_directions,
                                 std::uint64_t seed) {
  if (candidates.empty()) throw Error(ErrorKind::InvalidArgument, "no candidate states");
  std::vector<Vec3> cand;
  for (const auto& c : candidates) {
    if (c.dim() != 2) throw Error(ErrorKind::DimensionMismatch, "candidates must be qubit states");
    cand.push_back(bloch_vector(c.mat()));
  }
  const SphereNet dirs = random_net(n_directions, seed);
  double worst = 0.0;
  for (const auto& n : dirs.points)
    for (int a = 0; a < 2; ++a) {
      const SteeredBloch s = steered_bloch(theta, n, a);
      if (s.prob <= Tolerances::zero_probability) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : cand) best = std::min(best, bloch_trace_distance(s.bloch, c));
      worst = std::max(worst, best);
    }
  return worst;
}

/// max over random bases {|phi_a>} of <phi_a| rho_a |phi_a>, where rho_a is
/// Bob's normalised conditional state when Alice obtains outcome a in the
/// same basis. Zero means Bob can never find what Alice found.
inline double orthogonality_scan(const DensityMatrix& state, std::size_t d, std::size_t n_bases, std::uint64_t seed) {
  if (state.dim() != d * d) throw Error(ErrorKind::DimensionMismatch, "state must live on C^d (x) C^d");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_bases; ++k) {
    MeasurementSet meas{{random_basis_measurement(d, rng)}};
    const Assemblage asm_ = compute_assemblage(state, meas);
    for (std::size_t a = 0; a < d; ++a) {
      const double p = asm_.prob(a, 0);
      if (p <= Tolerances::zero_probability) continue;
      worst = std::max(worst, trace_product_re(meas.settings[0].effects[a], asm_(a, 0)) / p);
    }
  }
  return worst;
}

inline double antisym_orthogonality_scan(std::size_t d, std::size_t n_bases, std::uint64_t seed) {
  if (d < 2 || d > 4) throw Error(ErrorKind::InvalidArgument, "antisym_orthogonality_scan supports d in {2,3,4}");
  return orthogonality_scan(antisymmetric_state(d), d, n_bases, seed);
}

}  // namespace steercost::protocol
