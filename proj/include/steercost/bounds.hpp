#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>

#include "error.hpp"

namespace steercost::bounds {

enum class Kind { MUB, Clifford, Approx, AsymptoticMUB, AsymptoticClifford };

inline std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::MUB: return "mub";
    case Kind::Clifford: return "clifford";
    case Kind::Approx: return "approx";
    case Kind::AsymptoticMUB: return "asymptotic_mub";
    case Kind::AsymptoticClifford: return "asymptotic_clifford";
  }
  return "unknown";
}

/// Closed-form communication bound. `value` is clamped at zero; `raw` keeps
/// the unclamped number and `vacuous` flags raw <= 0.
struct BoundReport {
  Kind kind = Kind::MUB;
  std::map<std::string, double> params;
  double value = 0.0;
  double raw = 0.0;
  bool vacuous = false;
  std::map<std::string, double> intermediate;
};

namespace detail {
inline void require_visibility(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::VOutOfRange, "V must lie in [0, 1]");
}
inline void set_value(BoundReport& r, double raw) {
  r.raw = raw;
  r.vacuous = !(raw > 0.0);
  r.value = r.vacuous ? 0.0 : raw;
}
}  // namespace detail

/// d+1 MUB measurements on the d-dimensional isotropic state.
/// intermediate["B"] lower-bounds 1 + 2 nu.
inline BoundReport mub_bound(int d, double visibility) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "mub_bound requires d >= 2");
  detail::require_visibility(visibility);
  const double dd = d;
  const double b = (1.0 + dd) / (1.0 + std::sqrt(dd)) * (1.0 / dd + visibility * (1.0 - 1.0 / dd));
  BoundReport r;
  r.kind = Kind::MUB;
  r.params = {{"d", dd}, {"V", visibility}, {"m", dd + 1.0}};
  r.intermediate["B"] = b;
  r.intermediate["nu_lower"] = 0.5 * (b - 1.0);
  r.intermediate["asymptotic"] = visibility > 0 ? std::log2(visibility * std::sqrt(dd) / 2.0) : -INFINITY;
  detail::set_value(r, std::log2(b + 1.0) - 1.0);
  return r;
}

/// m anticommuting dichotomic observables on the isotropic state of dimension 2^m.
inline BoundReport clifford_bound(int m, double visibility) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "clifford_bound requires m >= 1");
  detail::require_visibility(visibility);
  const double mm = m;
  const double b = visibility * std::sqrt(mm / 2.0);
  BoundReport r;
  r.kind = Kind::Clifford;
  r.params = {{"m", mm}, {"V", visibility}, {"d", std::ldexp(1.0, m)}};
  r.intermediate["B"] = b;
  r.intermediate["nu_lower"] = 0.5 * (b - 1.0);
  // log2(d) = m for d = 2^m.
  r.intermediate["asymptotic"] = visibility > 0 ? std::log2(visibility * std::sqrt(mm / 2.0) / 2.0) : -INFINITY;
  detail::set_value(r, std::log2((b + 1.0) / 2.0));
  return r;
}

/// Bits needed to approximate every pure steered state of a two-qubit pure
/// state to trace distance eps: log2(2 / (1 - sqrt(1 - 4 eps^2))).
inline BoundReport approx_t_bound(double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw Error(ErrorKind::EpsOutOfRange, "eps must lie in (0, 1/2]");
  const double c = std::sqrt(std::max(0.0, 1.0 - 4.0 * eps * eps));
  BoundReport r;
  r.kind = Kind::Approx;
  r.params = {{"eps", eps}};
  r.intermediate["cos_theta_max"] = c;
  r.intermediate["gamma_min"] = c;
  r.intermediate["laurent"] = std::log2(1.0 / (eps * eps));
  // 1 - sqrt(1 - 4e^2) cancels badly for small eps; use 4e^2 / (1 + sqrt(1 - 4e^2)).
  const double denom = 4.0 * eps * eps / (1.0 + c);
  detail::set_value(r, std::log2(2.0 / denom));
  return r;
}

/// Smallest error compatible with t bits: sqrt(2^-t - 2^-2t).
inline double min_eps_for_t(int t) {
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "min_eps_for_t requires t >= 1");
  const double p = std::ldexp(1.0, -t);
  return std::sqrt(p - p * p);
}

}  // namespace steercost::bounds
