#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "linalg.hpp"

namespace steercost {

using Vec3 = std::array<double, 3>;

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates Hermiticity, positivity and unit trace.
  explicit DensityMatrix(CMat m) : mat_(std::move(m)) {
    require_hermitian(mat_);
    if (std::abs(mat_.trace().real() - 1.0) > Tolerances::trace)
      throw Error(ErrorKind::InvalidArgument, "density matrix trace differs from 1");
    if (min_eigenvalue(mat_) < -Tolerances::psd_slack)
      throw Error(ErrorKind::InvalidArgument, "density matrix has a negative eigenvalue");
  }
  static DensityMatrix pure(std::span<const cplx> psi) {
    double n = 0.0;
    for (const auto& z : psi) n += std::norm(z);
    return DensityMatrix(CMat::outer(psi) / n);
  }
  static DensityMatrix maximally_mixed(std::size_t d) {
    return DensityMatrix(CMat::identity(d) / static_cast<double>(d));
  }

  std::size_t dim() const noexcept { return mat_.rows(); }
  const CMat& mat() const noexcept { return mat_; }

 private:
  CMat mat_;
};

struct MeasurementSetting {
  std::vector<CMat> effects;
  std::optional<Vec3> label;  // Bloch direction for qubit projective settings
};

/// Alice's measurements: one POVM per setting.
struct MeasurementSet {
  std::vector<MeasurementSetting> settings;

  std::size_t size() const noexcept { return settings.size(); }
  std::size_t outcomes() const { return settings.empty() ? 0 : settings.front().effects.size(); }
  std::size_t dim() const { return settings.empty() ? 0 : settings.front().effects.front().rows(); }

  /// Throws unless every effect is PSD and each setting sums to identity.
  void validate() const {
    if (settings.empty()) throw Error(ErrorKind::InvalidArgument, "empty measurement set");
    const std::size_t k = outcomes(), d = dim();
    for (const auto& s : settings) {
      if (s.effects.size() != k) throw Error(ErrorKind::DimensionMismatch, "outcome count varies across settings");
      CMat sum(d, d);
      for (const auto& e : s.effects) {
        if (e.rows() != d || e.cols() != d) throw Error(ErrorKind::DimensionMismatch, "effect dimension");
        if (!is_psd(e)) throw Error(ErrorKind::InvalidArgument, "effect is not PSD");
        sum += e;
      }
      if ((sum - CMat::identity(d)).max_abs() > Tolerances::psd_slack)
        throw Error(ErrorKind::InvalidArgument, "effects do not sum to identity");
    }
  }

  MeasurementSet& append(const MeasurementSet& other) {
    settings.insert(settings.end(), other.settings.begin(), other.settings.end());
    return *this;
  }
};

/// Unnormalised conditional states sigma_{a|x}, stored setting-major.
class Assemblage {
 public:
  Assemblage() = default;
  Assemblage(std::size_t n_settings, std::size_t n_outcomes, std::size_t dim_b)
      : n_settings_(n_settings), n_outcomes_(n_outcomes), dim_b_(dim_b),
        sigma_(n_settings * n_outcomes, CMat::zeros(dim_b)) {}

  std::size_t n_settings() const noexcept { return n_settings_; }
  std::size_t n_outcomes() const noexcept { return n_outcomes_; }
  std::size_t dim_b() const noexcept { return dim_b_; }

  CMat& operator()(std::size_t a, std::size_t x) { return sigma_.at(x * n_outcomes_ + a); }
  const CMat& operator()(std::size_t a, std::size_t x) const { return sigma_.at(x * n_outcomes_ + a); }

  double prob(std::size_t a, std::size_t x) const { return (*this)(a, x).trace().real(); }

  /// sum_a sigma_{a|x}
  CMat marginal(std::size_t x) const {
    CMat s(dim_b_, dim_b_);
    for (std::size_t a = 0; a < n_outcomes_; ++a) s += (*this)(a, x);
    return s;
  }
  CMat reduced_state() const { return marginal(0); }

  /// Largest deviation of sum_a sigma_{a|x} from sum_a sigma_{a|0}.
  double signalling_defect() const {
    const CMat r = marginal(0);
    double d = 0.0;
    for (std::size_t x = 1; x < n_settings_; ++x) d = std::max(d, (marginal(x) - r).max_abs());
    return d;
  }

  void validate() const {
    if (n_settings_ == 0 || n_outcomes_ == 0 || dim_b_ == 0)
      throw Error(ErrorKind::InvalidArgument, "empty assemblage");
    for (const auto& s : sigma_)
      if (!is_psd(s)) throw Error(ErrorKind::InvalidArgument, "sigma_{a|x} is not PSD");
    if (signalling_defect() > Tolerances::assemblage_consistency)
      throw Error(ErrorKind::InvalidArgument, "assemblage marginals depend on the setting");
    if (std::abs(reduced_state().trace().real() - 1.0) > Tolerances::assemblage_consistency)
      throw Error(ErrorKind::InvalidArgument, "assemblage is not normalised");
  }

 private:
  std::size_t n_settings_ = 0;
  std::size_t n_outcomes_ = 0;
  std::size_t dim_b_ = 0;
  std::vector<CMat> sigma_;
};

// ---------------------------------------------------------------------------
// States

/// Projector onto cos(theta)|00> + sin(theta)|11>, 0 < theta <= pi/4.
inline DensityMatrix pure_theta_state(double theta) {
  if (!(theta > 0.0 && theta <= std::numbers::pi / 4 + 1e-12))
    throw Error(ErrorKind::ThetaOutOfRange, "theta must lie in (0, pi/4]");
  std::vector<cplx> psi{std::cos(theta), 0.0, 0.0, std::sin(theta)};
  return DensityMatrix::pure(psi);
}

/// Normalised maximally entangled vector sum_i |ii> / sqrt(d).
inline std::vector<cplx> phi_plus(std::size_t d) {
  std::vector<cplx> v(d * d);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

inline DensityMatrix isotropic_state(std::size_t d, double visibility) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "isotropic_state requires d >= 2");
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw Error(ErrorKind::VOutOfRange, "V must lie in [0, 1]");
  const auto phi = phi_plus(d);
  CMat m = visibility * CMat::outer(phi);
  m.axpy((1.0 - visibility) / static_cast<double>(d * d), CMat::identity(d * d));
  return DensityMatrix(std::move(m));
}

/// (1 - SWAP)/2 on C^d (x) C^d.
inline CMat antisymmetric_projector(std::size_t d) {
  CMat a = CMat::identity(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i * d + j, j * d + i) -= 1.0;
  return a * 0.5;
}

inline DensityMatrix antisymmetric_state(std::size_t d) {
  if (d < 2) throw Error(ErrorKind::InvalidArgument, "antisymmetric_state requires d >= 2");
  const double norm = 2.0 / static_cast<double>(d * (d - 1));
  return DensityMatrix(antisymmetric_projector(d) * norm);
}

inline DensityMatrix product_state(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.mat(), b.mat()));
}

// ---------------------------------------------------------------------------
// Measurements

inline CMat bloch_operator(const Vec3& n) {
  return n[0] * pauli::X() + n[1] * pauli::Y() + n[2] * pauli::Z();
}

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// Bloch vector of a single-qubit operator: tr(rho sigma_i).
inline Vec3 bloch_vector(const CMat& rho) {
  return {trace_product_re(rho, pauli::X()), trace_product_re(rho, pauli::Y()),
          trace_product_re(rho, pauli::Z())};
}

inline DensityMatrix bloch_state(const Vec3& n) {
  return DensityMatrix(0.5 * (pauli::I() + bloch_operator(n)));
}

/// {(1 + x.sigma)/2, (1 - x.sigma)/2}.
inline MeasurementSet bloch_projectors(const Vec3& xhat) {
  if (std::abs(norm3(xhat) - 1.0) > Tolerances::unit_vector)
    throw Error(ErrorKind::NotUnitVector, "Bloch direction must be a unit vector");
  const CMat s = bloch_operator(xhat);
  MeasurementSetting setting{{0.5 * (pauli::I() + s), 0.5 * (pauli::I() - s)}, xhat};
  return MeasurementSet{{setting}};
}

inline MeasurementSet bloch_projectors(std::span<const Vec3> directions) {
  MeasurementSet m;
  for (const auto& d : directions) m.append(bloch_projectors(d));
  return m;
}

inline bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t f = 2; f * f <= n; ++f)
    if (n % f == 0) return false;
  return true;
}

/// Complete set of d+1 mutually unbiased bases for prime d.
///
/// Odd d uses the Weyl-Heisenberg (Wootters-Fields) vectors
/// |e_{j,k}>_l = omega^{j l^2 + k l} / sqrt(d) plus the computational basis;
/// d = 2 uses the eigenbases of X, Y, Z.
inline MeasurementSet mub_bases(std::size_t d) {
  if (!is_prime(d)) throw Error(ErrorKind::NotPrime, "MUB construction needs prime d");
  MeasurementSet out;
  if (d == 2) {
    for (const Vec3& n : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}) out.append(bloch_projectors(n));
    return out;
  }
  const double pi = std::numbers::pi;
  MeasurementSetting computational;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<cplx> e(d);
    e[k] = 1.0;
    computational.effects.push_back(CMat::outer(e));
  }
  out.settings.push_back(std::move(computational));
  for (std::size_t j = 0; j < d; ++j) {
    MeasurementSetting basis;
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<cplx> e(d);
      for (std::size_t l = 0; l < d; ++l) {
        const std::size_t phase = (j * l * l + k * l) % d;
        e[l] = std::polar(1.0 / std::sqrt(static_cast<double>(d)), 2.0 * pi * static_cast<double>(phase) / d);
      }
      basis.effects.push_back(CMat::outer(e));
    }
    out.settings.push_back(std::move(basis));
  }
  return out;
}

/// k pairwise anticommuting real involutions on k qubits:
/// A_j = Z^{(x)(j-1)} (x) X (x) 1^{(x)(k-j)}.
///
/// All members are real symmetric, so A_j^T = A_j and the steered operators
/// coincide with Alice's observables.
inline std::vector<CMat> clifford_observables(int k) {
  if (k < 1 || k > 8) throw Error(ErrorKind::KOutOfRange, "clifford_observables supports 1 <= k <= 8");
  std::vector<CMat> out;
  for (int j = 0; j < k; ++j) {
    CMat a = CMat::identity(1);
    for (int q = 0; q < k; ++q) a = kron(a, q < j ? pauli::Z() : (q == j ? pauli::X() : pauli::I()));
    out.push_back(std::move(a));
  }
  return out;
}

/// Effects (1 + (-1)^{a+1} A)/2 for a in {0, 1}.
inline MeasurementSet dichotomic_povm_from_observables(std::span<const CMat> observables) {
  MeasurementSet out;
  for (const auto& a : observables) {
    require_hermitian(a);
    const std::size_t d = a.rows();
    if ((a * a - CMat::identity(d)).max_abs() > 1e-9)
      throw Error(ErrorKind::NotInvolution, "observable does not square to identity");
    const CMat id = CMat::identity(d);
    out.settings.push_back({{0.5 * (id - a), 0.5 * (id + a)}, std::nullopt});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assemblages

/// sigma_{a|x} = tr_A[rho (M_{a|x} (x) 1)].
inline Assemblage compute_assemblage(const DensityMatrix& state, const MeasurementSet& meas) {
  meas.validate();
  const std::size_t dA = meas.dim();
  if (dA == 0 || state.dim() % dA != 0)
    throw Error(ErrorKind::DimensionMismatch, "state dimension is not a multiple of the effect dimension");
  const std::size_t dB = state.dim() / dA;
  Assemblage out(meas.size(), meas.outcomes(), dB);
  const CMat& rho = state.mat();
  for (std::size_t x = 0; x < meas.size(); ++x)
    for (std::size_t a = 0; a < meas.outcomes(); ++a) {
      const CMat& m = meas.settings[x].effects[a];
      // sigma_ij = sum_{k,l} M_lk rho_{(k,i),(l,j)}
      CMat s(dB, dB);
      for (std::size_t k = 0; k < dA; ++k)
        for (std::size_t l = 0; l < dA; ++l) {
          const cplx mlk = m(l, k);
          if (mlk == cplx{}) continue;
          for (std::size_t i = 0; i < dB; ++i)
            for (std::size_t j = 0; j < dB; ++j) s(i, j) += mlk * rho(k * dB + i, l * dB + j);
        }
      out(a, x) = hermitian_part(s);
    }
  return out;
}

struct SteeredState {
  double prob;
  DensityMatrix state;
};

/// Outcome probability and normalised conditional state of Bob for a rank-1
/// effect of Alice acting on a pure bipartite state.
inline SteeredState steered_state(const DensityMatrix& state, const CMat& effect) {
  if (std::abs(max_eigenvalue(state.mat()) - 1.0) > 1e-8)
    throw Error(ErrorKind::InvalidArgument, "steered_state requires a pure state");
  const auto ev = eigenvalues(effect);
  if (std::abs(ev.front() - 1.0) > 1e-8 || (ev.size() > 1 && std::abs(ev[1]) > 1e-8))
    throw Error(ErrorKind::InvalidArgument, "steered_state requires a rank-1 projector");
  const std::size_t dA = effect.rows();
  if (state.dim() % dA != 0) throw Error(ErrorKind::DimensionMismatch, "effect does not act on the state");
  const std::size_t dB = state.dim() / dA;
  const CMat sigma = partial_trace_A(state.mat() * kron(effect, CMat::identity(dB)), dA, dB);
  const double p = sigma.trace().real();
  if (p < Tolerances::zero_probability) throw Error(ErrorKind::ZeroProbability, "outcome has zero probability");
  return {p, DensityMatrix(hermitian_part(sigma) / p)};
}

// ---------------------------------------------------------------------------
// Random sampling (seeded)

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = norm3(v);
    if (n > 1e-12) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

/// Haar-random unitary via Gram-Schmidt on a complex Ginibre matrix.
inline CMat random_unitary(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat u(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<cplx> v(d);
    for (auto& z : v) z = cplx(g(rng), g(rng));
    for (std::size_t p = 0; p < c; ++p) {
      cplx ip = 0.0;
      for (std::size_t i = 0; i < d; ++i) ip += std::conj(u(i, p)) * v[i];
      for (std::size_t i = 0; i < d; ++i) v[i] -= ip * u(i, p);
    }
    double n = 0.0;
    for (const auto& z : v) n += std::norm(z);
    n = std::sqrt(n);
    for (std::size_t i = 0; i < d; ++i) u(i, c) = v[i] / n;
  }
  return u;
}

/// Rank-1 projective measurement onto the columns of a Haar-random unitary.
inline MeasurementSetting random_basis_measurement(std::size_t d, std::mt19937_64& rng) {
  const CMat u = random_unitary(d, rng);
  MeasurementSetting s;
  for (std::size_t c = 0; c < d; ++c) s.effects.push_back(CMat::outer(u.column(c)));
  return s;
}

/// Mixed state of rank up to d drawn from the Ginibre ensemble.
inline DensityMatrix random_density_matrix(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMat gm(d, d);
  for (auto& z : gm.data()) z = cplx(g(rng), g(rng));
  CMat r = gm * gm.adjoint();
  r = hermitian_part(r / r.trace().real());
  return DensityMatrix(std::move(r));
}

inline DensityMatrix random_pure_state(std::size_t d, std::mt19937_64& rng) {
  return DensityMatrix::pure(random_unitary(d, rng).column(0));
}

}  // namespace steercost
