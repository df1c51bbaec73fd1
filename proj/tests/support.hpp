#pragma once

// Seeded generators shared by the unit tests and the acceptance runner.

#include <random>

#include "steercost/steering.hpp"

namespace steercost::testing {

inline MeasurementSet random_projective_settings(std::size_t d, std::size_t n, std::mt19937_64& rng) {
  MeasurementSet m;
  for (std::size_t x = 0; x < n; ++x) m.settings.push_back(random_basis_measurement(d, rng));
  return m;
}

/// Pure two-qubit state measured in 2 or 3 random bases. Mostly steerable.
inline Assemblage random_qubit_assemblage(std::mt19937_64& rng) {
  const std::size_t n = 2 + rng() % 2;
  const auto psi = random_pure_state(4, rng);
  return compute_assemblage(psi, random_projective_settings(2, n, rng));
}

/// Convex mixture of product states measured in random bases.
inline Assemblage random_separable_assemblage(std::mt19937_64& rng, std::size_t d = 2) {
  const std::size_t terms = 1 + rng() % 4;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> w(terms);
  double total = 0.0;
  for (auto& v : w) total += (v = u(rng));
  CMat rho = CMat::zeros(d * d);
  for (std::size_t k = 0; k < terms; ++k)
    rho.axpy(w[k] / total, kron(random_density_matrix(d, rng).mat(), random_density_matrix(d, rng).mat()));
  const std::size_t n = 2 + rng() % 2;
  return compute_assemblage(DensityMatrix(hermitian_part(rho)), random_projective_settings(d, n, rng));
}

/// Steerable or not, with up to three outcomes: random mixed or pure states
/// on qubit or qutrit pairs.
inline Assemblage random_finite_assemblage(std::mt19937_64& rng) {
  const std::size_t d = 2 + rng() % 2;
  const std::size_t n = 2 + rng() % 2;
  const DensityMatrix state = rng() % 2 ? random_pure_state(d * d, rng) : random_density_matrix(d * d, rng);
  return compute_assemblage(state, random_projective_settings(d, n, rng));
}

}  // namespace steercost::testing
