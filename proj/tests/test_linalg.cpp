#include <gtest/gtest.h>

#include <random>

#include "steercost/linalg.hpp"

using namespace steercost;

namespace {

CMat random_hermitian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return hermitian_part(m);
}

// Largest |eigenvalue| by power iteration on A^2 (shift-free, sign-agnostic).
double power_spectral_radius(const CMat& a) {
  const std::size_t n = a.rows();
  const CMat a2 = a * a;
  std::vector<cplx> v(n, 1.0);
  v[0] = cplx(1.3, 0.2);
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    std::vector<cplx> w(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[i] += a2(i, j) * v[j];
    double nrm = 0.0;
    for (auto z : w) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nrm;
    lambda = nrm;
  }
  return std::sqrt(lambda);
}

}  // namespace

TEST(Linalg, KronOfPaulisHasExpectedEntries) {
  const CMat xz = kron(pauli::X(), pauli::Z());
  EXPECT_EQ(xz.rows(), 4u);
  EXPECT_EQ(xz(0, 2), cplx(1.0));
  EXPECT_EQ(xz(1, 3), cplx(-1.0));
  EXPECT_EQ(xz(2, 0), cplx(1.0));
  EXPECT_EQ(xz(0, 0), cplx(0.0));
}

TEST(Linalg, PauliAlgebra) {
  const CMat i2 = CMat::identity(2);
  for (const CMat& p : {pauli::X(), pauli::Y(), pauli::Z()}) {
    EXPECT_LT((p * p - i2).max_abs(), 1e-15);
    EXPECT_LT(std::abs(p.trace()), 1e-15);
  }
  const CMat xy = pauli::X() * pauli::Y();
  EXPECT_LT((xy - cplx(0, 1) * pauli::Z()).max_abs(), 1e-15);
}

TEST(Linalg, EigenvaluesOfTwoByTwoMatchClosedForm) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const CMat h = random_hermitian(2, rng);
    const double a = h(0, 0).real(), d = h(1, 1).real();
    const double r = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(h(0, 1)));
    const auto ev = eigenvalues(h);
    EXPECT_NEAR(ev[0], 0.5 * (a + d) + r, 1e-12);
    EXPECT_NEAR(ev[1], 0.5 * (a + d) - r, 1e-12);
  }
}

TEST(Linalg, EigendecompositionIsConsistentOnRandomHermitian) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 3u, 4u, 6u, 9u, 16u}) {
    for (int rep = 0; rep < 5; ++rep) {
      const CMat h = random_hermitian(n, rng);
      const HermEig e = herm_eig(h);
      ASSERT_EQ(e.eigenvalues.size(), n);
      EXPECT_TRUE(std::is_sorted(e.eigenvalues.rbegin(), e.eigenvalues.rend()));
      const CMat u = e.eigenvectors;
      EXPECT_LT((u.adjoint() * u - CMat::identity(n)).max_abs(), 1e-11);
      EXPECT_LT((reconstruct(e) - h).max_abs(), 1e-11 * (1.0 + h.max_abs()));
      double sum = 0.0;
      for (double v : e.eigenvalues) sum += v;
      EXPECT_NEAR(sum, h.trace().real(), 1e-10);
      const double rho = std::max(std::abs(e.eigenvalues.front()), std::abs(e.eigenvalues.back()));
      EXPECT_NEAR(rho, power_spectral_radius(h), 1e-6 * (1.0 + rho));
    }
  }
}

TEST(Linalg, DegenerateSpectrum) {
  CMat p = CMat::identity(4);
  p(0, 0) = 3.0;
  const auto ev = eigenvalues(p);
  EXPECT_NEAR(ev[0], 3.0, 1e-14);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_NEAR(ev[i], 1.0, 1e-14);
}

TEST(Linalg, NonHermitianInputRejected) {
  CMat m{{1.0, 2.0}, {0.0, 1.0}};
  EXPECT_THROW(herm_eig(m), Error);
  try {
    require_hermitian(m);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
  EXPECT_THROW(herm_eig(CMat(2, 3)), Error);
}

TEST(Linalg, PartialTracesOfProducts) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const CMat a = random_hermitian(2, rng), b = random_hermitian(3, rng);
    const CMat ab = kron(a, b);
    EXPECT_LT((partial_trace_A(ab, 2, 3) - a.trace() * b).max_abs(), 1e-12);
    EXPECT_LT((partial_trace_B(ab, 2, 3) - b.trace() * a).max_abs(), 1e-12);
  }
}

TEST(Linalg, PartialTraceOfMaximallyEntangledIsMixed) {
  std::vector<cplx> phi(9);
  for (int i = 0; i < 3; ++i) phi[i * 3 + i] = 1.0 / std::sqrt(3.0);
  const CMat rho = CMat::outer(phi);
  EXPECT_LT((partial_trace_A(rho, 3, 3) - CMat::identity(3) / 3.0).max_abs(), 1e-15);
}

TEST(Linalg, QubitTraceDistanceMatchesBlochFormula) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  for (int rep = 0; rep < 100; ++rep) {
    const double r[3] = {u(rng), u(rng), u(rng)}, s[3] = {u(rng), u(rng), u(rng)};
    auto state = [](const double* v) {
      return 0.5 * (pauli::I() + v[0] * pauli::X() + v[1] * pauli::Y() + v[2] * pauli::Z());
    };
    const double dist = std::hypot(r[0] - s[0], r[1] - s[1], r[2] - s[2]);
    EXPECT_NEAR(trace_distance(state(r), state(s)), 0.5 * dist, 1e-12);
  }
}

TEST(Linalg, PsdProjectionIsIdempotentAndNearest) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const CMat h = random_hermitian(4, rng);
    const CMat p = psd_project(h);
    EXPECT_TRUE(is_psd(p));
    EXPECT_LT((psd_project(p) - p).max_abs(), 1e-11);
    // h - p is negative semidefinite and orthogonal to p.
    EXPECT_LT(max_eigenvalue(h - p), 1e-10);
    EXPECT_NEAR(trace_product_re(p, h - p), 0.0, 1e-10);
  }
}

TEST(Linalg, TraceNormOfPauliIsTwo) {
  EXPECT_NEAR(trace_norm(pauli::Y()), 2.0, 1e-14);
  EXPECT_NEAR(trace_norm(kron(pauli::X(), pauli::Z())), 4.0, 1e-14);
}
