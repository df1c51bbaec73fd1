#include <gtest/gtest.h>

#include <numbers>

#include "steercost/steering.hpp"
#include "support.hpp"

using namespace steercost;
using steercost::testing::random_qubit_assemblage;
using steercost::testing::random_separable_assemblage;

namespace {

// Robustness of the two-qubit isotropic state under the three Pauli bases.
// The optimal LHS decomposition splits along the cube diagonals, giving
// nu(V) = max(0, (sqrt(3) V - 1) / 2).
double pauli_triple_nu(double v) { return std::max(0.0, (std::sqrt(3.0) * v - 1.0) / 2.0); }

// Max over lambda of the extreme eigenvalues of sum_x F_{D(x), x}, recomputed
// by brute-force counting rather than through enumerate_strategies.
double brute_force_lhs_norm(const SteeringFunctional& f) {
  const std::size_t nx = f.n_settings(), na = f.n_outcomes();
  std::size_t total = 1;
  for (std::size_t x = 0; x < nx; ++x) total *= na;
  double worst = 0.0;
  for (std::size_t code = 0; code < total; ++code) {
    CMat s = CMat::zeros(f.dim_b());
    std::size_t c = code;
    for (std::size_t x = 0; x < nx; ++x) {
      s += f(c % na, x);
      c /= na;
    }
    const auto ev = eigenvalues(s);
    worst = std::max({worst, std::abs(ev.front()), std::abs(ev.back())});
  }
  return worst;
}

}  // namespace

TEST(Strategies, EnumerationOrderAndCount) {
  const auto s = enumerate_strategies(3, 2);
  ASSERT_EQ(s.size(), 8u);
  EXPECT_EQ(s[0].responses, (std::vector<std::size_t>{0, 0, 0}));
  EXPECT_EQ(s[1].responses, (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(s[7].responses, (std::vector<std::size_t>{1, 1, 1}));
  EXPECT_EQ(enumerate_strategies(2, 3).size(), 9u);
  try {
    enumerate_strategies(30, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooManyStrategies);
  }
}

TEST(Robustness, PauliTripleOnMaximallyEntangled) {
  const Assemblage a = compute_assemblage(isotropic_state(2, 1.0), mub_bases(2));
  const auto primal = robustness_primal(a);
  const auto dual = robustness_dual(a);
  EXPECT_EQ(primal.status, sdp::Status::Optimal);
  EXPECT_NEAR(primal.nu, pauli_triple_nu(1.0), 1e-6);
  EXPECT_NEAR(dual.nu, pauli_triple_nu(1.0), 1e-6);
  EXPECT_GE(primal.nu, 0.12132 - 1e-4);
  EXPECT_NEAR(primal.t_lower_bound, std::log2(1.0 + pauli_triple_nu(1.0)), 1e-6);
}

TEST(Robustness, VisibilityCurveMatchesClosedForm) {
  for (double v : {0.0, 0.3, 0.55, 0.6, 0.75, 0.9}) {
    const Assemblage a = compute_assemblage(isotropic_state(2, v), mub_bases(2));
    EXPECT_NEAR(robustness_primal(a).nu, pauli_triple_nu(v), 2e-6) << "V=" << v;
  }
}

TEST(Robustness, MonotoneInVisibility) {
  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double v = 0.1 * i;
    const double nu = robustness_primal(compute_assemblage(isotropic_state(3, v), mub_bases(3))).nu;
    EXPECT_GE(nu, prev - 1e-6) << "V=" << v;
    prev = nu;
  }
}

TEST(Robustness, PrimalDualAgreeOnRandomPureStates) {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 10; ++rep) {
    const Assemblage a = random_qubit_assemblage(rng);
    const auto p = robustness_primal(a);
    const auto d = robustness_dual(a);
    EXPECT_NEAR(p.nu, d.nu, 1e-5) << "case " << rep;
    // Weak duality: the certified dual value never exceeds the primal optimum.
    EXPECT_LE(d.nu, p.nu + 1e-6);
  }
}

TEST(Robustness, PrimalSolutionIsFeasible) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    const Assemblage a = random_qubit_assemblage(rng);
    const auto r = robustness_primal(a);
    const auto strategies = enumerate_strategies(a.n_settings(), a.n_outcomes());
    double objective = 0.0;
    for (std::size_t l = 0; l < strategies.size(); ++l) {
      EXPECT_TRUE(is_psd(r.rho[l], 1e-7));
      EXPECT_TRUE(is_psd(r.rho_tilde[l], 1e-7));
      objective += r.rho[l].trace().real() + r.rho_tilde[l].trace().real();
    }
    EXPECT_NEAR(objective, 1.0 + 2.0 * r.nu, 1e-6);
    for (std::size_t x = 0; x < a.n_settings(); ++x)
      for (std::size_t o = 0; o < a.n_outcomes(); ++o) {
        CMat lhs = a(o, x);
        for (std::size_t l = 0; l < strategies.size(); ++l)
          if (strategies[l].responses[x] == o) lhs += r.rho[l] - r.rho_tilde[l];
        EXPECT_LT(lhs.norm_fro(), 1e-7);
      }
  }
}

TEST(Robustness, DualCertificateSatisfiesEveryStrategyConstraint) {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = robustness_dual(random_qubit_assemblage(rng));
    ASSERT_TRUE(r.dual_certificate.has_value());
    EXPECT_LE(brute_force_lhs_norm(*r.dual_certificate), 1.0 + 1e-7);
  }
}

TEST(Robustness, NegativeNuRejected) {
  EXPECT_THROW(comm_lower_bound(-0.1), Error);
  EXPECT_DOUBLE_EQ(comm_lower_bound(-1e-10), 0.0);
  EXPECT_DOUBLE_EQ(comm_lower_bound(1.0), 1.0);
}

TEST(Robustness, InvalidAssemblageRejected) {
  Assemblage bad(2, 2, 2);
  bad(0, 0) = CMat::identity(2) * 0.5;
  bad(0, 1) = CMat::identity(2);
  EXPECT_THROW(robustness_primal(bad), Error);
}

TEST(Functionals, MubFunctionalValueAndFeasibility) {
  const auto meas = mub_bases(2);
  const auto f = mub_functional(meas);
  const double closed = 3.0 / (1.0 + std::sqrt(2.0));
  EXPECT_NEAR(evaluate_functional(f, compute_assemblage(isotropic_state(2, 1.0), meas)), closed, 1e-12);
  EXPECT_NEAR(closed, 1.24264, 1e-5);
  EXPECT_LE(brute_force_lhs_norm(f), 1.0 + 1e-12);
  EXPECT_NEAR(functional_lhs_norm(f), brute_force_lhs_norm(f), 1e-12);
}

TEST(Functionals, MubFunctionalIsFeasibleInOddPrimeDimension) {
  for (std::size_t d : {3u, 5u}) {
    const auto meas = mub_bases(d);
    const auto f = mub_functional(meas);
    EXPECT_LE(functional_lhs_norm(f), 1.0 + 1e-10) << "d=" << d;
    const double value = evaluate_functional(f, compute_assemblage(isotropic_state(d, 1.0), meas));
    const double dd = static_cast<double>(d);
    EXPECT_NEAR(value, (1.0 + dd) / (1.0 + std::sqrt(dd)), 1e-10);
  }
}

TEST(Functionals, CliffordPairOnFourDimensionalIsotropic) {
  const auto obs = clifford_observables(2);
  const auto f = clifford_functional(obs);
  const Assemblage a = compute_assemblage(isotropic_state(4, 1.0), dichotomic_povm_from_observables(obs));
  EXPECT_NEAR(evaluate_functional(f, a), 1.0, 1e-8);
  EXPECT_LE(functional_lhs_norm(f), 1.0 + 1e-12);
}

TEST(Membership, SeparableStatesAreLhs) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 6; ++rep) {
    const Assemblage a = random_separable_assemblage(rng);
    const auto m = lhs_membership(a);
    EXPECT_TRUE(m.is_lhs) << "nu=" << m.nu;
    EXPECT_LE(m.nu, 1e-6);
    EXPECT_LT(m.witness_residual, 1e-6);
    for (const auto& w : m.witness) EXPECT_TRUE(is_psd(w, 1e-7));
  }
}

TEST(Membership, MaximallyEntangledIsNotLhs) {
  const auto m = lhs_membership(compute_assemblage(isotropic_state(2, 1.0), mub_bases(2)));
  EXPECT_FALSE(m.is_lhs);
  EXPECT_TRUE(m.witness.empty());
}

TEST(Protocols, CopyProtocolReproducesAssemblage) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    const Assemblage a = steercost::testing::random_finite_assemblage(rng);
    const Protocol p = copy_protocol(a);
    EXPECT_EQ(p.t_bits, bits_for(a.n_settings() * a.n_outcomes()));
    EXPECT_LT(assemblage_distance(p.simulate(), a), 1e-12);
  }
}

TEST(Protocols, SigmaStarOfCopyProtocolIsLhs) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 3; ++rep) {
    const Assemblage a = random_qubit_assemblage(rng);
    const Protocol p = copy_protocol(a);
    const Assemblage star = sigma_star(a, p, uniform_response(a.n_settings(), a.n_outcomes()));
    EXPECT_LT(star.signalling_defect(), 1e-10);
    EXPECT_LE(lhs_membership(star).nu, 1e-6);
    // sigma* = 2^-t sigma + (1 - 2^-t) sigma~ with sigma~ a valid assemblage.
    const Assemblage tilde = tilde_component(star, a, p.t_bits);
    EXPECT_NO_THROW(tilde.validate());
  }
}

TEST(Protocols, ZeroBitProtocolFromLhsWitness) {
  std::mt19937_64 rng(3);
  const Assemblage a = random_separable_assemblage(rng);
  const auto m = lhs_membership(a);
  ASSERT_TRUE(m.is_lhs);
  const auto strategies = enumerate_strategies(a.n_settings(), a.n_outcomes());
  std::vector<double> weights;
  std::vector<DeterministicStrategy> used;
  std::vector<DensityMatrix> states;
  for (std::size_t l = 0; l < strategies.size(); ++l) {
    const CMat w = psd_project(m.witness[l]);
    const double tr = w.trace().real();
    if (tr <= 1e-12) continue;
    weights.push_back(tr);
    used.push_back(strategies[l]);
    states.emplace_back(hermitian_part(w / tr));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  const Protocol p = lhs_protocol(weights, used, states, a.n_outcomes());
  EXPECT_EQ(p.t_bits, 0);
  const Assemblage sim = p.simulate();
  EXPECT_LT(assemblage_distance(sim, a), 1e-5);
  // With t = 0 the guess is always right: sigma* equals the simulated assemblage.
  const Assemblage star = sigma_star(sim, p, uniform_response(a.n_settings(), a.n_outcomes()));
  EXPECT_LT(assemblage_distance(star, sim), 1e-14);
}

TEST(Protocols, MismatchedProtocolRejected) {
  const Assemblage a = compute_assemblage(isotropic_state(2, 1.0), mub_bases(2));
  const Assemblage b = compute_assemblage(isotropic_state(2, 0.5), mub_bases(2));
  try {
    sigma_star(a, copy_protocol(b), uniform_response(3, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ProtocolMismatch);
  }
}
