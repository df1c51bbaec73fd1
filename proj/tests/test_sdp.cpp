#include <gtest/gtest.h>

#include <random>

#include "steercost/sdp.hpp"

using namespace steercost;
using namespace steercost::sdp;

namespace {

CMat unit_entry(std::size_t n, std::size_t i, std::size_t j) {
  CMat e(n, n);
  e(i, j) = 1.0;
  return e;
}

// min tr(C X) over density matrices X.
SdpProblem min_energy_problem(const CMat& c) {
  SdpProblem p;
  const auto x = p.add_block("X", c.rows());
  p.objective[x] = c;
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(c.rows())}}, 1.0});
  return p;
}

}  // namespace

TEST(Sdp, TraceNormalisedMinimumTraceIsOne) {
  SdpProblem p;
  const auto x = p.add_block("X", 2);
  p.objective[x] = CMat::identity(2);
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(2)}}, 1.0});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::Optimal);
  EXPECT_NEAR(sol.objective, 1.0, 1e-7);
  EXPECT_LT(constraint_violation(p, sol.block_values), 1e-7);
}

TEST(Sdp, GroundStateEnergyOfRandomQubitHamiltonians) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 25; ++rep) {
    CMat c{{g(rng), cplx(g(rng), g(rng))}, {0.0, g(rng)}};
    c(1, 0) = std::conj(c(0, 1));
    const double a = c(0, 0).real(), d = c(1, 1).real();
    const double lmin = 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + std::norm(c(0, 1)));
    const auto p = min_energy_problem(c);
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, Status::Optimal);
    EXPECT_NEAR(sol.objective, lmin, 1e-6);
    const CMat& xv = sol.block_values.at("X");
    EXPECT_TRUE(is_psd(xv, 1e-7));
    EXPECT_LT(constraint_violation(p, sol.block_values), 1e-7);
  }
}

TEST(Sdp, MaximiseAllOnesOverCorrelationMatrices) {
  // max tr(J X) with X_ii = 1 is attained by X = J with value n^2.
  for (std::size_t n : {2u, 3u, 5u}) {
    SdpProblem p;
    const auto x = p.add_block("X", n);
    CMat ones(n, n);
    for (auto& z : ones.data()) z = 1.0;
    p.objective[x] = ones;
    p.sense = Sense::Maximize;
    for (std::size_t i = 0; i < n; ++i) p.constraints.push_back(TraceConstraint{{{x, unit_entry(n, i, i)}}, 1.0});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, Status::Optimal);
    EXPECT_NEAR(sol.objective, static_cast<double>(n * n), 1e-6);
  }
}

TEST(Sdp, FreeBlockShiftsIntoCone) {
  // S = F + 2, S >= 0, F free; minimise tr S -> 0 with F = -2.
  SdpProblem p;
  const auto s = p.add_block("S", 1);
  const auto f = p.add_block("F", 1, BlockKind::Free);
  p.objective[s] = CMat::identity(1);
  p.constraints.push_back(MatrixConstraint{{{s, 1.0}, {f, -1.0}}, CMat{{2.0}}});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::Optimal);
  EXPECT_NEAR(sol.objective, 0.0, 1e-7);
  EXPECT_NEAR(sol.block_values.at("F")(0, 0).real(), -2.0, 1e-6);
}

TEST(Sdp, NegativeIdentityIsInfeasible) {
  SdpProblem p;
  const auto x = p.add_block("X", 2);
  p.constraints.push_back(MatrixConstraint{{{x, 1.0}}, -1.0 * CMat::identity(2)});
  const auto cert = detect_infeasibility(p);
  ASSERT_TRUE(cert.has_value());
  EXPECT_TRUE(verify_certificate(p, *cert));
  EXPECT_LT(cert->value, 0.0);
}

TEST(Sdp, NegativeTraceIsInfeasibleWithFarkasCertificate) {
  SdpProblem p;
  const auto x = p.add_block("X", 3);
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(3)}}, -1.0});
  const auto sol = solve(p);
  ASSERT_EQ(sol.status, Status::Infeasible);
  ASSERT_TRUE(sol.certificate.has_value());
  EXPECT_FALSE(sol.certificate->inconsistent_equalities);
  EXPECT_TRUE(verify_certificate(p, *sol.certificate));
  EXPECT_LE(sol.certificate->cone_defect, 1e-8);
}

TEST(Sdp, ContradictoryEqualitiesAreInfeasible) {
  SdpProblem p;
  const auto x = p.add_block("X", 1);
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(1)}}, 1.0});
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(1)}}, 2.0});
  const auto cert = detect_infeasibility(p);
  ASSERT_TRUE(cert.has_value());
  EXPECT_TRUE(cert->inconsistent_equalities);
  EXPECT_TRUE(verify_certificate(p, *cert));
}

TEST(Sdp, FeasibleProblemHasNoCertificate) {
  SdpProblem p;
  const auto x = p.add_block("X", 2);
  p.constraints.push_back(TraceConstraint{{{x, CMat::identity(2)}}, 1.0});
  EXPECT_FALSE(detect_infeasibility(p).has_value());
}

TEST(Sdp, IllFormedProblemsRejected) {
  SdpProblem empty;
  EXPECT_THROW(solve(empty), Error);

  SdpProblem bad_index;
  bad_index.add_block("X", 2);
  bad_index.constraints.push_back(TraceConstraint{{{5, CMat::identity(2)}}, 1.0});
  try {
    solve(bad_index);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IllFormedProblem);
  }

  SdpProblem bad_shape;
  const auto x = bad_shape.add_block("X", 2);
  bad_shape.constraints.push_back(MatrixConstraint{{{x, 1.0}}, CMat::identity(3)});
  EXPECT_THROW(solve(bad_shape), Error);

  SdpProblem ok;
  const auto y = ok.add_block("Y", 1);
  ok.constraints.push_back(TraceConstraint{{{y, CMat::identity(1)}}, 1.0});
  SolverConfig cfg;
  cfg.relaxation = 2.5;
  EXPECT_THROW(solve(ok, cfg), Error);
}

TEST(Sdp, WarmStartDoesNotIncreaseIterations) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 5; ++rep) {
    CMat c(3, 3);
    for (auto& z : c.data()) z = cplx(g(rng), g(rng));
    c = hermitian_part(c);
    const auto p = min_energy_problem(c);
    const auto cold = solve(p);
    const auto warm = solve(p, {}, &cold);
    EXPECT_LE(warm.iterations, cold.iterations);
    EXPECT_NEAR(warm.objective, cold.objective, 1e-6);
  }
}

TEST(Sdp, IterationCapReported) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  CMat c(4, 4);
  for (auto& z : c.data()) z = cplx(g(rng), g(rng));
  SolverConfig cfg;
  cfg.max_iter = 3;
  const auto sol = solve(min_energy_problem(hermitian_part(c)), cfg);
  EXPECT_EQ(sol.status, Status::MaxIterations);
  EXPECT_EQ(sol.iterations, 3);
}

TEST(Sdp, VectorizationIsIsometric) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 10; ++rep) {
    CMat a(3, 3), b(3, 3);
    for (auto& z : a.data()) z = cplx(g(rng), g(rng));
    for (auto& z : b.data()) z = cplx(g(rng), g(rng));
    a = hermitian_part(a);
    b = hermitian_part(b);
    std::vector<double> va(9), vb(9);
    detail::vectorize(a, va.data());
    detail::vectorize(b, vb.data());
    EXPECT_NEAR(detail::dot(va, vb), trace_product_re(a, b), 1e-12);
    EXPECT_LT((detail::devectorize(va.data(), 3) - a).max_abs(), 1e-14);
  }
}
