#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dualbill/sharpness.hpp"
#include "dualbill/symplectic.hpp"
#include "test_support.hpp"

namespace dualbill {
namespace {

const double kSqrt3 = std::sqrt(3.0);
const PerturbationParams kParams12{{1.0, 2.0}, 0.1};
const PerturbationParams kParams123{{1.0, 2.0, 3.0}, 0.1};

TEST(CriticalOrbits, CensusM2) {
  const auto crit = critical_orbits_of_f(kParams12);
  ASSERT_EQ(crit.size(), 4u);
  std::vector<double> etas;
  for (const auto& c : crit) {
    etas.push_back(c.eta);
    Vector expected = Vector::Zero(4);
    expected(c.index) = c.branch;
    EXPECT_EQ(c.representative, expected);
    EXPECT_LT(lagrange_residual(c.representative, c.eta, kParams12), 1e-10);
    EXPECT_NEAR(c.representative.norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::pow(c.eta - kParams12.a[c.index], 2), 0.01, 1e-10);
    for (int k = 1; k <= 2; ++k) {
      EXPECT_LT(lagrange_residual(cube_root_rotate(c.representative, k), c.eta, kParams12), 1e-10);
    }
    const double a = kParams12.a[c.index];
    EXPECT_NEAR(c.critical_value, a / 2 + c.branch * 0.1 / 3, 1e-14);
    EXPECT_EQ(perturbation_f(c.representative, kParams12), c.critical_value);
  }
  std::sort(etas.begin(), etas.end());
  const std::vector<double> expected{0.9, 1.1, 1.9, 2.1};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(etas[i], expected[i], 1e-12);
}

TEST(CriticalOrbits, CensusM3) {
  const auto crit = critical_orbits_of_f(kParams123);
  EXPECT_EQ(crit.size(), 6u);
  std::set<double> values;
  for (const auto& c : crit) values.insert(c.critical_value);
  EXPECT_EQ(values.size(), 6u);
}

TEST(CriticalOrbits, OutsideHypothesis) {
  EXPECT_THROW(critical_orbits_of_f({{1.0, 2.0}, 0.75}), SurfaceError);
  EXPECT_THROW(critical_orbits_of_f({{1.0, 1.0}, 0.1}), SurfaceError);
}

TEST(CriticalSweepTest, FindsOnlyTheClosedFormOrbits) {
  for (const auto& params : {kParams12, kParams123, PerturbationParams{{0.0, 10.0}, 0.3}}) {
    const CriticalSweep sweep = sweep_critical_points(params);
    EXPECT_EQ(static_cast<int>(sweep.representatives.size()), 2 * params.m());
    EXPECT_EQ(sweep.max_carrying_pairs, 1);
    EXPECT_GT(sweep.converged, sweep.starts / 2);
  }
}

TEST(LinearizedClosure, AlphaIsSqrt3TimesCriticalValue) {
  for (const auto& params : {kParams12, kParams123}) {
    for (const auto& c : critical_orbits_of_f(params, false)) {
      const LinearizedClosure lin = solve_linearized_closure(params, c.representative);
      EXPECT_NEAR(lin.c, c.critical_value, 1e-15);
      EXPECT_LT(lin.w.norm(), 1e-12);
      EXPECT_LT(lin.consistency_residual, 1e-12);
      EXPECT_GT(lin.smallest_singular_value, 1e-10);
      for (double alpha : lin.alpha) EXPECT_NEAR(alpha, kSqrt3 * c.critical_value, 1e-12);
      for (const Vector& v : lin.v) EXPECT_LT(v.norm(), 1e-12);
    }
  }
}

TEST(LinearizedSeed, SphereLimit) {
  const PerturbationParams tiny{{1.0, 2.0}, 1e-12};
  const auto crit = critical_orbits_of_f(tiny, false);
  const TangencyTuple seed = linearized_seed(tiny, crit[0]);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((seed.normals[i] - cube_root_rotate(crit[0].representative, i + 1)).norm(), 1e-11);
    EXPECT_NEAR(seed.multipliers[i], kSqrt3, 1e-11);
  }
}

TEST(LinearizedSeed, ResidualIsSecondOrder) {
  for (double eps : {0.05, 0.025, 0.0125}) {
    const PerturbationParams params{{1.0, 2.0}, eps};
    const auto s = SupportSurface::perturbed_sphere(params);
    for (const auto& c : critical_orbits_of_f(params, false)) {
      EXPECT_LT(closure_residual(s, linearized_seed(params, c)).norm(), eps * eps);
    }
  }
}

TEST(LinearizedSeed, NewtonConvergesQuickly) {
  const auto s = SupportSurface::perturbed_sphere(kParams12);
  for (const auto& c : critical_orbits_of_f(kParams12, false)) {
    const PolishOutcome out = newton_polish(s, linearized_seed(kParams12, c));
    ASSERT_TRUE(out.ok()) << out.reason;
    EXPECT_LE(out.iterations, 10);
    EXPECT_LT(out.orbit->residual, 1e-10);
    EXPECT_TRUE(out.orbit->is_isolated);
  }
}

class SharpnessExperiment : public ::testing::TestWithParam<int> {};

TEST_P(SharpnessExperiment, ExactlyTwoMOrbits) {
  const int m = GetParam();
  PerturbationParams params{{}, 0.1};
  for (int i = 1; i <= m; ++i) params.a.push_back(i);
  const SharpnessReport report = sharpness_experiment(params, 2000);
  EXPECT_EQ(report.expected, 2 * m);
  EXPECT_EQ(report.count, 2 * m);
  EXPECT_EQ(report.count_doubled, 2 * m);
  EXPECT_TRUE(report.stable);
  EXPECT_TRUE(report.bijection);
  EXPECT_TRUE(report.success);
  std::set<int> claimed(report.seed_to_orbit.begin(), report.seed_to_orbit.end());
  EXPECT_EQ(static_cast<int>(claimed.size()), 2 * m);
  EXPECT_FALSE(claimed.contains(-1));
}

INSTANTIATE_TEST_SUITE_P(M, SharpnessExperiment, ::testing::Values(1, 2, 3));

}  // namespace
}  // namespace dualbill
