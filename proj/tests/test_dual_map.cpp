#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dualbill/dual_map.hpp"
#include "dualbill/symplectic.hpp"
#include "test_support.hpp"

namespace dualbill {
namespace {

using testing::circle_tangent;
using testing::random_exterior;
using testing::random_unit;
using testing::vec;

const double kSqrt3 = std::sqrt(3.0);

TEST(DualMap, CircleOracle) {
  const auto circle = SupportSurface::sphere(Dimension(1));
  const MapResult fwd = dual_map(circle, vec({2, 0}), Direction::forward);
  EXPECT_NEAR(fwd.image(0), -1.0, 1e-9);
  EXPECT_NEAR(fwd.image(1), kSqrt3, 1e-9);
  EXPECT_NEAR(fwd.tangency_point(0), 0.5, 1e-9);
  EXPECT_NEAR(fwd.tangency_point(1), kSqrt3 / 2, 1e-9);
  EXPECT_NEAR(fwd.multiplier, kSqrt3, 1e-9);

  const MapResult bwd = dual_map(circle, vec({2, 0}), Direction::backward);
  EXPECT_NEAR(bwd.image(0), -1.0, 1e-9);
  EXPECT_NEAR(bwd.image(1), -kSqrt3, 1e-9);
  EXPECT_LT(bwd.multiplier, 0.0);
}

TEST(DualMap, CircleOracleRandomPoints) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> radius(1.1, 10.0);
  for (double r : {1.0, 0.4, 3.0}) {
    const auto circle = SupportSurface::sphere(Dimension(1), r);
    for (int i = 0; i < 30; ++i) {
      const Vector z = random_unit(rng, 2) * r * radius(rng);
      for (Direction d : {Direction::forward, Direction::backward}) {
        const auto oracle = circle_tangent(r, z, d == Direction::forward);
        const MapResult res = dual_map(circle, z, d);
        EXPECT_LT((res.image - oracle.image).norm(), 1e-9 * std::max(1.0, z.norm()));
        EXPECT_LT((res.tangency_point - oracle.tangency).norm(), 1e-9 * std::max(1.0, z.norm()));
      }
    }
  }
}

TEST(IsExterior, Examples) {
  const auto sphere = SupportSurface::sphere(Dimension(2));
  EXPECT_TRUE(is_exterior(sphere, vec({2, 0, 0, 0})));
  EXPECT_FALSE(is_exterior(sphere, Vector::Zero(4)));
  EXPECT_NEAR(support_excess(sphere, vec({2, 0, 0, 0})), 1.0, 1e-12);

  const auto ell = SupportSurface::ellipsoid({1, 2, 1, 2});
  std::mt19937_64 rng(101);
  for (int i = 0; i < 20; ++i) {
    const Vector q = point_on_surface(ell, random_unit(rng, 4));
    EXPECT_FALSE(is_exterior(ell, q));
    EXPECT_FALSE(is_exterior(ell, 0.9 * q));
    EXPECT_TRUE(is_exterior(ell, 1.01 * q));
  }
}

TEST(DualMap, InteriorPointIsDomainError) {
  const auto circle = SupportSurface::sphere(Dimension(1));
  EXPECT_THROW(dual_map(circle, vec({0, 0}), Direction::forward), DomainError);
  EXPECT_THROW(dual_map(circle, vec({0.5, 0.2}), Direction::backward), DomainError);
  try {
    dual_map(circle, vec({0, 0}), Direction::forward);
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("not exterior"), std::string::npos);
  }
  EXPECT_THROW(dual_map(circle, vec({2, 0, 0, 0}), Direction::forward), DimensionMismatch);
}

TEST(DualMap, SpherePreservesNorm) {
  std::mt19937_64 rng(102);
  for (int m = 1; m <= 3; ++m) {
    const auto sphere = SupportSurface::sphere(Dimension(m));
    for (int i = 0; i < 20; ++i) {
      const Vector z = 2.0 * random_unit(rng, 2 * m);
      const MapResult res = dual_map(sphere, z, Direction::forward);
      EXPECT_NEAR(res.image.norm(), 2.0, 1e-9);
      // Circle oracle in the complex line through z.
      const Vector jz = j_apply(z);
      const Vector expected = -0.5 * z + (kSqrt3 / 2.0) * jz;
      EXPECT_LT((res.image - expected).norm(), 1e-9);
    }
  }
}

std::vector<SupportSurface> property_surfaces() {
  return {SupportSurface::sphere(Dimension(1)),
          SupportSurface::ellipsoid({1.0, 1.5}),
          SupportSurface::perturbed_sphere({{1.0}, 0.1}),
          SupportSurface::sphere(Dimension(2), 1.4),
          SupportSurface::ellipsoid({1.0, 1.3, 0.8, 1.6}),
          SupportSurface::perturbed_sphere({{1.0, 2.0}, 0.1}),
          SupportSurface::ellipsoid({1.0, 1.1, 1.2, 1.3, 1.4, 1.5}),
          SupportSurface::perturbed_sphere({{1.0, 2.0, 3.0}, 0.1})};
}

TEST(DualMap, ResultInvariants) {
  std::mt19937_64 rng(103);
  for (const auto& s : property_surfaces()) {
    for (int i = 0; i < 10; ++i) {
      const Vector z = random_exterior(rng, s);
      for (Direction d : {Direction::forward, Direction::backward}) {
        const MapResult res = dual_map(s, z, d);
        EXPECT_LT((point_on_surface(s, res.tangency_normal) - 0.5 * (z + res.image)).norm(), 1e-9);
        EXPECT_EQ(res.multiplier > 0, d == Direction::forward);
        const Vector chord = res.image - z;
        const Vector ju = j_apply(res.tangency_normal);
        const double cosine = std::abs(chord.dot(ju)) / chord.norm();
        EXPECT_LT(std::acos(std::min(1.0, cosine)), 1e-7);
        EXPECT_LT(res.residual, 1e-10);
        EXPECT_NEAR(res.tangency_normal.norm(), 1.0, 1e-12);
      }
    }
  }
}

TEST(InverseConsistency, Circle) {
  EXPECT_LT(inverse_consistency(SupportSurface::sphere(Dimension(1)), vec({2, 0})), 1e-9);
}

TEST(InverseConsistency, EllipsoidPlane) {
  const auto s = SupportSurface::ellipsoid({1.0, 1.5});
  std::mt19937_64 rng(104);
  for (int i = 0; i < 100; ++i) EXPECT_LT(inverse_consistency(s, random_exterior(rng, s)), 1e-8);
}

TEST(InverseConsistency, AllKinds) {
  std::mt19937_64 rng(105);
  for (const auto& s : property_surfaces()) {
    for (int i = 0; i < 10; ++i) EXPECT_LT(inverse_consistency(s, random_exterior(rng, s)), 1e-8);
  }
}

TEST(Symplecticity, Circle) {
  EXPECT_LT(symplecticity_defect(SupportSurface::sphere(Dimension(1)), vec({2, 0})), 1e-5);
}

TEST(Symplecticity, EllipsoidM2) {
  const auto s = SupportSurface::ellipsoid({1.0, 1.3, 0.8, 1.6});
  std::mt19937_64 rng(106);
  for (int i = 0; i < 20; ++i) EXPECT_LT(symplecticity_defect(s, random_exterior(rng, s)), 1e-5);
}

TEST(Symplecticity, PerturbedSphereM3) {
  const auto s = SupportSurface::perturbed_sphere({{1.0, 2.0, 3.0}, 0.1});
  std::mt19937_64 rng(107);
  for (int i = 0; i < 5; ++i) EXPECT_LT(symplecticity_defect(s, random_exterior(rng, s)), 1e-5);
}

TEST(Symplecticity, TranslationInvariant) {
  const auto s = SupportSurface::perturbed_sphere({{1.0, 2.0}, 0.1});
  const Vector t = vec({0.3, -0.2, 0.1, 0.25});
  const auto moved = s.translated(t);
  std::mt19937_64 rng(108);
  for (int i = 0; i < 5; ++i) {
    const Vector z = random_exterior(rng, s);
    EXPECT_NEAR(symplecticity_defect(s, z), symplecticity_defect(moved, z + t), 1e-10);
    const MapResult a = dual_map(s, z, Direction::forward);
    const MapResult b = dual_map(moved, z + t, Direction::forward);
    EXPECT_LT((a.image + t - b.image).norm(), 1e-10);
  }
}

TEST(DualMap, WarmStartAgrees) {
  const auto s = SupportSurface::ellipsoid({1.0, 1.3, 0.8, 1.6});
  std::mt19937_64 rng(109);
  for (int i = 0; i < 10; ++i) {
    const Vector z = random_exterior(rng, s);
    const MapResult cold = dual_map(s, z, Direction::forward);
    const Vector nudged = (cold.tangency_normal + 1e-3 * random_unit(rng, 4)).normalized();
    const MapResult warm = dual_map_from(s, z, Direction::forward, nudged, cold.multiplier);
    EXPECT_LT((cold.image - warm.image).norm(), 1e-10);
  }
}

TEST(DualMap, Deterministic) {
  const auto s = SupportSurface::perturbed_sphere({{1.0, 2.0}, 0.1});
  const Vector z = vec({1.7, -0.4, 0.9, 0.2});
  const MapResult a = dual_map(s, z, Direction::forward);
  const MapResult b = dual_map(s, z, Direction::forward);
  EXPECT_EQ(a.image, b.image);
  EXPECT_EQ(a.iterations, b.iterations);
}

}  // namespace
}  // namespace dualbill
