#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "conical/builtins.hpp"
#include "conical/diagnostics.hpp"
#include "conical/solver.hpp"
#include "oracles.hpp"

using namespace conical;
using std::numbers::pi;

TEST(Discriminant, ClosedForms) {
  RMatrix m(2, 2);
  m << 3, 2, 2, 1;
  EXPECT_DOUBLE_EQ(discriminant2x2(m), 4 + 16);
  CMatrix c(2, 2);
  c << 1, Complex(0, 1), Complex(0, -1), 1;
  EXPECT_DOUBLE_EQ(discriminant2x2(c), 4);
  EXPECT_THROW(discriminant2x2(RMatrix(RMatrix::Zero(3, 3))), DimensionError);
}

TEST(Discriminant, EqualsSquaredGap) {
  const auto f = builtin("paper-2x2-trig");
  const ParameterPoint r{0.4, -0.9};
  const auto es = eigensystem(f, r);
  const double gap = es.values[1] - es.values[0];
  EXPECT_NEAR(discriminant2x2(f.evaluate(r)), gap * gap, 1e-12);
  EXPECT_NEAR(group_discriminant(es, 1, 2), gap * gap, 1e-15);
}

TEST(Certify, CanonicalCone) {
  const auto c = certify(builtin("canonical-cone"), {0.0, 0.0}, {ModeTag::Double2D, {}});
  EXPECT_NEAR(c.hessian(0, 0), 8.0, 1e-14);
  EXPECT_NEAR(c.hessian(1, 1), 8.0, 1e-14);
  EXPECT_NEAR(c.hessian(0, 1), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.det_j), 4.0, 1e-14);
  EXPECT_TRUE(c.nondegenerate);
  EXPECT_LE(c.fd_hessian_residual, 1e-6);
}

TEST(Certify, RejectsNonDegeneratePoints) {
  EXPECT_THROW(certify(builtin("canonical-cone"), {0.1, 0.0}, {ModeTag::Double2D, {}}), NotADegeneracy);
}

TEST(Certify, RankOneHessianIdentity) {
  const auto c = certify(builtin("rank-one-4x4"), {pi / 3, pi / 3}, {ModeTag::Double2D, {}});
  EXPECT_EQ(c.pair_index, 2u);
  EXPECT_TRUE(c.nondegenerate);
  EXPECT_LE(c.fd_hessian_residual, 1e-4);
  EXPECT_GT(c.hessian_eigenvalues.minCoeff(), 0.0);
}

TEST(Certify, GrapheneMergingPointIsDegenerate) {
  const auto c = certify(builtin("graphene", {{"p", 0.5}}), {pi, pi}, {ModeTag::InversionSymmetric2D, {}});
  EXPECT_FALSE(c.nondegenerate);
  EXPECT_NEAR(c.det_j, 0.0, 1e-12);
}

TEST(Certify, GrapheneDiracPoint) {
  const auto pts = oracle::graphene_dirac_points(0.6);
  ASSERT_EQ(pts.size(), 2u);
  for (const auto& p : pts) {
    const auto c = certify(builtin("graphene", {{"p", 0.6}}), p, {ModeTag::InversionSymmetric2D, {}});
    EXPECT_TRUE(c.nondegenerate);
    EXPECT_LE(c.fd_hessian_residual, 1e-4);
  }
}

TEST(Certify, TripleUsesPairwiseDiscriminant) {
  const auto c = certify(builtin("triple-5param"), ParameterPoint(RVector::Zero(5)), {ModeTag::Triple5D, {}});
  EXPECT_TRUE(c.nondegenerate);
  EXPECT_LE(c.fd_hessian_residual, 1e-4);
  EXPECT_NEAR(std::abs(c.det_j), 48.0, 1e-10);
}

TEST(Certify, HessianIsPositiveSemidefinite) {
  for (int seed = 0; seed < 30; ++seed) {
    const auto f = builtin("linear-random", {{"seed", static_cast<double>(seed)}, {"n", 3}});
    const auto r = solve(f, {0.0, 0.0}, {ModeTag::Double2D, 1});
    if (r.outcome != Outcome::Converged) continue;
    const auto c = certify(f, r.final, {ModeTag::Double2D, 1});
    EXPECT_GE(c.hessian_eigenvalues.minCoeff(), -1e-12 * c.hessian_eigenvalues.maxCoeff());
  }
}

TEST(Berry, CanonicalConeLoops) {
  const auto f = builtin("canonical-cone");
  for (double radius : {1e-3, 0.1, 1.0, 10.0})
    EXPECT_EQ(berry_loop(f, {{0.0, 0.0}, radius, 64, 0.0}, 1), Rotation::Pi) << radius;
  EXPECT_EQ(berry_loop(f, {{0.1, 0.1}, 0.2, 64, 0.0}, 1), Rotation::Pi);
  EXPECT_EQ(berry_loop(f, {{0.3, 0.3}, 0.2, 64, 0.0}, 1), Rotation::Zero);
  EXPECT_EQ(berry_loop(f, {{2.0, 0.0}, 1.0, 64, 0.0}, 1), Rotation::Zero);
  EXPECT_EQ(berry_loop(f, {{-1.0, 3.0}, 0.5, 64, 0.0}, 1), Rotation::Zero);
}

TEST(Berry, GrapheneLoops) {
  const auto f = builtin("graphene", {{"p", 0.6}});
  for (const auto& p : oracle::graphene_dirac_points(0.6)) {
    EXPECT_EQ(berry_loop(f, {p, 0.05, 64, 0.0}, 1), Rotation::Pi);
    EXPECT_EQ(berry_loop(f, {p.shifted(0, 0.5), 0.05, 64, 0.0}, 1), Rotation::Zero);
  }
}

TEST(Berry, Errors) {
  const auto f = builtin("canonical-cone");
  EXPECT_THROW(berry_loop(f, {{0.0, 0.0}, 0.0, 64, 0.0}, 1), Error);
  EXPECT_THROW(berry_loop(f, {{0.0, 0.0}, 1.0, 8, 0.0}, 1), Error);
  EXPECT_THROW(berry_loop(builtin("magnetic-graph-10x10"), {{0.0, 0.0}, 1.0, 64, 0.0}, 1), DimensionError);
  // the loop passes through the cone point
  EXPECT_THROW(berry_loop(f, {{0.5, 0.0}, 0.5, 64, pi}, 1), GapCollapse);
}

TEST(GridScan, CanonicalCone) {
  const Box region{{-1.0, -1.0}, {1.0, 1.0}};
  const auto s = grid_scan(builtin("canonical-cone"), region, 5, 1);
  ASSERT_EQ(s.candidates.size(), 1u);
  EXPECT_TRUE(s.candidates[0].contains({0.0, 0.0}));
  EXPECT_TRUE(s.inconclusive.empty());
}

TEST(GridScan, ConeOnCellCornerIsInconclusive) {
  const Box region{{-1.0, -1.0}, {1.0, 1.0}};
  const auto s = grid_scan(builtin("canonical-cone"), region, 4, 1);
  EXPECT_TRUE(s.candidates.empty());
  EXPECT_FALSE(s.inconclusive.empty());
}

TEST(GridScan, GrapheneAboveAndBelowMerging) {
  const Box region{{0.0, 0.0}, {2 * pi, 2 * pi}};
  const auto above = grid_scan(builtin("graphene", {{"p", 0.6}}), region, 16, 1);
  ASSERT_EQ(above.candidates.size(), 2u);
  for (const auto& p : oracle::graphene_dirac_points(0.6)) {
    int hits = 0;
    for (const auto& c : above.candidates) hits += c.contains(p);
    EXPECT_EQ(hits, 1);
  }
  const auto below = grid_scan(builtin("graphene", {{"p", 0.45}}), region, 16, 1);
  EXPECT_TRUE(below.candidates.empty());
  EXPECT_TRUE(below.inconclusive.empty());
}

TEST(GridScan, TrigFamilyMatchesOracle) {
  const auto oracle_points = oracle::trig_conical_points();
  const Box region{{-pi, -pi}, {pi, pi}};
  const auto s = grid_scan(builtin("paper-2x2-trig"), region, 16, 1);
  EXPECT_EQ(s.candidates.size(), oracle_points.size());
  for (const auto& p : oracle_points) {
    int hits = 0;
    for (const auto& c : s.candidates) hits += c.contains(p);
    EXPECT_EQ(hits, 1);
  }
}

TEST(GridScan, ThreadCountDoesNotChangeResult) {
  const Box region{{-pi, -pi}, {pi, pi}};
  const auto f = builtin("paper-2x2-trig");
  const auto a = grid_scan(f, region, 12, 1, 16, 1);
  const auto b = grid_scan(f, region, 12, 1, 16, 4);
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(a.candidates[i].ix, b.candidates[i].ix);
    EXPECT_EQ(a.candidates[i].iy, b.candidates[i].iy);
  }
}

TEST(GridScan, Errors) {
  const Box region{{-1.0, -1.0}, {1.0, 1.0}};
  EXPECT_THROW(grid_scan(builtin("canonical-cone"), region, 0, 1), Error);
  EXPECT_THROW(grid_scan(builtin("canonical-cone"), Box{{1.0, 1.0}, {-1.0, -1.0}}, 4, 1), Error);
  EXPECT_THROW(grid_scan(builtin("magnetic-graph-10x10"), region, 4, 1), DimensionError);
}
