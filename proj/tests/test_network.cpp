#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"

using namespace crnhj;

TEST(LmaIntensity, ConversionForwardIsFirstCoordinate) {
  EXPECT_DOUBLE_EQ(lma_intensity(example_network(), {7.0, 3.0}, 0, Direction::Forward), 7.0);
  EXPECT_DOUBLE_EQ(lma_intensity(example_network(), {7.0, 3.0}, 0, Direction::Backward), 3.0);
}

TEST(LmaIntensity, ZeroFactorAndZeroPower) {
  EXPECT_EQ(lma_intensity(example_network(), {0.0, 3.0}, 0, Direction::Forward), 0.0);
  ReactionNetwork net{2, {{0, 0}}, {{1, 0}}, {4.0}, {1.0}};
  EXPECT_EQ(lma_intensity(net, {0.0, 0.0}, 0, Direction::Forward), 4.0);
}

TEST(LmaIntensity, HigherOrderProduct) {
  ReactionNetwork net{2, {{2, 1}}, {{0, 0}}, {0.5}, {1.0}};
  EXPECT_DOUBLE_EQ(lma_intensity(net, {3.0, 4.0}, 0, Direction::Forward), 0.5 * 3 * 3 * 4);
}

TEST(ReactionNetwork, ValidateRejectsBadInput) {
  ReactionNetwork zero{2, {{1, 0}}, {{1, 0}}, {1.0}, {1.0}};
  EXPECT_THROW(zero.validate(), Error);
  ReactionNetwork neg{2, {{1, 0}}, {{0, 1}}, {-1.0}, {1.0}};
  EXPECT_THROW(neg.validate(), Error);
  EXPECT_NO_THROW(example_network().validate());
}

TEST(Domain, RejectsShapesTouchingTheAxes) {
  EXPECT_THROW(Domain::ball({1.0, 1.0}, 1.0), Error);
  EXPECT_THROW(Domain::box({0.0, 1.0}, {1.0, 2.0}), Error);
  EXPECT_NO_THROW(Domain::box({0.5, 1.0}, {1.0, 2.0}));
}

TEST(Domain, PolygonMustBeConvexCounterclockwise) {
  std::vector<std::array<double, 2>> ccw{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  EXPECT_NO_THROW(Domain::polygon(ccw));
  std::vector<std::array<double, 2>> cw(ccw.rbegin(), ccw.rend());
  EXPECT_THROW(Domain::polygon(cw), Error);
  std::vector<std::array<double, 2>> dart{{1, 1}, {4, 1}, {2, 2}, {1, 4}};
  EXPECT_THROW(Domain::polygon(dart), Error);
}

TEST(Domain, MembershipWithinTolerance) {
  Domain d = example_domain();
  EXPECT_TRUE(d.contains({8.0, 4.0}));
  EXPECT_TRUE(d.contains({7.0, 3.0 + std::sqrt(2.0)}));
  EXPECT_FALSE(d.contains({8.0, 4.001}));
}

// Brute-force enumeration of integer points within squared distance 2 of (7, 3).
TEST(BuildGrid, UnitMeshMatchesEnumeration) {
  std::set<std::vector<long>> expect;
  for (long i = 0; i <= 12; ++i)
    for (long j = 0; j <= 12; ++j)
      if ((i - 7) * (i - 7) + (j - 3) * (j - 3) <= 2) expect.insert({i, j});
  LatticeGrid g = fixtures::example_grid(1.0);
  std::set<std::vector<long>> got(g.index.begin(), g.index.end());
  EXPECT_EQ(got, expect);
  EXPECT_EQ(g.size(), 9u);
}

TEST(BuildGrid, NeighborLinksAreSymmetricAndShifted) {
  LatticeGrid g = fixtures::example_grid(0.25);
  ReactionNetwork net = example_network();
  auto nu = net.reaction_vector(0);
  std::size_t links = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (auto k = g.fwd[p]) {
      ++links;
      ASSERT_TRUE(g.bwd[*k].has_value());
      EXPECT_EQ(*g.bwd[*k], p);
      for (std::size_t l = 0; l < 2; ++l) EXPECT_EQ(g.index[*k][l] - g.index[p][l], nu[l]);
    }
    if (auto k = g.bwd[p]) {
      EXPECT_EQ(*g.fwd[*k], p);
    }
    // A missing link means the shifted point is outside the closed ball.
    Vec shifted{g.coords[p][0] + 0.25 * nu[0], g.coords[p][1] + 0.25 * nu[1]};
    EXPECT_EQ(g.fwd[p].has_value(), example_domain().contains(shifted));
  }
  EXPECT_GT(links, 0u);
}

TEST(BuildGrid, IntensitiesFollowMassAction) {
  LatticeGrid g = fixtures::example_grid(0.5);
  for (std::size_t p = 0; p < g.size(); ++p) {
    EXPECT_DOUBLE_EQ(g.phi_plus[p], g.coords[p][0]);
    EXPECT_DOUBLE_EQ(g.phi_minus[p], g.coords[p][1]);
  }
}

TEST(BuildGrid, ThreeSpeciesBoxCount) {
  ReactionNetwork net{3, {{1, 0, 0}}, {{0, 1, 0}}, {1.0}, {1.0}};
  LatticeGrid g = build_grid(Domain::box({1.0, 1.0, 1.0}, {2.0, 3.0, 1.5}), net, 0.5);
  EXPECT_EQ(g.size(), 3u * 5u * 2u);
}

TEST(BuildGrid, EmptyGridIsAnError) {
  try {
    build_grid(Domain::ball({0.5, 0.5}, 0.2), example_network(), 1.0);
    FAIL() << "expected EmptyGrid";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyGrid);
  }
  EXPECT_THROW(build_grid(example_domain(), example_network(), 0.0), Error);
}

TEST(LatticeGrid, NearestAndFind) {
  LatticeGrid g = fixtures::example_grid(0.5);
  EXPECT_EQ(g.coords[g.nearest({7.1, 3.2})], (Vec{7.0, 3.0}));
  EXPECT_FALSE(g.find({0, 0}).has_value());
}

TEST(SegmentBounds, ChordOfTheBall) {
  Vec nu{-1.0, 1.0};
  auto [a0, b0] = segment_bounds(example_domain(), {7.0, 3.0}, nu, 0.0);
  EXPECT_NEAR(a0, -1.0, 1e-12);
  EXPECT_NEAR(b0, 1.0, 1e-12);
  // |beta nu_perp|^2 + alpha^2 |nu|^2 = 2 with |nu|^2 = 2.
  const double beta = 0.6, half = std::sqrt(1.0 - beta * beta);
  auto [a, b] = segment_bounds(example_domain(), {7.0, 3.0}, nu, beta);
  EXPECT_NEAR(a, -half, 1e-12);
  EXPECT_NEAR(b, half, 1e-12);
}

TEST(SegmentBounds, TangentAndMissingLines) {
  Vec nu{-1.0, 1.0};
  auto [a, b] = segment_bounds(example_domain(), {7.0, 3.0}, nu, 1.0);
  EXPECT_NEAR(a, b, 1e-6);
  try {
    segment_bounds(example_domain(), {7.0, 3.0}, nu, 1.5);
    FAIL() << "expected NoIntersection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoIntersection);
  }
}

TEST(Perpendicular, IsOrthogonal) {
  for (Vec nu : {Vec{-1, 1}, Vec{2, 3}, Vec{-2, 1}}) {
    Vec p = perpendicular(nu);
    EXPECT_EQ(nu[0] * p[0] + nu[1] * p[1], 0.0);
  }
}
