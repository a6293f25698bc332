#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace crnhj;

namespace {
const Vec kX0{7.0, 3.0};
const Vec kNu{-1.0, 1.0};
}  // namespace

TEST(SegmentGrid, CentredChordWindow) {
  SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, 0.2);
  EXPECT_EQ(s.k_a, -5);
  EXPECT_EQ(s.k_b, 5);
  EXPECT_EQ(s.size(), 11u);
  EXPECT_EQ(s.point(0.0), kX0);
  Vec end = s.point(s.alpha(s.k_b));
  EXPECT_NEAR(end[0], 6.0, 1e-12);
  EXPECT_NEAR(end[1], 4.0, 1e-12);
}

TEST(SegmentGrid, PhaseIsReducedModuloTheMesh) {
  SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.5, 0.2);
  EXPECT_NEAR(s.r, 0.1, 1e-12);
  EXPECT_EQ(s.k_a, -5);
  EXPECT_EQ(s.k_b, 4);
  SegmentGrid neg = build_segment_grid(example_domain(), kX0, kNu, 0.0, -0.1, 0.2);
  EXPECT_EQ(neg.r, -0.1);
}

TEST(SegmentGrid, OffsetLinesAreShorter) {
  SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.6, 0.0, 0.1);
  EXPECT_NEAR(s.a, -0.8, 1e-12);
  EXPECT_NEAR(s.b, 0.8, 1e-12);
  EXPECT_EQ(s.size(), 17u);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_TRUE(example_domain().contains(s.point(s.alpha_at(i))));
}

TEST(SegmentGrid, Errors) {
  EXPECT_THROW(build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, -1.0), Error);
  try {
    build_segment_grid(example_domain(), kX0, kNu, 2.0, 0.0, 0.1);
    FAIL() << "expected NoIntersection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoIntersection);
  }
}

TEST(SegmentGraph, EndsHaveNoOutwardJumps) {
  SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, 0.5);
  JumpGraph g = segment_graph(s, segment_hamiltonian(example_network(), s));
  EXPECT_EQ(g.out(0).size(), 1u);
  EXPECT_EQ(g.out(g.size() - 1).size(), 1u);
  // Phi~+(alpha) = 7 - alpha and Phi~-(alpha) = 3 + alpha along this chord.
  EXPECT_DOUBLE_EQ(g.out(0)[0].phi, 7.0 - s.alpha_at(0));
  EXPECT_DOUBLE_EQ(g.out(1)[1].phi, 3.0 + s.alpha_at(1));
}

// From (7, 3) the planar process only moves along the chord, so both solvers agree.
TEST(SolveW, MatchesThePlanarSolverOnTheChord) {
  for (double h : {0.5, 0.25}) {
    SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, h);
    auto u0 = [](const Vec& x) { return x[0]; };
    GridFunction w = solve_w(s, segment_hamiltonian(example_network(), s), sample_on_segment(s, u0), 0.2);
    LatticeGrid grid = fixtures::example_grid(h);
    GridFunction u = grid.evaluate(u0);
    double planar = wkb_exact_value(jump_graph(grid), u, fixtures::index_of(grid, kX0), 0.2);
    EXPECT_NEAR(w[static_cast<std::size_t>(-s.k_a)], planar, 1e-9) << h;
  }
}

TEST(SolveW, SizeMismatch) {
  SegmentGrid s = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, 0.5);
  EXPECT_THROW(solve_w(s, segment_hamiltonian(example_network(), s), GridFunction(2), 0.1), Error);
}

TEST(MatchSegmentGrid, PreservesThePointCount) {
  for (double h : {0.2, 0.1, 0.05}) {
    SegmentGrid base = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, h);
    SegmentGrid m = match_segment_grid(example_domain(), kX0, kNu, h * h, 0.0, h, base.size());
    EXPECT_EQ(m.size(), base.size());
    EXPECT_NEAR(m.h, h, 0.01 * h);
  }
}

TEST(MatchSegmentGrid, ImpossibleCount) {
  try {
    match_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, 0.2, 0);
    FAIL() << "expected NoMatchingMesh";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoMatchingMesh);
  }
}

TEST(CompareMatchedGrids, ShrinksWithTheMesh) {
  auto u0 = [](const Vec& x) { return x[0]; };
  double prev = 1e9;
  for (double h : {0.2, 0.1}) {
    SegmentGrid s0 = build_segment_grid(example_domain(), kX0, kNu, 0.0, 0.0, h);
    SegmentGrid sb = match_segment_grid(example_domain(), kX0, kNu, h * h, 0.0, h, s0.size());
    GridFunction w0 = solve_w(s0, segment_hamiltonian(example_network(), s0), sample_on_segment(s0, u0), 0.2);
    GridFunction wb = solve_w(sb, segment_hamiltonian(example_network(), sb), sample_on_segment(sb, u0), 0.2);
    double d = compare_matched_grids(w0, wb);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_THROW(compare_matched_grids(GridFunction(3), GridFunction(4)), Error);
}
