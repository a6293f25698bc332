#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace crnhj;

namespace {

JumpGraph two_node_graph(double phi01, double phi10, double h) {
  JumpGraph g;
  g.h = h;
  g.add_node({{1, phi01}});
  g.add_node({{0, phi10}});
  return g;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 300 && hi - lo > 0.0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Nested bisection on u - dt H u = f for two nodes; the inner solve is monotone in u1.
std::array<double, 2> two_node_resolvent(double p01, double p10, double h, double dt, double f0,
                                         double f1) {
  double lo = std::min(f0, f1) - 1.0, hi = std::max(f0, f1) + 1.0;
  auto inner = [&](double u0) {
    return bisect([&](double u1) { return u1 - dt * p10 * std::expm1((u0 - u1) / h) - f1; }, lo, hi);
  };
  double u0 = bisect(
      [&](double u) { return u - dt * p01 * std::expm1((inner(u) - u) / h) - f0; }, lo, hi);
  return {u0, inner(u0)};
}

GridFunction random_function(std::size_t n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  GridFunction f(n);
  for (double& x : f) x = d(rng);
  return f;
}

}  // namespace

TEST(ApplyHh, TwoNodeValues) {
  JumpGraph g = two_node_graph(2.0, 3.0, 1.0);
  GridFunction Hu = apply_Hh(g, {0.0, 1.0});
  EXPECT_NEAR(Hu[0], 2.0 * (std::exp(1.0) - 1.0), 1e-14);
  EXPECT_NEAR(Hu[1], 3.0 * (std::exp(-1.0) - 1.0), 1e-14);
}

TEST(ApplyHh, ConstantsAreAnnihilated) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.25));
  EXPECT_EQ(sup_norm(apply_Hh(g, GridFunction(g.size(), 4.2))), 0.0);
}

TEST(ApplyHh, ConservedDataIsStationary) {
  for (double h : {1.0, 0.5, 0.25}) {
    LatticeGrid grid = fixtures::example_grid(h);
    GridFunction u(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p)
      u[p] = static_cast<double>(grid.index[p][0] + grid.index[p][1]) * h;
    EXPECT_LE(sup_norm(apply_Hh(jump_graph(grid), u)), 1e-14) << h;
  }
}

TEST(ApplyHh, OverflowIsReported) {
  JumpGraph g = two_node_graph(1.0, 1.0, 0.01);
  try {
    apply_Hh(g, {0.0, 10.0});
    FAIL() << "expected Overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Overflow);
  }
}

TEST(Resolvent, TwoNodeMatchesBisection) {
  for (auto [f0, f1, dt] : {std::tuple{0.0, 1.0, 0.1}, {0.3, -0.2, 1.0}, {2.0, 2.5, 0.01}}) {
    JumpGraph g = two_node_graph(2.0, 1.0, 1.0);
    ResolventSolve rs = resolvent(g, {f0, f1}, dt);
    auto oracle = two_node_resolvent(2.0, 1.0, 1.0, dt, f0, f1);
    EXPECT_NEAR(rs.u[0], oracle[0], 1e-12);
    EXPECT_NEAR(rs.u[1], oracle[1], 1e-12);
  }
}

TEST(Resolvent, SpecTwoPointExample) {
  JumpGraph g = two_node_graph(2.0, 3.0, 0.5);
  ResolventSolve rs = resolvent(g, {0.0, 0.5}, 0.1);
  auto oracle = two_node_resolvent(2.0, 3.0, 0.5, 0.1, 0.0, 0.5);
  EXPECT_NEAR(rs.u[0], oracle[0], 1e-12);
  EXPECT_NEAR(rs.u[1], oracle[1], 1e-12);
}

TEST(Resolvent, ResidualDecayBound) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.5));
  std::mt19937_64 rng(17);
  for (double dt : {0.01, 0.1, 1.0}) {
    GridFunction f = random_function(g.size(), rng, 0.5);
    GridFunction u = resolvent(g, f, dt).u;
    EXPECT_LE(sup_diff(u, f) / dt, sup_norm(apply_Hh(g, f)) + 1e-9) << dt;
    EXPECT_LE(sup_norm(apply_Hh(g, u)), sup_norm(apply_Hh(g, f)) + 1e-9) << dt;
  }
}

TEST(Resolvent, BoundsMonotonicityAndContraction) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.5));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    GridFunction f = random_function(g.size(), rng, 1.0);
    GridFunction g2 = random_function(g.size(), rng, 1.0);
    double dt = 0.001 + 0.5 * unit(rng);
    GridFunction u = resolvent(g, f, dt).u;
    GridFunction v = resolvent(g, g2, dt).u;
    auto [fmin, fmax] = std::minmax_element(f.begin(), f.end());
    for (double x : u) {
      EXPECT_GE(x, *fmin - 1e-10);
      EXPECT_LE(x, *fmax + 1e-10);
    }
    EXPECT_LE(sup_diff(u, v), sup_diff(f, g2) + 1e-10);
    GridFunction up = f;
    for (double& x : up) x += 0.1 * unit(rng);
    GridFunction w = resolvent(g, up, dt).u;
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_GE(w[i], u[i] - 1e-10);
  }
}

TEST(Resolvent, ResidualMeetsTolerance) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.25));
  std::mt19937_64 rng(3);
  GridFunction f = random_function(g.size(), rng, 2.0);
  ResolventSolve rs = resolvent(g, f, 0.05);
  EXPECT_LE(rs.residual, 1e-12 * (1.0 + sup_norm(f)));
  GridFunction Hu = apply_Hh(g, rs.u);
  for (std::size_t i = 0; i < f.size(); ++i)
    EXPECT_NEAR(rs.u[i] - 0.05 * Hu[i], f[i], 1e-11);
}

TEST(Resolvent, RejectsBadInput) {
  JumpGraph g = two_node_graph(1.0, 1.0, 1.0);
  EXPECT_THROW(resolvent(g, {0.0, 0.0}, 0.0), Error);
  EXPECT_THROW(resolvent(g, {0.0}, 0.1), Error);
}

// exp(u/h) solves the linear backward equation; for two states it has a closed form.
TEST(EvolveOde, TwoStateClosedForm) {
  JumpGraph g = two_node_graph(2.0, 1.0, 1.0);
  GridFunction u0{0.0, 0.5};
  double f0 = 1.0, f1 = std::exp(0.5);
  double c = (f0 + 2.0 * f1) / 3.0;
  for (double t : {0.05, 0.3, 1.0}) {
    GridFunction u = evolve_ode(g, u0, t);
    double d = (f0 - f1) * std::exp(-3.0 * t);
    EXPECT_NEAR(u[0], std::log(c + 2.0 * d / 3.0), 1e-9);
    EXPECT_NEAR(u[1], std::log(c - d / 3.0), 1e-9);
  }
}

TEST(EvolveOde, ContractionAndTimeDerivativeBound) {
  std::mt19937_64 rng(23);
  for (double h : {1.0, 0.5, 0.25}) {
    LatticeGrid grid = fixtures::example_grid(h);
    JumpGraph g = jump_graph(grid);
    // Lipschitz data: a random linear function plus a smooth ripple.
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    double a = c(rng), b = c(rng);
    GridFunction u0 = grid.evaluate([&](const Vec& x) { return a * x[0] + b * x[1] + 0.3 * std::sin(x[0]); });
    const double bound = sup_norm(apply_Hh(g, u0));
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(0.01 * k);
    auto snaps = evolve_ode_times(g, u0, times);
    auto [lo, hi] = std::minmax_element(u0.begin(), u0.end());
    double worst = 0.0;
    for (std::size_t k = 0; k < snaps.size(); ++k) {
      for (double x : snaps[k]) {
        EXPECT_GE(x, *lo - 1e-10);
        EXPECT_LE(x, *hi + 1e-10);
      }
      if (k > 0) worst = std::max(worst, sup_diff(snaps[k], snaps[k - 1]) / 0.01);
    }
    EXPECT_LE(worst, bound + 1e-8) << h;
  }
}

TEST(EvolveOde, SnapshotsMatchIndividualSolves) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.5));
  std::mt19937_64 rng(5);
  GridFunction u0 = random_function(g.size(), rng, 1.0);
  auto snaps = evolve_ode_times(g, u0, {0.0, 0.1, 0.3});
  EXPECT_EQ(snaps[0], u0);
  EXPECT_LE(sup_diff(snaps[2], evolve_ode(g, u0, 0.3)), 1e-9);
}

TEST(EvolveSemigroup, ConvergesToTheOdeAtFirstOrder) {
  JumpGraph g = jump_graph(fixtures::example_grid(1.0));
  std::mt19937_64 rng(11);
  GridFunction u0 = random_function(g.size(), rng, 1.0);
  GridFunction ref = evolve_ode(g, u0, 0.2);
  double gap1 = sup_diff(evolve_semigroup(g, u0, 0.2, 0.01), ref);
  double gap2 = sup_diff(evolve_semigroup(g, u0, 0.2, 0.005), ref);
  EXPECT_LE(gap1, 10.0 * 0.01);
  EXPECT_LE(gap2, 10.0 * 0.005);
  // First order: the ratio tends to 1/2 as dt shrinks.
  EXPECT_NEAR(gap2 / gap1, 0.5, 0.05);
}

TEST(EvolveSemigroup, ConstantsAndConservedDataAreFixed) {
  LatticeGrid grid = fixtures::example_grid(0.5);
  JumpGraph g = jump_graph(grid);
  EXPECT_EQ(evolve_semigroup(g, GridFunction(g.size(), -1.25), 0.3, 0.05), GridFunction(g.size(), -1.25));
  GridFunction u0(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    u0[p] = static_cast<double>(grid.index[p][0] + grid.index[p][1]) * 0.5;
  EXPECT_LE(sup_diff(evolve_semigroup(g, u0, 0.3, 0.05), u0), 1e-12);
  EXPECT_LE(sup_diff(evolve_ode(g, u0, 0.3), u0), 1e-12);
}

TEST(WkbExactValue, RestrictsToTheReachableSet) {
  LatticeGrid grid = fixtures::example_grid(1.0);
  JumpGraph g = jump_graph(grid);
  GridFunction u0 = grid.evaluate([](const Vec& x) { return x[0]; });
  std::size_t start = fixtures::index_of(grid, {7.0, 3.0});
  EXPECT_NEAR(wkb_exact_value(g, u0, start, 0.3), evolve_ode(g, u0, 0.3)[start], 1e-9);
}

TEST(OptimalControl, WeightedSumVanishes) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.5));
  std::mt19937_64 rng(2);
  GridFunction u = random_function(g.size(), rng, 0.5);
  ControlField v = optimal_control(g, u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = -v.diagonal[i] * g.total_phi(i);
    for (std::size_t e = g.offset[i]; e < g.offset[i + 1]; ++e) {
      EXPECT_GE(v.edge[e], 0.0);
      s += v.edge[e] * g.edges[e].phi;
    }
    EXPECT_NEAR(s, 0.0, 1e-12);
  }
}

TEST(RunningCost, ZeroAtTheUncontrolledVelocity) {
  JumpGraph g = jump_graph(fixtures::example_grid(0.5));
  ControlField v = optimal_control(g, GridFunction(g.size(), 1.0));
  EXPECT_EQ(sup_norm(running_cost(g, v)), 0.0);
}

TEST(Variational, ExactCases) {
  LatticeGrid grid = fixtures::example_grid(1.0);
  JumpGraph g = jump_graph(grid);
  std::size_t start = fixtures::index_of(grid, {7.0, 3.0});
  VariationalCheck c = check_variational_representation(g, GridFunction(g.size(), 2.0), start, 0.5, 5);
  EXPECT_NEAR(c.lhs, 2.0, 1e-12);
  EXPECT_NEAR(c.rhs, 2.0, 1e-12);
  EXPECT_EQ(c.running_cost, 0.0);
  GridFunction u0 = grid.evaluate([](const Vec& x) { return x[0] + x[1]; });
  c = check_variational_representation(g, u0, start, 0.5, 5);
  EXPECT_NEAR(c.lhs, 10.0, 1e-12);
  EXPECT_NEAR(c.rhs, 10.0, 1e-10);
}

TEST(Variational, RepresentationErrorShrinksWithSteps) {
  LatticeGrid grid = fixtures::example_grid(1.0);
  JumpGraph g = jump_graph(grid);
  std::mt19937_64 rng(13);
  GridFunction u0 = random_function(g.size(), rng, 1.0);
  std::size_t start = fixtures::index_of(grid, {7.0, 3.0});
  const double t = 0.5;
  double prev = 0.0;
  for (std::size_t n : {20, 40, 80}) {
    VariationalCheck c = check_variational_representation(g, u0, start, t, n);
    double err = std::abs(c.lhs - c.rhs);
    EXPECT_LE(err, 5.0 * t / n) << n;
    if (prev > 0.0) {
      EXPECT_LE(err, 0.5 * prev * 1.05) << n;
    }
    prev = err;
  }
}
