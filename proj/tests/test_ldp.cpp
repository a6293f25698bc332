#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace crnhj;

TEST(DecomposeStart, LatticeStartHasNoOffset) {
  LatticeGrid g = fixtures::example_grid(0.25);
  StartDecomposition d = decompose_start(example_domain(), g, {7.0, 3.0}, {-1.0, 1.0});
  EXPECT_EQ(d.point, (Vec{7.0, 3.0}));
  EXPECT_EQ(d.beta, 0.0);
  EXPECT_EQ(d.r, 0.0);
  EXPECT_TRUE(d.compliant);
}

TEST(DecomposeStart, OffLatticeStartReconstructs) {
  const Vec x0{7.0 + 1.0 / 30.0, 3.0};
  const Vec nu{-1.0, 1.0};
  for (double h : {0.2, 0.1, 0.05}) {
    LatticeGrid g = fixtures::example_grid(h);
    StartDecomposition d = decompose_start(example_domain(), g, x0, nu);
    Vec perp = perpendicular(nu);
    double along = d.r + static_cast<double>(d.k0) * h;
    EXPECT_NEAR(x0[0] + d.beta * perp[0] + along * nu[0], d.point[0], 1e-12);
    EXPECT_NEAR(x0[1] + d.beta * perp[1] + along * nu[1], d.point[1], 1e-12);
    EXPECT_NE(d.beta, 0.0);
    EXPECT_TRUE(d.compliant);
    EXPECT_LE(std::abs(d.r), 0.5 * h + 1e-12);
  }
}

TEST(RateFunction2D, InfiniteOffTheChord) {
  Hamiltonian1D H = chord_hamiltonian(example_network(), example_domain(), {7.0, 3.0});
  RateFunction2D I{rate_function(H, 0.0, 0.2, 201, 20), {7.0, 3.0}, {-1.0, 1.0}};
  EXPECT_TRUE(std::isinf(I({7.0, 3.5})));
  EXPECT_FALSE(std::isinf(I({6.9, 3.1})));
}

TEST(Varadhan, DiscrepancyShrinksAndMcIsConsistent) {
  VaradhanOptions opt;
  opt.mc_samples = 20000;
  opt.continuum = {1001, 201, 20};
  auto u0 = [](const Vec& x) { return x[0]; };
  VaradhanReport rep = varadhan_check(example_network(), example_domain(), {7.0, 3.0}, u0, 0.2,
                                      {0.5, 0.25}, opt);
  ASSERT_EQ(rep.entries.size(), 2u);
  EXPECT_LT(rep.entries[1].discrepancy, rep.entries[0].discrepancy);
  EXPECT_NEAR(rep.continuous, rep.continuous_variational, 0.05);
  const auto& coarse = rep.entries[0];
  EXPECT_LT(std::abs(coarse.mc.value - coarse.exact), 3.0 * coarse.mc.std_error);
}

TEST(Varadhan, RejectsBadLadders) {
  auto u0 = [](const Vec& x) { return x[0]; };
  EXPECT_THROW(varadhan_check(example_network(), example_domain(), {7.0, 3.0}, u0, 0.2, {}), Error);
  EXPECT_THROW(varadhan_check(example_network(), example_domain(), {7.0, 3.0}, u0, 0.2, {0.1, 0.2}),
               Error);
  EXPECT_THROW(varadhan_check(example_network(), example_domain(), {1.0, 1.0}, u0, 0.2, {0.5}), Error);
}

TEST(Lln, TailBelowTheBound) {
  LlnOptions opt;
  opt.n_samples = 20000;
  opt.continuum = {1001, 501, 50};
  LlnReport rep = lln_concentration(example_network(), example_domain(), {7.0, 3.0}, 0.2, 0.3,
                                    {0.1}, opt);
  EXPECT_GT(rep.beta, rep.resolution);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_LE(rep.rows[0].tail, rep.rows[0].bound + 3.0 * rep.rows[0].tail_se);
}

TEST(Lln, DegenerateRate) {
  try {
    lln_concentration(example_network(), example_domain(), {7.0, 3.0}, 0.2, 1e-4, {0.1});
    FAIL() << "expected DegenerateRate";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateRate);
  }
}

TEST(Counterexample, StationaryButViolated) {
  for (double h : {1.0, 0.5, 0.25}) {
    CounterexampleReport c = counterexample_check(h);
    EXPECT_LE(c.stationarity_residual, 1e-14);
    EXPECT_NEAR(c.test_value, 6.0 * std::expm1(-0.1) + 4.0 * std::expm1(0.1), 1e-12);
    EXPECT_NEAR(c.test_value, -0.150292, 1e-6);
    EXPECT_EQ(c.verdict, "violated");
    // phi touches u0 from above at (6, 4).
    EXPECT_GE(c.gap_min, -1e-12);
    EXPECT_NEAR(c.gap_at_touch, 0.0, 1e-12);
  }
  EXPECT_THROW(counterexample_check(0.3), Error);
}
