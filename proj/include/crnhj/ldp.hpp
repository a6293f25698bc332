#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "crnhj/chje.hpp"
#include "crnhj/dhje.hpp"
#include "crnhj/network.hpp"
#include "crnhj/segment.hpp"
#include "crnhj/simulate.hpp"

namespace crnhj {

/// X1 <-> X2 with unit rates on the ball of radius sqrt(2) about (7, 3).
inline ReactionNetwork example_network() { return ReactionNetwork::conversion(1.0, 1.0); }
inline Domain example_domain() { return Domain::ball({7.0, 3.0}, std::sqrt(2.0)); }

/**
 * Lattice start point x0_h near x0 and its offset from x0 written as
 * beta nu_perp + (r + k0 h) nu, with the measured endpoint shift omega0.
 */
struct StartDecomposition {
  std::size_t index = 0;
  Vec point;
  double beta = 0.0;
  double r = 0.0;
  long k0 = 0;
  double omega0 = 0.0;
  bool compliant = false;
};

inline StartDecomposition decompose_candidate(const Domain& dom, const LatticeGrid& grid,
                                              std::size_t idx, const Vec& x0, const Vec& nu) {
  StartDecomposition d;
  d.index = idx;
  d.point = grid.coords[idx];
  Vec perp = perpendicular(nu);
  Vec off{d.point[0] - x0[0], d.point[1] - x0[1]};
  d.beta = (off[0] * perp[0] + off[1] * perp[1]) / (perp[0] * perp[0] + perp[1] * perp[1]);
  double along = (off[0] * nu[0] + off[1] * nu[1]) / (nu[0] * nu[0] + nu[1] * nu[1]);
  d.k0 = std::lround(along / grid.h);
  d.r = along - static_cast<double>(d.k0) * grid.h;
  try {
    auto [a0, b0] = segment_bounds(dom, x0, nu, 0.0);
    auto [ab, bb] = segment_bounds(dom, x0, nu, d.beta);
    d.omega0 = std::max(std::abs(ab - a0), std::abs(bb - b0));
    d.compliant = std::max(d.omega0, std::abs(d.beta)) <= grid.h;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoIntersection) throw;
    d.omega0 = std::numeric_limits<double>::infinity();
  }
  return d;
}

/**
 * Nearest lattice point first; if it violates max(omega0, |beta|) <= h the
 * 8 lattice neighbours are tried in order. The result reports compliance.
 */
inline StartDecomposition decompose_start(const Domain& dom, const LatticeGrid& grid, const Vec& x0,
                                          const Vec& nu) {
  std::size_t near = grid.nearest(x0);
  StartDecomposition d = decompose_candidate(dom, grid, near, x0, nu);
  if (d.compliant) return d;
  for (long di = -1; di <= 1; ++di)
    for (long dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      std::vector<long> idx = grid.index[near];
      idx[0] += di;
      idx[1] += dj;
      if (auto k = grid.find(idx)) {
        StartDecomposition c = decompose_candidate(dom, grid, *k, x0, nu);
        if (c.compliant) return c;
      }
    }
  return d;
}

/// I~(y) = I((y - x0).nu / |nu|^2) on the chord through x0, +infinity off it.
struct RateFunction2D {
  RateTable table;
  Vec x0;
  Vec nu;

  double operator()(const Vec& y) const {
    double nn = nu[0] * nu[0] + nu[1] * nu[1];
    Vec d{y[0] - x0[0], y[1] - x0[1]};
    double alpha = (d[0] * nu[0] + d[1] * nu[1]) / nn;
    double perp = std::abs(d[0] * nu[1] - d[1] * nu[0]) / std::sqrt(nn);
    double scale = 1e-9 * (1.0 + std::hypot(x0[0], x0[1]));
    if (perp > scale || alpha < table.y.front() - scale || alpha > table.y.back() + scale)
      return std::numeric_limits<double>::infinity();
    return render_rate(table.at(alpha));
  }
};

struct ContinuumOptions {
  std::size_t fd_nodes = 4001;
  std::size_t rate_nodes = 1001;
  std::size_t rate_steps = 50;
};

struct VaradhanEntry {
  double h = 0.0;
  StartDecomposition start;
  double exact = 0.0;
  McEstimate mc;
  double discrepancy = 0.0;
};

struct VaradhanReport {
  double t = 0.0;
  Vec x0;
  double continuous = 0.0;
  double continuous_variational = 0.0;
  std::vector<VaradhanEntry> entries;

  std::vector<double> discrepancies() const {
    std::vector<double> d;
    for (const auto& e : entries) d.push_back(e.discrepancy);
    return d;
  }
};

struct VaradhanOptions {
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ContinuumOptions continuum;
  OdeOptions ode;
};

/// Segment through x0 (beta = 0) in the reaction direction, as a 1-D Hamiltonian.
inline Hamiltonian1D chord_hamiltonian(const ReactionNetwork& net, const Domain& dom, const Vec& x0) {
  auto [a, b] = segment_bounds(dom, x0, to_vec(net.reaction_vector(0)), 0.0);
  SegmentGrid seg;
  seg.x0 = x0;
  seg.nu = to_vec(net.reaction_vector(0));
  seg.nu_perp = perpendicular(seg.nu);
  seg.a = a;
  seg.b = b;
  seg.h = b > a ? b - a : 1.0;
  return hamiltonian_1d(seg, segment_hamiltonian(net, seg));
}

/**
 * For each h: exact h log E[exp(u0(X(t))/h)] from the discrete equation, a
 * Monte Carlo estimate of the same quantity, and the distance to the
 * continuous value w(0, t) on the chord through x0.
 */
inline VaradhanReport varadhan_check(const ReactionNetwork& net, const Domain& dom, const Vec& x0,
                                     const std::function<double(const Vec&)>& u0, double t,
                                     const std::vector<double>& h_ladder,
                                     const VaradhanOptions& opt = {}) {
  if (h_ladder.empty()) fail(ErrorKind::InvalidArgument, "empty h ladder");
  for (std::size_t i = 1; i < h_ladder.size(); ++i)
    if (!(h_ladder[i] < h_ladder[i - 1]))
      fail(ErrorKind::InvalidArgument, "h ladder must be strictly decreasing");
  if (!dom.contains(x0)) fail(ErrorKind::InvalidArgument, "x0 lies outside the domain");
  const Vec nu = to_vec(net.reaction_vector(0));
  Hamiltonian1D ham = chord_hamiltonian(net, dom, x0);
  auto w0 = [&](double alpha) { return u0({x0[0] + alpha * nu[0], x0[1] + alpha * nu[1]}); };

  VaradhanReport rep;
  rep.t = t;
  rep.x0 = x0;
  if (ham.b > ham.a) {
    rep.continuous = solve_fd(ham, w0, t, opt.continuum.fd_nodes).at(0.0);
    rep.continuous_variational = variational_value(ham, w0, 0.0, t, opt.continuum.rate_nodes,
                                                   opt.continuum.rate_steps);
  } else {
    rep.continuous = rep.continuous_variational = w0(0.0);
  }
  for (double h : h_ladder) {
    LatticeGrid grid = build_grid(dom, net, h);
    JumpGraph g = jump_graph(grid);
    GridFunction u = grid.evaluate(u0);
    VaradhanEntry e;
    e.h = h;
    e.start = decompose_start(dom, grid, x0, nu);
    e.exact = wkb_exact_value(g, u, e.start.index, t, opt.ode);
    e.mc = mc_wkb_estimate(g, e.start.index, u, t, opt.mc_samples, opt.seed, opt.threads);
    e.discrepancy = std::abs(e.exact - rep.continuous);
    rep.entries.push_back(e);
  }
  return rep;
}

struct LlnRow {
  double h = 0.0;
  std::size_t start = 0;
  double tail = 0.0;
  double tail_se = 0.0;
  double bound = 0.0;
};

struct LlnReport {
  double t = 0.0;
  double eps = 0.0;
  Vec x_star;
  double beta = 0.0;
  double resolution = 0.0;
  std::vector<LlnRow> rows;
};

struct LlnOptions {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ContinuumOptions continuum;
};

/// Minimum of I over chord nodes at Euclidean distance >= eps from the mean-field point.
inline double rate_outside_ball(const RateTable& tab, double eta, double nu_norm, double eps) {
  double beta = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tab.y.size(); ++j)
    if (std::abs(tab.y[j] - eta) * nu_norm >= eps) beta = std::min(beta, tab.I[j]);
  return beta;
}

/**
 * Empirical P(|X(t) - x*(t)| >= eps) against exp(-beta(eps, t)/(2h)), where
 * x*(t) is the mean-field endpoint and beta comes from the rate table.
 */
inline LlnReport lln_concentration(const ReactionNetwork& net, const Domain& dom, const Vec& x0,
                                   double t, double eps, const std::vector<double>& h_ladder,
                                   const LlnOptions& opt = {}) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  const Vec nu = to_vec(net.reaction_vector(0));
  const double nu_norm = std::hypot(nu[0], nu[1]);
  Hamiltonian1D ham = chord_hamiltonian(net, dom, x0);
  LlnReport rep;
  rep.t = t;
  rep.eps = eps;
  double eta = 0.0;
  if (ham.b > ham.a) {
    eta = mean_field_path(ham, 0.0, t, t / 1000.0).eta.back();
    RateTable tab = rate_function(ham, 0.0, t, opt.continuum.rate_nodes, opt.continuum.rate_steps);
    rep.beta = rate_outside_ball(tab, eta, nu_norm, eps);
    rep.resolution = tab.resolution;
  } else {
    rep.beta = std::numeric_limits<double>::infinity();
  }
  rep.x_star = {x0[0] + eta * nu[0], x0[1] + eta * nu[1]};
  if (!(rep.beta > rep.resolution))
    fail(ErrorKind::DegenerateRate, "rate exponent " + std::to_string(rep.beta) +
                                        " is within the DP resolution " +
                                        std::to_string(rep.resolution));
  for (double h : h_ladder) {
    LatticeGrid grid = build_grid(dom, net, h);
    JumpGraph g = jump_graph(grid);
    LlnRow row;
    row.h = h;
    row.start = grid.nearest(x0);
    auto states = ensemble_terminal_states(g, row.start, t, opt.n_samples, opt.seed, opt.threads);
    std::size_t far = 0;
    for (std::size_t s : states) {
      const Vec& y = grid.coords[s];
      if (std::hypot(y[0] - rep.x_star[0], y[1] - rep.x_star[1]) >= eps) ++far;
    }
    double n = static_cast<double>(states.size());
    row.tail = static_cast<double>(far) / n;
    row.tail_se = std::sqrt(row.tail * (1.0 - row.tail) / n);
    row.bound = std::exp(-rep.beta / (2.0 * h));
    rep.rows.push_back(row);
  }
  return rep;
}

struct CounterexampleReport {
  double h = 0.0;
  std::size_t grid_size = 0;
  double stationarity_residual = 0.0;
  double test_value = 0.0;
  std::string verdict;
  double gap_min = 0.0;
  double gap_at_touch = 0.0;
};

/**
 * For u0 = x1 + x2 on the example ball: the discrete solution is stationary,
 * yet the smooth phi = 1.05 x1 + 0.95 x2 - 0.1 touching u0 from above at
 * (6, 4) gives a negative state-constraint test value there.
 */
inline CounterexampleReport counterexample_check(double h) {
  const double q6 = 6.0 / h, q4 = 4.0 / h;
  if (!(h > 0.0) || std::abs(q6 - std::round(q6)) > 1e-9 || std::abs(q4 - std::round(q4)) > 1e-9)
    fail(ErrorKind::InvalidArgument, "h must put (6, 4) on the lattice");
  ReactionNetwork net = example_network();
  LatticeGrid grid = build_grid(example_domain(), net, h);
  GridFunction u0(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p)
    u0[p] = static_cast<double>(grid.index[p][0] + grid.index[p][1]) * h;
  CounterexampleReport rep;
  rep.h = h;
  rep.grid_size = grid.size();
  rep.stationarity_residual = sup_norm(apply_Hh(jump_graph(grid), u0));

  const Vec grad{21.0 / 20.0, 19.0 / 20.0};
  auto phi = [&](const Vec& x) { return grad[0] * x[0] + grad[1] * x[1] - 0.1; };
  rep.gap_min = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < grid.size(); ++p)
    rep.gap_min = std::min(rep.gap_min, phi(grid.coords[p]) - u0[p]);
  const Vec touch{6.0, 4.0};
  rep.gap_at_touch = phi(touch) - (touch[0] + touch[1]);

  auto nu = net.reaction_vector(0);
  double slope = nu[0] * grad[0] + nu[1] * grad[1];
  rep.test_value = lma_intensity(net, touch, 0, Direction::Forward) * std::expm1(slope) +
                   lma_intensity(net, touch, 0, Direction::Backward) * std::expm1(-slope);
  rep.verdict = 0.0 > rep.test_value ? "violated" : "satisfied";
  return rep;
}

}  // namespace crnhj
