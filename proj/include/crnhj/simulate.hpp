#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <thread>
#include <vector>

#include "crnhj/graph.hpp"
#include "crnhj/rng.hpp"

namespace crnhj {

struct Trajectory {
  double h = 0.0;
  std::vector<double> times;
  std::vector<std::size_t> states;
  std::uint64_t seed = 0;
};

namespace detail {

/// One Gillespie jump from i; returns false when no jump occurs before t_end.
inline bool gillespie_step(const JumpGraph& g, std::size_t& i, double& t, double t_end,
                           SplitMix64& rng) {
  double total = g.total_phi(i);
  if (total <= 0.0) return false;
  double tn = t + rng.exponential(total / g.h);
  if (tn > t_end) return false;
  double target = rng.uniform() * total;
  auto edges = g.out(i);
  std::size_t pick = edges.size() - 1;
  double acc = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    acc += edges[e].phi;
    if (target <= acc && edges[e].phi > 0.0) {
      pick = e;
      break;
    }
  }
  i = edges[pick].target;
  t = tn;
  return true;
}

}  // namespace detail

/// Exact sample path on [0, t_end]; blocked channels carry no edge and hence rate 0.
inline Trajectory simulate_path(const JumpGraph& g, std::size_t start, double t_end,
                                std::uint64_t seed) {
  if (start >= g.size()) fail(ErrorKind::InvalidArgument, "start is not a grid index");
  Trajectory tr{g.h, {0.0}, {start}, seed};
  SplitMix64 rng(seed);
  std::size_t i = start;
  double t = 0.0;
  while (detail::gillespie_step(g, i, t, t_end, rng)) {
    tr.times.push_back(t);
    tr.states.push_back(i);
  }
  return tr;
}

inline Trajectory simulate_path(const LatticeGrid& grid, std::size_t start, double t_end,
                                std::uint64_t seed) {
  return simulate_path(jump_graph(grid), start, t_end, seed);
}

inline std::size_t terminal_state(const JumpGraph& g, std::size_t start, double t_end,
                                  SplitMix64 rng) {
  std::size_t i = start;
  double t = 0.0;
  while (detail::gillespie_step(g, i, t, t_end, rng)) {
  }
  return i;
}

/**
 * Terminal states of n independent trajectories; trajectory k uses the
 * stream keyed by (seed ^ k), so results do not depend on the thread count.
 */
inline std::vector<std::size_t> ensemble_terminal_states(const JumpGraph& g, std::size_t start,
                                                         double t_end, std::size_t n,
                                                         std::uint64_t seed,
                                                         unsigned threads = 1) {
  if (start >= g.size()) fail(ErrorKind::InvalidArgument, "start is not a grid index");
  std::vector<std::size_t> out(n);
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k)
      out[k] = terminal_state(g, start, t_end, SplitMix64::stream(seed, k));
  };
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back(work, n * w / threads, n * (w + 1) / threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

inline std::vector<std::size_t> histogram(const std::vector<std::size_t>& states, std::size_t size) {
  std::vector<std::size_t> h(size, 0);
  for (std::size_t s : states) ++h[s];
  return h;
}

/// Called after every accepted integrator step with (t, p).
using ForwardObserver = std::function<void(double, const GridFunction&)>;

/**
 * RK4 for the master equation dp/dt = p Q with step at most 0.1 / (max jump
 * rate); a step producing a negative entry is retried at half size.
 */
inline GridFunction forward_evolve(const JumpGraph& g, const GridFunction& p0, double t_end,
                                   double dt, const ForwardObserver& observer = {}) {
  if (p0.size() != g.size()) fail(ErrorKind::SizeMismatch, "distribution does not match grid");
  double mass = 0.0;
  for (double x : p0) {
    if (x < 0.0) fail(ErrorKind::InvalidArgument, "initial distribution has a negative entry");
    mass += x;
  }
  if (std::abs(mass - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "initial mass is not 1");
  const std::size_t n = g.size();
  double max_rate = g.max_total_phi() / g.h;
  if (max_rate > 0.0) dt = std::min(dt, 0.1 / max_rate);
  auto rhs = [&](const GridFunction& p, GridFunction& dp) {
    std::fill(dp.begin(), dp.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (const Edge& e : g.out(i)) {
        double flux = e.phi / g.h * p[i];
        dp[i] -= flux;
        dp[e.target] += flux;
      }
  };
  GridFunction p = p0, k1(n), k2(n), k3(n), k4(n), tmp(n), next(n);
  double t = 0.0;
  if (observer) observer(t, p);
  while (t < t_end) {
    double step = std::min(dt, t_end - t);
    for (int halvings = 0;; ++halvings) {
      if (halvings > 40) fail(ErrorKind::StepTooLarge, "positivity lost after repeated halving");
      rhs(p, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * step * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * step * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + step * k3[i];
      rhs(tmp, k4);
      bool ok = true;
      for (std::size_t i = 0; i < n; ++i) {
        next[i] = p[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        ok = ok && next[i] >= -1e-14;
      }
      if (ok) break;
      step *= 0.5;
    }
    p.swap(next);
    t = (t_end - t <= step) ? t_end : t + step;
    if (observer) observer(t, p);
  }
  return p;
}

inline GridFunction forward_evolve(const GridFunction& p0, const LatticeGrid& grid, double t_end,
                                   double dt, const ForwardObserver& observer = {}) {
  return forward_evolve(jump_graph(grid), p0, t_end, dt, observer);
}

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/**
 * h log( mean exp(u0(X_k)/h) ) over terminal samples, anchored at the largest
 * sample so a constant u0 is reproduced exactly; jackknife standard error.
 */
inline McEstimate wkb_from_samples(const std::vector<double>& u_samples, double h) {
  const std::size_t n = u_samples.size();
  if (n == 0) fail(ErrorKind::InvalidArgument, "need at least one sample");
  std::size_t imax = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (u_samples[k] > u_samples[imax]) imax = k;
  const double m = u_samples[imax];
  std::vector<double> e(n);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += (e[k] = std::exp((u_samples[k] - m) / h));
  McEstimate out;
  out.n = n;
  out.value = m + h * std::log(s / static_cast<double>(n));
  if (n == 1) return out;

  // Leave-one-out values; dropping the anchor needs the runner-up as anchor.
  std::vector<double> loo(n);
  const double nm1 = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != imax) {
      loo[k] = m + h * std::log((s - e[k]) / nm1);
      continue;
    }
    double m2 = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < n; ++q)
      if (q != imax) m2 = std::max(m2, u_samples[q]);
    double s2 = 0.0;
    for (std::size_t q = 0; q < n; ++q)
      if (q != imax) s2 += std::exp((u_samples[q] - m2) / h);
    loo[k] = m2 + h * std::log(s2 / nm1);
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : loo) var += (v - mean) * (v - mean);
  out.std_error = std::sqrt(var * nm1 / static_cast<double>(n));
  return out;
}

inline McEstimate mc_wkb_estimate(const JumpGraph& g, std::size_t start, const GridFunction& u0,
                                  double t, std::size_t n_samples, std::uint64_t seed,
                                  unsigned threads = 1) {
  if (n_samples < 1) fail(ErrorKind::InvalidArgument, "n_samples must be at least 1");
  auto states = ensemble_terminal_states(g, start, t, n_samples, seed, threads);
  std::vector<double> u(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) u[k] = u0[states[k]];
  return wkb_from_samples(u, g.h);
}

inline McEstimate mc_wkb_estimate(const LatticeGrid& grid, std::size_t start,
                                  const GridFunction& u0, double t, std::size_t n_samples,
                                  std::uint64_t seed, unsigned threads = 1) {
  return mc_wkb_estimate(jump_graph(grid), start, u0, t, n_samples, seed, threads);
}

}  // namespace crnhj
