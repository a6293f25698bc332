#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "crnhj/graph.hpp"

namespace crnhj {

inline constexpr double kMaxExponent = 700.0;

namespace detail {

inline double checked_exponent(double du, double h) {
  double z = du / h;
  if (z > kMaxExponent)
    fail(ErrorKind::Overflow, "exponent " + std::to_string(z) + " exceeds " +
                                  std::to_string(kMaxExponent));
  return z;
}

inline double hamiltonian_at(const JumpGraph& H, const GridFunction& u, std::size_t i) {
  double s = 0.0;
  for (const Edge& e : H.out(i)) s += e.phi * std::expm1(checked_exponent(u[e.target] - u[i], H.h));
  return s;
}

}  // namespace detail

/// (H_h u)(x_i) = sum over in-grid jumps of Phi (exp((u(x_k) - u(x_i))/h) - 1).
inline GridFunction apply_Hh(const DiscreteHamiltonian& H, const GridFunction& u) {
  if (u.size() != H.size()) fail(ErrorKind::SizeMismatch, "grid function does not match grid");
  GridFunction out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = detail::hamiltonian_at(H, u, i);
  return out;
}

struct ResolventOptions {
  double rel_tol = 1e-12;
  std::size_t max_sweeps = 2000000;
};

struct ResolventSolve {
  GridFunction f;
  double dt = 0.0;
  GridFunction u;
  std::size_t iterations = 0;
  double residual = 0.0;
};

namespace detail {

/**
 * Root of x - dt * sum_k phi_k (exp((u_k - x)/h) - 1) = f_i with neighbors
 * frozen. The map is increasing in x, and [min(f_i, u_k), max(f_i, u_k)]
 * brackets the root.
 */
inline double node_solve(const JumpGraph& H, const GridFunction& u, std::size_t i, double fi,
                         double dt) {
  auto edges = H.out(i);
  if (edges.empty()) return fi;
  double lo = fi, hi = fi;
  for (const Edge& e : edges) {
    lo = std::min(lo, u[e.target]);
    hi = std::max(hi, u[e.target]);
  }
  if (hi == lo) return lo;
  checked_exponent(hi - lo, H.h);
  const double c = dt / H.h;
  auto eval = [&](double x, double& deriv) {
    double s = 0.0, d = 0.0;
    for (const Edge& e : edges) {
      double z = (u[e.target] - x) / H.h;
      s += e.phi * std::expm1(z);
      d += e.phi * std::exp(z);
    }
    deriv = 1.0 + c * d;
    return x - dt * s - fi;
  };
  double x = std::clamp(u[i], lo, hi);
  for (int it = 0; it < 200; ++it) {
    double d;
    double g = eval(x, d);
    if (g == 0.0) return x;
    if (g > 0.0)
      hi = x;
    else
      lo = x;
    double xn = x - g / d;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (xn == x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return xn;
    x = xn;
  }
  return x;
}

inline double resolvent_residual(const JumpGraph& H, const GridFunction& u, const GridFunction& f,
                                 double dt) {
  double r = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    r = std::max(r, std::abs(u[i] - dt * hamiltonian_at(H, u, i) - f[i]));
  return r;
}

}  // namespace detail

/**
 * Backward-Euler step u - dt H_h u = f by nonlinear Gauss-Seidel with
 * alternating sweep direction and a safeguarded scalar Newton per node.
 */
inline ResolventSolve resolvent(const DiscreteHamiltonian& H, const GridFunction& f, double dt,
                                const ResolventOptions& opt = {}) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  if (f.size() != H.size()) fail(ErrorKind::SizeMismatch, "grid function does not match grid");
  ResolventSolve out{f, dt, f, 0, 0.0};
  GridFunction& u = out.u;
  const double tol = opt.rel_tol * (1.0 + sup_norm(f));
  const std::size_t n = u.size();
  out.residual = detail::resolvent_residual(H, u, f, dt);
  while (out.residual > tol) {
    if (out.iterations >= opt.max_sweeps)
      fail(ErrorKind::NoConvergence,
           "resolvent stalled with residual " + std::to_string(out.residual));
    bool reverse = out.iterations % 2 == 1;
    for (std::size_t q = 0; q < n; ++q) {
      std::size_t i = reverse ? n - 1 - q : q;
      u[i] = detail::node_solve(H, u, i, f[i], dt);
    }
    ++out.iterations;
    out.residual = detail::resolvent_residual(H, u, f, dt);
  }
  return out;
}

/// Crandall-Liggett product: floor(t/dt) resolvent steps.
inline GridFunction evolve_semigroup(const DiscreteHamiltonian& H, const GridFunction& u0, double t,
                                     double dt, const ResolventOptions& opt = {}) {
  if (!(t >= 0.0) || !(dt > 0.0)) fail(ErrorKind::InvalidArgument, "need t >= 0 and dt > 0");
  auto steps = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
  GridFunction u = u0;
  for (std::size_t s = 0; s < steps; ++s) u = resolvent(H, u, dt, opt).u;
  return u;
}

struct OdeOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  /// Fraction of the explicit stability limit 2.78 / |lambda|.
  double stability_fraction = 0.9;
};

namespace detail {

inline void rk4_step(const JumpGraph& H, const GridFunction& u, double dt, GridFunction& out,
                     std::vector<GridFunction>& k) {
  const std::size_t n = u.size();
  k.resize(5, GridFunction(n));
  k[0] = apply_Hh(H, u);
  for (std::size_t i = 0; i < n; ++i) k[4][i] = u[i] + 0.5 * dt * k[0][i];
  k[1] = apply_Hh(H, k[4]);
  for (std::size_t i = 0; i < n; ++i) k[4][i] = u[i] + 0.5 * dt * k[1][i];
  k[2] = apply_Hh(H, k[4]);
  for (std::size_t i = 0; i < n; ++i) k[4][i] = u[i] + dt * k[2][i];
  k[3] = apply_Hh(H, k[4]);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = u[i] + dt / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
}

/// Largest diagonal of the Jacobian of u -> H_h u, i.e. max_i (1/h) sum Phi exp(z).
inline double stiffness(const JumpGraph& H, const GridFunction& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0.0;
    for (const Edge& e : H.out(i)) s += e.phi * std::exp(checked_exponent(u[e.target] - u[i], H.h));
    m = std::max(m, s);
  }
  return m / H.h;
}

}  // namespace detail

/**
 * Adaptive RK4 (step doubling with local extrapolation) for du/dt = H_h u,
 * returning the solution at each of the increasing `times`.
 */
inline std::vector<GridFunction> evolve_ode_times(const DiscreteHamiltonian& H,
                                                  const GridFunction& u0,
                                                  const std::vector<double>& times,
                                                  const OdeOptions& opt = {}) {
  if (u0.size() != H.size()) fail(ErrorKind::SizeMismatch, "grid function does not match grid");
  std::vector<GridFunction> out;
  GridFunction u = u0, full, half, two;
  std::vector<GridFunction> k;
  double t = 0.0;
  double dt = 0.0;
  for (double target : times) {
    if (target < t) fail(ErrorKind::InvalidArgument, "output times must increase");
    while (t < target) {
      double lam = detail::stiffness(H, u);
      double cap = lam > 0.0 ? opt.stability_fraction * 2.78 / lam : target - t;
      if (dt <= 0.0) dt = cap;
      dt = std::min({dt, cap, target - t});
      detail::rk4_step(H, u, dt, full, k);
      detail::rk4_step(H, u, 0.5 * dt, half, k);
      detail::rk4_step(H, half, 0.5 * dt, two, k);
      double err = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        double sc = opt.abs_tol + opt.rel_tol * std::abs(two[i]);
        err = std::max(err, std::abs(two[i] - full[i]) / 15.0 / sc);
      }
      if (err <= 1.0) {
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = two[i] + (two[i] - full[i]) / 15.0;
        t = (target - t <= dt) ? target : t + dt;
      }
      double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 4.0;
      dt *= std::clamp(grow, 0.2, 4.0);
      if (dt < 1e-14 * std::max(1.0, target))
        fail(ErrorKind::StepTooSmall, "adaptive step collapsed");
    }
    out.push_back(u);
  }
  return out;
}

inline GridFunction evolve_ode(const DiscreteHamiltonian& H, const GridFunction& u0, double t,
                               const OdeOptions& opt = {}) {
  if (!(t >= 0.0)) fail(ErrorKind::InvalidArgument, "t must be nonnegative");
  return evolve_ode_times(H, u0, {t}, opt).front();
}

/// u_h(start, t) = h log E[exp(u0(X(t))/h)], integrated on the reachable component only.
inline double wkb_exact_value(const DiscreteHamiltonian& H, const GridFunction& u0,
                              std::size_t start, double t, const OdeOptions& opt = {}) {
  Subgraph s = reachable_subgraph(H, start);
  return evolve_ode(s.graph, restrict_to(u0, s.nodes), t, opt)[s.start];
}

/**
 * Feedback control v(x_i, x_k) = exp((u(x_k) - u(x_i))/h) on each edge, plus
 * the diagonal entry that makes sum_k v Phi vanish with Phi(x_i, x_i) = -sum Phi.
 */
struct ControlField {
  std::vector<double> edge;
  std::vector<double> diagonal;
};

inline ControlField optimal_control(const DiscreteHamiltonian& H, const GridFunction& u) {
  ControlField c;
  c.edge.resize(H.edges.size());
  c.diagonal.resize(H.size());
  for (std::size_t i = 0; i < H.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t e = H.offset[i]; e < H.offset[i + 1]; ++e) {
      const Edge& ed = H.edges[e];
      c.edge[e] = std::exp(detail::checked_exponent(u[ed.target] - u[i], H.h));
      num += ed.phi * c.edge[e];
      den += ed.phi;
    }
    c.diagonal[i] = den > 0.0 ? num / den : 1.0;
  }
  return c;
}

/// Entropic running cost sum_k Phi(x_i, x_k)(v log v - v + 1) at every node.
inline GridFunction running_cost(const DiscreteHamiltonian& H, const ControlField& v) {
  GridFunction L(H.size(), 0.0);
  for (std::size_t i = 0; i < H.size(); ++i)
    for (std::size_t e = H.offset[i]; e < H.offset[i + 1]; ++e) {
      double x = v.edge[e];
      double term = x > 0.0 ? x * std::log(x) - x + 1.0 : 1.0;
      L[i] += H.edges[e].phi * std::max(term, 0.0);
    }
  return L;
}

struct VariationalCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double terminal_reward = 0.0;
  double running_cost = 0.0;
};

/**
 * Compares u_h(start, t) with the optimal-control value obtained by plugging in
 * the feedback control of the solved u_h, held constant on each of n_steps
 * intervals, and integrating the controlled forward equation with its cost.
 */
inline VariationalCheck check_variational_representation(const DiscreteHamiltonian& H0,
                                                         const GridFunction& u0_full,
                                                         std::size_t start0, double t,
                                                         std::size_t n_steps,
                                                         const OdeOptions& opt = {}) {
  if (n_steps < 1) fail(ErrorKind::InvalidArgument, "n_steps must be at least 1");
  Subgraph sub = reachable_subgraph(H0, start0);
  const JumpGraph& H = sub.graph;
  GridFunction u0 = restrict_to(u0_full, sub.nodes);
  const std::size_t n = H.size();
  const double tau = t / static_cast<double>(n_steps);

  std::vector<double> times(n_steps + 1);
  for (std::size_t m = 0; m <= n_steps; ++m) times[m] = t * static_cast<double>(m) / n_steps;
  times.back() = t;
  auto u = evolve_ode_times(H, u0, times, opt);

  VariationalCheck out;
  out.lhs = u[n_steps][sub.start];

  GridFunction p(n, 0.0), dp(n), cost_rate(n);
  p[sub.start] = 1.0;
  double cost = 0.0;
  std::vector<GridFunction> kp(4, GridFunction(n));
  std::vector<double> kc(4);
  GridFunction tmp(n);
  for (std::size_t step = 0; step < n_steps; ++step) {
    // Forward time tau_step uses the value at backward time t - tau_step.
    ControlField v = optimal_control(H, u[n_steps - step]);
    GridFunction ell = running_cost(H, v);
    double rate = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double out_rate = 0.0;
      for (std::size_t e = H.offset[i]; e < H.offset[i + 1]; ++e)
        out_rate += v.edge[e] * H.edges[e].phi / H.h;
      rate = std::max(rate, out_rate);
    }
    auto sub_n = static_cast<std::size_t>(std::ceil(tau * rate / 0.02)) + 1;
    double ds = tau / static_cast<double>(sub_n);
    auto rhs = [&](const GridFunction& q, GridFunction& dq) {
      std::fill(dq.begin(), dq.end(), 0.0);
      double c = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        c += ell[i] * q[i];
        for (std::size_t e = H.offset[i]; e < H.offset[i + 1]; ++e) {
          double flux = v.edge[e] * H.edges[e].phi / H.h * q[i];
          dq[i] -= flux;
          dq[H.edges[e].target] += flux;
        }
      }
      return c;
    };
    for (std::size_t s = 0; s < sub_n; ++s) {
      kc[0] = rhs(p, kp[0]);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * ds * kp[0][i];
      kc[1] = rhs(tmp, kp[1]);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + 0.5 * ds * kp[1][i];
      kc[2] = rhs(tmp, kp[2]);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] + ds * kp[2][i];
      kc[3] = rhs(tmp, kp[3]);
      for (std::size_t i = 0; i < n; ++i)
        p[i] += ds / 6.0 * (kp[0][i] + 2.0 * kp[1][i] + 2.0 * kp[2][i] + kp[3][i]);
      cost += ds / 6.0 * (kc[0] + 2.0 * kc[1] + 2.0 * kc[2] + kc[3]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.terminal_reward += u0[i] * p[i];
  out.running_cost = cost;
  out.rhs = out.terminal_reward - cost;
  return out;
}

}  // namespace crnhj
