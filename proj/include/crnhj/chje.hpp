#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "crnhj/errors.hpp"
#include "crnhj/segment.hpp"

namespace crnhj {

/// H~(alpha, p) = Phi~+(alpha)(e^p - 1) + Phi~-(alpha)(e^-p - 1) on [a, b].
struct Hamiltonian1D {
  double a = 0.0;
  double b = 0.0;
  std::function<double(double)> phi_plus;
  std::function<double(double)> phi_minus;

  double operator()(double alpha, double p) const {
    return phi_plus(alpha) * std::expm1(p) + phi_minus(alpha) * std::expm1(-p);
  }

  /// Zero-cost velocity dH~/dp at p = 0.
  double drift(double alpha) const { return phi_plus(alpha) - phi_minus(alpha); }
};

inline Hamiltonian1D hamiltonian_1d(const SegmentGrid& seg, const SegmentHamiltonian& ham) {
  return {seg.a, seg.b, ham.phi_plus, ham.phi_minus};
}

inline constexpr double kRateCap = 1e6;
inline constexpr double kRateInfinity = 1e5;

namespace detail {

inline double entropy(double v) { return std::max(0.0, v * std::log(v) - (v - 1.0)); }

}  // namespace detail

/**
 * Closed-form Legendre transform in s. With v = e^{p*} solving
 * Phi+ v - Phi- / v = s, the value is Phi+ g(v) + Phi- g(1/v), g(v) = v log v - v + 1,
 * which is the same quantity as p* s - H~(p*) but never negative in rounding.
 */
inline double legendre(double phi_plus, double phi_minus, double s) {
  if (!(phi_plus > 0.0) || !(phi_minus > 0.0))
    fail(ErrorKind::InvalidArgument, "Legendre transform needs positive intensities");
  double d = std::hypot(s, 2.0 * std::sqrt(phi_plus * phi_minus));
  double v = s >= 0.0 ? (s + d) / (2.0 * phi_plus) : 2.0 * phi_minus / (d - s);
  return phi_plus * detail::entropy(v) + phi_minus * detail::entropy(1.0 / v);
}

inline double legendre(const Hamiltonian1D& ham, double alpha, double s) {
  return legendre(ham.phi_plus(alpha), ham.phi_minus(alpha), s);
}

/// Maximizer p* of p s - H~(alpha, p).
inline double legendre_momentum(double phi_plus, double phi_minus, double s) {
  double d = std::hypot(s, 2.0 * std::sqrt(phi_plus * phi_minus));
  return s >= 0.0 ? std::log((s + d) / (2.0 * phi_plus)) : std::log(2.0 * phi_minus / (d - s));
}

struct ValueField {
  std::vector<double> alpha;
  std::vector<double> times;
  std::vector<GridFunction> values;

  const GridFunction& last() const { return values.back(); }

  /// Linear interpolation of the final snapshot.
  double at(double a) const {
    const auto& w = values.back();
    if (alpha.size() == 1) return w[0];
    double da = alpha[1] - alpha[0];
    double x = std::clamp((a - alpha.front()) / da, 0.0, static_cast<double>(alpha.size() - 1));
    auto i = std::min(static_cast<std::size_t>(x), alpha.size() - 2);
    double f = x - static_cast<double>(i);
    return (1.0 - f) * w[i] + f * w[i + 1];
  }

  double resolution = 0.0;
};

namespace detail {

inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  if (n > 1) x.back() = b;
  return x;
}

}  // namespace detail

struct FdOptions {
  /// Fixed time step; when absent each step uses cfl times the stability bound.
  std::optional<double> dt;
  double cfl = 0.9;
  std::vector<double> snapshot_times;
};

/**
 * Explicit monotone scheme for w_t = H~(alpha, w_alpha) with Neumann ends:
 * Phi~+ acts on the forward difference and Phi~- on the backward one, and the
 * mirrored ghost node zeroes the outward difference at each end.
 */
inline ValueField solve_fd(const Hamiltonian1D& ham, const std::function<double(double)>& w0,
                           double t, std::size_t n_alpha, const FdOptions& opt = {}) {
  if (n_alpha < 3) fail(ErrorKind::InvalidArgument, "solve_fd needs at least 3 nodes");
  if (!(ham.b > ham.a)) fail(ErrorKind::InvalidArgument, "solve_fd needs a nondegenerate interval");
  ValueField out;
  out.alpha = detail::uniform_grid(ham.a, ham.b, n_alpha);
  const double da = (ham.b - ham.a) / static_cast<double>(n_alpha - 1);
  out.resolution = da;
  std::vector<double> fp(n_alpha), fm(n_alpha);
  GridFunction w(n_alpha), rate(n_alpha), next(n_alpha);
  for (std::size_t i = 0; i < n_alpha; ++i) {
    fp[i] = ham.phi_plus(out.alpha[i]);
    fm[i] = ham.phi_minus(out.alpha[i]);
    w[i] = w0(out.alpha[i]);
  }
  std::vector<double> stops = opt.snapshot_times;
  stops.push_back(t);
  std::sort(stops.begin(), stops.end());
  out.times.push_back(0.0);
  out.values.push_back(w);
  double time = 0.0;
  for (double stop : stops) {
    if (stop > t) break;
    while (time < stop) {
      double worst = 0.0;
      for (std::size_t i = 0; i < n_alpha; ++i) {
        double r = 0.0, diag = 0.0;
        if (i + 1 < n_alpha) {
          double z = (w[i + 1] - w[i]) / da;
          r += fp[i] * std::expm1(z);
          diag += fp[i] * std::exp(z);
        }
        if (i > 0) {
          double z = (w[i - 1] - w[i]) / da;
          r += fm[i] * std::expm1(z);
          diag += fm[i] * std::exp(z);
        }
        rate[i] = r;
        worst = std::max(worst, diag);
      }
      double bound = worst > 0.0 ? da / worst : std::numeric_limits<double>::infinity();
      double step;
      if (opt.dt) {
        if (*opt.dt > bound * (1.0 + 1e-12))
          fail(ErrorKind::CFLViolation, "dt exceeds the monotonicity bound " + std::to_string(bound));
        step = *opt.dt;
      } else {
        step = opt.cfl * bound;
      }
      step = std::min(step, stop - time);
      for (std::size_t i = 0; i < n_alpha; ++i) next[i] = w[i] + step * rate[i];
      w.swap(next);
      time = (stop - time <= step) ? stop : time + step;
    }
    if (out.times.back() != stop) {
      out.times.push_back(stop);
      out.values.push_back(w);
    }
  }
  return out;
}

/**
 * Running cost of holding velocity v for ds from x, with the path clamped at
 * the boundary: midpoint rule on the moving part, boundary value while stuck.
 */
inline double step_cost(const Hamiltonian1D& ham, double x, double v, double ds) {
  double y = x + v * ds;
  if (y >= ham.a && y <= ham.b) return ds * legendre(ham, 0.5 * (x + y), v);
  double c = y > ham.b ? ham.b : ham.a;
  double tau = std::clamp((c - x) / v, 0.0, ds);
  double moving = tau > 0.0 ? tau * legendre(ham, 0.5 * (x + c), v) : 0.0;
  return moving + (ds - tau) * legendre(ham, c, v);
}

struct DpOptions {
  /// Velocity bound; when absent 2 max|drift| + 4 Lip(w0) is used.
  std::optional<double> v_max;
};

/**
 * Backward dynamic program value(x, s) = max_v value(clamp(x + v ds), s + ds) - cost,
 * over n_v uniform velocity samples in [-V, V] plus the local zero-cost drift.
 */
inline ValueField lax_oleinik_dp(const Hamiltonian1D& ham, const std::function<double(double)>& w0,
                                 double t, std::size_t n_alpha, std::size_t n_v, std::size_t n_t,
                                 const DpOptions& opt = {}) {
  if (n_alpha < 2 || n_v < 3 || n_t < 1) fail(ErrorKind::InvalidArgument, "DP mesh too small");
  if (!(ham.b > ham.a)) fail(ErrorKind::InvalidArgument, "DP needs a nondegenerate interval");
  ValueField out;
  out.alpha = detail::uniform_grid(ham.a, ham.b, n_alpha);
  const double da = (ham.b - ham.a) / static_cast<double>(n_alpha - 1);
  const double ds = t / static_cast<double>(n_t);
  GridFunction w(n_alpha);
  double max_drift = 0.0, lip = 0.0;
  for (std::size_t i = 0; i < n_alpha; ++i) {
    w[i] = w0(out.alpha[i]);
    max_drift = std::max(max_drift, std::abs(ham.drift(out.alpha[i])));
    if (i > 0) lip = std::max(lip, std::abs(w[i] - w[i - 1]) / da);
  }
  const double V = opt.v_max ? *opt.v_max : 2.0 * max_drift + 4.0 * lip;
  const double dv = 2.0 * V / static_cast<double>(n_v - 1);
  out.resolution = std::max({da, ds, dv * ds});
  out.times = {0.0, t};
  out.values.push_back(w);

  auto interp = [&](const GridFunction& f, double y) {
    double x = std::clamp((y - ham.a) / da, 0.0, static_cast<double>(n_alpha - 1));
    auto i = std::min(static_cast<std::size_t>(x), n_alpha - 2);
    double fr = x - static_cast<double>(i);
    return (1.0 - fr) * f[i] + fr * f[i + 1];
  };
  GridFunction next(n_alpha);
  for (std::size_t step = 0; step < n_t; ++step) {
    for (std::size_t i = 0; i < n_alpha; ++i) {
      const double x = out.alpha[i];
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q <= n_v; ++q) {
        double v = q < n_v ? -V + dv * static_cast<double>(q) : ham.drift(x);
        double y = std::clamp(x + v * ds, ham.a, ham.b);
        best = std::max(best, interp(w, y) - step_cost(ham, x, v, ds));
      }
      next[i] = best;
    }
    w.swap(next);
  }
  out.values.push_back(w);
  return out;
}

struct ReflectedPath {
  std::vector<double> times;
  std::vector<double> eta;
  std::vector<double> v;
  std::vector<double> l;
  std::optional<double> hit_time;
};

/**
 * RK4 for eta' = Phi~+ - Phi~- with sticking: once the path reaches an end
 * where the drift points outward it stays there and l records |drift|.
 */
inline ReflectedPath mean_field_path(const Hamiltonian1D& ham, double alpha_start, double t_end,
                                     double dt) {
  if (alpha_start < ham.a || alpha_start > ham.b)
    fail(ErrorKind::InvalidArgument, "start lies outside the segment");
  if (!(dt > 0.0) || !(t_end >= 0.0)) fail(ErrorKind::InvalidArgument, "need dt > 0, t_end >= 0");
  auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_end / dt - 1e-9)));
  const double h = t_end / static_cast<double>(steps);
  auto f = [&](double x) { return ham.drift(std::clamp(x, ham.a, ham.b)); };
  auto rk4 = [&](double x, double s) {
    double k1 = f(x), k2 = f(x + 0.5 * s * k1), k3 = f(x + 0.5 * s * k2), k4 = f(x + s * k3);
    return x + s / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  auto stuck_at = [&](double x) {
    return (x >= ham.b && ham.drift(ham.b) >= 0.0) || (x <= ham.a && ham.drift(ham.a) <= 0.0);
  };
  ReflectedPath p;
  double x = alpha_start;
  auto record = [&](double t) {
    double v = ham.drift(x);
    p.times.push_back(t);
    p.eta.push_back(x);
    p.v.push_back(v);
    p.l.push_back(stuck_at(x) ? std::abs(v) : 0.0);
  };
  if (stuck_at(x)) p.hit_time = 0.0;
  record(0.0);
  for (std::size_t n = 0; n < steps; ++n) {
    double t0 = h * static_cast<double>(n);
    if (!stuck_at(x)) {
      double y = rk4(x, h);
      if (y > ham.b || y < ham.a) {
        double wall = y > ham.b ? ham.b : ham.a;
        double lo = 0.0, hi = h;
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
          double mid = 0.5 * (lo + hi);
          double ym = rk4(x, mid);
          bool out = wall == ham.b ? ym >= ham.b : ym <= ham.a;
          (out ? hi : lo) = mid;
        }
        if (stuck_at(wall)) {
          p.hit_time = t0 + hi;
          y = wall;
        } else {
          y = std::clamp(y, ham.a, ham.b);
        }
      }
      x = y;
    }
    record(n + 1 == steps ? t_end : h * static_cast<double>(n + 1));
  }
  return p;
}

struct RateTable {
  std::vector<double> y;
  std::vector<double> I;
  std::size_t argmin = 0;
  double alpha_start = 0.0;
  double t = 0.0;
  double dalpha = 0.0;
  double ds = 0.0;
  double dv = 0.0;
  double v_max = 0.0;
  double resolution = 0.0;

  double at(double a) const {
    double x = std::clamp((a - y.front()) / dalpha, 0.0, static_cast<double>(y.size() - 1));
    auto i = std::min(static_cast<std::size_t>(x), y.size() - 2);
    double f = x - static_cast<double>(i);
    return (1.0 - f) * I[i] + f * I[i + 1];
  }
};

/// Values above the infinity threshold are the DP cap, not genuine costs.
inline double render_rate(double I) {
  return I > kRateInfinity ? std::numeric_limits<double>::infinity() : I;
}

struct RateOptions {
  /// Speed bound; when absent 2 max|drift| + (b - a)/t is used.
  std::optional<double> v_max;
};

/**
 * Forward dynamic program for I(y; alpha_start, t). Displacements are whole
 * multiples of the mesh, so every value is read from a node and the cap never
 * leaks in through interpolation. Targets at an end also accept overshooting
 * velocities, paying the full cost of the chosen velocity.
 */
inline RateTable rate_function(const Hamiltonian1D& ham, double alpha_start, double t,
                               std::size_t n_alpha, std::size_t n_t, const RateOptions& opt = {}) {
  if (n_alpha < 2 || n_t < 1 || !(t > 0.0)) fail(ErrorKind::InvalidArgument, "rate mesh too small");
  if (!(ham.b > ham.a)) fail(ErrorKind::InvalidArgument, "rate DP needs a nondegenerate interval");
  if (alpha_start < ham.a || alpha_start > ham.b)
    fail(ErrorKind::InvalidArgument, "start lies outside the segment");
  RateTable tab;
  tab.y = detail::uniform_grid(ham.a, ham.b, n_alpha);
  tab.alpha_start = alpha_start;
  tab.t = t;
  const double da = (ham.b - ham.a) / static_cast<double>(n_alpha - 1);
  const double ds = t / static_cast<double>(n_t);
  double max_drift = 0.0;
  for (double y : tab.y) max_drift = std::max(max_drift, std::abs(ham.drift(y)));
  const double V = opt.v_max ? *opt.v_max : 2.0 * max_drift + (ham.b - ham.a) / t;
  const auto M = static_cast<long>(std::max(1.0, std::ceil(V * ds / da)));
  tab.dalpha = da;
  tab.ds = ds;
  tab.dv = da / ds;
  tab.v_max = static_cast<double>(M) * tab.dv;
  tab.resolution = std::max(da, ds);

  const long N = static_cast<long>(n_alpha);
  std::vector<double> cur(n_alpha, kRateCap), next(n_alpha);
  auto j0 = static_cast<std::size_t>(std::lround((alpha_start - ham.a) / da));
  cur[j0] = 0.0;
  for (std::size_t step = 0; step < n_t; ++step) {
    for (long j = 0; j < N; ++j) {
      double best = kRateCap;
      const double yj = tab.y[static_cast<std::size_t>(j)];
      for (long i = std::max(0L, j - M); i <= std::min(N - 1, j + M); ++i) {
        double ci = cur[static_cast<std::size_t>(i)];
        if (ci >= kRateCap) continue;
        double yi = tab.y[static_cast<std::size_t>(i)];
        best = std::min(best, ci + ds * legendre(ham, 0.5 * (yi + yj), (yj - yi) / ds));
      }
      if (j == 0 || j == N - 1) {
        const bool upper = j == N - 1;
        for (long i = std::max(0L, j - M); i <= std::min(N - 1, j + M); ++i) {
          double ci = cur[static_cast<std::size_t>(i)];
          if (ci >= kRateCap) continue;
          double yi = tab.y[static_cast<std::size_t>(i)];
          double land = (yj - yi) / ds;
          for (double cand : {ham.drift(yj), ham.drift(yi), ham.drift(0.5 * (yi + yj))}) {
            double v = upper ? std::max(cand, land) : std::min(cand, land);
            if (v == land) continue;
            best = std::min(best, ci + step_cost(ham, yi, v, ds));
          }
        }
      }
      next[static_cast<std::size_t>(j)] = std::min(best, kRateCap);
    }
    cur.swap(next);
  }
  tab.I = cur;
  tab.argmin = static_cast<std::size_t>(std::min_element(tab.I.begin(), tab.I.end()) - tab.I.begin());
  return tab;
}

/// sup_y { w0(y) - I(y; alpha, t) } over the rate-table nodes.
inline double variational_value(const RateTable& tab, const std::function<double(double)>& w0) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tab.y.size(); ++j) best = std::max(best, w0(tab.y[j]) - tab.I[j]);
  return best;
}

inline double variational_value(const Hamiltonian1D& ham, const std::function<double(double)>& w0,
                                double alpha, double t, std::size_t n_alpha, std::size_t n_t,
                                const RateOptions& opt = {}) {
  return variational_value(rate_function(ham, alpha, t, n_alpha, n_t, opt), w0);
}

}  // namespace crnhj
