#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crnhj/errors.hpp"

namespace crnhj {

using Vec = std::vector<double>;

/// Values indexed like the points of a grid (lattice or segment).
using GridFunction = std::vector<double>;

enum class Direction { Forward, Backward };

/**
 * Reactions j = 0..M-1 with reactant row nu_plus[j] and product row
 * nu_minus[j]; the reaction vector is nu_minus[j] - nu_plus[j].
 */
struct ReactionNetwork {
  std::size_t n_species = 0;
  std::vector<std::vector<int>> nu_plus;
  std::vector<std::vector<int>> nu_minus;
  std::vector<double> k_plus;
  std::vector<double> k_minus;

  std::size_t n_reactions() const { return nu_plus.size(); }

  std::vector<int> reaction_vector(std::size_t j) const {
    std::vector<int> v(n_species);
    for (std::size_t l = 0; l < n_species; ++l) v[l] = nu_minus[j][l] - nu_plus[j][l];
    return v;
  }

  void validate() const {
    const std::size_t m = nu_plus.size();
    if (n_species == 0) fail(ErrorKind::InvalidArgument, "network has no species");
    if (m == 0) fail(ErrorKind::InvalidArgument, "network has no reactions");
    if (nu_minus.size() != m || k_plus.size() != m || k_minus.size() != m)
      fail(ErrorKind::InvalidArgument, "inconsistent reaction counts");
    for (std::size_t j = 0; j < m; ++j) {
      if (nu_plus[j].size() != n_species || nu_minus[j].size() != n_species)
        fail(ErrorKind::InvalidArgument, "stoichiometry row has wrong length");
      bool nonzero = false;
      for (std::size_t l = 0; l < n_species; ++l) {
        if (nu_plus[j][l] < 0 || nu_minus[j][l] < 0)
          fail(ErrorKind::InvalidArgument, "negative stoichiometric coefficient");
        nonzero = nonzero || nu_plus[j][l] != nu_minus[j][l];
      }
      if (!nonzero) fail(ErrorKind::InvalidArgument, "reaction vector is zero");
      for (double k : {k_plus[j], k_minus[j]})
        if (!std::isfinite(k) || k < 0.0)
          fail(ErrorKind::InvalidArgument, "rate constant must be finite and nonnegative");
    }
  }

  /// Single reversible conversion X1 <-> X2 with unit rates.
  static ReactionNetwork conversion(double kp = 1.0, double km = 1.0) {
    return ReactionNetwork{2, {{1, 0}}, {{0, 1}}, {kp}, {km}};
  }
};

/// Mass-action intensity k_j^{+/-} prod_l x_l^{nu_{jl}^{+/-}}, with 0^0 = 1.
inline double lma_intensity(const ReactionNetwork& net, const Vec& x, std::size_t j,
                            Direction dir) {
  const auto& row = dir == Direction::Forward ? net.nu_plus[j] : net.nu_minus[j];
  double val = dir == Direction::Forward ? net.k_plus[j] : net.k_minus[j];
  for (std::size_t l = 0; l < net.n_species; ++l)
    for (int e = 0; e < row[l]; ++e) val *= x[l];
  return val;
}

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// Counterclockwise vertex loop of a convex polygon in the plane.
struct Polygon {
  std::vector<std::array<double, 2>> vertices;
};

struct Box {
  Vec lower;
  Vec upper;
};

class Domain {
 public:
  using Shape = std::variant<Ball, Polygon, Box>;

  explicit Domain(Shape s) : shape_(std::move(s)) { validate(); }

  static Domain ball(Vec center, double radius) { return Domain(Ball{std::move(center), radius}); }
  static Domain polygon(std::vector<std::array<double, 2>> v) { return Domain(Polygon{std::move(v)}); }
  static Domain box(Vec lo, Vec hi) { return Domain(Box{std::move(lo), std::move(hi)}); }

  const Shape& shape() const { return shape_; }

  std::size_t dim() const {
    if (auto b = std::get_if<Ball>(&shape_)) return b->center.size();
    if (auto b = std::get_if<Box>(&shape_)) return b->lower.size();
    return 2;
  }

  double diameter() const {
    if (auto b = std::get_if<Ball>(&shape_)) return 2.0 * b->radius;
    if (auto b = std::get_if<Box>(&shape_)) {
      double s = 0.0;
      for (std::size_t i = 0; i < b->lower.size(); ++i) s += std::pow(b->upper[i] - b->lower[i], 2);
      return std::sqrt(s);
    }
    const auto& v = std::get<Polygon>(shape_).vertices;
    double d = 0.0;
    for (const auto& p : v)
      for (const auto& q : v) d = std::max(d, std::hypot(p[0] - q[0], p[1] - q[1]));
    return d;
  }

  /// Membership slack; degenerate (zero-diameter) boxes fall back to coordinate scale.
  double tolerance() const {
    double d = diameter();
    if (d > 0.0) return 1e-12 * d;
    auto [lo, hi] = bounding_box();
    double s = 0.0;
    for (double c : hi) s = std::max(s, std::abs(c));
    return 1e-12 * s;
  }

  /// Signed constraint residual: <= 0 inside the closure.
  double residual(const Vec& x) const {
    if (auto b = std::get_if<Ball>(&shape_)) {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b->center[i]) * (x[i] - b->center[i]);
      return std::sqrt(s) - b->radius;
    }
    if (auto b = std::get_if<Box>(&shape_)) {
      double r = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < x.size(); ++i)
        r = std::max({r, b->lower[i] - x[i], x[i] - b->upper[i]});
      return r;
    }
    const auto& v = std::get<Polygon>(shape_).vertices;
    double r = -std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < v.size(); ++e) {
      auto [n, p] = edge_normal(v, e);
      r = std::max(r, n[0] * (x[0] - p[0]) + n[1] * (x[1] - p[1]));
    }
    return r;
  }

  bool contains(const Vec& x) const { return residual(x) <= tolerance(); }

  std::pair<Vec, Vec> bounding_box() const {
    if (auto b = std::get_if<Ball>(&shape_)) {
      Vec lo = b->center, hi = b->center;
      for (std::size_t i = 0; i < lo.size(); ++i) {
        lo[i] -= b->radius;
        hi[i] += b->radius;
      }
      return {lo, hi};
    }
    if (auto b = std::get_if<Box>(&shape_)) return {b->lower, b->upper};
    Vec lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec hi{-lo[0], -lo[1]};
    for (const auto& p : std::get<Polygon>(shape_).vertices)
      for (int i = 0; i < 2; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    return {lo, hi};
  }

  /**
   * Parameter interval {alpha : q + alpha d in closure} widened by `slack`.
   * Returns nullopt when empty.
   */
  std::optional<std::pair<double, double>> line_interval(const Vec& q, const Vec& d,
                                                         double slack) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (auto b = std::get_if<Ball>(&shape_)) {
      double A = 0, B = 0, C = 0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        double w = q[i] - b->center[i];
        A += d[i] * d[i];
        B += 2.0 * d[i] * w;
        C += w * w;
      }
      double R = b->radius + slack;
      C -= R * R;
      double disc = B * B - 4.0 * A * C;
      if (disc < 0.0) return std::nullopt;
      double sq = std::sqrt(disc);
      double qq = -0.5 * (B + std::copysign(sq, B));
      double r1 = qq / A;
      double r2 = qq != 0.0 ? C / qq : -r1;
      return std::make_pair(std::min(r1, r2), std::max(r1, r2));
    }
    double lo = -inf, hi = inf;
    auto clip = [&](double nd, double c) {
      // constraint nd * alpha <= c
      if (nd == 0.0) {
        if (c < 0.0) lo = inf;
      } else if (nd > 0.0) {
        hi = std::min(hi, c / nd);
      } else {
        lo = std::max(lo, c / nd);
      }
    };
    if (auto b = std::get_if<Box>(&shape_)) {
      for (std::size_t i = 0; i < q.size(); ++i) {
        clip(d[i], b->upper[i] + slack - q[i]);
        clip(-d[i], q[i] - b->lower[i] + slack);
      }
    } else {
      const auto& v = std::get<Polygon>(shape_).vertices;
      for (std::size_t e = 0; e < v.size(); ++e) {
        auto [n, p] = edge_normal(v, e);
        clip(n[0] * d[0] + n[1] * d[1], slack - (n[0] * (q[0] - p[0]) + n[1] * (q[1] - p[1])));
      }
    }
    if (lo > hi) return std::nullopt;
    return std::make_pair(lo, hi);
  }

 private:
  static std::pair<std::array<double, 2>, std::array<double, 2>> edge_normal(
      const std::vector<std::array<double, 2>>& v, std::size_t e) {
    const auto& p = v[e];
    const auto& q = v[(e + 1) % v.size()];
    double dx = q[0] - p[0], dy = q[1] - p[1];
    double len = std::hypot(dx, dy);
    return {{dy / len, -dx / len}, p};
  }

  void validate() const {
    if (auto b = std::get_if<Ball>(&shape_)) {
      if (b->center.empty() || !(b->radius > 0.0) || !std::isfinite(b->radius))
        fail(ErrorKind::InvalidArgument, "ball needs a center and a positive radius");
      for (double c : b->center)
        if (!(c - b->radius > 0.0))
          fail(ErrorKind::InvalidArgument, "ball closure leaves the positive orthant");
    } else if (auto b = std::get_if<Box>(&shape_)) {
      if (b->lower.empty() || b->lower.size() != b->upper.size())
        fail(ErrorKind::InvalidArgument, "box corners have mismatched dimensions");
      for (std::size_t i = 0; i < b->lower.size(); ++i) {
        if (!(b->lower[i] > 0.0))
          fail(ErrorKind::InvalidArgument, "box closure leaves the positive orthant");
        if (!(b->lower[i] <= b->upper[i])) fail(ErrorKind::InvalidArgument, "box lower > upper");
      }
    } else {
      const auto& v = std::get<Polygon>(shape_).vertices;
      if (v.size() < 3) fail(ErrorKind::InvalidArgument, "polygon needs at least 3 vertices");
      for (std::size_t e = 0; e < v.size(); ++e) {
        const auto& a = v[e];
        const auto& b = v[(e + 1) % v.size()];
        const auto& c = v[(e + 2) % v.size()];
        if (!(a[0] > 0.0 && a[1] > 0.0))
          fail(ErrorKind::InvalidArgument, "polygon closure leaves the positive orthant");
        double cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (!(cross > 0.0))
          fail(ErrorKind::InvalidArgument, "polygon is not strictly convex and counterclockwise");
      }
    }
  }

  Shape shape_;
};

/// Optional replacement for mass-action intensities, evaluated once per grid point.
using IntensityFn = std::function<double(const Vec& x, std::size_t j, Direction dir)>;

/**
 * Points i*h of the closed domain with per-reaction neighbor links.
 * Per-(point, reaction) arrays are stored flat at p * n_reactions + j.
 */
struct LatticeGrid {
  double h = 0.0;
  std::size_t dim = 0;
  std::size_t n_reactions = 0;
  std::vector<std::vector<long>> index;
  std::vector<Vec> coords;
  std::vector<std::optional<std::size_t>> fwd;
  std::vector<std::optional<std::size_t>> bwd;
  std::vector<double> phi_plus;
  std::vector<double> phi_minus;
  std::map<std::vector<long>, std::size_t> lookup;

  std::size_t size() const { return index.size(); }

  std::optional<std::size_t> find(const std::vector<long>& i) const {
    auto it = lookup.find(i);
    if (it == lookup.end()) return std::nullopt;
    return it->second;
  }

  /// Grid point closest to x in the Euclidean norm; ties go to the lower index.
  std::size_t nearest(const Vec& x) const {
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < size(); ++p) {
      double s = 0.0;
      for (std::size_t l = 0; l < dim; ++l) s += (coords[p][l] - x[l]) * (coords[p][l] - x[l]);
      if (s < bd) {
        bd = s;
        best = p;
      }
    }
    return best;
  }

  GridFunction evaluate(const std::function<double(const Vec&)>& f) const {
    GridFunction out(size());
    for (std::size_t p = 0; p < size(); ++p) out[p] = f(coords[p]);
    return out;
  }
};

inline LatticeGrid build_grid(const Domain& dom, const ReactionNetwork& net, double h,
                              const IntensityFn& intensity = {}) {
  net.validate();
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::InvalidArgument, "mesh size must be positive");
  if (dom.dim() != net.n_species)
    fail(ErrorKind::InvalidArgument, "domain dimension differs from species count");
  const std::size_t n = net.n_species, m = net.n_reactions();
  auto [lo, hi] = dom.bounding_box();
  std::vector<long> first(n), last(n);
  for (std::size_t l = 0; l < n; ++l) {
    first[l] = std::max(0L, static_cast<long>(std::ceil(lo[l] / h - 1e-9)));
    last[l] = static_cast<long>(std::floor(hi[l] / h + 1e-9));
    if (last[l] < first[l]) fail(ErrorKind::EmptyGrid, "no lattice point in the domain");
  }

  LatticeGrid g;
  g.h = h;
  g.dim = n;
  g.n_reactions = m;
  auto point_of = [&](const std::vector<long>& i) {
    Vec x(n);
    for (std::size_t l = 0; l < n; ++l) x[l] = static_cast<double>(i[l]) * h;
    return x;
  };
  std::vector<long> i = first;
  while (true) {
    Vec x = point_of(i);
    if (dom.contains(x)) {
      g.lookup.emplace(i, g.index.size());
      g.index.push_back(i);
      g.coords.push_back(std::move(x));
    }
    std::size_t l = 0;
    while (l < n && i[l] == last[l]) i[l] = first[l], ++l;
    if (l == n) break;
    ++i[l];
  }
  if (g.index.empty()) fail(ErrorKind::EmptyGrid, "no lattice point in the domain");

  g.fwd.assign(g.size() * m, std::nullopt);
  g.bwd.assign(g.size() * m, std::nullopt);
  g.phi_plus.assign(g.size() * m, 0.0);
  g.phi_minus.assign(g.size() * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    auto nu = net.reaction_vector(j);
    for (std::size_t p = 0; p < g.size(); ++p) {
      std::vector<long> up = g.index[p], dn = g.index[p];
      for (std::size_t l = 0; l < n; ++l) {
        up[l] += nu[l];
        dn[l] -= nu[l];
      }
      g.fwd[p * m + j] = g.find(up);
      g.bwd[p * m + j] = g.find(dn);
      const Vec& x = g.coords[p];
      g.phi_plus[p * m + j] =
          intensity ? intensity(x, j, Direction::Forward) : lma_intensity(net, x, j, Direction::Forward);
      g.phi_minus[p * m + j] = intensity ? intensity(x, j, Direction::Backward)
                                         : lma_intensity(net, x, j, Direction::Backward);
    }
  }
  return g;
}

/// Perpendicular (nu_2, -nu_1) of a planar reaction vector.
inline Vec perpendicular(const Vec& nu) { return {nu[1], -nu[0]}; }

inline Vec to_vec(const std::vector<int>& v) { return Vec(v.begin(), v.end()); }

/**
 * Maximal interval [a, b] with x0 + beta nu_perp + alpha nu in the closed domain.
 * A tangent line yields a = b.
 */
inline std::pair<double, double> segment_bounds(const Domain& dom, const Vec& x0, const Vec& nu,
                                                double beta) {
  if (dom.dim() != 2 || x0.size() != 2 || nu.size() != 2)
    fail(ErrorKind::InvalidArgument, "segment geometry is planar");
  Vec perp = perpendicular(nu);
  Vec q{x0[0] + beta * perp[0], x0[1] + beta * perp[1]};
  if (auto iv = dom.line_interval(q, nu, 0.0)) return *iv;
  if (auto iv = dom.line_interval(q, nu, dom.tolerance())) {
    double mid = 0.5 * (iv->first + iv->second);
    return {mid, mid};
  }
  fail(ErrorKind::NoIntersection, "line misses the domain closure");
}

}  // namespace crnhj
