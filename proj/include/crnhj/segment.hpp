#pragma once

#include <cmath>
#include <functional>
#include <tuple>
#include <vector>

#include "crnhj/dhje.hpp"
#include "crnhj/network.hpp"

namespace crnhj {

/**
 * Points x0 + beta nu_perp + (r + k h) nu for k in [k_a, k_b], the lattice
 * window inside the chord [a, b] of the shifted line.
 */
struct SegmentGrid {
  Vec x0;
  Vec nu;
  Vec nu_perp;
  double beta = 0.0;
  double r = 0.0;
  double h = 0.0;
  long k_a = 0;
  long k_b = 0;
  double a = 0.0;
  double b = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(k_b - k_a + 1); }
  double alpha(long k) const { return r + static_cast<double>(k) * h; }
  double alpha_at(std::size_t i) const { return alpha(k_a + static_cast<long>(i)); }

  Vec point(double alpha) const {
    return {x0[0] + beta * nu_perp[0] + alpha * nu[0], x0[1] + beta * nu_perp[1] + alpha * nu[1]};
  }
};

/// Intensities along the segment: Phi~(alpha) = Phi(x0 + beta nu_perp + alpha nu).
struct SegmentHamiltonian {
  std::function<double(double)> phi_plus;
  std::function<double(double)> phi_minus;
};

inline SegmentGrid build_segment_grid(const Domain& dom, const Vec& x0, const Vec& nu, double beta,
                                      double r, double h) {
  if (!(h > 0.0)) fail(ErrorKind::InvalidArgument, "mesh size must be positive");
  SegmentGrid s;
  s.x0 = x0;
  s.nu = nu;
  s.nu_perp = perpendicular(nu);
  s.beta = beta;
  s.h = h;
  std::tie(s.a, s.b) = segment_bounds(dom, x0, nu, beta);
  // Phase offsets outside [-h, h) are reduced into [0, h); the shift only relabels k.
  if (r < -h || r >= h) r -= std::floor(r / h) * h;
  s.r = r;
  const double eps = 1e-9;
  s.k_a = static_cast<long>(std::ceil((s.a - r) / h - eps));
  s.k_b = static_cast<long>(std::floor((s.b - r) / h + eps));
  if (s.k_a > s.k_b) fail(ErrorKind::EmptyGrid, "segment shorter than the mesh phase window");
  return s;
}

inline SegmentGrid build_segment_grid(const Domain& dom, const ReactionNetwork& net, const Vec& x0,
                                      double beta, double r, double h, std::size_t j = 0) {
  if (net.n_species != 2) fail(ErrorKind::InvalidArgument, "segments need a planar network");
  return build_segment_grid(dom, x0, to_vec(net.reaction_vector(j)), beta, r, h);
}

inline SegmentHamiltonian segment_hamiltonian(const ReactionNetwork& net, const SegmentGrid& seg,
                                              std::size_t j = 0) {
  SegmentHamiltonian H;
  H.phi_plus = [net, seg, j](double alpha) {
    return lma_intensity(net, seg.point(alpha), j, Direction::Forward);
  };
  H.phi_minus = [net, seg, j](double alpha) {
    return lma_intensity(net, seg.point(alpha), j, Direction::Backward);
  };
  return H;
}

/// Path graph of the reduced scheme: no forward jump at k_b, no backward jump at k_a.
inline JumpGraph segment_graph(const SegmentGrid& seg, const SegmentHamiltonian& ham) {
  JumpGraph g;
  g.h = seg.h;
  const std::size_t n = seg.size();
  std::vector<Edge> es;
  for (std::size_t i = 0; i < n; ++i) {
    es.clear();
    double al = seg.alpha_at(i);
    if (i + 1 < n) es.push_back({i + 1, ham.phi_plus(al)});
    if (i > 0) es.push_back({i - 1, ham.phi_minus(al)});
    g.add_node(es);
  }
  return g;
}

inline GridFunction sample_on_segment(const SegmentGrid& seg,
                                      const std::function<double(const Vec&)>& u0) {
  GridFunction w(seg.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = u0(seg.point(seg.alpha_at(i)));
  return w;
}

inline GridFunction solve_w(const SegmentGrid& seg, const SegmentHamiltonian& ham,
                            const GridFunction& w0, double t, const OdeOptions& opt = {}) {
  if (w0.size() != seg.size()) fail(ErrorKind::SizeMismatch, "w0 does not match the segment grid");
  return evolve_ode(segment_graph(seg, ham), w0, t, opt);
}

/// Sup norm over index-matched points of two equally sized grids.
inline double compare_matched_grids(const GridFunction& wa, const GridFunction& wb) {
  if (wa.size() != wb.size()) fail(ErrorKind::SizeMismatch, "matched grids need equal point counts");
  return sup_diff(wa, wb);
}

/**
 * Segment at offset beta whose mesh h' is chosen by bisection so that it has
 * exactly `count` points (the point count is nonincreasing in h').
 */
inline SegmentGrid match_segment_grid(const Domain& dom, const Vec& x0, const Vec& nu, double beta,
                                      double r, double h, std::size_t count) {
  auto count_at = [&](double hh) -> std::size_t {
    try {
      return build_segment_grid(dom, x0, nu, beta, r, hh).size();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::EmptyGrid) return 0;
      throw;
    }
  };
  std::size_t c = count_at(h);
  if (c == count) return build_segment_grid(dom, x0, nu, beta, r, h);
  double lo = h, hi = h;
  if (c > count) {
    for (int i = 0; i < 200 && count_at(hi) >= count; ++i) hi *= 1.25;
  } else {
    for (int i = 0; i < 200 && count_at(lo) < count; ++i) lo *= 0.8;
  }
  if (count_at(lo) < count || count_at(hi) >= count)
    fail(ErrorKind::NoMatchingMesh, "cannot bracket the requested point count");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * h; ++it) {
    double mid = 0.5 * (lo + hi);
    (count_at(mid) >= count ? lo : hi) = mid;
  }
  if (count_at(lo) != count)
    fail(ErrorKind::NoMatchingMesh, "point count jumps over the requested value");
  return build_segment_grid(dom, x0, nu, beta, r, lo);
}

}  // namespace crnhj
