#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crnhj/network.hpp"

namespace crnhj {

/// Directed jump x_i -> x_k with intensity Phi(x_i, x_k) (rate Phi / h).
struct Edge {
  std::size_t target;
  double phi;
};

/**
 * State space of a constrained jump process in compressed row form.
 * Only in-grid jumps are present, so blocked channels simply have no edge.
 */
struct JumpGraph {
  double h = 1.0;
  std::vector<std::size_t> offset{0};
  std::vector<Edge> edges;

  std::size_t size() const { return offset.size() - 1; }

  std::span<const Edge> out(std::size_t i) const {
    return {edges.data() + offset[i], offset[i + 1] - offset[i]};
  }

  double total_phi(std::size_t i) const {
    double s = 0.0;
    for (const Edge& e : out(i)) s += e.phi;
    return s;
  }

  double max_total_phi() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, total_phi(i));
    return m;
  }

  void add_node(const std::vector<Edge>& es) {
    edges.insert(edges.end(), es.begin(), es.end());
    offset.push_back(edges.size());
  }
};

/// The discrete Hamiltonian H_h is fully described by the jump graph.
using DiscreteHamiltonian = JumpGraph;

inline JumpGraph jump_graph(const LatticeGrid& g) {
  JumpGraph out;
  out.h = g.h;
  const std::size_t m = g.n_reactions;
  std::vector<Edge> es;
  for (std::size_t p = 0; p < g.size(); ++p) {
    es.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (auto k = g.fwd[p * m + j]) es.push_back({*k, g.phi_plus[p * m + j]});
      if (auto k = g.bwd[p * m + j]) es.push_back({*k, g.phi_minus[p * m + j]});
    }
    out.add_node(es);
  }
  return out;
}

/// Component reachable from `start`, with the map from new to old indices.
struct Subgraph {
  JumpGraph graph;
  std::vector<std::size_t> nodes;
  std::size_t start = 0;
};

inline Subgraph reachable_subgraph(const JumpGraph& g, std::size_t start) {
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> local(g.size(), none);
  Subgraph s;
  s.nodes.push_back(start);
  local[start] = 0;
  for (std::size_t q = 0; q < s.nodes.size(); ++q)
    for (const Edge& e : g.out(s.nodes[q]))
      if (local[e.target] == none) {
        local[e.target] = s.nodes.size();
        s.nodes.push_back(e.target);
      }
  s.graph.h = g.h;
  std::vector<Edge> es;
  for (std::size_t old : s.nodes) {
    es.clear();
    for (const Edge& e : g.out(old)) es.push_back({local[e.target], e.phi});
    s.graph.add_node(es);
  }
  return s;
}

inline GridFunction restrict_to(const GridFunction& f, const std::vector<std::size_t>& nodes) {
  GridFunction out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = f[nodes[i]];
  return out;
}

inline double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_diff(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) fail(ErrorKind::SizeMismatch, "grid functions differ in size");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace crnhj
