#pragma once

#include <cmath>
#include <vector>

#include "crnhj/ldp.hpp"

namespace fixtures {

/// 0 <-> X on the box [2, 3] at h = 1: rate 2 from state 2, rate 1 back from state 3.
inline crnhj::ReactionNetwork birth_death() {
  return crnhj::ReactionNetwork{1, {{0}}, {{1}}, {2.0}, {1.0 / 3.0}};
}

inline crnhj::LatticeGrid two_state_grid() {
  return crnhj::build_grid(crnhj::Domain::box({2.0}, {3.0}), birth_death(), 1.0);
}

inline crnhj::LatticeGrid example_grid(double h) {
  return crnhj::build_grid(crnhj::example_domain(), crnhj::example_network(), h);
}

inline std::size_t index_of(const crnhj::LatticeGrid& g, const crnhj::Vec& x) {
  std::vector<long> i;
  for (double v : x) i.push_back(std::lround(v / g.h));
  return *g.find(i);
}

}  // namespace fixtures
