#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "hoppe/tree.hpp"

namespace hoppe::test {

inline HoppeTree path_tree(std::size_t n) {
  std::vector<Vertex> p(n, HoppeTree::kNoParent);
  for (std::size_t k = 1; k < n; ++k) p[k] = static_cast<Vertex>(k - 1);
  return HoppeTree(1.0, p);
}

inline HoppeTree star_tree(std::size_t n) {
  std::vector<Vertex> p(n, 0);
  return HoppeTree(1.0, p);
}

/// |observed frequency - p| within z standard errors of a binomial proportion.
inline bool frequency_within(std::size_t hits, std::size_t trials, double p, double z = 3.0) {
  const double f = static_cast<double>(hits) / static_cast<double>(trials);
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return std::abs(f - p) <= z * se;
}

}  // namespace hoppe::test
