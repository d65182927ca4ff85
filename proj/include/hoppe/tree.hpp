#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hoppe/random.hpp"

namespace hoppe {

using Vertex = std::uint32_t;

/// Largest vertex count accepted by the generators. At this size even the
/// path tree keeps W_n = (n^3 - n)/6 and n*T_n inside int64_t.
inline constexpr std::size_t kMaxVertices = 2'000'000;

/// Rooted tree on labels 0..n-1 stored as a parent array with parent[k] < k.
///
/// parent(0) is kNoParent. The recursive-order invariant makes every
/// ascending loop a top-down pass and every descending loop a bottom-up pass.
class HoppeTree {
 public:
  static constexpr Vertex kNoParent = 0xffffffffu;

  /// Validates theta > 0, 1 <= n <= kMaxVertices and parent[k] < k.
  /// parents[0] is ignored and replaced by kNoParent.
  HoppeTree(double theta, std::vector<Vertex> parents);

  double theta() const { return theta_; }
  std::size_t size() const { return parent_.size(); }
  Vertex parent(std::size_t k) const { return parent_[k]; }
  std::span<const Vertex> parents() const { return parent_; }

  friend bool operator==(const HoppeTree&, const HoppeTree&) = default;

 private:
  double theta_;
  std::vector<Vertex> parent_;
};

/// Integer statistics of one tree.
struct TreeStats {
  std::int64_t n = 0;
  std::vector<std::int64_t> depths;
  std::int64_t total_length = 0;  // T_n
  std::int64_t wiener = 0;        // W_n
  std::int64_t lca_sum = 0;       // 2 R_n, ordered pairs
  std::int64_t u = 0;             // U_n = T_n + 2 R_n
};

/// Draws the parent of vertex k when vertices 0..k-1 exist: 0 with
/// probability theta/(theta+k-1), each other vertex with 1/(theta+k-1).
Vertex sample_parent(std::size_t k, double theta, Rng& rng);

HoppeTree generate_tree(std::size_t n, double theta, Rng& rng);

/// O(n) statistics from one ascending (depth) and one descending (subtree
/// size) pass; the Wiener index is the sum over edges of size*(n-size).
TreeStats compute_stats(const HoppeTree& tree);

/// Vertex depths only; cheaper than compute_stats when that is all you need.
std::vector<std::int64_t> depths(const HoppeTree& tree);

/// Size of the subtree rooted at vertex v (v included).
std::size_t subtree_size(const HoppeTree& tree, std::size_t v);

/// 2 R_n computed as sum over non-root v of size(v) (size(v) - 1): a pair's
/// LCA depth counts the non-root vertices whose subtree holds both ends.
/// Independent of the Wiener-index route used by compute_stats.
std::int64_t lca_sum_by_subtrees(const HoppeTree& tree);

/// Depth of the last common ancestor of i and j.
std::int64_t lca_depth(const HoppeTree& tree, std::span<const std::int64_t> depths,
                       std::size_t i, std::size_t j);
std::int64_t lca_depth(const HoppeTree& tree, std::size_t i, std::size_t j);

inline constexpr std::size_t kBruteForceMaxVertices = 10'000;

/// Quadratic oracle: sum over unordered pairs of D_i + D_j - 2 D_ij.
std::int64_t wiener_bruteforce(const HoppeTree& tree);

struct WeightedTree {
  HoppeTree tree;
  double probability;
};

inline constexpr std::size_t kEnumerateMaxVertices = 9;

/// Calls `visit` for every parent array on n vertices together with its
/// probability under the Hoppe(theta) law. Refuses n > kEnumerateMaxVertices.
void for_each_tree(std::size_t n, double theta,
                   const std::function<void(const HoppeTree&, double)>& visit);

/// Materialized form of for_each_tree.
std::vector<WeightedTree> enumerate_trees(std::size_t n, double theta);

/// Text format: "n theta" on the first line, parents of 1..n-1 on the second.
std::string serialize(const HoppeTree& tree);
void write_tree(std::ostream& out, const HoppeTree& tree);
HoppeTree read_tree(std::istream& in);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace hoppe
