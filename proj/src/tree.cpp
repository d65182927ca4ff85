#include "hoppe/tree.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hoppe/error.hpp"

namespace hoppe {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw ParameterError("theta must be a positive finite number");
  }
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("tree statistic overflows int64");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("tree statistic overflows int64");
  return r;
}

}  // namespace

HoppeTree::HoppeTree(double theta, std::vector<Vertex> parents)
    : theta_(theta), parent_(std::move(parents)) {
  require_theta(theta_);
  if (parent_.empty()) throw ParameterError("tree needs at least one vertex");
  if (parent_.size() > kMaxVertices) throw ParameterError("tree exceeds kMaxVertices");
  parent_[0] = kNoParent;
  for (std::size_t k = 1; k < parent_.size(); ++k) {
    if (parent_[k] >= k) {
      throw ParameterError("parent[" + std::to_string(k) + "] must be < " + std::to_string(k));
    }
  }
}

Vertex sample_parent(std::size_t k, double theta, Rng& rng) {
  require_theta(theta);
  if (k == 0) throw ParameterError("sample_parent needs k >= 1");
  // Mass theta on the root, unit mass on each of 1..k-1.
  const double x = uniform01(rng) * (theta + static_cast<double>(k - 1));
  if (x < theta) return 0;
  auto j = static_cast<std::size_t>(x - theta) + 1;
  return static_cast<Vertex>(j < k ? j : k - 1);
}

HoppeTree generate_tree(std::size_t n, double theta, Rng& rng) {
  require_theta(theta);
  if (n == 0) throw ParameterError("generate_tree needs n >= 1");
  if (n > kMaxVertices) throw ParameterError("n exceeds kMaxVertices");
  std::vector<Vertex> parent(n, HoppeTree::kNoParent);
  for (std::size_t k = 1; k < n; ++k) parent[k] = sample_parent(k, theta, rng);
  return HoppeTree(theta, std::move(parent));
}

std::vector<std::int64_t> depths(const HoppeTree& tree) {
  const std::size_t n = tree.size();
  std::vector<std::int64_t> d(n, 0);
  for (std::size_t k = 1; k < n; ++k) d[k] = d[tree.parent(k)] + 1;
  return d;
}

TreeStats compute_stats(const HoppeTree& tree) {
  const std::size_t n = tree.size();
  TreeStats s;
  s.n = static_cast<std::int64_t>(n);
  s.depths = depths(tree);
  for (std::int64_t d : s.depths) s.total_length = checked_add(s.total_length, d);

  std::vector<std::int64_t> size(n, 1);
  for (std::size_t k = n; k-- > 1;) size[tree.parent(k)] += size[k];
  for (std::size_t k = 1; k < n; ++k) {
    s.wiener = checked_add(s.wiener, checked_mul(size[k], s.n - size[k]));
  }

  const std::int64_t n_t = checked_mul(s.n, s.total_length);
  s.u = n_t - s.wiener;
  s.lca_sum = s.u - s.total_length;
  return s;
}

std::int64_t lca_sum_by_subtrees(const HoppeTree& tree) {
  const std::size_t n = tree.size();
  std::vector<std::int64_t> size(n, 1);
  for (std::size_t k = n; k-- > 1;) size[tree.parent(k)] += size[k];
  std::int64_t sum = 0;
  for (std::size_t k = 1; k < n; ++k) sum = checked_add(sum, checked_mul(size[k], size[k] - 1));
  return sum;
}

std::size_t subtree_size(const HoppeTree& tree, std::size_t v) {
  const std::size_t n = tree.size();
  if (v >= n) throw ParameterError("vertex out of range");
  // Descendants of v carry labels > v; mark them in one ascending pass.
  std::vector<char> inside(n, 0);
  inside[v] = 1;
  std::size_t count = 1;
  for (std::size_t k = v + 1; k < n; ++k) {
    if (inside[tree.parent(k)]) {
      inside[k] = 1;
      ++count;
    }
  }
  return count;
}

std::int64_t lca_depth(const HoppeTree& tree, std::span<const std::int64_t> d,
                       std::size_t i, std::size_t j) {
  const std::size_t n = tree.size();
  if (i >= n || j >= n) throw ParameterError("vertex out of range");
  if (d.size() != n) throw ParameterError("depth array does not match tree");
  while (d[i] > d[j]) i = tree.parent(i);
  while (d[j] > d[i]) j = tree.parent(j);
  while (i != j) {
    i = tree.parent(i);
    j = tree.parent(j);
  }
  return d[i];
}

std::int64_t lca_depth(const HoppeTree& tree, std::size_t i, std::size_t j) {
  const auto d = depths(tree);
  return lca_depth(tree, d, i, j);
}

std::int64_t wiener_bruteforce(const HoppeTree& tree) {
  const std::size_t n = tree.size();
  if (n > kBruteForceMaxVertices) throw ParameterError("wiener_bruteforce refuses n > 10^4");
  const auto d = depths(tree);
  std::int64_t w = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      w += d[i] + d[j] - 2 * lca_depth(tree, d, i, j);
    }
  }
  return w;
}

void for_each_tree(std::size_t n, double theta,
                   const std::function<void(const HoppeTree&, double)>& visit) {
  require_theta(theta);
  if (n == 0) throw ParameterError("enumerate_trees needs n >= 1");
  if (n > kEnumerateMaxVertices) throw ParameterError("enumerate_trees refuses n > 9");

  std::vector<Vertex> parent(n, 0);
  parent[0] = HoppeTree::kNoParent;
  // Odometer over parent[k] in {0..k-1}, k = 1..n-1; parent[1] is always 0.
  while (true) {
    double p = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
      p *= (parent[k] == 0 ? theta : 1.0) / (theta + static_cast<double>(k - 1));
    }
    visit(HoppeTree(theta, parent), p);

    std::size_t k = n;
    while (k-- > 1) {
      if (parent[k] + 1 < k) {
        ++parent[k];
        break;
      }
      parent[k] = 0;
    }
    if (k == 0) break;
  }
}

std::vector<WeightedTree> enumerate_trees(std::size_t n, double theta) {
  std::vector<WeightedTree> out;
  for_each_tree(n, theta, [&](const HoppeTree& t, double p) { out.push_back({t, p}); });
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

void write_tree(std::ostream& out, const HoppeTree& tree) {
  out << tree.size() << ' ' << format_double(tree.theta()) << '\n';
  for (std::size_t k = 1; k < tree.size(); ++k) {
    if (k > 1) out << ' ';
    out << tree.parent(k);
  }
  out << '\n';
}

std::string serialize(const HoppeTree& tree) {
  std::ostringstream os;
  write_tree(os, tree);
  return os.str();
}

HoppeTree read_tree(std::istream& in) {
  std::size_t n = 0;
  double theta = 0.0;
  if (!(in >> n >> theta)) throw ParameterError("malformed tree header, expected \"n theta\"");
  if (n == 0 || n > kMaxVertices) throw ParameterError("tree size out of range");
  std::vector<Vertex> parent(n, HoppeTree::kNoParent);
  for (std::size_t k = 1; k < n; ++k) {
    long long p = -1;
    if (!(in >> p)) throw ParameterError("malformed parent list");
    if (p < 0 || p >= static_cast<long long>(k)) throw ParameterError("parent out of range");
    parent[k] = static_cast<Vertex>(p);
  }
  return HoppeTree(theta, std::move(parent));
}

}  // namespace hoppe
