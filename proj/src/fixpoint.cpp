#include "hoppe/fixpoint.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <limits>
#include <ostream>

#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/parallel.hpp"

namespace hoppe {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("theta must be positive");
}

void require_kind(const FixpointPool& pool, PoolKind kind) {
  if (pool.kind() != kind) {
    throw ParameterError("expected a " + to_string(kind) + " pool, got " + to_string(pool.kind()));
  }
  if (pool.size() == 0) throw ParameterError("empty pool");
}

void require_converged(const FixpointPool& inner, PoolKind kind) {
  require_kind(inner, kind);
  if (inner.generation() < FixpointPool::kMinConvergedGenerations) {
    throw ParameterError("frozen " + to_string(kind) + " pool has only " +
                         std::to_string(inner.generation()) + " generations, needs " +
                         std::to_string(FixpointPool::kMinConvergedGenerations));
  }
}

std::array<double, 2> mat_vec(const Matrix2& m, const FixpointPool::Pair& x) {
  return {m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]};
}

// (W + c, T + c) solves the (W, T) equation whenever (W, T) does, so the
// pool mean drifts along (1, 1) like a random walk. Shifting by the T mean
// after each generation selects the centered solution.
void recenter_along_diagonal(std::vector<FixpointPool::Pair>& pool) {
  double sum = 0.0;
  for (const auto& p : pool) sum += p[1];
  const double shift = sum / static_cast<double>(pool.size());
  for (auto& p : pool) {
    p[0] -= shift;
    p[1] -= shift;
  }
}

struct NoFinish {
  template <class Value>
  void operator()(std::vector<Value>&) const {}
};

// Runs `steps` generations of a slot map. `slot(rng, prev) -> value`;
// `finish(pool)` runs serially after each generation.
template <class Value, class Slot, class Finish = NoFinish>
std::vector<Value> run_generations(std::vector<Value> current, std::size_t first_generation,
                                   std::size_t steps, std::uint64_t seed, unsigned threads,
                                   Slot&& slot, Finish finish = {}) {
  std::vector<Value> next(current.size());
  for (std::size_t s = 0; s < steps; ++s) {
    const std::uint64_t generation = first_generation + s;
    parallel_blocks(current.size(), kPoolBlock, threads,
                    [&](std::size_t block, std::size_t begin, std::size_t end) {
                      Rng rng(derive_seed(seed, generation, block));
                      for (std::size_t i = begin; i < end; ++i) next[i] = slot(rng, current);
                    });
    current.swap(next);
    finish(current);
  }
  return current;
}

}  // namespace

double esig(double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("esig needs v in [0, 1]");
  auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  return xlogx(v) + xlogx(1.0 - v);
}

double beta_1_theta_from_uniform(double theta, double u) {
  require_theta(theta);
  if (u >= 1.0) return 1.0;
  return -std::expm1(std::log1p(-u) / theta);
}

double sample_beta_1_theta(double theta, Rng& rng) {
  return beta_1_theta_from_uniform(theta, uniform01(rng));
}

double beta_expectation(double theta, const std::function<double(double)>& f, double tol) {
  require_theta(theta);
  // Trapezoid sums in the double-exponential variable, halving the step
  // until successive levels agree; endpoint singularities decay away.
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  auto g = [&](double u) { return f(beta_1_theta_from_uniform(theta, u)); };
  return rule.integrate(g, 0.0, 1.0, tol);
}

std::string to_string(PoolKind kind) {
  switch (kind) {
    case PoolKind::u: return "U";
    case PoolKind::u_prime: return "U'";
    case PoolKind::wt: return "WT";
    case PoolKind::wt_prime: return "WT'";
  }
  return "?";
}

FixpointPool FixpointPool::from_scalars(PoolKind kind, double theta, std::vector<double> values,
                                        std::size_t generation) {
  require_theta(theta);
  if (kind != PoolKind::u && kind != PoolKind::u_prime) throw ParameterError("not a scalar kind");
  if (kind == PoolKind::u && theta != 1.0) throw ParameterError("U pools are defined at theta = 1");
  if (values.empty()) throw ParameterError("empty pool");
  FixpointPool p(kind, theta, generation);
  p.scalar_ = std::move(values);
  return p;
}

FixpointPool FixpointPool::from_pairs(PoolKind kind, double theta, std::vector<Pair> values,
                                      std::size_t generation) {
  require_theta(theta);
  if (kind != PoolKind::wt && kind != PoolKind::wt_prime) throw ParameterError("not a pair kind");
  if (kind == PoolKind::wt && theta != 1.0) throw ParameterError("WT pools are defined at theta = 1");
  if (values.empty()) throw ParameterError("empty pool");
  FixpointPool p(kind, theta, generation);
  p.pairs_ = std::move(values);
  return p;
}

FixpointPool FixpointPool::initial_u(std::size_t size) {
  return from_scalars(PoolKind::u, 1.0, std::vector<double>(size, 1.0));
}

FixpointPool FixpointPool::initial_u_prime(double theta, std::size_t size) {
  require_theta(theta);
  return from_scalars(PoolKind::u_prime, theta, std::vector<double>(size, 2.0 / (1.0 + theta)));
}

FixpointPool FixpointPool::initial_wt(std::size_t size) {
  return from_pairs(PoolKind::wt, 1.0, std::vector<Pair>(size, Pair{0.0, 0.0}));
}

FixpointPool FixpointPool::initial_wt_prime(double theta, std::size_t size) {
  return from_pairs(PoolKind::wt_prime, theta, std::vector<Pair>(size, Pair{0.0, 0.0}));
}

FixpointPool iterate_u(const FixpointPool& pool, std::size_t steps, std::uint64_t seed,
                       unsigned threads) {
  require_kind(pool, PoolKind::u);
  auto values = run_generations(pool.scalar(), pool.generation(), steps, seed, threads,
                                [](Rng& rng, const std::vector<double>& prev) {
                                  const double v = uniform01(rng);
                                  const double u_star = prev[uniform_index(rng, prev.size())];
                                  const double u = prev[uniform_index(rng, prev.size())];
                                  const double w = 1.0 - v;
                                  return v * v * u_star + w * w * u + v * v;
                                });
  return FixpointPool::from_scalars(PoolKind::u, 1.0, std::move(values), pool.generation() + steps);
}

FixpointPool iterate_u_prime(const FixpointPool& pool, const FixpointPool& u_pool,
                             std::size_t steps, std::uint64_t seed, unsigned threads) {
  require_kind(pool, PoolKind::u_prime);
  require_converged(u_pool, PoolKind::u);
  const double theta = pool.theta();
  const auto& frozen = u_pool.scalar();
  auto values = run_generations(pool.scalar(), pool.generation(), steps, seed, threads,
                                [&](Rng& rng, const std::vector<double>& prev) {
                                  const double v = sample_beta_1_theta(theta, rng);
                                  const double u_prime = prev[uniform_index(rng, prev.size())];
                                  const double u = frozen[uniform_index(rng, frozen.size())];
                                  const double w = 1.0 - v;
                                  return w * w * u_prime + v * v * u + v * v;
                                });
  return FixpointPool::from_scalars(PoolKind::u_prime, theta, std::move(values),
                                    pool.generation() + steps);
}

Matrix2 matrix_a_star(double v) {
  const double w = 1.0 - v;
  return {{{w * w, v * w}, {0.0, w}}};
}

Matrix2 matrix_b_star(double v) {
  return {{{v * v, v * (1.0 - v)}, {0.0, v}}};
}

std::array<double, 2> b_star_recursive(double v) {
  const double e = esig(v);
  return {3.0 * v * (1.0 - v) + e, v + e};
}

std::array<double, 2> b_star_hoppe(double theta, double v) {
  require_theta(theta);
  const double e = esig(v);
  const double shift = (digamma(theta + 1.0) - digamma(2.0)) * v;
  const double slope = (theta + 5.0) / (theta + 1.0) - (2.0 * theta + 4.0) / (theta + 1.0) * v;
  return {slope * v + e + shift, v + e + shift};
}

FixpointPool iterate_wt(const FixpointPool& pool, std::size_t steps, std::uint64_t seed,
                        unsigned threads) {
  using Pair = FixpointPool::Pair;
  require_kind(pool, PoolKind::wt);
  auto values = run_generations(pool.pairs(), pool.generation(), steps, seed, threads,
                                [](Rng& rng, const std::vector<Pair>& prev) {
                                  const double v = uniform01(rng);
                                  const Pair& star = prev[uniform_index(rng, prev.size())];
                                  const Pair& other = prev[uniform_index(rng, prev.size())];
                                  const auto a = mat_vec(matrix_a_star(v), star);
                                  const auto b = mat_vec(matrix_b_star(v), other);
                                  const auto c = b_star_recursive(v);
                                  return Pair{a[0] + b[0] + c[0], a[1] + b[1] + c[1]};
                                },
                                recenter_along_diagonal);
  return FixpointPool::from_pairs(PoolKind::wt, 1.0, std::move(values), pool.generation() + steps);
}

FixpointPool iterate_wt_prime(const FixpointPool& pool, const FixpointPool& wt_pool,
                              std::size_t steps, std::uint64_t seed, unsigned threads) {
  using Pair = FixpointPool::Pair;
  require_kind(pool, PoolKind::wt_prime);
  require_converged(wt_pool, PoolKind::wt);
  const double theta = pool.theta();
  const auto& frozen = wt_pool.pairs();
  auto values = run_generations(pool.pairs(), pool.generation(), steps, seed, threads,
                                [&](Rng& rng, const std::vector<Pair>& prev) {
                                  const double v = sample_beta_1_theta(theta, rng);
                                  const Pair& self = prev[uniform_index(rng, prev.size())];
                                  const Pair& rrt = frozen[uniform_index(rng, frozen.size())];
                                  const auto a = mat_vec(matrix_a_star(v), self);
                                  const auto b = mat_vec(matrix_b_star(v), rrt);
                                  const auto c = b_star_hoppe(theta, v);
                                  return Pair{a[0] + b[0] + c[0], a[1] + b[1] + c[1]};
                                });
  return FixpointPool::from_pairs(PoolKind::wt_prime, theta, std::move(values),
                                  pool.generation() + steps);
}

FixpointPool u_from_wt(const FixpointPool& wt_pool) {
  if (wt_pool.is_scalar()) throw ParameterError("u_from_wt needs a WT or WT' pool");
  const double theta = wt_pool.theta();
  const double offset = 2.0 / (1.0 + theta);
  std::vector<double> u;
  u.reserve(wt_pool.size());
  for (const auto& p : wt_pool.pairs()) u.push_back(-p[0] + p[1] + offset);
  const PoolKind kind = wt_pool.kind() == PoolKind::wt ? PoolKind::u : PoolKind::u_prime;
  return FixpointPool::from_scalars(kind, theta, std::move(u), wt_pool.generation());
}

PoolMoments pool_moments(const FixpointPool& pool, std::size_t component) {
  if (pool.size() < FixpointPool::kMinMomentSize) {
    throw ParameterError("moment estimation needs a pool of at least 10^4 samples");
  }
  if (component > (pool.is_scalar() ? 0u : 1u)) throw ParameterError("no such pool component");
  Moments first;
  Moments second;
  auto push = [&](double x) {
    first.push(x);
    second.push(x * x);
  };
  if (pool.is_scalar()) {
    for (double x : pool.scalar()) push(x);
  } else {
    for (const auto& p : pool.pairs()) push(p[component]);
  }
  return {first.mean(), first.stderr_mean(), second.mean(), second.stderr_mean(),
          first.variance()};
}

FixpointPool converge_pool(PoolKind kind, double theta, std::size_t size,
                           std::size_t generations, std::uint64_t seed, unsigned threads) {
  require_theta(theta);
  switch (kind) {
    case PoolKind::u:
      return iterate_u(FixpointPool::initial_u(size), generations, seed, threads);
    case PoolKind::wt:
      return iterate_wt(FixpointPool::initial_wt(size), generations, seed, threads);
    case PoolKind::u_prime: {
      const auto inner = iterate_u(FixpointPool::initial_u(size),
                                   std::max(generations, FixpointPool::kMinConvergedGenerations),
                                   derive_seed(seed, 0x55), threads);
      return iterate_u_prime(FixpointPool::initial_u_prime(theta, size), inner, generations, seed,
                             threads);
    }
    case PoolKind::wt_prime: {
      const auto inner = iterate_wt(FixpointPool::initial_wt(size),
                                    std::max(generations, FixpointPool::kMinConvergedGenerations),
                                    derive_seed(seed, 0x77), threads);
      return iterate_wt_prime(FixpointPool::initial_wt_prime(theta, size), inner, generations,
                              seed, threads);
    }
  }
  throw ParameterError("unknown pool kind");
}

void write_pool_csv(std::ostream& out, const FixpointPool& pool) {
  if (pool.is_scalar()) {
    out << "u\n";
    for (double x : pool.scalar()) out << format_double(x) << '\n';
  } else {
    out << "w,t\n";
    for (const auto& p : pool.pairs()) out << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
  }
}

double contraction_eigenvalue(double v) {
  const double w = 1.0 - v;
  return w * w * (1.0 + v * v - v * (1.0 - std::sqrt(w * w + 1.0)));
}

double contraction_eigenvalue_minor(double v) {
  const double w = 1.0 - v;
  return w * w * (1.0 + v * v - v * (1.0 + std::sqrt(w * w + 1.0)));
}

double contraction_bound(double theta) {
  require_theta(theta);
  return theta / (2.0 + theta) *
         (1.0 + 1.0 / (3.0 + theta) + 2.0 / ((4.0 + theta) * (3.0 + theta)));
}

ContractionReport contraction_check(double theta) {
  ContractionReport r;
  r.theta = theta;
  r.numeric = beta_expectation(theta, contraction_eigenvalue);
  r.bound = contraction_bound(theta);
  r.ok = r.numeric <= r.bound + 1e-6 && r.bound < 1.0;
  return r;
}

BranchSplit split_first_branch(const HoppeTree& tree) {
  const std::size_t n = tree.size();
  if (n < 2) throw ParameterError("split_first_branch needs n >= 2");
  std::vector<char> in_branch(n, 0);
  in_branch[1] = 1;
  for (std::size_t k = 2; k < n; ++k) in_branch[k] = in_branch[tree.parent(k)];

  // Relabel each side in increasing order, which keeps parent < child.
  std::vector<Vertex> label(n, 0);
  std::vector<Vertex> branch_parent{HoppeTree::kNoParent};
  std::vector<Vertex> rest_parent{HoppeTree::kNoParent};
  Vertex next_branch = 1;
  Vertex next_rest = 1;
  for (std::size_t k = 2; k < n; ++k) {
    if (in_branch[k]) {
      label[k] = next_branch++;
      branch_parent.push_back(label[tree.parent(k)]);
    } else {
      label[k] = next_rest++;
      rest_parent.push_back(label[tree.parent(k)]);
    }
  }
  return {HoppeTree(1.0, std::move(branch_parent)), HoppeTree(tree.theta(), std::move(rest_parent))};
}

bool DecompositionReport::ok(double z_limit) const {
  return std::abs(z_mean) < z_limit && std::abs(z_second) < z_limit;
}

namespace {

struct DecompositionAcc {
  Moments lhs, rhs, lhs_square, rhs_square;
  void merge(const DecompositionAcc& o) {
    lhs.merge(o.lhs);
    rhs.merge(o.rhs);
    lhs_square.merge(o.lhs_square);
    rhs_square.merge(o.rhs_square);
  }
};

double two_sample_z(const Moments& a, const Moments& b) {
  const double diff = a.mean() - b.mean();
  const double se = std::hypot(a.stderr_mean(), b.stderr_mean());
  if (se > 0.0) return diff / se;
  if (diff == 0.0) return 0.0;
  return diff > 0 ? std::numeric_limits<double>::infinity()
                  : -std::numeric_limits<double>::infinity();
}

}  // namespace

DecompositionReport subtree_decomposition_check(std::size_t n, double theta,
                                                std::size_t replicates, std::uint64_t seed,
                                                CrossTerm cross_term, unsigned threads) {
  require_theta(theta);
  if (n < 2) throw ParameterError("decomposition needs n >= 2");
  if (replicates < 2) throw ParameterError("need at least 2 replicates");
  const SubtreeSizeLaw k_law(n, theta);

  const auto acc = reduce_replicates<DecompositionAcc>(
      replicates, threads, [&](std::size_t r, DecompositionAcc& a) {
        Rng whole = Rng(derive_seed(seed, r, 0));
        const double lhs = static_cast<double>(compute_stats(generate_tree(n, theta, whole)).u);

        Rng parts = Rng(derive_seed(seed, r, 1));
        const std::size_t k = k_law.sample(parts);
        const auto u_branch = compute_stats(generate_tree(k, 1.0, parts)).u;
        const auto u_rest = compute_stats(generate_tree(n - k, theta, parts)).u;
        const auto kk = static_cast<std::int64_t>(k);
        const auto nn = static_cast<std::int64_t>(n);
        std::int64_t extra = kk * kk;
        if (cross_term == CrossTerm::with_mixed_pairs) extra += 2 * kk * (nn - kk);
        const double rhs = static_cast<double>(u_branch + u_rest + extra);

        a.lhs.push(lhs);
        a.rhs.push(rhs);
        a.lhs_square.push(lhs * lhs);
        a.rhs_square.push(rhs * rhs);
      });

  DecompositionReport rep;
  rep.n = n;
  rep.theta = theta;
  rep.cross_term = cross_term;
  rep.replicates = replicates;
  rep.lhs = acc.lhs;
  rep.rhs = acc.rhs;
  rep.lhs_square = acc.lhs_square;
  rep.rhs_square = acc.rhs_square;
  rep.z_mean = two_sample_z(acc.lhs, acc.rhs);
  rep.z_second = two_sample_z(acc.lhs_square, acc.rhs_square);
  return rep;
}

}  // namespace hoppe
