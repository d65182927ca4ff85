#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hoppe/moments.hpp"
#include "hoppe/random.hpp"
#include "hoppe/tree.hpp"

namespace hoppe {

/// v log v + (1-v) log(1-v) on [0, 1], with the limit 0 at both ends.
double esig(double v);

/// Beta(1, theta) by inversion: 1 - (1-u)^(1/theta).
double beta_1_theta_from_uniform(double theta, double u);
double sample_beta_1_theta(double theta, Rng& rng);

/// E f(V) for V ~ Beta(1, theta), integrating over the uniform variable u of
/// the inversion above with tanh-sinh quadrature (step-halving trapezoid
/// after a double-exponential substitution). Endpoint infinite slopes, as in
/// esig, and the steep layer near u = 1 for large theta cost little.
double beta_expectation(double theta, const std::function<double(double)>& f,
                        double tol = 1e-12);

enum class PoolKind { u, u_prime, wt, wt_prime };

std::string to_string(PoolKind kind);

/// Population approximating a distributional fixed point. Scalar kinds use
/// scalar(); the (W, T) kinds use pairs() with .first = W, .second = T.
class FixpointPool {
 public:
  using Pair = std::array<double, 2>;

  static constexpr std::size_t kDefaultSize = 100'000;
  static constexpr std::size_t kDefaultGenerations = 40;
  static constexpr std::size_t kMinMomentSize = 10'000;
  /// A frozen inner pool must have run at least this many generations.
  static constexpr std::size_t kMinConvergedGenerations = 20;

  /// All ones: the limit mean of U.
  static FixpointPool initial_u(std::size_t size);
  /// All 2/(1+theta): the limit mean of U'.
  static FixpointPool initial_u_prime(double theta, std::size_t size);
  /// All zeros: the standardized limits are centered.
  static FixpointPool initial_wt(std::size_t size);
  static FixpointPool initial_wt_prime(double theta, std::size_t size);

  static FixpointPool from_scalars(PoolKind kind, double theta, std::vector<double> values,
                                   std::size_t generation = 0);
  static FixpointPool from_pairs(PoolKind kind, double theta, std::vector<Pair> values,
                                 std::size_t generation = 0);

  PoolKind kind() const { return kind_; }
  double theta() const { return theta_; }
  std::size_t generation() const { return generation_; }
  std::size_t size() const { return is_scalar() ? scalar_.size() : pairs_.size(); }
  bool is_scalar() const { return kind_ == PoolKind::u || kind_ == PoolKind::u_prime; }

  const std::vector<double>& scalar() const { return scalar_; }
  const std::vector<Pair>& pairs() const { return pairs_; }

 private:
  FixpointPool(PoolKind kind, double theta, std::size_t generation)
      : kind_(kind), theta_(theta), generation_(generation) {}

  PoolKind kind_;
  double theta_;
  std::size_t generation_;
  std::vector<double> scalar_;
  std::vector<Pair> pairs_;
};

// Each step maps the whole pool once. Slot randomness comes from one stream
// per (seed, generation, block of kPoolBlock slots), so the result does not
// depend on the worker count.
inline constexpr std::size_t kPoolBlock = 1024;

/// U = V^2 U* + (1-V)^2 U + V^2, V uniform, U and U* drawn independently.
FixpointPool iterate_u(const FixpointPool& pool, std::size_t steps, std::uint64_t seed,
                       unsigned threads = 0);

/// U' = (1-V)^2 U' + V^2 U + V^2, V ~ Beta(1, theta), U from the frozen pool.
FixpointPool iterate_u_prime(const FixpointPool& pool, const FixpointPool& u_pool,
                             std::size_t steps, std::uint64_t seed, unsigned threads = 0);

/// (W, T) = A*(V) (W*, T*) + B*(V) (W, T) + b*(V) with V uniform and
/// b*(V) = (3V(1-V) + esig(V), V + esig(V)).
/// The equation is also solved by (W + c, T + c); each generation is shifted
/// along (1, 1) to keep the T mean at 0.
FixpointPool iterate_wt(const FixpointPool& pool, std::size_t steps, std::uint64_t seed,
                        unsigned threads = 0);

/// (W', T') = A*(V) (W', T') + B*(V) (W, T) + b*_theta(V), V ~ Beta(1, theta),
/// (W, T) from the frozen pool.
FixpointPool iterate_wt_prime(const FixpointPool& pool, const FixpointPool& wt_pool,
                              std::size_t steps, std::uint64_t seed, unsigned threads = 0);

/// The matrices and inhomogeneities of the affine maps above.
using Matrix2 = std::array<std::array<double, 2>, 2>;
Matrix2 matrix_a_star(double v);
Matrix2 matrix_b_star(double v);
std::array<double, 2> b_star_recursive(double v);
std::array<double, 2> b_star_hoppe(double theta, double v);

/// Q (W, T) + offset with Q = (-1, 1); offset 2/(1+theta) recovers U' (1 at theta = 1).
FixpointPool u_from_wt(const FixpointPool& wt_pool);

struct PoolMoments {
  double mean = 0.0;
  double mean_se = 0.0;
  double second = 0.0;
  double second_se = 0.0;
  double variance = 0.0;
};

/// First and second moment of a scalar pool, or of one component (0 = W,
/// 1 = T) of a pair pool. Requires at least kMinMomentSize samples.
PoolMoments pool_moments(const FixpointPool& pool, std::size_t component = 0);

/// Pool of the given kind iterated from its initial state. For the primed
/// kinds the inner pool (U or WT) is built first with a derived seed.
FixpointPool converge_pool(PoolKind kind, double theta, std::size_t size,
                           std::size_t generations, std::uint64_t seed, unsigned threads = 0);

void write_pool_csv(std::ostream& out, const FixpointPool& pool);

/// Larger eigenvalue of A*(V)^t A*(V):
/// (1-V)^2 {1 + V^2 - V (1 - sqrt((1-V)^2 + 1))}.
double contraction_eigenvalue(double v);
/// Smaller eigenvalue (the + branch).
double contraction_eigenvalue_minor(double v);

/// theta/(2+theta) [1 + 1/(3+theta) + 2/((4+theta)(3+theta))].
double contraction_bound(double theta);

struct ContractionReport {
  double theta = 0.0;
  double numeric = 0.0;  // E[lambda(V)], V ~ Beta(1, theta)
  double bound = 0.0;
  bool ok = false;       // numeric <= bound + 1e-6 and bound < 1
};

ContractionReport contraction_check(double theta);

/// The vertex-1 branch (relabeled 0..K-1, a theta = 1 tree) and the rest of
/// the tree (relabeled 0..n-K-1, same theta).
struct BranchSplit {
  HoppeTree branch;
  HoppeTree rest;
};

BranchSplit split_first_branch(const HoppeTree& tree);

/// Which additive term completes the right-hand side of the decomposition.
enum class CrossTerm {
  /// K^2, the pathwise identity.
  square_only,
  /// K^2 + 2K(n-K): also charges pairs split by the cut, whose LCA is the root.
  with_mixed_pairs,
};

struct DecompositionReport {
  std::size_t n = 0;
  double theta = 0.0;
  CrossTerm cross_term = CrossTerm::square_only;
  std::size_t replicates = 0;
  Moments lhs;         // U'_n of whole Hoppe trees
  Moments rhs;         // U_K + U'_{n-K} + K^2 [+ 2K(n-K)]
  Moments lhs_square;  // squares, for the second moment
  Moments rhs_square;
  double z_mean = 0.0;
  double z_second = 0.0;

  bool ok(double z_limit = 3.0) const;
};

DecompositionReport subtree_decomposition_check(std::size_t n, double theta,
                                                std::size_t replicates, std::uint64_t seed,
                                                CrossTerm cross_term = CrossTerm::square_only,
                                                unsigned threads = 0);

}  // namespace hoppe
