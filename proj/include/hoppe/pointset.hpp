#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hoppe/random.hpp"
#include "hoppe/tree.hpp"

namespace hoppe {

/// One-dimensional covariant jump law kappa(0, .). Translating by the
/// parent position gives kappa(x, .).
class JumpKernel {
 public:
  enum class Kind { normal, poisson_shift, unit_shift, simple_random_walk };

  static constexpr double kMaxPoissonRate = 30.0;

  static JumpKernel normal(double sigma2);
  /// Rate must lie in (0, kMaxPoissonRate]; sampling is by sequential-search inversion.
  static JumpKernel poisson_shift(double lambda);
  static JumpKernel unit_shift();
  static JumpKernel simple_random_walk();

  /// Parses "normal:<sigma2>", "poisson:<lambda>", "shift" or "srw".
  static JumpKernel parse(std::string_view spec);

  Kind kind() const { return kind_; }
  /// sigma^2 for the normal kernel, lambda for the Poisson shift, else 0.
  double parameter() const { return parameter_; }
  double mean_shift() const;
  double variance() const;
  bool centered() const { return mean_shift() == 0.0; }
  std::string describe() const;

 private:
  JumpKernel(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

  Kind kind_;
  double parameter_;
};

/// Draws increments Y ~ kappa(0, .). Keeps the normal generator's state, so
/// reuse one sampler per stream.
class JumpSampler {
 public:
  explicit JumpSampler(const JumpKernel& kernel);
  double operator()(Rng& rng);

 private:
  JumpKernel kernel_;
  std::normal_distribution<double> normal_;
};

struct PointRealization {
  HoppeTree tree;
  std::vector<double> points;  // X_0 = 0
  JumpKernel kernel;
};

/// X_k = X_parent(k) + Y_k in ascending k, which sums the increments along
/// the root path of k.
void realize_points(const HoppeTree& tree, JumpSampler& sampler, Rng& rng, std::span<double> out);
PointRealization realize(const HoppeTree& tree, const JumpKernel& kernel, Rng& rng);

/// Mean of X_0..X_{n-1}.
double barycenter(std::span<const double> points);
double barycenter(const PointRealization& realization);

/// sigma2 * U_n / n^2, the variance of the barycenter given the tree.
double conditional_variance(const TreeStats& stats, double sigma2);

struct CovarianceEstimate {
  double estimate = 0.0;  // sample covariance of X_j, X_k
  double std_error = 0.0;
  double lca_theory = 0.0;  // mean of D_jk * sigma^2 over the same trees
  double lca_theory_stderr = 0.0;
  double z_vs_lca = 0.0;  // paired: mean of (X_j X_k - D_jk sigma^2) over its SE
  std::optional<double> exact_theory;  // E[D_jk] sigma^2 by enumeration when n is small
  std::optional<double> z_vs_exact;
  std::size_t replicates = 0;
};

/// Monte Carlo Cov(X_j, X_k) over fresh (tree, jumps) pairs. Requires a
/// centered kernel; replicate r uses stream(seed, r).
CovarianceEstimate empirical_pair_covariance(std::size_t j, std::size_t k, std::size_t n,
                                             double theta, const JumpKernel& kernel,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned threads = 0);

/// Columns vertex,parent,depth,x; the root's parent is written as -1.
void write_realization_csv(std::ostream& out, const PointRealization& realization);

}  // namespace hoppe
