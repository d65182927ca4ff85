#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hoppe/random.hpp"

namespace hoppe {

/// h_n^theta = sum_{j=1}^{n-1} 1/(theta+j); zero for n <= 1.
double harmonic_theta(std::size_t n, double theta);

/// Digamma for x > 0: upward recurrence to x >= 6, then the asymptotic
/// series. Absolute error below 1e-12 on the tested range.
double digamma(double x);

/// log of the rising factorial x(x+1)...(x+k-1), via log-gamma.
double log_rising_factorial(double x, std::size_t k);

// Exact expectations for the Hoppe(theta) tree on n vertices. All three
// vanish for n = 1.
double expected_T(std::size_t n, double theta);
double expected_U(std::size_t n, double theta);
double expected_W(std::size_t n, double theta);
/// E R_n (unordered pairs), from E U_n = E T_n + 2 E R_n.
double expected_R(std::size_t n, double theta);

/// Largest relative residual of each one-step recursion for the
/// unconditional expectations, taken over 2..n.
struct RecursionReport {
  std::size_t n = 0;
  double theta = 0.0;
  double residual_T = 0.0;
  double residual_R = 0.0;
  double residual_U = 0.0;
  double residual_W = 0.0;
  double tolerance = 1e-9;

  bool ok() const {
    return residual_T <= tolerance && residual_R <= tolerance && residual_U <= tolerance &&
           residual_W <= tolerance;
  }
};

RecursionReport expected_recursion_check(std::size_t n, double theta);

/// Law of K, the size of the subtree hanging off vertex 1 in a Hoppe tree of
/// n >= 2 vertices:
///   P(K = m) = C(n-2, m-1) theta^(n-m-1) (m-1)! / (theta+1)^(n-2),
/// with rising factorials, m in 1..n-1.
double k_pmf(std::size_t n, double theta, std::size_t m);

/// Tabulated law of K for repeated sampling.
class SubtreeSizeLaw {
 public:
  SubtreeSizeLaw(std::size_t n, double theta);

  std::size_t n() const { return n_; }
  double theta() const { return theta_; }
  double pmf(std::size_t m) const;
  std::span<const double> cdf() const { return cdf_; }

  /// Inversion on the cumulative table.
  std::size_t sample(Rng& rng) const;

 private:
  std::size_t n_;
  double theta_;
  std::vector<double> pmf_;  // index m-1
  std::vector<double> cdf_;
};

/// One draw of K by inversion (builds the table; use SubtreeSizeLaw in loops).
std::size_t k_sample(std::size_t n, double theta, Rng& rng);

/// One draw of K from the urn: a white ball of weight theta and a red ball of
/// weight 1, each draw adding a unit ball of the drawn colour; K is the red
/// count after n-2 draws.
std::size_t k_sample_urn(std::size_t n, double theta, Rng& rng);

struct LimitMoments {
  double u_mean = 0.0;
  double u_second = 0.0;
  double u_variance = 0.0;
};

/// Moments of the limit U' of U'_n / n^2 for the Hoppe(theta) tree; at
/// theta = 1 these coincide with the random recursive tree limit U.
LimitMoments limit_moments_u(double theta);

/// The random recursive tree limit: mean 1, second moment 11/9.
LimitMoments limit_moments_recursive_tree();

struct ExpectationRow {
  std::size_t n;
  double theta;
  double expected_T;
  double expected_U;
  double expected_W;
};

std::vector<ExpectationRow> expectation_table(std::span<const std::size_t> ns, double theta);
void write_expectation_csv(std::ostream& out, std::span<const ExpectationRow> rows);

}  // namespace hoppe
