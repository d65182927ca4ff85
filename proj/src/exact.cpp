#include "hoppe/exact.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hoppe/error.hpp"
#include "hoppe/tree.hpp"

namespace hoppe {

namespace {

void require_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ParameterError("theta must be positive");
}

double relative_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

}  // namespace

double harmonic_theta(std::size_t n, double theta) {
  require_theta(theta);
  double h = 0.0;
  for (std::size_t j = 1; j < n; ++j) h += 1.0 / (theta + static_cast<double>(j));
  return h;
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("digamma needs x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  // psi(x) ~ log x - 1/(2x) - sum_k B_2k / (2k x^2k)
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return result + std::log(x) - 0.5 / x - series;
}

double log_rising_factorial(double x, std::size_t k) {
  if (k == 0) return 0.0;
  return std::lgamma(x + static_cast<double>(k)) - std::lgamma(x);
}

double expected_T(std::size_t n, double theta) {
  if (n <= 1) return 0.0;
  return (theta + static_cast<double>(n) - 1.0) * harmonic_theta(n, theta);
}

double expected_U(std::size_t n, double theta) {
  if (n <= 1) return 0.0;
  const double nn = static_cast<double>(n);
  const double a = theta + nn;
  const double b = theta + nn - 1.0;
  return a * b * (2.0 / (1.0 + theta) - 1.0 / b - (1.0 + harmonic_theta(n - 1, theta)) / a);
}

double expected_W(std::size_t n, double theta) {
  if (n <= 1) return 0.0;
  const double nn = static_cast<double>(n);
  const double a = theta + nn;
  const double b = theta + nn - 1.0;
  const double h_prev = harmonic_theta(n - 1, theta);
  const double h = harmonic_theta(n, theta);
  return a * b *
         ((theta - 1.0) * (1.0 / (theta + 1.0) - 1.0 / b - h_prev / a) + h - 1.0 +
          (theta + 1.0) / a);
}

double expected_R(std::size_t n, double theta) {
  return 0.5 * (expected_U(n, theta) - expected_T(n, theta));
}

RecursionReport expected_recursion_check(std::size_t n, double theta) {
  require_theta(theta);
  if (n < 2) throw ParameterError("expected_recursion_check needs n >= 2");
  RecursionReport r;
  r.n = n;
  r.theta = theta;
  for (std::size_t m = 2; m <= n; ++m) {
    const double mm = static_cast<double>(m);
    const double denom = theta + mm - 2.0;
    const double t_prev = expected_T(m - 1, theta);
    const double grow = (theta + mm) / denom;

    const double t_rhs = (theta + mm - 1.0) / denom * t_prev + 1.0;
    const double r_rhs = grow * expected_R(m - 1, theta) + t_prev / denom;
    const double u_rhs = grow * expected_U(m - 1, theta) + t_prev / denom + 1.0;
    const double w_rhs =
        grow * expected_W(m - 1, theta) + (theta - 1.0) / denom * t_prev + (mm - 1.0);

    r.residual_T = std::max(r.residual_T, relative_residual(expected_T(m, theta), t_rhs));
    r.residual_R = std::max(r.residual_R, relative_residual(expected_R(m, theta), r_rhs));
    r.residual_U = std::max(r.residual_U, relative_residual(expected_U(m, theta), u_rhs));
    r.residual_W = std::max(r.residual_W, relative_residual(expected_W(m, theta), w_rhs));
  }
  return r;
}

double k_pmf(std::size_t n, double theta, std::size_t m) {
  require_theta(theta);
  if (n < 2) throw ParameterError("k_pmf needs n >= 2");
  if (m < 1 || m > n - 1) throw ParameterError("k_pmf needs 1 <= m <= n-1");
  const double log_binom = std::lgamma(static_cast<double>(n - 1)) -
                           std::lgamma(static_cast<double>(m)) -
                           std::lgamma(static_cast<double>(n - m));
  const double log_p = log_binom + log_rising_factorial(theta, n - m - 1) +
                       std::lgamma(static_cast<double>(m)) -
                       log_rising_factorial(theta + 1.0, n - 2);
  return std::exp(log_p);
}

SubtreeSizeLaw::SubtreeSizeLaw(std::size_t n, double theta) : n_(n), theta_(theta) {
  require_theta(theta);
  if (n < 2) throw ParameterError("subtree size law needs n >= 2");
  pmf_.resize(n - 1);
  cdf_.resize(n - 1);
  double acc = 0.0;
  for (std::size_t m = 1; m <= n - 1; ++m) {
    pmf_[m - 1] = k_pmf(n, theta, m);
    acc += pmf_[m - 1];
    cdf_[m - 1] = acc;
  }
}

double SubtreeSizeLaw::pmf(std::size_t m) const {
  if (m < 1 || m > n_ - 1) throw ParameterError("m out of range");
  return pmf_[m - 1];
}

std::size_t SubtreeSizeLaw::sample(Rng& rng) const {
  // Scale by the table total so rounding in the tail cannot fall off the end.
  const double u = uniform01(rng) * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto idx = static_cast<std::size_t>(it - cdf_.begin());
  return std::min(idx, cdf_.size() - 1) + 1;
}

std::size_t k_sample(std::size_t n, double theta, Rng& rng) {
  return SubtreeSizeLaw(n, theta).sample(rng);
}

std::size_t k_sample_urn(std::size_t n, double theta, Rng& rng) {
  require_theta(theta);
  if (n < 2) throw ParameterError("k_sample_urn needs n >= 2");
  double white = theta;
  double red = 1.0;
  for (std::size_t step = 0; step + 2 < n; ++step) {
    if (uniform01(rng) * (white + red) < red) {
      red += 1.0;
    } else {
      white += 1.0;
    }
  }
  return static_cast<std::size_t>(red);
}

LimitMoments limit_moments_u(double theta) {
  require_theta(theta);
  const double t1 = 1.0 + theta;
  const double t2 = 2.0 + theta;
  const double t3 = 3.0 + theta;
  LimitMoments m;
  m.u_mean = 2.0 / t1;
  m.u_second = (12.0 * theta + 76.0) / (3.0 * t1 * t2 * t3);
  m.u_variance = (28.0 * theta + 4.0) / (3.0 * t1 * t1 * t2 * t3);
  return m;
}

LimitMoments limit_moments_recursive_tree() {
  return {1.0, 11.0 / 9.0, 2.0 / 9.0};
}

std::vector<ExpectationRow> expectation_table(std::span<const std::size_t> ns, double theta) {
  require_theta(theta);
  std::vector<ExpectationRow> rows;
  rows.reserve(ns.size());
  for (std::size_t n : ns) {
    if (n == 0) throw ParameterError("n must be >= 1");
    rows.push_back({n, theta, expected_T(n, theta), expected_U(n, theta), expected_W(n, theta)});
  }
  return rows;
}

void write_expectation_csv(std::ostream& out, std::span<const ExpectationRow> rows) {
  out << "n,theta,expected_T,expected_U,expected_W\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.theta) << ',' << format_double(r.expected_T) << ','
        << format_double(r.expected_U) << ',' << format_double(r.expected_W) << '\n';
  }
}

}  // namespace hoppe
