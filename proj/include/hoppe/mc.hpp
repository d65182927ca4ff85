#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hoppe/pointset.hpp"
#include "hoppe/random.hpp"

namespace hoppe {

struct ExperimentReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> target;
  std::optional<double> z;  // (estimate - target) / std_error
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds

  /// Sets target and z. A zero standard error gives z = 0 on an exact match
  /// and +-inf otherwise.
  void compare_to(double value);

  /// |estimate - target| <= relative_slack * |target| + z_limit * std_error.
  bool within(double z_limit, double relative_slack = 0.0) const;
};

/// Named statistics accepted by estimate():
///   T, W, U, 2R     tree statistics (integer)
///   U/n^2           U_n / n^2 (alias U/n2)
///   S               barycenter S_n (needs a kernel)
///   S_var           variance of S_n across replicates (needs a kernel)
std::vector<std::string> statistic_names();

struct EstimateRequest {
  std::string statistic;
  std::size_t n = 100;
  double theta = 1.0;
  std::optional<JumpKernel> kernel;
  std::size_t replicates = 10'000;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
};

/// Streams `replicates` fresh trees (replicate r uses stream(seed, r)) and
/// compares the estimate with the exact target when one is known.
ExperimentReport estimate(const EstimateRequest& request);

/// Several tree statistics from the same replicates, in the order given.
std::vector<ExperimentReport> estimate_tree_statistics(std::span<const std::string> statistics,
                                                       std::size_t n, double theta,
                                                       std::size_t replicates, std::uint64_t seed,
                                                       unsigned threads = 0);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double critical = 0.0;   // 1% level
  double p_value = 0.0;    // asymptotic Kolmogorov tail
  bool passed = false;
};

/// One-sample Kolmogorov-Smirnov test against N(0, variance).
KsResult ks_normal(std::span<const double> samples, double variance);

/// 1% critical value of sqrt-scaled KS distance, with Stephens' small-n correction.
double ks_critical_1pct(std::size_t samples);
/// P(K > x) for the Kolmogorov distribution.
double kolmogorov_tail(double x);

/// Mean and variance of sigma2 * U'_n / n^2 over fresh Hoppe trees against
/// sigma2 * 2/(1+theta) and sigma2^2 * (28 theta + 4)/(3 (1+theta)^2 (2+theta)(3+theta)).
std::pair<ExperimentReport, ExperimentReport> mixed_normal_variance_report(
    std::size_t n, double theta, double sigma2, std::size_t replicates, std::uint64_t seed,
    unsigned threads = 0);

/// Newline-delimited JSON, one object per report.
std::string to_json(const ExperimentReport& report);
void write_jsonl(std::ostream& out, std::span<const ExperimentReport> reports);
void write_report_csv(std::ostream& out, std::span<const ExperimentReport> reports);

}  // namespace hoppe
