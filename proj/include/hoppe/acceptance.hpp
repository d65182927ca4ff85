#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hoppe/random.hpp"

namespace hoppe::acceptance {

struct Options {
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  /// Reduced replicate counts and pool sizes; tolerances unchanged.
  bool quick = false;
  /// Replaces every theta grid with this single value.
  std::optional<double> theta;
  /// Criterion ids to run; empty runs all.
  std::vector<std::string> only;
};

struct Outcome {
  bool passed = false;
  std::vector<std::string> details;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_seconds;
  std::function<Outcome(const Options&)> run;
};

struct Result {
  std::string id;
  std::string title;
  bool passed = false;
  bool within_budget = true;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<std::string> details;

  bool ok() const { return passed && within_budget; }
};

const std::vector<Criterion>& criteria();

/// Runs the selected criteria, printing one PASS/FAIL line per criterion
/// (plus indented details) to `log` as each finishes.
std::vector<Result> run(const Options& options, std::ostream& log);

bool all_passed(const std::vector<Result>& results);

}  // namespace hoppe::acceptance
