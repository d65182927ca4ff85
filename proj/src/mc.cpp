#include "hoppe/mc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/moments.hpp"
#include "hoppe/parallel.hpp"
#include "hoppe/tree.hpp"

namespace hoppe {

void ExperimentReport::compare_to(double value) {
  target = value;
  const double diff = estimate - value;
  if (std_error > 0.0) {
    z = diff / std_error;
  } else if (diff == 0.0) {
    z = 0.0;
  } else {
    z = diff > 0 ? std::numeric_limits<double>::infinity()
                 : -std::numeric_limits<double>::infinity();
  }
}

bool ExperimentReport::within(double z_limit, double relative_slack) const {
  if (!target) return false;
  return std::abs(estimate - *target) <= relative_slack * std::abs(*target) + z_limit * std_error;
}

namespace {

using Clock = std::chrono::steady_clock;

enum class Statistic { T, W, U, R2, U_scaled, S, S_var };

Statistic parse_statistic(const std::string& name) {
  if (name == "T") return Statistic::T;
  if (name == "W") return Statistic::W;
  if (name == "U") return Statistic::U;
  if (name == "2R") return Statistic::R2;
  if (name == "U/n^2" || name == "U/n2") return Statistic::U_scaled;
  if (name == "S") return Statistic::S;
  if (name == "S_var") return Statistic::S_var;
  throw ParameterError("unknown statistic \"" + name + "\"");
}

double tree_value(Statistic s, const TreeStats& st) {
  const double n = static_cast<double>(st.n);
  switch (s) {
    case Statistic::T: return static_cast<double>(st.total_length);
    case Statistic::W: return static_cast<double>(st.wiener);
    case Statistic::U: return static_cast<double>(st.u);
    case Statistic::R2: return static_cast<double>(st.lca_sum);
    case Statistic::U_scaled: return static_cast<double>(st.u) / (n * n);
    default: break;
  }
  throw ParameterError("not a tree statistic");
}

std::optional<double> tree_target(Statistic s, std::size_t n, double theta) {
  const double nn = static_cast<double>(n);
  switch (s) {
    case Statistic::T: return expected_T(n, theta);
    case Statistic::W: return expected_W(n, theta);
    case Statistic::U: return expected_U(n, theta);
    case Statistic::R2: return 2.0 * expected_R(n, theta);
    case Statistic::U_scaled: return expected_U(n, theta) / (nn * nn);
    default: return std::nullopt;
  }
}

struct MomentsVector {
  std::vector<Moments> m;
  void merge(const MomentsVector& o) {
    if (m.empty()) {
      m = o.m;
      return;
    }
    for (std::size_t i = 0; i < o.m.size(); ++i) m[i].merge(o.m[i]);
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<std::string> statistic_names() { return {"T", "W", "U", "2R", "U/n^2", "S", "S_var"}; }

std::vector<ExperimentReport> estimate_tree_statistics(std::span<const std::string> statistics,
                                                       std::size_t n, double theta,
                                                       std::size_t replicates, std::uint64_t seed,
                                                       unsigned threads) {
  if (replicates < 2) throw ParameterError("need at least 2 replicates");
  std::vector<Statistic> stats;
  for (const auto& name : statistics) {
    stats.push_back(parse_statistic(name));
    if (stats.back() == Statistic::S || stats.back() == Statistic::S_var) {
      throw ParameterError("point statistics need estimate() with a kernel");
    }
  }
  const auto start = Clock::now();
  const auto acc = reduce_replicates<MomentsVector>(
      replicates, threads, [&](std::size_t r, MomentsVector& a) {
        if (a.m.empty()) a.m.resize(stats.size());
        Rng rng = stream(seed, r);
        const TreeStats st = compute_stats(generate_tree(n, theta, rng));
        for (std::size_t i = 0; i < stats.size(); ++i) a.m[i].push(tree_value(stats[i], st));
      });
  const double elapsed = seconds_since(start);

  std::vector<ExperimentReport> out;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    ExperimentReport rep;
    rep.name = statistics[i];
    rep.estimate = acc.m[i].mean();
    rep.std_error = acc.m[i].stderr_mean();
    rep.replicates = replicates;
    rep.seed = seed;
    rep.wall_time = elapsed;
    if (auto t = tree_target(stats[i], n, theta)) rep.compare_to(*t);
    out.push_back(std::move(rep));
  }
  return out;
}

ExperimentReport estimate(const EstimateRequest& req) {
  const Statistic stat = parse_statistic(req.statistic);
  if (stat != Statistic::S && stat != Statistic::S_var) {
    const std::string names[] = {req.statistic};
    return estimate_tree_statistics(names, req.n, req.theta, req.replicates, req.seed,
                                    req.threads)
        .front();
  }
  if (!req.kernel) throw ParameterError("statistic " + req.statistic + " needs a kernel");
  if (req.replicates < 2) throw ParameterError("need at least 2 replicates");

  const JumpKernel kernel = *req.kernel;
  const auto start = Clock::now();
  const auto acc = reduce_replicates<Moments>(req.replicates, req.threads,
                                              [&](std::size_t r, Moments& m) {
                                                Rng rng = stream(req.seed, r);
                                                const HoppeTree tree =
                                                    generate_tree(req.n, req.theta, rng);
                                                std::vector<double> x(req.n);
                                                JumpSampler sampler(kernel);
                                                realize_points(tree, sampler, rng, x);
                                                m.push(barycenter(x));
                                              });

  ExperimentReport rep;
  rep.name = req.statistic;
  rep.replicates = req.replicates;
  rep.seed = req.seed;
  rep.wall_time = seconds_since(start);
  const double n = static_cast<double>(req.n);
  if (stat == Statistic::S) {
    rep.estimate = acc.mean();
    rep.std_error = acc.stderr_mean();
    rep.compare_to(kernel.mean_shift() * expected_T(req.n, req.theta) / n);
  } else {
    // Var S_n = v E[U_n]/n^2 + m^2 Var(T_n)/n^2; only the centered case has a closed form here.
    rep.estimate = acc.variance();
    rep.std_error = acc.stderr_variance();
    if (kernel.centered()) rep.compare_to(kernel.variance() * expected_U(req.n, req.theta) / (n * n));
  }
  return rep;
}

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_critical_1pct(std::size_t samples) {
  const double rn = std::sqrt(static_cast<double>(samples));
  return 1.6276 / (rn + 0.12 + 0.11 / rn);
}

KsResult ks_normal(std::span<const double> samples, double variance) {
  if (!(variance > 0.0)) throw ParameterError("ks_normal needs variance > 0");
  if (samples.size() < 100) throw ParameterError("ks_normal needs at least 100 samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double scale = std::sqrt(2.0 * variance);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-x[i] / scale);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.critical = ks_critical_1pct(x.size());
  const double rn = std::sqrt(n);
  r.p_value = kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
  r.passed = d <= r.critical;
  return r;
}

std::pair<ExperimentReport, ExperimentReport> mixed_normal_variance_report(
    std::size_t n, double theta, double sigma2, std::size_t replicates, std::uint64_t seed,
    unsigned threads) {
  if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be positive");
  if (replicates < 4) throw ParameterError("need at least 4 replicates");
  const auto start = Clock::now();
  const auto acc = reduce_replicates<Moments>(replicates, threads, [&](std::size_t r, Moments& m) {
    Rng rng = stream(seed, r);
    m.push(conditional_variance(compute_stats(generate_tree(n, theta, rng)), sigma2));
  });
  const double elapsed = seconds_since(start);
  const LimitMoments limit = limit_moments_u(theta);

  ExperimentReport mean;
  mean.name = "mixing_variance_mean";
  mean.estimate = acc.mean();
  mean.std_error = acc.stderr_mean();
  mean.replicates = replicates;
  mean.seed = seed;
  mean.wall_time = elapsed;
  mean.compare_to(sigma2 * limit.u_mean);

  ExperimentReport var = mean;
  var.name = "mixing_variance_variance";
  var.estimate = acc.variance();
  var.std_error = acc.stderr_variance();
  var.compare_to(sigma2 * sigma2 * limit.u_variance);
  return {mean, var};
}

std::string to_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["stderr"] = r.std_error;
  j["target"] = r.target ? nlohmann::json(*r.target) : nlohmann::json(nullptr);
  j["z"] = (r.z && std::isfinite(*r.z)) ? nlohmann::json(*r.z) : nlohmann::json(nullptr);
  j["replicates"] = r.replicates;
  j["seed"] = r.seed;
  j["wall_time"] = r.wall_time;
  return j.dump();
}

void write_jsonl(std::ostream& out, std::span<const ExperimentReport> reports) {
  for (const auto& r : reports) out << to_json(r) << '\n';
}

void write_report_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  out << "name,estimate,stderr,target,z,replicates,seed\n";
  for (const auto& r : reports) {
    out << r.name << ',' << format_double(r.estimate) << ',' << format_double(r.std_error) << ',';
    if (r.target) out << format_double(*r.target);
    out << ',';
    if (r.z) out << format_double(*r.z);
    out << ',' << r.replicates << ',' << r.seed << '\n';
  }
}

}  // namespace hoppe
