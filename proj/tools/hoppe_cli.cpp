// hoppe: reproducible experiments on Hoppe trees and their tree-indexed point sets.
//
// Every command is a pure function of its flags; the default seed is
// hoppe::kDefaultSeed. Exit status: 0 success, 1 verification failure,
// 2 usage or parameter error.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "hoppe/acceptance.hpp"
#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/fixpoint.hpp"
#include "hoppe/mc.hpp"
#include "hoppe/pointset.hpp"
#include "hoppe/tree.hpp"

namespace {

using namespace hoppe;

enum class Format { csv, json };

struct Config {
  std::size_t n = 100;
  std::vector<std::size_t> ns{1, 10, 100, 1000};
  double theta = 1.0;
  std::optional<double> verify_theta;
  std::string kernel = "normal:1";
  std::size_t replicates = 10'000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t pool_size = FixpointPool::kDefaultSize;
  std::size_t generations = FixpointPool::kDefaultGenerations;
  std::string kind = "u";
  std::string cross_term = "square";
  std::string output;
  Format format = Format::csv;
  unsigned threads = 0;
  bool quick = false;
  std::vector<std::string> only;
};

constexpr const char* kFooter = R"(Output columns:
  tree          text: "n theta", then the parents of 1..n-1; a final comment
                line "# T=.. W=.. U=.. 2R=.." (json: one object)
  realize       vertex,parent,depth,x   (root parent is -1)
  expectations  n,theta,expected_T,expected_U,expected_W
  fixpoint      name,estimate,stderr,target,z,replicates,seed
                (--output additionally writes the pool: column u, or w,t)
  decompose     name,estimate,stderr,target,z,replicates,seed
  json          newline-delimited objects with the same fields

Exit status: 0 success, 1 verification failure, 2 usage error.)";

// Writes to --output when given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void emit(std::ostream& out, Format f, std::span<const ExperimentReport> reports) {
  if (f == Format::json) {
    write_jsonl(out, reports);
  } else {
    write_report_csv(out, reports);
  }
}

int cmd_tree(const Config& c) {
  Rng rng(c.seed);
  const auto tree = generate_tree(c.n, c.theta, rng);
  const auto st = compute_stats(tree);
  Sink sink(c.output);
  if (c.format == Format::json) {
    nlohmann::json j;
    j["n"] = tree.size();
    j["theta"] = tree.theta();
    std::vector<Vertex> parents(tree.parents().begin() + 1, tree.parents().end());
    j["parents"] = parents;
    j["T"] = st.total_length;
    j["W"] = st.wiener;
    j["U"] = st.u;
    j["2R"] = st.lca_sum;
    sink.out() << j.dump() << '\n';
  } else {
    write_tree(sink.out(), tree);
    sink.out() << "# T=" << st.total_length << " W=" << st.wiener << " U=" << st.u
               << " 2R=" << st.lca_sum << '\n';
  }
  return 0;
}

int cmd_realize(const Config& c) {
  Rng rng(c.seed);
  const auto tree = generate_tree(c.n, c.theta, rng);
  const auto r = realize(tree, JumpKernel::parse(c.kernel), rng);
  Sink sink(c.output);
  if (c.format == Format::json) {
    const auto d = depths(tree);
    for (std::size_t k = 0; k < tree.size(); ++k) {
      nlohmann::json j;
      j["vertex"] = k;
      j["parent"] = k == 0 ? -1 : static_cast<long long>(tree.parent(k));
      j["depth"] = d[k];
      j["x"] = r.points[k];
      sink.out() << j.dump() << '\n';
    }
  } else {
    write_realization_csv(sink.out(), r);
  }
  return 0;
}

int cmd_expectations(const Config& c) {
  const auto rows = expectation_table(c.ns, c.theta);
  Sink sink(c.output);
  if (c.format == Format::json) {
    for (const auto& r : rows) {
      nlohmann::json j;
      j["n"] = r.n;
      j["theta"] = r.theta;
      j["expected_T"] = r.expected_T;
      j["expected_U"] = r.expected_U;
      j["expected_W"] = r.expected_W;
      sink.out() << j.dump() << '\n';
    }
  } else {
    write_expectation_csv(sink.out(), rows);
  }
  return 0;
}

PoolKind parse_kind(const std::string& s) {
  if (s == "u") return PoolKind::u;
  if (s == "u_prime") return PoolKind::u_prime;
  if (s == "wt") return PoolKind::wt;
  if (s == "wt_prime") return PoolKind::wt_prime;
  throw ParameterError("unknown pool kind \"" + s + "\"");
}

ExperimentReport moment_report(const std::string& name, double estimate, double se,
                               std::optional<double> target, const Config& c) {
  ExperimentReport r;
  r.name = name;
  r.estimate = estimate;
  r.std_error = se;
  r.replicates = c.pool_size;
  r.seed = c.seed;
  if (target) r.compare_to(*target);
  return r;
}

int cmd_fixpoint(const Config& c) {
  const PoolKind kind = parse_kind(c.kind);
  const bool primed = kind == PoolKind::u_prime || kind == PoolKind::wt_prime;
  if (!primed && c.theta != 1.0) throw ParameterError("U and WT pools are defined at theta = 1 only");
  const auto pool = converge_pool(kind, c.theta, c.pool_size, c.generations, c.seed, c.threads);
  const auto limit = limit_moments_u(c.theta);

  std::vector<ExperimentReport> reports;
  auto add_u = [&](const FixpointPool& u, const std::string& label) {
    const auto m = pool_moments(u);
    reports.push_back(moment_report(label + ".mean", m.mean, m.mean_se, limit.u_mean, c));
    reports.push_back(moment_report(label + ".second", m.second, m.second_se, limit.u_second, c));
  };
  if (pool.is_scalar()) {
    add_u(pool, to_string(kind));
  } else {
    const auto w = pool_moments(pool, 0);
    const auto t = pool_moments(pool, 1);
    reports.push_back(moment_report(to_string(kind) + ".W.mean", w.mean, w.mean_se, 0.0, c));
    reports.push_back(moment_report(to_string(kind) + ".T.mean", t.mean, t.mean_se, 0.0, c));
    reports.push_back(moment_report(to_string(kind) + ".W.second", w.second, w.second_se, std::nullopt, c));
    reports.push_back(moment_report(to_string(kind) + ".T.second", t.second, t.second_se, std::nullopt, c));
    add_u(u_from_wt(pool), to_string(kind) + ".Q");
  }
  if (!c.output.empty()) {
    Sink sink(c.output);
    write_pool_csv(sink.out(), pool);
  }
  emit(std::cout, c.format, reports);
  return 0;
}

int cmd_decompose(const Config& c) {
  CrossTerm cross;
  if (c.cross_term == "square") {
    cross = CrossTerm::square_only;
  } else if (c.cross_term == "mixed") {
    cross = CrossTerm::with_mixed_pairs;
  } else {
    throw ParameterError("--cross-term must be square or mixed");
  }
  const auto r = subtree_decomposition_check(c.n, c.theta, c.replicates, c.seed, cross, c.threads);
  auto make = [&](const std::string& name, const Moments& lhs, const Moments& rhs, double z) {
    ExperimentReport e;
    e.name = name;
    e.estimate = lhs.mean();
    e.std_error = lhs.stderr_mean();
    e.target = rhs.mean();
    e.z = z;
    e.replicates = c.replicates;
    e.seed = c.seed;
    return e;
  };
  const ExperimentReport reports[] = {make("decompose.mean", r.lhs, r.rhs, r.z_mean),
                                      make("decompose.second", r.lhs_square, r.rhs_square, r.z_second)};
  Sink sink(c.output);
  emit(sink.out(), c.format, reports);
  return r.ok() ? 0 : 1;
}

int cmd_verify(const Config& c) {
  acceptance::Options o;
  o.seed = c.seed;
  o.threads = c.threads;
  o.quick = c.quick;
  o.theta = c.verify_theta;
  o.only = c.only;
  Sink sink(c.output);
  const auto results = acceptance::run(o, sink.out());
  return acceptance::all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Hoppe trees: generation, exact moments, fixed points and Monte Carlo checks", "hoppe"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file with flag values")->check(CLI::ExistingFile);
  app.add_option("--threads", c.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed (default fixed for reproducibility)")
      ->capture_default_str();
  app.add_option("--output", c.output, "Output file (default stdout)");
  app.add_option("--format", c.format, "csv or json")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"csv", Format::csv},
                                                                         {"json", Format::json}}));
  app.fallthrough();

  auto positive_theta = [](CLI::App* sub, double& theta) {
    sub->add_option("--theta", theta, "Hoppe parameter theta > 0")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  };
  auto positive_n = [&](CLI::App* sub) {
    sub->add_option("--n", c.n, "Number of vertices")
        ->check(CLI::Range(std::size_t{1}, kMaxVertices))
        ->capture_default_str();
  };

  auto* tree = app.add_subcommand("tree", "Generate one tree and print it with its statistics");
  positive_n(tree);
  positive_theta(tree, c.theta);

  auto* rea = app.add_subcommand("realize", "Generate one tree-indexed point set");
  positive_n(rea);
  positive_theta(rea, c.theta);
  rea->add_option("--kernel", c.kernel, "normal:<s2>, poisson:<lambda>, shift or srw")
      ->capture_default_str();

  auto* exp = app.add_subcommand("expectations", "Exact E T_n, E U_n, E W_n over an n grid");
  exp->add_option("--n", c.ns, "Comma-separated vertex counts")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  positive_theta(exp, c.theta);

  auto* fix = app.add_subcommand("fixpoint", "Iterate a fixed-point pool and report its moments");
  positive_theta(fix, c.theta);
  fix->add_option("--kind", c.kind, "u, u_prime, wt or wt_prime")
      ->check(CLI::IsMember({"u", "u_prime", "wt", "wt_prime"}))
      ->capture_default_str();
  fix->add_option("--pool-size", c.pool_size, "Pool size")
      ->check(CLI::Range(std::size_t{FixpointPool::kMinMomentSize}, std::size_t{100'000'000}))
      ->capture_default_str();
  fix->add_option("--generations", c.generations, "Generations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* dec = app.add_subcommand("decompose", "Check the subtree decomposition in distribution");
  positive_n(dec);
  positive_theta(dec, c.theta);
  dec->add_option("--replicates", c.replicates, "Monte Carlo replicates")
      ->check(CLI::Range(std::size_t{4}, std::size_t{1'000'000'000}))
      ->capture_default_str();
  dec->add_option("--cross-term", c.cross_term, "square or mixed")
      ->check(CLI::IsMember({"square", "mixed"}))
      ->capture_default_str();

  auto* ver = app.add_subcommand("verify", "Run the acceptance suite; exit 1 on any failure");
  ver->add_option("--theta", c.verify_theta, "Run every theta grid at this single value")
      ->check(CLI::PositiveNumber);
  ver->add_flag("--quick", c.quick, "Reduced replicate counts, same tolerances");
  ver->add_option("--only", c.only, "Comma-separated criterion ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*tree) return cmd_tree(c);
    if (*rea) return cmd_realize(c);
    if (*exp) return cmd_expectations(c);
    if (*fix) return cmd_fixpoint(c);
    if (*dec) return cmd_decompose(c);
    if (*ver) return cmd_verify(c);
  } catch (const std::exception& e) {
    std::cerr << "hoppe: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
