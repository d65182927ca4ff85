#include "hoppe/pointset.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "hoppe/error.hpp"
#include "hoppe/moments.hpp"
#include "hoppe/parallel.hpp"

namespace hoppe {

JumpKernel JumpKernel::normal(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ParameterError("normal kernel needs sigma2 > 0");
  return {Kind::normal, sigma2};
}

JumpKernel JumpKernel::poisson_shift(double lambda) {
  if (!(lambda > 0.0) || lambda > kMaxPoissonRate) {
    throw ParameterError("poisson kernel needs 0 < lambda <= 30");
  }
  return {Kind::poisson_shift, lambda};
}

JumpKernel JumpKernel::unit_shift() { return {Kind::unit_shift, 0.0}; }
JumpKernel JumpKernel::simple_random_walk() { return {Kind::simple_random_walk, 0.0}; }

JumpKernel JumpKernel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  double value = 0.0;
  if (colon != std::string_view::npos) {
    const std::string_view arg = spec.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), value);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw ParameterError("bad kernel parameter in \"" + std::string(spec) + "\"");
    }
  }
  const bool has_arg = colon != std::string_view::npos;
  if (name == "normal") return normal(has_arg ? value : 1.0);
  if (name == "poisson") return poisson_shift(has_arg ? value : 1.0);
  if (name == "shift" && !has_arg) return unit_shift();
  if (name == "srw" && !has_arg) return simple_random_walk();
  throw ParameterError("unknown kernel \"" + std::string(spec) +
                       "\" (expected normal:<s2>, poisson:<l>, shift, srw)");
}

double JumpKernel::mean_shift() const {
  switch (kind_) {
    case Kind::poisson_shift: return parameter_;
    case Kind::unit_shift: return 1.0;
    default: return 0.0;
  }
}

double JumpKernel::variance() const {
  switch (kind_) {
    case Kind::normal: return parameter_;
    case Kind::poisson_shift: return parameter_;
    case Kind::unit_shift: return 0.0;
    case Kind::simple_random_walk: return 1.0;
  }
  return 0.0;
}

std::string JumpKernel::describe() const {
  switch (kind_) {
    case Kind::normal: return "normal:" + format_double(parameter_);
    case Kind::poisson_shift: return "poisson:" + format_double(parameter_);
    case Kind::unit_shift: return "shift";
    case Kind::simple_random_walk: return "srw";
  }
  return "?";
}

JumpSampler::JumpSampler(const JumpKernel& kernel)
    : kernel_(kernel),
      normal_(0.0, kernel.kind() == JumpKernel::Kind::normal ? std::sqrt(kernel.parameter()) : 1.0) {}

double JumpSampler::operator()(Rng& rng) {
  switch (kernel_.kind()) {
    case JumpKernel::Kind::normal:
      return normal_(rng);
    case JumpKernel::Kind::poisson_shift: {
      const double lambda = kernel_.parameter();
      double p = std::exp(-lambda);
      double cdf = p;
      const double u = uniform01(rng);
      int k = 0;
      // The tail beyond 1000 is below double resolution for lambda <= 30.
      while (u >= cdf && k < 1000) {
        ++k;
        p *= lambda / k;
        cdf += p;
      }
      return k;
    }
    case JumpKernel::Kind::unit_shift:
      return 1.0;
    case JumpKernel::Kind::simple_random_walk:
      return (rng() >> 63) ? 1.0 : -1.0;
  }
  return 0.0;
}

void realize_points(const HoppeTree& tree, JumpSampler& sampler, Rng& rng, std::span<double> out) {
  if (out.size() != tree.size()) throw ParameterError("output span must hold n points");
  out[0] = 0.0;
  for (std::size_t k = 1; k < tree.size(); ++k) out[k] = out[tree.parent(k)] + sampler(rng);
}

PointRealization realize(const HoppeTree& tree, const JumpKernel& kernel, Rng& rng) {
  PointRealization r{tree, std::vector<double>(tree.size()), kernel};
  JumpSampler sampler(kernel);
  realize_points(tree, sampler, rng, r.points);
  return r;
}

double barycenter(std::span<const double> points) {
  if (points.empty()) throw ParameterError("barycenter of an empty point set");
  double s = 0.0;
  for (double x : points) s += x;
  return s / static_cast<double>(points.size());
}

double barycenter(const PointRealization& realization) { return barycenter(realization.points); }

double conditional_variance(const TreeStats& stats, double sigma2) {
  if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be positive");
  if (stats.n < 1) throw ParameterError("empty tree statistics");
  const double n = static_cast<double>(stats.n);
  return sigma2 * static_cast<double>(stats.u) / (n * n);
}

namespace {

struct CovarianceAcc {
  Moments xj, xk, product, lca, paired;
  void merge(const CovarianceAcc& o) {
    xj.merge(o.xj);
    xk.merge(o.xk);
    product.merge(o.product);
    lca.merge(o.lca);
    paired.merge(o.paired);
  }
};

}  // namespace

CovarianceEstimate empirical_pair_covariance(std::size_t j, std::size_t k, std::size_t n,
                                             double theta, const JumpKernel& kernel,
                                             std::size_t replicates, std::uint64_t seed,
                                             unsigned threads) {
  if (!kernel.centered()) throw ParameterError("pair covariance needs a centered kernel");
  if (j >= n || k >= n) throw ParameterError("vertex out of range");
  if (replicates < 2) throw ParameterError("need at least 2 replicates");
  const double sigma2 = kernel.variance();

  const auto acc = reduce_replicates<CovarianceAcc>(
      replicates, threads, [&](std::size_t r, CovarianceAcc& a) {
        Rng rng = stream(seed, r);
        const HoppeTree tree = generate_tree(n, theta, rng);
        std::vector<double> x(n);
        JumpSampler sampler(kernel);
        realize_points(tree, sampler, rng, x);
        const double d_jk = static_cast<double>(lca_depth(tree, j, k)) * sigma2;
        a.xj.push(x[j]);
        a.xk.push(x[k]);
        a.product.push(x[j] * x[k]);
        a.lca.push(d_jk);
        a.paired.push(x[j] * x[k] - d_jk);
      });

  CovarianceEstimate out;
  out.replicates = replicates;
  out.estimate = acc.product.mean() - acc.xj.mean() * acc.xk.mean();
  out.std_error = acc.product.stderr_mean();
  out.lca_theory = acc.lca.mean();
  out.lca_theory_stderr = acc.lca.stderr_mean();
  const double se_paired = acc.paired.stderr_mean();
  out.z_vs_lca = se_paired > 0 ? acc.paired.mean() / se_paired : 0.0;

  if (n <= kEnumerateMaxVertices) {
    double expected_d = 0.0;
    for_each_tree(n, theta, [&](const HoppeTree& t, double p) {
      expected_d += p * static_cast<double>(lca_depth(t, j, k));
    });
    out.exact_theory = expected_d * sigma2;
    if (out.std_error > 0) out.z_vs_exact = (out.estimate - *out.exact_theory) / out.std_error;
  }
  return out;
}

void write_realization_csv(std::ostream& out, const PointRealization& r) {
  const auto d = depths(r.tree);
  out << "vertex,parent,depth,x\n";
  for (std::size_t k = 0; k < r.tree.size(); ++k) {
    out << k << ',';
    if (k == 0) {
      out << -1;
    } else {
      out << r.tree.parent(k);
    }
    out << ',' << d[k] << ',' << format_double(r.points[k]) << '\n';
  }
}

}  // namespace hoppe
