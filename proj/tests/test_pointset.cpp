#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/mc.hpp"
#include "hoppe/moments.hpp"
#include "hoppe/pointset.hpp"
#include "test_support.hpp"

using namespace hoppe;

TEST_CASE("JumpKernel parameters") {
  const auto n = JumpKernel::normal(2.5);
  CHECK(n.mean_shift() == 0.0);
  CHECK(n.variance() == 2.5);
  CHECK(n.centered());
  const auto p = JumpKernel::poisson_shift(3.0);
  CHECK(p.mean_shift() == 3.0);
  CHECK(p.variance() == 3.0);
  CHECK_FALSE(p.centered());
  CHECK(JumpKernel::unit_shift().mean_shift() == 1.0);
  CHECK(JumpKernel::unit_shift().variance() == 0.0);
  CHECK(JumpKernel::simple_random_walk().variance() == 1.0);
  CHECK(JumpKernel::simple_random_walk().centered());

  CHECK_THROWS_AS(JumpKernel::normal(0.0), ParameterError);
  CHECK_THROWS_AS(JumpKernel::normal(-1.0), ParameterError);
  CHECK_THROWS_AS(JumpKernel::poisson_shift(31.0), ParameterError);
  CHECK_THROWS_AS(JumpKernel::poisson_shift(0.0), ParameterError);
}

TEST_CASE("JumpKernel::parse") {
  CHECK(JumpKernel::parse("normal:0.25").variance() == 0.25);
  CHECK(JumpKernel::parse("normal").variance() == 1.0);
  CHECK(JumpKernel::parse("poisson:4").mean_shift() == 4.0);
  CHECK(JumpKernel::parse("shift").kind() == JumpKernel::Kind::unit_shift);
  CHECK(JumpKernel::parse("srw").kind() == JumpKernel::Kind::simple_random_walk);
  CHECK(JumpKernel::parse("normal:0.25").describe() == "normal:0.25");
  for (const char* bad : {"gauss", "normal:", "normal:x", "normal:1x", "shift:2", "poisson:-1", ""}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(JumpKernel::parse(bad), ParameterError);
  }
}

TEST_CASE("unit shift reproduces depths, srw keeps depth parity") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto tree = generate_tree(300, 1.7, rng);
    const auto d = depths(tree);
    const auto shift = realize(tree, JumpKernel::unit_shift(), rng);
    const auto walk = realize(tree, JumpKernel::simple_random_walk(), rng);
    for (std::size_t k = 0; k < tree.size(); ++k) {
      CHECK(shift.points[k] == static_cast<double>(d[k]));
      const auto x = static_cast<long long>(walk.points[k]);
      CHECK(walk.points[k] == static_cast<double>(x));
      CHECK(std::llabs(x) <= d[k]);
      CHECK((x - d[k]) % 2 == 0);
    }
    CHECK(shift.points[0] == 0.0);
  }
}

TEST_CASE("jump samplers have the stated mean and variance") {
  for (const char* spec : {"normal:2", "poisson:3.5", "poisson:30", "srw"}) {
    const auto k = JumpKernel::parse(spec);
    JumpSampler sample(k);
    Rng rng(77);
    Moments m;
    for (int i = 0; i < 200'000; ++i) m.push(sample(rng));
    CAPTURE(spec);
    CHECK(std::abs(m.mean() - k.mean_shift()) <= 4 * m.stderr_mean());
    CHECK(std::abs(m.variance() - k.variance()) <= 4 * m.stderr_variance());
  }
}

TEST_CASE("barycenter and conditional variance") {
  const double pts[] = {0.0, 1.0, 2.0};
  CHECK(barycenter(pts) == 1.0);
  CHECK_THROWS_AS(barycenter(std::span<const double>{}), ParameterError);

  // Star of 4: T = 3, W = 9, U = 3. Path of 4: T = 6, W = 10, U = 14.
  CHECK(conditional_variance(compute_stats(test::star_tree(4)), 2.0) == doctest::Approx(0.375));
  CHECK(conditional_variance(compute_stats(test::path_tree(4)), 1.0) == doctest::Approx(0.875));
}

TEST_CASE("resampling jumps on a fixed tree gives the conditional moments") {
  Rng rng(9);
  const auto tree = generate_tree(60, 2.0, rng);
  const auto st = compute_stats(tree);
  const double n = 60.0;

  SUBCASE("normal kernel: Var(S | tree) = sigma^2 U / n^2") {
    const auto k = JumpKernel::normal(1.5);
    JumpSampler sample(k);
    std::vector<double> x(tree.size());
    Moments m;
    for (int r = 0; r < 100'000; ++r) {
      realize_points(tree, sample, rng, x);
      m.push(barycenter(x));
    }
    CHECK(std::abs(m.mean()) <= 4 * m.stderr_mean());
    CHECK(std::abs(m.variance() - conditional_variance(st, 1.5)) <= 4 * m.stderr_variance());
  }
  SUBCASE("poisson kernel: E(S | tree) = lambda T / n") {
    const auto k = JumpKernel::poisson_shift(2.0);
    JumpSampler sample(k);
    std::vector<double> x(tree.size());
    Moments m;
    for (int r = 0; r < 50'000; ++r) {
      realize_points(tree, sample, rng, x);
      m.push(barycenter(x));
    }
    const double target = 2.0 * static_cast<double>(st.total_length) / n;
    CHECK(std::abs(m.mean() - target) <= 4 * m.stderr_mean());
    CHECK(std::abs(m.variance() - conditional_variance(st, 2.0)) <= 4 * m.stderr_variance());
  }
}

TEST_CASE("variance of the barycenter over fresh trees") {
  for (double theta : {0.5, 1.0, 4.0}) {
    EstimateRequest req;
    req.statistic = "S_var";
    req.n = 100;
    req.theta = theta;
    req.kernel = JumpKernel::normal(1.0);
    req.replicates = 40'000;
    req.seed = 100 + static_cast<std::uint64_t>(theta * 10);
    const auto rep = estimate(req);
    CAPTURE(theta);
    REQUIRE(rep.target);
    CHECK(*rep.target == doctest::Approx(expected_U(100, theta) / 1e4));
    CHECK(std::abs(*rep.z) < 3.5);
  }
}

TEST_CASE("pair covariance") {
  const auto k = JumpKernel::normal(1.0);
  SUBCASE("Cov(X1, X2) at n = 3 is 1/2") {
    const auto c = empirical_pair_covariance(1, 2, 3, 1.0, k, 100'000, 3);
    REQUIRE(c.exact_theory);
    CHECK(*c.exact_theory == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::abs(*c.z_vs_exact) < 3.0);
    CHECK(std::abs(c.z_vs_lca) < 3.0);
  }
  SUBCASE("variance of X1 is sigma^2") {
    const auto c = empirical_pair_covariance(1, 1, 5, 2.0, JumpKernel::normal(2.0), 50'000, 4);
    REQUIRE(c.exact_theory);
    CHECK(*c.exact_theory == doctest::Approx(2.0));
    CHECK(std::abs(*c.z_vs_exact) < 3.0);
  }
  SUBCASE("the root is deterministic") {
    const auto c = empirical_pair_covariance(0, 4, 6, 1.0, k, 1'000, 5);
    CHECK(c.estimate == 0.0);
    CHECK(*c.exact_theory == 0.0);
  }
  SUBCASE("exact theory only for enumerable sizes") {
    const auto c = empirical_pair_covariance(3, 7, 40, 1.0, k, 20'000, 6);
    CHECK_FALSE(c.exact_theory);
    CHECK(std::abs(c.z_vs_lca) < 3.0);
  }
  CHECK_THROWS_AS(empirical_pair_covariance(1, 2, 3, 1.0, JumpKernel::poisson_shift(1.0), 100, 1),
                  ParameterError);
  CHECK_THROWS_AS(empirical_pair_covariance(1, 3, 3, 1.0, k, 100, 1), ParameterError);
}

TEST_CASE("realization CSV") {
  const HoppeTree tree(1.0, {0, 0, 1});
  Rng rng(1);
  const auto r = realize(tree, JumpKernel::unit_shift(), rng);
  std::ostringstream out;
  write_realization_csv(out, r);
  CHECK(out.str() == "vertex,parent,depth,x\n0,-1,0,0\n1,0,1,1\n2,1,2,2\n");
}
