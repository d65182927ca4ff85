#include <doctest.h>

#include <array>
#include <sstream>

#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/moments.hpp"
#include "hoppe/tree.hpp"
#include "test_support.hpp"

using namespace hoppe;
using hoppe::test::frequency_within;
using hoppe::test::path_tree;
using hoppe::test::star_tree;

TEST_CASE("sample_parent law") {
  Rng rng(1);
  SUBCASE("k=1 always picks the root") {
    for (int i = 0; i < 1000; ++i) CHECK(sample_parent(1, 3.7, rng) == 0);
  }
  SUBCASE("k=2, theta=1 is a fair coin") {
    std::size_t zeros = 0;
    const std::size_t trials = 100'000;
    for (std::size_t i = 0; i < trials; ++i) zeros += sample_parent(2, 1.0, rng) == 0;
    CHECK(frequency_within(zeros, trials, 0.5));
  }
  SUBCASE("k=3, theta=2 gives 1/2, 1/4, 1/4") {
    std::array<std::size_t, 3> counts{};
    const std::size_t trials = 100'000;
    for (std::size_t i = 0; i < trials; ++i) ++counts[sample_parent(3, 2.0, rng)];
    CHECK(frequency_within(counts[0], trials, 0.5));
    CHECK(frequency_within(counts[1], trials, 0.25));
    CHECK(frequency_within(counts[2], trials, 0.25));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(sample_parent(3, 0.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_parent(3, -1.0, rng), ParameterError);
    CHECK_THROWS_AS(sample_parent(0, 1.0, rng), ParameterError);
  }
}

TEST_CASE("generate_tree") {
  SUBCASE("n=1 is a lone root with zero statistics") {
    Rng rng(3);
    const auto t = generate_tree(1, 2.0, rng);
    const auto s = compute_stats(t);
    CHECK(t.size() == 1);
    CHECK(s.total_length == 0);
    CHECK(s.wiener == 0);
    CHECK(s.lca_sum == 0);
    CHECK(s.u == 0);
  }
  SUBCASE("n=2 attaches to the root") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(seed);
      CHECK(generate_tree(2, 0.3, rng).parent(1) == 0);
    }
  }
  SUBCASE("n=3, theta=1: parent[2] is 0 or 1 with probability 1/2 across seeds") {
    std::size_t zeros = 0;
    const std::size_t seeds = 100'000;
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng = stream(77, s);
      zeros += generate_tree(3, 1.0, rng).parent(2) == 0;
    }
    CHECK(frequency_within(zeros, seeds, 0.5));
  }
  SUBCASE("deterministic given the seed") {
    Rng a(42), b(42);
    CHECK(generate_tree(500, 1.5, a) == generate_tree(500, 1.5, b));
  }
  SUBCASE("errors") {
    Rng rng(1);
    CHECK_THROWS_AS(generate_tree(0, 1.0, rng), ParameterError);
    CHECK_THROWS_AS(generate_tree(5, 0.0, rng), ParameterError);
  }
}

TEST_CASE("HoppeTree validates the recursive order") {
  CHECK_THROWS_AS(HoppeTree(1.0, {HoppeTree::kNoParent, 1}), ParameterError);
  CHECK_THROWS_AS(HoppeTree(1.0, {HoppeTree::kNoParent, 0, 2}), ParameterError);
  CHECK_THROWS_AS(HoppeTree(1.0, {}), ParameterError);
  CHECK_THROWS_AS(HoppeTree(-2.0, {0}), ParameterError);
  CHECK_NOTHROW(HoppeTree(1.0, {HoppeTree::kNoParent, 0, 1, 1}));
}

TEST_CASE("compute_stats on hand-checked trees") {
  SUBCASE("path n=3") {
    const auto s = compute_stats(path_tree(3));
    CHECK(s.depths == std::vector<std::int64_t>{0, 1, 2});
    CHECK(s.total_length == 3);
    CHECK(s.wiener == 4);
    CHECK(s.lca_sum == 2);
    CHECK(s.u == 5);
  }
  SUBCASE("star n=3") {
    const auto s = compute_stats(star_tree(3));
    CHECK(s.total_length == 2);
    CHECK(s.wiener == 4);
    CHECK(s.lca_sum == 0);
    CHECK(s.u == 2);
  }
  SUBCASE("path n=2000 has W = (n^3 - n)/6") {
    const std::int64_t n = 2000;
    CHECK(compute_stats(path_tree(n)).wiener == (n * n * n - n) / 6);
  }
}

TEST_CASE("wiener_bruteforce") {
  CHECK(wiener_bruteforce(star_tree(4)) == 9);
  CHECK(wiener_bruteforce(path_tree(4)) == 10);
  CHECK(wiener_bruteforce(star_tree(1)) == 0);
  CHECK_THROWS_AS(wiener_bruteforce(star_tree(10'001)), ParameterError);
}

TEST_CASE("lca_depth") {
  Rng rng(9);
  const auto t = generate_tree(60, 1.0, rng);
  const auto d = depths(t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(lca_depth(t, k, k) == d[k]);
    CHECK(lca_depth(t, 0, k) == 0);
    CHECK(lca_depth(t, k, 0) == 0);
  }
  CHECK(lca_depth(path_tree(3), 1, 2) == 1);
  CHECK(lca_depth(star_tree(3), 1, 2) == 0);
  CHECK_THROWS_AS(lca_depth(t, 0, 60), ParameterError);
}

TEST_CASE("property: fast statistics agree with independent routes") {
  const double thetas[] = {0.25, 1.0, 4.0};
  for (std::size_t i = 0; i < 300; ++i) {
    Rng rng = stream(1234, i);
    const std::size_t n = 1 + uniform_index(rng, 200);
    const double theta = thetas[i % 3];
    const auto t = generate_tree(n, theta, rng);
    const auto s = compute_stats(t);
    const auto nn = static_cast<std::int64_t>(n);
    CAPTURE(n);
    CAPTURE(theta);
    REQUIRE(s.wiener == wiener_bruteforce(t));
    REQUIRE(s.lca_sum == lca_sum_by_subtrees(t));
    REQUIRE(s.u == nn * s.total_length - s.wiener);
    REQUIRE(s.lca_sum == (nn - 1) * s.total_length - s.wiener);
    REQUIRE(s.u == s.total_length + s.lca_sum);
    REQUIRE(s.lca_sum >= 0);
    REQUIRE(s.depths[0] == 0);
    if (n >= 2) REQUIRE(s.wiener >= s.total_length);
    std::int64_t sum = 0;
    for (auto x : s.depths) sum += x;
    REQUIRE(sum == s.total_length);
  }
}

TEST_CASE("subtree_size") {
  const HoppeTree t(1.0, {HoppeTree::kNoParent, 0, 1, 0, 2, 1});
  CHECK(subtree_size(t, 0) == 6);
  CHECK(subtree_size(t, 1) == 4);
  CHECK(subtree_size(t, 2) == 2);
  CHECK(subtree_size(t, 3) == 1);
}

TEST_CASE("enumerate_trees") {
  SUBCASE("n=2") {
    const auto all = enumerate_trees(2, 0.7);
    REQUIRE(all.size() == 1);
    CHECK(all[0].probability == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("n=3, theta=1: two equiprobable trees") {
    const auto all = enumerate_trees(3, 1.0);
    REQUIRE(all.size() == 2);
    CHECK(all[0].probability == doctest::Approx(0.5));
    CHECK(all[1].probability == doctest::Approx(0.5));
  }
  SUBCASE("probabilities sum to one") {
    for (double theta : {0.5, 1.0, 2.0, 5.0}) {
      for (std::size_t n = 1; n <= 9; ++n) {
        double total = 0.0;
        std::size_t count = 0;
        for_each_tree(n, theta, [&](const HoppeTree&, double p) {
          total += p;
          ++count;
        });
        std::size_t expected = 1;
        for (std::size_t k = 2; k < n; ++k) expected *= k;
        CHECK(count == expected);
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }
  SUBCASE("weighted T at n=5, theta=2 is the exact expectation") {
    double et = 0.0;
    for (const auto& [tree, p] : enumerate_trees(5, 2.0)) {
      et += p * static_cast<double>(compute_stats(tree).total_length);
    }
    // 5.7 by independent brute force.
    CHECK(et == doctest::Approx(5.7).epsilon(1e-13));
    CHECK(std::abs(et - expected_T(5, 2.0)) <= 1e-12);
  }
  CHECK_THROWS_AS(enumerate_trees(10, 1.0), ParameterError);
}

TEST_CASE("Monte Carlo mean of T_100 matches the closed form") {
  for (double theta : {0.5, 4.0}) {
    Moments m;
    for (std::size_t r = 0; r < 100'000; ++r) {
      Rng rng = stream(555, r);
      m.push(static_cast<double>(compute_stats(generate_tree(100, theta, rng)).total_length));
    }
    CAPTURE(theta);
    CHECK(std::abs(m.mean() - expected_T(100, theta)) <= 3.0 * m.stderr_mean());
  }
}

TEST_CASE("tree text format") {
  const HoppeTree t(1.5, {HoppeTree::kNoParent, 0, 1, 1, 0});
  CHECK(serialize(t) == "5 1.5\n0 1 1 0\n");
  CHECK(serialize(star_tree(1)) == "1 1\n\n");

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto original = generate_tree(1 + seed * 7, 0.1 + 0.37 * static_cast<double>(seed), rng);
    std::istringstream in(serialize(original));
    CHECK(read_tree(in) == original);
  }

  std::istringstream bad_header("x 1\n");
  CHECK_THROWS_AS(read_tree(bad_header), ParameterError);
  std::istringstream bad_parent("3 1\n0 2\n");
  CHECK_THROWS_AS(read_tree(bad_parent), ParameterError);
  std::istringstream short_list("4 1\n0 1\n");
  CHECK_THROWS_AS(read_tree(short_list), ParameterError);
}
