#include <doctest.h>

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "hoppe/error.hpp"
#include "hoppe/exact.hpp"
#include "hoppe/tree.hpp"
#include "test_support.hpp"

using namespace hoppe;

TEST_CASE("harmonic_theta") {
  CHECK(harmonic_theta(1, 3.0) == 0.0);
  CHECK(harmonic_theta(2, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(harmonic_theta(4, 2.0) == doctest::Approx(47.0 / 60.0).epsilon(1e-15));
}

TEST_CASE("digamma") {
  SUBCASE("known values") {
    CHECK(std::abs(digamma(1.0) - (-0.57721566490153286)) <= 1e-12);
    CHECK(std::abs(digamma(2.0) - (digamma(1.0) + 1.0)) <= 1e-12);
    CHECK(std::abs(digamma(0.5) - (-0.57721566490153286 - 2.0 * std::log(2.0))) <= 1e-12);
  }
  SUBCASE("agrees with boost on a log grid") {
    for (double x = 1e-3; x < 1e4; x *= 1.37) {
      CAPTURE(x);
      CHECK(std::abs(digamma(x) - boost::math::digamma(x)) <= 1e-10);
    }
  }
  SUBCASE("log n - h_n approaches digamma(theta + 1)") {
    const std::size_t n = 1'000'000;
    CHECK(std::abs(std::log(static_cast<double>(n)) - harmonic_theta(n, 1.0) - digamma(2.0)) <= 1e-5);
  }
  CHECK_THROWS_AS(digamma(0.0), ParameterError);
  CHECK_THROWS_AS(digamma(-1.5), ParameterError);
}

TEST_CASE("closed-form expectations") {
  for (double theta : {0.1, 1.0, 7.0}) {
    CHECK(expected_T(1, theta) == 0.0);
    CHECK(expected_U(1, theta) == 0.0);
    CHECK(expected_W(1, theta) == 0.0);
    CHECK(expected_T(2, theta) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(expected_T(3, 1.0) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(expected_W(3, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(expected_U(3, 1.0) == doctest::Approx(3.5).epsilon(1e-14));

  // Frozen from a rational brute-force enumeration.
  CHECK(expected_W(7, 5.0) == doctest::Approx(42.81587301587302).epsilon(1e-12));
  CHECK(expected_U(6, 0.5) == doctest::Approx(27.006349206349206).epsilon(1e-12));

  const double n = 1e5;
  CHECK(std::abs(expected_U(100'000, 1.0) / (n * n) - 1.0) <= 2e-3);
}

TEST_CASE("enumeration matches the closed forms for n <= 8") {
  for (double theta : {0.5, 1.0, 2.0, 5.0}) {
    for (std::size_t n = 1; n <= 8; ++n) {
      double t = 0, w = 0, u = 0;
      for_each_tree(n, theta, [&](const HoppeTree& tree, double p) {
        const auto s = compute_stats(tree);
        t += p * static_cast<double>(s.total_length);
        w += p * static_cast<double>(s.wiener);
        u += p * static_cast<double>(s.u);
      });
      CAPTURE(theta);
      CAPTURE(n);
      CHECK(std::abs(t - expected_T(n, theta)) <= 1e-10);
      CHECK(std::abs(w - expected_W(n, theta)) <= 1e-10);
      CHECK(std::abs(u - expected_U(n, theta)) <= 1e-10);
    }
  }
}

TEST_CASE("expected_recursion_check") {
  for (double theta : {1.0, 0.3, 7.0}) {
    const auto r = expected_recursion_check(500, theta);
    CAPTURE(theta);
    CHECK(r.ok());
    CHECK(r.residual_W <= 1e-9);
  }
  CHECK_THROWS_AS(expected_recursion_check(1, 1.0), ParameterError);
}

TEST_CASE("asymptotic expansion of E T_n") {
  for (double theta : {0.5, 1.0, 2.0, 5.0}) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t n : {1'000u, 10'000u, 100'000u, 1'000'000u}) {
      const double nn = static_cast<double>(n);
      const double rest = expected_T(n, theta) - nn * std::log(nn) + digamma(theta + 1.0) * nn -
                          (theta - 1.0) * std::log(nn);
      lo = std::min(lo, rest);
      hi = std::max(hi, rest);
    }
    CAPTURE(theta);
    CHECK(std::abs(lo) < 3.0);
    CHECK(std::abs(hi) < 3.0);
    CHECK(hi - lo < 0.02);
  }
}

TEST_CASE("k_pmf") {
  SUBCASE("theta = 1 is uniform") {
    for (std::size_t m = 1; m <= 19; ++m) CHECK(k_pmf(20, 1.0, m) == doctest::Approx(1.0 / 19));
  }
  SUBCASE("n = 3") {
    for (double theta : {0.5, 2.0, 9.0}) {
      CHECK(k_pmf(3, theta, 1) == doctest::Approx(theta / (theta + 1)));
      CHECK(k_pmf(3, theta, 2) == doctest::Approx(1.0 / (theta + 1)));
    }
  }
  SUBCASE("normalized") {
    for (double theta : {0.5, 1.0, 4.0}) {
      for (std::size_t n : {2u, 3u, 10u, 100u, 1000u}) {
        double total = 0.0;
        for (std::size_t m = 1; m < n; ++m) total += k_pmf(n, theta, m);
        CAPTURE(n);
        CHECK(std::abs(total - 1.0) <= 1e-11);
      }
    }
  }
  SUBCASE("matches enumeration of subtree sizes at vertex 1") {
    for (double theta : {0.5, 3.0}) {
      std::map<std::size_t, double> law;
      for_each_tree(7, theta, [&](const HoppeTree& t, double p) { law[subtree_size(t, 1)] += p; });
      for (auto [m, p] : law) CHECK(std::abs(k_pmf(7, theta, m) - p) <= 1e-13);
    }
  }
  CHECK_THROWS_AS(k_pmf(5, 1.0, 0), ParameterError);
  CHECK_THROWS_AS(k_pmf(5, 1.0, 5), ParameterError);
}

TEST_CASE("K samplers: inversion and urn agree with the pmf") {
  const std::size_t n = 10;
  const double theta = 2.0;
  const std::size_t draws = 100'000;
  std::vector<std::size_t> inv(n, 0), urn(n, 0);
  Rng a(11), b(12);
  const SubtreeSizeLaw law(n, theta);
  for (std::size_t i = 0; i < draws; ++i) {
    ++inv[law.sample(a)];
    ++urn[k_sample_urn(n, theta, b)];
  }
  for (std::size_t m = 1; m < n; ++m) {
    CAPTURE(m);
    CHECK(test::frequency_within(inv[m], draws, k_pmf(n, theta, m)));
    CHECK(test::frequency_within(urn[m], draws, k_pmf(n, theta, m)));
  }
  Rng c(1);
  CHECK(k_sample(2, 5.0, c) == 1);
  CHECK(k_sample_urn(2, 5.0, c) == 1);
}

TEST_CASE("k_pmf matches subtree size of vertex 1 in generated trees") {
  const std::size_t n = 50;
  const double theta = 2.5;
  const std::size_t trees = 100'000;
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t r = 0; r < trees; ++r) {
    Rng rng = stream(31, r);
    ++counts[subtree_size(generate_tree(n, theta, rng), 1)];
  }
  for (std::size_t m = 1; m < n; ++m) {
    CAPTURE(m);
    CHECK(test::frequency_within(counts[m], trees, k_pmf(n, theta, m)));
  }
}

TEST_CASE("limit moments") {
  const auto rrt = limit_moments_recursive_tree();
  CHECK(rrt.u_mean == 1.0);
  CHECK(rrt.u_second == doctest::Approx(11.0 / 9.0));
  CHECK(rrt.u_variance == doctest::Approx(2.0 / 9.0));

  const auto at_one = limit_moments_u(1.0);
  CHECK(at_one.u_mean == doctest::Approx(1.0));
  CHECK(at_one.u_second == doctest::Approx(88.0 / 72.0));
  CHECK(at_one.u_variance == doctest::Approx(2.0 / 9.0));

  const auto at_four = limit_moments_u(4.0);
  CHECK(at_four.u_mean == doctest::Approx(0.4));
  CHECK(at_four.u_second == doctest::Approx(124.0 / 630.0));
  CHECK(at_four.u_variance == doctest::Approx(116.0 / 3150.0));

  LimitMoments prev = limit_moments_u(1.0);
  for (double theta = 0.05; theta < 200.0; theta *= 1.3) {
    const auto m = limit_moments_u(theta);
    CHECK(std::abs(m.u_variance - (m.u_second - m.u_mean * m.u_mean)) <= 1e-14);
    CHECK(m.u_variance >= 0.0);
    if (theta > 1.0) {
      CHECK(m.u_mean < prev.u_mean);
      CHECK(m.u_second < prev.u_second);
      CHECK(m.u_variance < prev.u_variance);
      prev = m;
    }
  }
  CHECK(limit_moments_u(1e6).u_mean < 1e-5);
}

TEST_CASE("expectation table CSV") {
  const std::size_t ns[] = {1, 3};
  const auto rows = expectation_table(ns, 1.0);
  std::ostringstream out;
  write_expectation_csv(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "n,theta,expected_T,expected_U,expected_W");
  std::getline(in, line);
  CHECK(line == "1,1,0,0,0");
  std::getline(in, line);
  double n = 0, theta = 0, t = 0, u = 0, w = 0;
  char c = 0;
  std::istringstream row(line);
  row >> n >> c >> theta >> c >> t >> c >> u >> c >> w;
  CHECK(n == 3);
  CHECK(theta == 1);
  CHECK(t == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(u == doctest::Approx(3.5).epsilon(1e-14));
  CHECK(w == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_FALSE(std::getline(in, line));
}
