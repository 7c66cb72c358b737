#include "armul/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace armul;

TEST_SUITE("metrics") {
  TEST_CASE("max l2 error") {
    Mat star = Mat::Zero(2, 3);
    CHECK(max_l2_error(star, star) == 0.0);
    Mat hat = star;
    hat(0, 1) = 3.0;
    hat(1, 1) = 4.0;
    CHECK(max_l2_error(hat, star) == doctest::Approx(5.0));
    CHECK(max_l2_error(hat, star, {0, 2}) == 0.0);
    CHECK(max_l2_error(hat, star, {1}) == doctest::Approx(5.0));
    try {
      max_l2_error(hat, star, {});
      FAIL("expected EmptySubset");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptySubset);
    }
  }

  TEST_CASE("cluster alignment examples") {
    const auto same = cluster_alignment({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
    CHECK(same.accuracy == 1.0);
    CHECK(same.permutation == std::vector<int>{0, 1, 2});

    const auto swapped = cluster_alignment({1, 0, 0, 1}, {0, 1, 1, 0}, 2);
    CHECK(swapped.accuracy == 1.0);
    CHECK(swapped.permutation == std::vector<int>{1, 0});

    const auto half = cluster_alignment({0, 0, 1, 1}, {0, 1, 0, 1}, 2);
    CHECK(half.accuracy == 0.5);
    CHECK(half.permutation == std::vector<int>{0, 1});

    CHECK_THROWS_AS(cluster_alignment(std::vector<int>(3, 0), std::vector<int>(3, 0), 9), Error);
  }

  TEST_CASE("cluster alignment matches brute force") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
      const int K = 2 + trial % 4;
      std::uniform_int_distribution<int> lab(0, K - 1);
      std::vector<int> a(12), b(12);
      for (auto& x : a) x = lab(rng);
      for (auto& x : b) x = lab(rng);
      std::vector<int> tau(static_cast<std::size_t>(K));
      std::iota(tau.begin(), tau.end(), 0);
      int best = -1;
      do {
        int hits = 0;
        for (std::size_t j = 0; j < a.size(); ++j) hits += a[j] == tau[static_cast<std::size_t>(b[j])];
        best = std::max(best, hits);
      } while (std::next_permutation(tau.begin(), tau.end()));
      CHECK(cluster_alignment(a, b, K).accuracy == doctest::Approx(best / 12.0));
    }
  }

  TEST_CASE("misclassification") {
    Mat x(4, 2);
    x << 1, 0, 2, 1, -1, 0, -3, 1;
    Vec y(4);
    y << 1, 1, -1, -1;
    const auto t = fixtures::task(0, x, y);
    Vec theta(2);
    theta << 1, 0;
    CHECK(misclassification_rate(theta, t) == 0.0);
    CHECK(misclassification_rate(-theta, t) == 1.0);
    CHECK(misclassification_rate(Vec::Zero(2), t) == 0.5);
  }

  TEST_CASE("mean squared error") {
    Mat x(2, 1);
    x << 1, 2;
    Vec y(2);
    y << 1, 0;
    CHECK(mean_squared_error(Vec::Constant(1, 1.0), fixtures::task(0, x, y)) == doctest::Approx(2.0));
  }
}
