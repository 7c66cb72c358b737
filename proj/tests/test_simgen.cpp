#include "armul/simgen.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace armul;

namespace {

ScenarioParams params(double eps, double delta, std::uint64_t seed = 1) {
  ScenarioParams p;
  p.epsilon = eps;
  p.delta = delta;
  p.seed = seed;
  p.n = 20;  // keeps the sample draws cheap; shape checks only
  return p;
}

Vec e(int d, int i, double s = 1.0) {
  Vec v = Vec::Zero(d);
  v[i] = s;
  return v;
}

bool is_inlier(const Scenario& s, int j) {
  return std::binary_search(s.inliers.begin(), s.inliers.end(), j);
}

}  // namespace

TEST_SUITE("simgen") {
  TEST_CASE("sphere draws") {
    std::mt19937_64 rng(3);
    CHECK(sample_uniform_sphere(5, 0.0, rng) == Vec::Zero(5));
    for (int i = 0; i < 100; ++i) CHECK(std::abs(sample_uniform_sphere(7, 1.0, rng).norm() - 1.0) < 1e-12);
    Vec mean = Vec::Zero(3);
    for (int i = 0; i < 10000; ++i) mean += sample_uniform_sphere(3, 1.0, rng);
    mean /= 10000.0;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i]) < 0.05);
  }

  TEST_CASE("outlier counts") {
    CHECK(outlier_count(0.0, 30) == 0);
    CHECK(outlier_count(0.2, 30) == 6);
    CHECK(outlier_count(0.1, 30) == 3);
    CHECK(outlier_count(0.05, 30) == 2);
    CHECK_THROWS_AS(outlier_count(1.0, 30), Error);
    CHECK_THROWS_AS(outlier_count(-0.1, 30), Error);
  }

  TEST_CASE("vanilla scenario") {
    const auto clean = gen_vanilla_scenario(params(0.0, 0.0));
    for (int j = 0; j < 30; ++j) CHECK(clean.theta_star.col(j) == e(50, 0, 2.0));
    CHECK(clean.inliers.size() == 30);

    const auto s = gen_vanilla_scenario(params(0.2, 0.5));
    CHECK(s.inliers.size() == 24);
    CHECK(std::is_sorted(s.inliers.begin(), s.inliers.end()));
    for (int j = 0; j < 30; ++j) {
      if (is_inlier(s, j)) {
        CHECK((s.theta_star.col(j) - e(50, 0, 2.0)).norm() == doctest::Approx(0.5));
      } else {
        CHECK(s.theta_star.col(j).norm() == doctest::Approx(2.0));
      }
    }
    CHECK(s.tasks.size() == 30);
    CHECK(s.tasks.shared_dim == 50);
    CHECK(s.tasks[0].size() == 20);
    CHECK_THROWS_AS(gen_vanilla_scenario(params(1.2, 0.0)), Error);
  }

  TEST_CASE("clustered scenario") {
    const auto s = gen_clustered_scenario(params(0.0, 0.0));
    CHECK(s.inliers.size() == 30);
    std::map<int, int> counts;
    for (int j = 0; j < 30; ++j) {
      const int z = s.true_labels[static_cast<std::size_t>(j)];
      CHECK(z == (j + 1) % 3);
      CHECK(s.theta_star.col(j) == e(50, z, 2.0));
      counts[z]++;
    }
    CHECK(counts.size() == 3);
    for (const auto& [z, n] : counts) CHECK(n == 10);
    CHECK(s.true_labels[1] == 2);  // second task, third cluster
    CHECK(s.true_labels[2] == 0);
  }

  TEST_CASE("low-rank scenario") {
    const auto s = gen_lowrank_scenario(params(0.0, 0.0));
    for (int j = 0; j < 30; ++j) CHECK(s.theta_star.col(j).tail(47).norm() == 0.0);
    const auto o = gen_lowrank_scenario(params(0.2, 0.3));
    int outliers = 0;
    for (int j = 0; j < 30; ++j) {
      if (!is_inlier(o, j)) {
        ++outliers;
        CHECK(o.theta_star.col(j).norm() == doctest::Approx(2.0));
      }
    }
    CHECK(outliers == 6);
  }

  TEST_CASE("determinism and seed sensitivity") {
    for (auto c : {ScenarioCase::Vanilla, ScenarioCase::Clustered, ScenarioCase::LowRank}) {
      const auto a = gen_scenario(c, params(0.2, 0.4, 9));
      const auto b = gen_scenario(c, params(0.2, 0.4, 9));
      const auto other = gen_scenario(c, params(0.2, 0.4, 10));
      CHECK(a.theta_star == b.theta_star);
      CHECK(a.inliers == b.inliers);
      for (std::size_t j = 0; j < a.tasks.size(); ++j) {
        CHECK(a.tasks[j].features == b.tasks[j].features);
        CHECK(a.tasks[j].responses == b.tasks[j].responses);
      }
      CHECK(a.tasks[0].features != other.tasks[0].features);
    }
  }

  TEST_CASE("regression samples follow the linear model") {
    Mat theta = Mat::Zero(3, 2);
    theta(0, 0) = 1.0;
    theta(2, 1) = -2.0;
    const auto tasks = sample_regression_tasks(theta, 20000, 4);
    for (Eigen::Index j = 0; j < 2; ++j) {
      const auto& t = tasks[static_cast<std::size_t>(j)];
      const Vec r = t.responses - t.features * theta.col(j);
      CHECK(std::abs(r.mean()) < 0.03);
      CHECK(r.squaredNorm() / 20000.0 == doctest::Approx(1.0).epsilon(0.05));
      const Mat cov = t.features.transpose() * t.features / 20000.0;
      CHECK((cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.05);
    }
  }

  TEST_CASE("case names") {
    CHECK(parse_scenario_case("vanilla") == ScenarioCase::Vanilla);
    CHECK(parse_scenario_case("clustered") == ScenarioCase::Clustered);
    CHECK(parse_scenario_case("lowrank") == ScenarioCase::LowRank);
    CHECK(parse_scenario_case("low-rank") == ScenarioCase::LowRank);
    CHECK(parse_scenario_case(to_string(ScenarioCase::LowRank)) == ScenarioCase::LowRank);
    CHECK_THROWS_AS(parse_scenario_case("sparse"), Error);
  }
}
