#include "armul/baselines.hpp"
#include "armul/simgen.hpp"
#include "armul/tuning.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace armul;

namespace {

TaskCollection noiseless(const Mat& theta, int n, std::mt19937_64& rng) {
  return fixtures::regression(theta, n, rng, 0.0);
}

std::vector<int> fold_sizes(const std::vector<int>& f, int folds) {
  std::vector<int> sizes(static_cast<std::size_t>(folds), 0);
  for (int k : f) sizes[static_cast<std::size_t>(k)]++;
  return sizes;
}

}  // namespace

TEST_SUITE("tuning") {
  TEST_CASE("fold assignment") {
    std::mt19937_64 rng(1);
    const auto tasks = make_collection(
        {fixtures::task(0, Mat::Zero(10, 1), Vec::Zero(10)), fixtures::task(1, Mat::Zero(11, 1), Vec::Zero(11))});
    const auto f = make_folds(tasks, 5, 3);
    CHECK(fold_sizes(f[0], 5) == std::vector<int>{2, 2, 2, 2, 2});
    auto s = fold_sizes(f[1], 5);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<int>{2, 2, 2, 2, 3});
    CHECK(make_folds(tasks, 5, 3) == f);
    CHECK(make_folds(tasks, 5, 4) != f);

    const auto small = make_collection({fixtures::task(0, Mat::Zero(4, 1), Vec::Zero(4))});
    try {
      make_folds(small, 5, 0);
      FAIL("expected TooFewSamples");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooFewSamples);
    }
  }

  TEST_CASE("fold split partitions every task") {
    std::mt19937_64 rng(2);
    const auto tasks = fixtures::regression(oracle::gaussian_matrix(2, 3, rng), 13, rng);
    const auto folds = make_folds(tasks, 5, 0);
    for (int k = 0; k < 5; ++k) {
      const auto split = split_fold(tasks, folds, k);
      for (std::size_t j = 0; j < tasks.size(); ++j) {
        CHECK(split.train[j].size() + split.test[j].size() == 13);
        CHECK(split.test[j].size() >= 2);
      }
    }
  }

  TEST_CASE("held-out scores") {
    std::mt19937_64 rng(3);
    const Mat theta = oracle::gaussian_matrix(3, 4, rng);
    const auto tasks = noiseless(theta, 30, rng);
    const Mat stl = fit_single_task(tasks, LossModel::SquaredError);
    CHECK(heldout_score(stl, tasks, CvMetric::Mse) < 1e-20);

    const auto logit = fixtures::classification(theta, 30, rng);
    std::vector<TaskDataset> clean;
    for (const auto& t : logit.tasks) {
      auto c = t;
      for (Eigen::Index i = 0; i < c.size(); ++i) c.responses[i] = c.features.row(i).dot(theta.col(t.task_id)) >= 0 ? 1 : -1;
      clean.push_back(c);
    }
    CHECK(heldout_score(theta, make_collection(clean), CvMetric::Misclassification) == 0.0);
  }

  TEST_CASE("grids and plan validation") {
    const auto r = regression_c_grid();
    REQUIRE(r.size() == 10);
    CHECK(r.front() == doctest::Approx(0.2));
    CHECK(r.back() == doctest::Approx(2.0));
    const auto l = logistic_c_grid();
    REQUIRE(l.size() == 10);
    CHECK(l.front() == doctest::Approx(0.05));
    CHECK(l.back() == doctest::Approx(0.5));
    CHECK(default_plan(LossModel::Logistic).metric == CvMetric::Misclassification);
    CHECK(lambda_from_c(0.5, 16) == 2.0);

    CvPlan bad;
    CHECK_THROWS_AS(bad.validate(), Error);  // empty grid
    bad.c_grid = {1.0};
    bad.folds = 1;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("cross-validation picks the smaller score and breaks ties low") {
    std::mt19937_64 rng(4);
    const Mat theta = oracle::gaussian_matrix(2, 3, rng);
    const auto tasks = noiseless(theta, 25, rng);
    CvPlan plan;
    plan.c_grid = {1.0, 0.5};

    PathFitter forced = [&](const TaskCollection&, int, const std::vector<double>& grid) {
      std::vector<ParamMatrix> out;
      for (double c : grid) out.push_back(c == 1.0 ? theta : Mat::Zero(2, 3));
      return out;
    };
    const auto sel = cross_validate(tasks, plan, {0}, forced);
    CHECK(sel.best_c == 1.0);
    CHECK(sel.table.size() == 2);

    PathFitter tie = [&](const TaskCollection&, int, const std::vector<double>& grid) {
      return std::vector<ParamMatrix>(grid.size(), theta);
    };
    CHECK(cross_validate(tasks, plan, {0}, tie).best_c == 0.5);
    const auto k = cross_validate(tasks, plan, {4, 2}, tie);
    CHECK(k.best_K == 2);
    CHECK(k.table.size() == 4);

    plan.c_grid = {0.7};
    CHECK(cross_validate(tasks, plan, {0}, forced).best_c == 0.7);
  }

  TEST_CASE("select_c is reproducible") {
    ScenarioParams p;
    p.m = 10;
    p.n = 60;
    p.d = 5;
    p.seed = 7;
    const auto s = gen_vanilla_scenario(p);
    const auto plan = default_plan(LossModel::SquaredError, 11);
    const auto a = select_c(s.tasks, LossModel::SquaredError, VanillaStructure{}, plan);
    const auto b = select_c(s.tasks, LossModel::SquaredError, VanillaStructure{}, plan);
    CHECK(a.best_c == b.best_c);
    REQUIRE(a.table.size() == b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) CHECK(a.table[i].score == b.table[i].score);
    // with no heterogeneity the strongest pooling should not be beaten badly
    CHECK(a.best_c >= 0.6);
  }

  TEST_CASE("cv_score is the fold score of one fit") {
    ScenarioParams p;
    p.m = 6;
    p.n = 40;
    p.d = 3;
    p.seed = 8;
    const auto s = gen_vanilla_scenario(p);
    CvPlan plan = default_plan(LossModel::SquaredError, 2);
    plan.c_grid = {0.4};
    const auto sel = select_c(s.tasks, LossModel::SquaredError, VanillaStructure{}, plan);
    double mean = 0.0;
    for (int k = 0; k < plan.folds; ++k) mean += cv_score(s.tasks, LossModel::SquaredError, VanillaStructure{}, 0.4, plan, k);
    CHECK(sel.table[0].score == doctest::Approx(mean / plan.folds).epsilon(1e-6));
  }

  TEST_CASE("structure parameter selection") {
    ScenarioParams p;
    p.m = 18;
    p.n = 60;
    p.d = 6;
    p.seed = 9;
    const auto low = gen_lowrank_scenario(p);
    CvPlan plan = default_plan(LossModel::SquaredError, 1);
    plan.k_grid = std::vector<int>{1};
    const auto one = select_structure_param(low.tasks, LossModel::SquaredError, StructureFamily::LowRank, plan);
    CHECK(one.best_K == 1);
    const auto direct = select_c(low.tasks, LossModel::SquaredError, LowRankStructure{1}, plan);
    CHECK(one.best_c == direct.best_c);

    plan.k_grid.reset();
    CHECK_THROWS_AS(select_structure_param(low.tasks, LossModel::SquaredError, StructureFamily::LowRank, plan), Error);
  }

  TEST_CASE("clustered K is recovered on separated clusters") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ScenarioParams p;
      p.m = 30;
      p.n = 100;
      p.d = 10;
      p.K = 3;
      p.seed = 100 + seed;
      const auto s = gen_clustered_scenario(p);
      CvPlan plan = default_plan(LossModel::SquaredError, seed);
      plan.k_grid = std::vector<int>{2, 3, 4};
      const auto sel = select_structure_param(s.tasks, LossModel::SquaredError, StructureFamily::Clustered, plan);
      hits += sel.best_K == 3;
    }
    CHECK(hits >= 16);
  }
}
