#include "armul/losses.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace armul;

namespace {

TaskDataset one_sample(std::initializer_list<double> x, double y) {
  Mat f(1, static_cast<Eigen::Index>(x.size()));
  Eigen::Index i = 0;
  for (double v : x) f(0, i++) = v;
  Vec r(1);
  r << y;
  return fixtures::task(0, f, r);
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

TaskDataset random_task(LossModel model, std::mt19937_64& rng, int n, int d) {
  Mat x = oracle::gaussian_matrix(n, d, rng);
  Vec y = oracle::gaussian_vector(n, rng);
  if (model == LossModel::Logistic) y = y.unaryExpr([](double v) { return v >= 0 ? 1.0 : -1.0; });
  return fixtures::task(0, x, y);
}

}  // namespace

TEST_SUITE("losses") {
  TEST_CASE("point values") {
    CHECK(loss_value(LossModel::SquaredError, vec2(0, 0), one_sample({1, 0}, 2)) == doctest::Approx(4.0));
    CHECK(loss_value(LossModel::Logistic, vec2(0, 0), one_sample({1, 1}, 1)) == doctest::Approx(std::log(2.0)));
    Mat xi(2, 2);
    xi << 0, 0, 2, 0;
    CHECK(loss_value(LossModel::GaussianMean, vec2(1, 0), fixtures::mean_task(0, xi)) == doctest::Approx(1.0));
  }

  TEST_CASE("point gradients") {
    const Vec g0 = loss_grad(LossModel::SquaredError, vec2(0, 0), one_sample({1, 0}, 2));
    CHECK(g0[0] == doctest::Approx(-4.0));
    CHECK(g0[1] == doctest::Approx(0.0));
    const Vec g1 = loss_grad(LossModel::Logistic, vec2(0, 0), one_sample({1, 0}, 1));
    CHECK(g1[0] == doctest::Approx(-0.5));
    CHECK(g1[1] == doctest::Approx(0.0));
    Mat xi(2, 2);
    xi << 0, 0, 2, 0;
    const Vec g2 = loss_grad(LossModel::GaussianMean, vec2(1, 0), fixtures::mean_task(0, xi));
    CHECK(g2.norm() == doctest::Approx(0.0));
  }

  TEST_CASE("Lipschitz bounds") {
    Mat xi = Mat::Random(7, 3);
    CHECK(grad_lipschitz_bound(LossModel::GaussianMean, fixtures::mean_task(0, xi)) == 2.0);
    const auto t = fixtures::task(0, Mat::Identity(2, 2), Vec::Zero(2));
    CHECK(grad_lipschitz_bound(LossModel::SquaredError, t) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(grad_lipschitz_bound(LossModel::Logistic, t) == doctest::Approx(0.125).epsilon(1e-6));
  }

  TEST_CASE("Lipschitz bound dominates the Hessian norm") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto t = random_task(LossModel::SquaredError, rng, 20, 1 + trial % 6);
      const Mat h = 2.0 * t.features.transpose() * t.features / 20.0;
      CHECK(grad_lipschitz_bound(LossModel::SquaredError, t) >= oracle::max_eigenvalue(h) * (1 - 1e-12));
      CHECK(grad_lipschitz_bound(LossModel::Logistic, t) >= oracle::max_eigenvalue(h) / 8.0 * (1 - 1e-12));
    }
  }

  TEST_CASE("stable logistic pieces") {
    CHECK(log1p_exp(800.0) == doctest::Approx(800.0));
    CHECK(log1p_exp(-800.0) >= 0.0);
    CHECK(log1p_exp(-800.0) < 1e-300);
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
    CHECK(std::isfinite(loss_value(LossModel::Logistic, vec2(1e3, 1e3), one_sample({1, 1}, -1))));
  }

  TEST_CASE("gradients match central differences") {
    std::mt19937_64 rng(5);
    for (auto model : {LossModel::SquaredError, LossModel::Logistic, LossModel::GaussianMean}) {
      for (int trial = 0; trial < 30; ++trial) {
        const int d = 1 + trial % 5;
        const auto t = random_task(model, rng, 15, d);
        const Vec theta = oracle::gaussian_vector(d, rng);
        const Vec fd = oracle::central_difference([&](const Vec& th) { return loss_value(model, th, t); }, theta);
        const Vec g = loss_grad(model, theta, t);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
      }
    }
  }

  TEST_CASE("cached task loss agrees with direct evaluation") {
    std::mt19937_64 rng(9);
    for (auto model : {LossModel::SquaredError, LossModel::Logistic, LossModel::GaussianMean}) {
      const auto t = random_task(model, rng, 25, 4);
      const TaskLoss f(model, t);
      for (int trial = 0; trial < 10; ++trial) {
        const Vec theta = oracle::gaussian_vector(4, rng);
        CHECK(f.value(theta) == doctest::Approx(loss_value(model, theta, t)).epsilon(1e-10));
        CHECK((f.grad(theta) - loss_grad(model, theta, t)).norm() <= 1e-10 * std::max(1.0, f.grad(theta).norm()));
      }
      CHECK(f.lipschitz() == doctest::Approx(grad_lipschitz_bound(model, t)));
    }
  }

  TEST_CASE("exact minimizer of quadratic losses") {
    std::mt19937_64 rng(3);
    const auto t = random_task(LossModel::SquaredError, rng, 30, 3);
    const TaskLoss f(LossModel::SquaredError, t);
    Vec theta;
    REQUIRE(f.exact_minimizer(theta));
    CHECK(f.grad(theta).norm() < 1e-10);
    const TaskLoss singular(LossModel::SquaredError, fixtures::task(0, Mat::Ones(3, 2), Vec::Ones(3)));
    Vec untouched = Vec::Constant(2, 7.0);
    CHECK_FALSE(singular.exact_minimizer(untouched));
    CHECK(untouched[0] == 7.0);
  }

  TEST_CASE("convexity and descent lemma") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto model : {LossModel::SquaredError, LossModel::Logistic, LossModel::GaussianMean}) {
      for (int trial = 0; trial < 40; ++trial) {
        const auto t = random_task(model, rng, 12, 3);
        const Vec a = 2.0 * oracle::gaussian_vector(3, rng), b = 2.0 * oracle::gaussian_vector(3, rng);
        const double s = u(rng);
        const double mid = loss_value(model, s * a + (1 - s) * b, t);
        CHECK(mid <= s * loss_value(model, a, t) + (1 - s) * loss_value(model, b, t) + 1e-12);
        const double L = grad_lipschitz_bound(model, t);
        const Vec g = loss_grad(model, a, t);
        CHECK(loss_value(model, a - g / L, t) <= loss_value(model, a, t) + 1e-12);
      }
    }
  }

  TEST_CASE("dimension and finiteness errors") {
    const auto t = one_sample({1, 0}, 2);
    CHECK_THROWS_AS(loss_value(LossModel::SquaredError, Vec::Zero(3), t), Error);
    Vec bad(2);
    bad << std::nan(""), 0;
    try {
      loss_value(LossModel::SquaredError, bad, t);
      FAIL("expected NonFinite");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonFinite);
    }
  }
}
