#include "armul/prox.hpp"
#include "armul/solver.hpp"
#include "armul/warmup.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace armul;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

double huber_sum(const Vec& xs, double lam, double t) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < xs.size(); ++j) {
    const double r = std::abs(t - xs[j]);
    s += r <= lam ? 0.5 * r * r : lam * (r - 0.5 * lam);
  }
  return s;
}

// sum_j rho_lam(theta - x_j) minimized on a fine grid
double huber_grid(const Vec& xs, double lam) {
  auto f = [&](double t) { return huber_sum(xs, lam, t); };
  return oracle::grid_min(f, xs.minCoeff() - 1.0, xs.maxCoeff() + 1.0, 200001);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an armul::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("warmup") {
  TEST_CASE("Huber location examples") {
    CHECK(huber_location(v({-1, 0, 1}), 0.3) == doctest::Approx(0.0));
    CHECK(huber_location(v({-1, 0, 1}), 5.0) == doctest::Approx(0.0));
    CHECK(huber_location(v({0.1, 0.4, 1.0}), 2.0) == doctest::Approx(0.5));
    const double t = huber_location(v({0, 0, 0, 100}), 1.0);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK(t == doctest::Approx(huber_grid(v({0, 0, 0, 100}), 1.0)).epsilon(1e-6));
  }

  TEST_CASE("Huber location matches grid search") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> l(0.05, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
      const Vec xs = oracle::gaussian_vector(3 + trial % 7, rng, 2.0);
      const double lam = l(rng);
      // the minimizer can be a flat interval, so compare objective values
      const double ref = huber_sum(xs, lam, huber_grid(xs, lam));
      CHECK(huber_sum(xs, lam, huber_location(xs, lam)) <= ref + 1e-9);
    }
  }

  TEST_CASE("closed form examples") {
    MeansProblem merged{v({-1, 0, 1}), 1, 10.0};
    const auto a = armul_means_closed_form(merged);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(a.thetas[j] == doctest::Approx(0.0));

    MeansProblem outlier{v({0, 0, 0, 100}), 1, 1.0};
    const auto b = armul_means_closed_form(outlier);
    CHECK(b.thetas[3] == doctest::Approx(99.0));
    const double center = huber_grid(v({0, 0, 0, 100}), 1.0);
    CHECK(b.theta_hat == doctest::Approx(center).epsilon(1e-6));

    MeansProblem mle{v({0.3, -1.2, 2.5}), 1, 1e-9};
    const auto c = armul_means_closed_form(mle);
    CHECK((c.thetas - mle.sample_means).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("closed form agrees with the generic solver") {
    // f_j = (theta - x_bar_j)^2 + const, so the solver's lambda must be doubled
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
      const Vec xbar = oracle::gaussian_vector(6, rng, 2.0);
      const double lam = 0.2 + 0.3 * trial;
      std::vector<std::vector<double>> samples;
      for (Eigen::Index j = 0; j < xbar.size(); ++j) samples.push_back({xbar[j]});
      const auto tasks = fixtures::scalar_means(samples);
      const auto p = PenaltyConfig::explicit_values(Vec::Ones(6), Vec::Constant(6, 2.0 * lam));
      SolverConfig cfg;
      cfg.outer_iters = 20000;
      cfg.tol = 1e-15;
      const auto r = fit_armul(tasks, LossModel::GaussianMean, VanillaStructure{}, p, cfg);
      const auto cf = armul_means_closed_form({xbar, 1, lam});
      for (Eigen::Index j = 0; j < 6; ++j) CHECK(r.theta_hat(0, j) == doctest::Approx(cf.thetas[j]).epsilon(1e-5));
    }
  }

  TEST_CASE("shrink toward a center") {
    const Vec s = shrink_toward(v({0, 0.5, 5}), 0.0, 1.0);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.0);
    CHECK(s[2] == 4.0);
  }

  TEST_CASE("James-Stein examples") {
    const Vec js0 = james_stein_zero(v({1, 1, 1}));
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(js0[j] == doctest::Approx(2.0 / 3.0));

    const Vec constant = james_stein_plus(v({2, 2, 2, 2}));
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(constant[j] == 2.0);
    CHECK(code_of([] { james_stein_mean(v({2, 2, 2, 2})); }) == ErrorCode::DegenerateS);

    const Vec js = james_stein_mean(v({0, 0, 0, 2}));
    CHECK(js[0] == doctest::Approx(1.0 / 6.0));
    CHECK(js[3] == doctest::Approx(1.5));

    const auto all = js_estimators(v({2, 2, 2, 2}));
    CHECK(all.js.size() == 0);
    CHECK(all.js_plus.size() == 4);
    CHECK(code_of([] { js_estimators(v({1, 2, 3})); }) == ErrorCode::TooFewTasks);
    CHECK(code_of([] { james_stein_zero(v({1, 2})); }) == ErrorCode::TooFewTasks);
  }

  TEST_CASE("James-Stein formulas recomputed independently") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const Vec x = oracle::gaussian_vector(4 + trial % 10, rng, 1.5);
      const double m = static_cast<double>(x.size());
      const double mean = x.sum() / m;
      double s = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) s += (x[j] - mean) * (x[j] - mean);
      const double factor = 1.0 - (m - 3.0) / s;
      const Vec js = james_stein_mean(x);
      const Vec jsp = james_stein_plus(x);
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        CHECK(js[j] == doctest::Approx(mean + factor * (x[j] - mean)).epsilon(1e-12));
        CHECK(jsp[j] == doctest::Approx(mean + std::max(factor, 0.0) * (x[j] - mean)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("ridge MTL and its James-Stein equivalence") {
    const auto r = ridge_mtl_means(v({0, 2}), 1.0);
    CHECK(r.theta_hat == doctest::Approx(1.0));
    CHECK(r.thetas[0] == doctest::Approx(0.5));
    CHECK(r.thetas[1] == doctest::Approx(1.5));

    const auto big = ridge_mtl_means(v({-3, 1, 4}), 1e12);
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(big.thetas[j] == doctest::Approx(2.0 / 3.0));

    std::mt19937_64 rng(4);
    int tested = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vec x = oracle::gaussian_vector(5 + trial % 6, rng, 2.0);
      const double m = static_cast<double>(x.size());
      const double s = (x.array() - x.mean()).square().sum();
      if (s <= m - 3.0) {
        CHECK(code_of([&] { js_equivalent_ridge(x); }) == ErrorCode::DegenerateS);
        continue;
      }
      ++tested;
      const auto ridge = ridge_mtl_means(x, js_equivalent_ridge(x));
      const Vec js = js_estimators(x).js;
      CHECK((ridge.thetas - js).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()));
    }
    CHECK(tested > 50);
  }
}
