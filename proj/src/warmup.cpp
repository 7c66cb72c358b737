#include "armul/warmup.hpp"

#include "armul/prox.hpp"

#include <algorithm>
#include <cmath>

namespace armul {

namespace {

double huber_score(const Vec& xs, double lam, double theta) {
  double s = 0.0;
  for (double x : xs) s += huber_grad(theta - x, lam);
  return s;
}

// Smallest root of the nondecreasing piecewise-linear score.
double lowest_root(const Vec& xs, double lam) {
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(2 * xs.size()));
  for (double x : xs) {
    knots.push_back(x - lam);
    knots.push_back(x + lam);
  }
  std::sort(knots.begin(), knots.end());
  double prev_t = knots.front();
  double prev_s = huber_score(xs, lam, prev_t);  // = -m lam < 0
  for (std::size_t k = 1; k < knots.size(); ++k) {
    const double t = knots[k];
    const double s = huber_score(xs, lam, t);
    if (s >= 0.0) {
      if (s == prev_s) return prev_t;
      return prev_t + (t - prev_t) * (-prev_s) / (s - prev_s);
    }
    prev_t = t;
    prev_s = s;
  }
  return knots.back();
}

double mean(const Vec& x) { return x.mean(); }

double spread(const Vec& x) { return (x.array() - x.mean()).square().sum(); }

}  // namespace

double huber_location(const Vec& xs, double lam) {
  if (!(lam > 0.0)) throw Error(ErrorCode::InvalidArgument, "huber_location requires lam > 0");
  if (xs.size() == 0) throw Error(ErrorCode::TooFewTasks, "huber_location requires at least one point");
  const double lo = lowest_root(xs, lam);
  const double hi = -lowest_root(-xs, lam);
  return 0.5 * (lo + hi);
}

Vec shrink_toward(const Vec& xs, double center, double lam) {
  Vec out(xs.size());
  for (Eigen::Index j = 0; j < xs.size(); ++j) {
    const double r = xs[j] - center;
    const double sgn = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
    out[j] = xs[j] - std::min(lam, std::abs(r)) * sgn;
  }
  return out;
}

MeansEstimate armul_means_closed_form(const MeansProblem& problem) {
  if (!(problem.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "closed form requires lambda > 0");
  MeansEstimate e;
  e.theta_hat = huber_location(problem.sample_means, problem.lambda);
  e.thetas = shrink_toward(problem.sample_means, e.theta_hat, problem.lambda);
  return e;
}

Vec james_stein_zero(const Vec& x) {
  const auto m = x.size();
  if (m < 3) throw Error(ErrorCode::TooFewTasks, "js0 requires m >= 3");
  const double n2 = x.squaredNorm();
  if (n2 == 0.0) throw Error(ErrorCode::DegenerateS, "js0 undefined at x = 0");
  return (1.0 - static_cast<double>(m - 2) / n2) * x;
}

Vec james_stein_mean(const Vec& x) {
  const auto m = x.size();
  if (m < 4) throw Error(ErrorCode::TooFewTasks, "js requires m >= 4");
  const double s = spread(x);
  if (s == 0.0) throw Error(ErrorCode::DegenerateS, "js undefined when all entries are equal");
  const double xb = mean(x);
  return (xb + (1.0 - static_cast<double>(m - 3) / s) * (x.array() - xb)).matrix();
}

Vec james_stein_plus(const Vec& x) {
  const auto m = x.size();
  if (m < 4) throw Error(ErrorCode::TooFewTasks, "js+ requires m >= 4");
  const double s = spread(x);
  const double xb = mean(x);
  // c / 0 = +inf, so the factor is clamped to zero when S = 0.
  const double factor = s == 0.0 ? 0.0 : std::max(0.0, 1.0 - static_cast<double>(m - 3) / s);
  return (xb + factor * (x.array() - xb)).matrix();
}

JamesStein js_estimators(const Vec& x) {
  if (x.size() < 4) throw Error(ErrorCode::TooFewTasks, "js estimators require m >= 4");
  JamesStein out;
  out.js0 = james_stein_zero(x);
  if (spread(x) > 0.0) out.js = james_stein_mean(x);
  out.js_plus = james_stein_plus(x);
  return out;
}

MeansEstimate ridge_mtl_means(const Vec& x, double lam) {
  if (!(lam > 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge MTL requires lam > 0");
  if (x.size() == 0) throw Error(ErrorCode::TooFewTasks, "ridge MTL requires at least one task");
  MeansEstimate e;
  e.theta_hat = mean(x);
  e.thetas = (e.theta_hat + (x.array() - e.theta_hat) / (1.0 + lam)).matrix();
  return e;
}

double js_equivalent_ridge(const Vec& x) {
  const double k = static_cast<double>(x.size()) - 3.0;
  const double s = spread(x);
  if (!(s > k)) throw Error(ErrorCode::DegenerateS, "equivalent ridge level needs S > m - 3");
  return k / (s - k);
}

}  // namespace armul
