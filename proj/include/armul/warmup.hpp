#pragma once

#include "armul/core.hpp"

namespace armul {

/// One-dimensional Gaussian-mean problem: task j has sample mean x_bar_j
/// over n observations, all tasks share the penalty level lambda.
struct MeansProblem {
  Vec sample_means;
  int n = 1;
  double lambda = 0.0;
};

/// Exact minimizer of sum_j rho_lam(theta - xs_j), rho the Huber loss.
/// When the minimizer is an interval, its midpoint is returned.
double huber_location(const Vec& xs, double lam);

struct MeansEstimate {
  double theta_hat = 0.0;
  Vec thetas;
};

/// Center = Huber location of the means; each task mean moves toward it by
/// at most lambda.
MeansEstimate armul_means_closed_form(const MeansProblem& problem);

/// x_j - min(lam, |x_j - center|) sgn(x_j - center)
Vec shrink_toward(const Vec& xs, double center, double lam);

/// (1 - (m - 2) / ||x||^2) x. Needs m >= 3.
Vec james_stein_zero(const Vec& x);
/// x_bar + (1 - (m - 3) / S)(x - x_bar), S = sum (x_j - x_bar)^2. Needs m >= 4
/// and S > 0 (DegenerateS otherwise).
Vec james_stein_mean(const Vec& x);
/// Positive-part version of james_stein_mean; S = 0 gives x_bar everywhere.
Vec james_stein_plus(const Vec& x);

struct JamesStein {
  Vec js0;
  Vec js;  // empty when S = 0
  Vec js_plus;
};

/// All three estimators at once. Needs m >= 4.
JamesStein js_estimators(const Vec& x);

/// Ridge multi-task estimate for unit-variance means:
/// theta = x_bar, theta_j = x_bar + (x_j - x_bar) / (1 + lam).
MeansEstimate ridge_mtl_means(const Vec& x, double lam);

/// Ridge level that makes ridge_mtl_means coincide with james_stein_mean:
/// (m - 3) / (S - (m - 3)). Needs S > m - 3.
double js_equivalent_ridge(const Vec& x);

}  // namespace armul
