#pragma once

#include "armul/core.hpp"

namespace armul {

/// Empirical loss f_j(theta) = (1/n_j) sum_i l(theta; xi_ji) evaluated
/// directly from the samples.
///
///   SquaredError  l = (x^T theta - y)^2
///   Logistic      l = b(x^T theta) - y x^T theta,  b(t) = log(1 + e^t), y in {+1,-1}
///   GaussianMean  l = ||xi - theta||^2, xi = feature row (responses ignored)
double loss_value(LossModel model, const Vec& theta, const TaskDataset& data);
Vec loss_grad(LossModel model, const Vec& theta, const TaskDataset& data);

/// Upper bound on the spectral norm of the Hessian of f_j.
double grad_lipschitz_bound(LossModel model, const TaskDataset& data);

/// Numerically stable log(1 + e^t).
double log1p_exp(double t);
/// Logistic sigmoid 1 / (1 + e^{-t}).
double sigmoid(double t);

/// One task's loss with precomputed sufficient statistics.
///
/// SquaredError and GaussianMean are quadratics theta^T A theta - 2 b^T theta + c
/// and are evaluated in O(d^2) regardless of n_j. Logistic keeps the samples.
class TaskLoss {
 public:
  TaskLoss(LossModel model, const TaskDataset& data);

  LossModel model() const { return model_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index samples() const { return n_; }
  bool is_quadratic() const { return model_ != LossModel::Logistic; }

  double value(const Vec& theta) const;
  Vec grad(const Vec& theta) const;
  double lipschitz() const { return lipschitz_; }

  /// Unique minimizer when the quadratic is strictly convex.
  /// Returns false (and leaves `out` untouched) when A is singular or the
  /// loss is not quadratic.
  bool exact_minimizer(Vec& out) const;

  /// Quadratic coefficients (valid only when is_quadratic()).
  const Mat& quad_a() const { return a_; }
  const Vec& quad_b() const { return b_; }
  double quad_c() const { return c_; }

 private:
  LossModel model_;
  Eigen::Index dim_;
  Eigen::Index n_;
  Mat a_;
  Vec b_;
  double c_ = 0.0;
  Mat x_;
  Vec y_;
  double lipschitz_ = 0.0;
};

std::vector<TaskLoss> make_task_losses(LossModel model, const TaskCollection& tasks);

}  // namespace armul
