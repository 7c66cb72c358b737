#include "armul/losses.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace armul {

namespace {

void check_theta(const Vec& theta, const TaskDataset& data) {
  if (theta.size() != data.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "theta has length " + std::to_string(theta.size()) +
                                                  ", data has width " + std::to_string(data.dim()));
  }
}

// Full symmetric eigensolve: power iteration stops short of the top eigenvalue,
// and the step sizes need an upper bound.
double gram_top(const Mat& gram) {
  if (gram.size() == 0) return 0.0;
  const Vec ev = Eigen::SelfAdjointEigenSolver<Mat>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  return std::max(ev.maxCoeff(), 0.0);
}

double finite_or_throw(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "loss evaluation produced a non-finite value");
  return v;
}

}  // namespace

double log1p_exp(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double loss_value(LossModel model, const Vec& theta, const TaskDataset& data) {
  check_theta(theta, data);
  const double n = static_cast<double>(data.size());
  switch (model) {
    case LossModel::SquaredError:
      return finite_or_throw((data.features * theta - data.responses).squaredNorm() / n);
    case LossModel::Logistic: {
      Vec t = data.features * theta;
      double s = 0.0;
      for (Eigen::Index i = 0; i < t.size(); ++i) s += log1p_exp(t[i]) - data.responses[i] * t[i];
      return finite_or_throw(s / n);
    }
    case LossModel::GaussianMean:
      return finite_or_throw((data.features.rowwise() - theta.transpose()).rowwise().squaredNorm().sum() / n);
  }
  return 0.0;
}

Vec loss_grad(LossModel model, const Vec& theta, const TaskDataset& data) {
  check_theta(theta, data);
  const double n = static_cast<double>(data.size());
  Vec g;
  switch (model) {
    case LossModel::SquaredError:
      g = 2.0 * data.features.transpose() * (data.features * theta - data.responses) / n;
      break;
    case LossModel::Logistic: {
      Vec t = data.features * theta;
      Vec r(t.size());
      for (Eigen::Index i = 0; i < t.size(); ++i) r[i] = sigmoid(t[i]) - data.responses[i];
      g = data.features.transpose() * r / n;
      break;
    }
    case LossModel::GaussianMean:
      g = 2.0 * (theta - data.features.colwise().mean().transpose());
      break;
  }
  if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient evaluation produced a non-finite value");
  return g;
}

double grad_lipschitz_bound(LossModel model, const TaskDataset& data) {
  if (model == LossModel::GaussianMean) return 2.0;
  const double n = static_cast<double>(data.size());
  Mat gram = data.features.transpose() * data.features / n;
  const double top = gram_top(gram);
  return model == LossModel::SquaredError ? 2.0 * top : 0.25 * top;
}

TaskLoss::TaskLoss(LossModel model, const TaskDataset& data)
    : model_(model), dim_(data.dim()), n_(data.size()) {
  if (n_ == 0) throw Error(ErrorCode::EmptyTask, "task " + std::to_string(data.task_id) + " has no samples");
  const double n = static_cast<double>(n_);
  switch (model) {
    case LossModel::SquaredError:
      a_ = Mat::Zero(dim_, dim_);
      a_.selfadjointView<Eigen::Lower>().rankUpdate(data.features.transpose(), 1.0 / n);
      a_ = a_.selfadjointView<Eigen::Lower>();
      b_ = data.features.transpose() * data.responses / n;
      c_ = data.responses.squaredNorm() / n;
      lipschitz_ = 2.0 * gram_top(a_);
      break;
    case LossModel::GaussianMean:
      a_ = Mat::Identity(dim_, dim_);
      b_ = data.features.colwise().mean().transpose();
      c_ = data.features.rowwise().squaredNorm().sum() / n;
      lipschitz_ = 2.0;
      break;
    case LossModel::Logistic:
      x_ = data.features;
      y_ = data.responses;
      lipschitz_ = 0.25 * gram_top(x_.transpose() * x_ / n);
      break;
  }
}

double TaskLoss::value(const Vec& theta) const {
  if (is_quadratic()) {
    return finite_or_throw(theta.dot(a_ * theta) - 2.0 * b_.dot(theta) + c_);
  }
  Vec t = x_ * theta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) s += log1p_exp(t[i]) - y_[i] * t[i];
  return finite_or_throw(s / static_cast<double>(n_));
}

Vec TaskLoss::grad(const Vec& theta) const {
  Vec g;
  if (is_quadratic()) {
    g = 2.0 * (a_ * theta - b_);
  } else {
    Vec t = x_ * theta;
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = sigmoid(t[i]) - y_[i];
    g = x_.transpose() * t / static_cast<double>(n_);
  }
  if (!g.allFinite()) throw Error(ErrorCode::NonFinite, "gradient evaluation produced a non-finite value");
  return g;
}

bool TaskLoss::exact_minimizer(Vec& out) const {
  if (!is_quadratic()) return false;
  Eigen::LLT<Mat> llt(a_);
  if (llt.info() != Eigen::Success) return false;
  // Reject numerically singular designs.
  const Vec diag = llt.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-7 * diag.maxCoeff()) return false;
  out = llt.solve(b_);
  return out.allFinite();
}

std::vector<TaskLoss> make_task_losses(LossModel model, const TaskCollection& tasks) {
  std::vector<TaskLoss> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks.tasks) out.emplace_back(model, t);
  return out;
}

}  // namespace armul
