#include "armul/pca.hpp"

#include "armul/linalg.hpp"

#include <cmath>

namespace armul {

PcaModel fit_pca(const Mat& x, int target_dim, bool standardize) {
  if (x.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no rows to fit");
  if (target_dim < 1 || target_dim > x.cols()) {
    throw Error(ErrorCode::InvalidArgument, "target dimension must lie in [1, number of columns]");
  }
  PcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Mat centered = x.rowwise() - model.mean.transpose();
  const Mat cov = centered.transpose() * centered / static_cast<double>(x.rows());
  model.components = linalg::top_eigenvectors(cov, target_dim, &model.variances);
  model.scale = Vec::Ones(target_dim);
  if (standardize) {
    for (int k = 0; k < target_dim; ++k) {
      const double sd = std::sqrt(std::max(model.variances[k], 0.0));
      if (sd > 0.0) model.scale[k] = sd;
    }
  }
  return model;
}

Mat pca_transform(const PcaModel& model, const Mat& x, bool add_intercept) {
  if (x.cols() != model.mean.size()) throw Error(ErrorCode::DimensionMismatch, "feature width does not match the model");
  const Eigen::Index k = model.components.cols();
  Mat out(x.rows(), k + (add_intercept ? 1 : 0));
  out.leftCols(k) = ((x.rowwise() - model.mean.transpose()) * model.components) * model.scale.cwiseInverse().asDiagonal();
  if (add_intercept) out.col(k).setOnes();
  return out;
}

Mat pca_reconstruct(const PcaModel& model, const Mat& scores) {
  if (scores.cols() != model.components.cols()) throw Error(ErrorCode::DimensionMismatch, "score width does not match the model");
  return ((scores * model.scale.asDiagonal()) * model.components.transpose()).rowwise() + model.mean.transpose();
}

TaskCollection preprocess_pca(const TaskCollection& tasks, int target_dim, bool add_intercept, bool standardize,
                              PcaModel* model_out) {
  validate_collection(tasks);
  Eigen::Index total = 0;
  for (const auto& t : tasks.tasks) total += t.size();
  Mat pooled(total, tasks.shared_dim);
  Eigen::Index row = 0;
  for (const auto& t : tasks.tasks) {
    pooled.middleRows(row, t.size()) = t.features;
    row += t.size();
  }
  PcaModel model = fit_pca(pooled, target_dim, standardize);
  std::vector<TaskDataset> out;
  for (const auto& t : tasks.tasks) {
    TaskDataset r;
    r.task_id = t.task_id;
    r.features = pca_transform(model, t.features, add_intercept);
    r.responses = t.responses;
    out.push_back(std::move(r));
  }
  if (model_out) *model_out = std::move(model);
  return make_collection(std::move(out));
}

}  // namespace armul
