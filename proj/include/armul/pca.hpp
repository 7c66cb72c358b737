#pragma once

#include "armul/core.hpp"

namespace armul {

struct PcaModel {
  Vec mean;        // pooled column means
  Mat components;  // d x k, orthonormal columns
  Vec variances;   // eigenvalues of the covariance, descending
  Vec scale;       // per-component divisor applied after projection (1 unless standardized)
};

/// Principal directions of the rows of `x` (power iteration with deflation).
PcaModel fit_pca(const Mat& x, int target_dim, bool standardize = false);

/// Scores of the rows of `x`, optionally followed by a constant-1 column.
Mat pca_transform(const PcaModel& model, const Mat& x, bool add_intercept = false);

/// Maps scores (without the intercept column) back to the original space.
Mat pca_reconstruct(const PcaModel& model, const Mat& scores);

/// Reduces the features of every task with one model fit on all pooled rows.
TaskCollection preprocess_pca(const TaskCollection& tasks, int target_dim, bool add_intercept,
                              bool standardize = false, PcaModel* model = nullptr);

}  // namespace armul
