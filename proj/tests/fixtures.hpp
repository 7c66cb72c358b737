#pragma once

#include "armul/core.hpp"
#include "oracles.hpp"

#include <random>
#include <vector>

namespace fixtures {

using armul::Mat;
using armul::TaskCollection;
using armul::TaskDataset;
using armul::Vec;

inline TaskDataset task(int id, Mat x, Vec y) {
  TaskDataset t;
  t.task_id = id;
  t.features = std::move(x);
  t.responses = std::move(y);
  return t;
}

/// Gaussian-mean task whose samples are the rows of `xi`.
inline TaskDataset mean_task(int id, Mat xi) {
  const auto n = xi.rows();
  return task(id, std::move(xi), Vec::Zero(n));
}

/// One-dimensional Gaussian-mean collection with the given samples per task.
inline TaskCollection scalar_means(const std::vector<std::vector<double>>& samples) {
  std::vector<TaskDataset> tasks;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    Mat x(static_cast<Eigen::Index>(samples[j].size()), 1);
    for (std::size_t i = 0; i < samples[j].size(); ++i) x(static_cast<Eigen::Index>(i), 0) = samples[j][i];
    tasks.push_back(mean_task(static_cast<int>(j), x));
  }
  return armul::make_collection(std::move(tasks));
}

/// Linear-regression tasks y = X theta_j + sd * noise with Gaussian designs.
inline TaskCollection regression(const Mat& theta, int n, std::mt19937_64& rng, double noise = 1.0) {
  std::vector<TaskDataset> tasks;
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    Mat x = oracle::gaussian_matrix(n, theta.rows(), rng);
    Vec y = x * theta.col(j);
    for (int i = 0; i < n; ++i) y[i] += noise * g(rng);
    tasks.push_back(task(static_cast<int>(j), x, y));
  }
  return armul::make_collection(std::move(tasks));
}

/// Logistic tasks with labels +-1 drawn from the standard logistic model.
inline TaskCollection classification(const Mat& theta, int n, std::mt19937_64& rng) {
  std::vector<TaskDataset> tasks;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    Mat x = oracle::gaussian_matrix(n, theta.rows(), rng);
    Vec y(n);
    for (int i = 0; i < n; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-x.row(i).dot(theta.col(j))));
      y[i] = u(rng) < p ? 1.0 : -1.0;
    }
    tasks.push_back(task(static_cast<int>(j), x, y));
  }
  return armul::make_collection(std::move(tasks));
}

}  // namespace fixtures
