#include "armul/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace armul {

double max_l2_error(const ParamMatrix& theta_hat, const ParamMatrix& theta_star, const std::vector<int>& subset) {
  if (theta_hat.rows() != theta_star.rows() || theta_hat.cols() != theta_star.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter matrices differ in shape");
  }
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "subset is empty");
  double worst = 0.0;
  for (int j : subset) {
    if (j < 0 || j >= theta_hat.cols()) throw Error(ErrorCode::InvalidArgument, "subset index out of range");
    worst = std::max(worst, (theta_hat.col(j) - theta_star.col(j)).norm());
  }
  return worst;
}

double max_l2_error(const ParamMatrix& theta_hat, const ParamMatrix& theta_star) {
  std::vector<int> all(static_cast<std::size_t>(theta_hat.cols()));
  std::iota(all.begin(), all.end(), 0);
  return max_l2_error(theta_hat, theta_star, all);
}

Alignment cluster_alignment(const std::vector<int>& z_hat, const std::vector<int>& z_star, int K) {
  if (K > 8) throw Error(ErrorCode::KTooLarge, "cluster_alignment supports K <= 8");
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be positive");
  if (z_hat.size() != z_star.size()) throw Error(ErrorCode::DimensionMismatch, "label vectors differ in length");
  if (z_hat.empty()) throw Error(ErrorCode::EmptySubset, "no labels");
  for (std::size_t j = 0; j < z_hat.size(); ++j) {
    if (z_hat[j] < 0 || z_hat[j] >= K || z_star[j] < 0 || z_star[j] >= K) {
      throw Error(ErrorCode::InvalidArgument, "label out of range");
    }
  }
  std::vector<int> tau(static_cast<std::size_t>(K));
  std::iota(tau.begin(), tau.end(), 0);
  Alignment best{-1.0, tau};
  // next_permutation walks in lexicographic order, so strict improvement keeps
  // the smallest maximizer.
  do {
    int hits = 0;
    for (std::size_t j = 0; j < z_hat.size(); ++j) hits += z_hat[j] == tau[static_cast<std::size_t>(z_star[j])];
    const double acc = static_cast<double>(hits) / static_cast<double>(z_hat.size());
    if (acc > best.accuracy) best = Alignment{acc, tau};
  } while (std::next_permutation(tau.begin(), tau.end()));
  return best;
}

double misclassification_rate(const Vec& theta, const TaskDataset& data) {
  if (theta.size() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "theta length does not match features");
  if (data.size() == 0) throw Error(ErrorCode::EmptyTask, "no samples");
  const Vec t = data.features * theta;
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double pred = t[i] >= 0.0 ? 1.0 : -1.0;
    wrong += pred != data.responses[i];
  }
  return static_cast<double>(wrong) / static_cast<double>(t.size());
}

double mean_squared_error(const Vec& theta, const TaskDataset& data) {
  if (theta.size() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "theta length does not match features");
  if (data.size() == 0) throw Error(ErrorCode::EmptyTask, "no samples");
  return (data.features * theta - data.responses).squaredNorm() / static_cast<double>(data.size());
}

}  // namespace armul
