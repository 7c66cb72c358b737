#pragma once

#include "armul/core.hpp"

#include <vector>

namespace armul {

/// max over j in `subset` of ||theta_hat_j - theta_star_j||.
double max_l2_error(const ParamMatrix& theta_hat, const ParamMatrix& theta_star, const std::vector<int>& subset);
/// Same over all columns.
double max_l2_error(const ParamMatrix& theta_hat, const ParamMatrix& theta_star);

struct Alignment {
  double accuracy = 0.0;
  std::vector<int> permutation;  // tau: true label -> estimated label
};

/// Best fraction of tasks with z_hat_j = tau(z_star_j) over permutations tau of
/// {0..K-1}; ties to the lexicographically smallest tau. K <= 8.
Alignment cluster_alignment(const std::vector<int>& z_hat, const std::vector<int>& z_star, int K);

/// Fraction of samples with sgn(x^T theta) != y, sgn(0) = +1.
double misclassification_rate(const Vec& theta, const TaskDataset& data);

/// Mean of (x^T theta - y)^2.
double mean_squared_error(const Vec& theta, const TaskDataset& data);

}  // namespace armul
