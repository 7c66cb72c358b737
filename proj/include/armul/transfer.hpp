#pragma once

#include "armul/core.hpp"
#include "armul/losses.hpp"

namespace armul {

struct TransferConfig {
  double tol = 1e-12;      // on the proximal-gradient step length
  int max_iters = 100000;
};

/// argmin_theta f(theta) + lam ||theta - center||
Vec solve_penalized(const TaskLoss& loss, const Vec& center, double lam, const Vec& start,
                    const TransferConfig& config = {});

double penalized_objective(const TaskLoss& loss, const Vec& theta, const Vec& center, double lam);

Vec transfer_vanilla(const TaskDataset& data, LossModel loss, const Vec& beta_hat, double lam,
                     const TransferConfig& config = {});

struct ClusterTransfer {
  Vec theta;
  int z = 0;  // 0-based center index
  double objective = 0.0;
};

/// Best (theta, z) over the K centers; ties to the smallest z.
ClusterTransfer transfer_clustered(const TaskDataset& data, LossModel loss, const Mat& centers, double lam,
                                   const TransferConfig& config = {});

struct SubspaceTransfer {
  Vec theta;
  Vec z;
  double objective = 0.0;
};

/// argmin over theta, z of f(theta) + lam ||theta - B z||; throws
/// RankDeficientBasis when B does not have full column rank.
SubspaceTransfer transfer_lowrank(const TaskDataset& data, LossModel loss, const Mat& basis, double lam,
                                  const TransferConfig& config = {});

}  // namespace armul
