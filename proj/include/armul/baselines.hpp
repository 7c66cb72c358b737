#pragma once

#include "armul/core.hpp"
#include "armul/losses.hpp"

#include <span>

namespace armul {

struct BaselineConfig {
  double tol = 1e-10;       // gradient-norm tolerance for iterative solves
  int max_iters = 20000;    // per iterative solve
  bool exact = false;       // squared error: throw SingularDesign instead of falling back
  int restarts = 5;         // clustered MTL
  int max_rounds = 100;     // clustered MTL alternations
  int lowrank_rounds = 500; // low-rank MTL alternations
  double lowrank_tol = 1e-10;
  std::uint64_t seed = 0;
};

/// Minimizer of sum_j w_j f_j(beta) / sum_j w_j over the given tasks, from `start`.
/// Quadratic losses are solved through the normal equations when possible.
Vec minimize_weighted(std::span<const TaskLoss* const> losses, std::span<const double> weights, const Vec& start,
                      const BaselineConfig& config);

/// Single-task minimizer of one loss.
Vec minimize_task(const TaskLoss& loss, const Vec& start, const BaselineConfig& config);

ParamMatrix fit_single_task(std::span<const TaskLoss> losses, const BaselineConfig& config = {});
ParamMatrix fit_single_task(const TaskCollection& tasks, LossModel loss, const BaselineConfig& config = {});

Vec fit_pooled(std::span<const TaskLoss> losses, const Vec& weights, const BaselineConfig& config = {});
Vec fit_pooled(const TaskCollection& tasks, LossModel loss, const Vec& weights, const BaselineConfig& config = {});

/// sum_j w_j f_j(beta_{z_j})
double clustered_objective(std::span<const TaskLoss> losses, const Vec& weights, const ClusterArtifact& c);

/// Alternating minimization of sum_j w_j f_j(beta_{z_j}); best of
/// `config.restarts` seeded restarts, the first one started from the pooled fit.
ClusterArtifact fit_clustered_mtl(std::span<const TaskLoss> losses, int K, const Vec& weights,
                                  const BaselineConfig& config = {});
ClusterArtifact fit_clustered_mtl(const TaskCollection& tasks, LossModel loss, int K, const Vec& weights,
                                  const BaselineConfig& config = {});

/// sum_j w_j f_j(B z_j)
double lowrank_objective(std::span<const TaskLoss> losses, const Vec& weights, const SubspaceArtifact& s);

/// Alternating gradient descent on B and Z of sum_j w_j f_j(B z_j), started
/// from the top-K singular subspace of the single-task solutions.
SubspaceArtifact fit_lowrank_mtl(std::span<const TaskLoss> losses, int K, const Vec& weights,
                                 const BaselineConfig& config = {});
SubspaceArtifact fit_lowrank_mtl(const TaskCollection& tasks, LossModel loss, int K, const Vec& weights,
                                 const BaselineConfig& config = {});

}  // namespace armul
