#pragma once

#include "armul/core.hpp"
#include "armul/losses.hpp"

#include <optional>
#include <span>

namespace armul {

/// Iterate of the alternating scheme: Theta = Gamma + V with Gamma encoded by
/// structure artifacts (beta | centers + labels | basis + coefficients).
struct SolverState {
  ParamMatrix V;
  StructureArtifacts gamma;
  int iteration = 0;
  double objective = 0.0;
};

/// sum_j w_j [f_j(theta_j) + lambda_j ||theta_j - gamma_j||_2]
double objective(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const ParamMatrix& theta,
                 const ParamMatrix& gamma);
double objective(const TaskCollection& tasks, LossModel loss, const PenaltyConfig& penalty,
                 const ParamMatrix& theta, const ParamMatrix& gamma);

/// Objective of a state, i.e. with theta = gamma + V.
double state_objective(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const SolverState& state);

/// One proximal-gradient step per task:
///   v_j <- prox_{eta_j lambda_j}(v_j - eta_j grad f_j(gamma_j + v_j)).
ParamMatrix v_step(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                   const Vec& eta_v);
ParamMatrix v_step(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                   double eta_v);

/// Auxiliary data for the Gamma steps that does not change across iterations.
struct GammaStepContext {
  /// Per-task loss minimizers, used to re-seed empty clusters. May be empty.
  const ParamMatrix* single_task = nullptr;
};

/// beta after `inner_iters` gradient steps on sum_j w_j f_j(beta + v_j) / sum_j w_j.
/// eta = nullopt resolves to 1 / max_j L_j.
Vec gamma_step_vanilla(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                       std::optional<double> eta, int inner_iters);

/// `inner_iters` rounds of exact label assignment followed by one gradient
/// step on each center. With `min_fraction` set, labels are repaired so that
/// every cluster holds at least ceil(alpha m / K) tasks.
ClusterArtifact gamma_step_clustered(const SolverState& state, std::span<const TaskLoss> losses,
                                     const PenaltyConfig& penalty, std::optional<double> eta, int inner_iters,
                                     std::optional<double> min_fraction = std::nullopt,
                                     const GammaStepContext& ctx = {});

/// `inner_iters` rounds of one gradient step on B followed by one gradient step
/// on each z_j, for sum_j w_j f_j(B z_j + v_j). Auto step sizes use the
/// Lipschitz constant of each block.
SubspaceArtifact gamma_step_lowrank(const SolverState& state, std::span<const TaskLoss> losses,
                                    const PenaltyConfig& penalty, std::optional<double> eta, int inner_iters);

struct ArmulInit {
  ParamMatrix V;
  StructureArtifacts gamma;
};

/// Default starting point: single-task minimizers projected onto the
/// structure (weighted mean, seeded farthest-point k-means, or top-K
/// singular subspace), with V = Theta0 - Gamma0.
ArmulInit default_init(std::span<const TaskLoss> losses, const StructureSpec& structure,
                       const PenaltyConfig& penalty, const SolverConfig& config, const ParamMatrix& single_task);

FitResult fit_armul(std::span<const TaskLoss> losses, const StructureSpec& structure, const PenaltyConfig& penalty,
                    const SolverConfig& config = {}, const std::optional<ArmulInit>& init = std::nullopt);
FitResult fit_armul(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure,
                    const PenaltyConfig& penalty, const SolverConfig& config = {},
                    const std::optional<ArmulInit>& init = std::nullopt);

/// Recovers the final iterate (V, Gamma) of a fit, e.g. for warm starts.
ArmulInit warm_start_from(const FitResult& result);

/// max_j of the first-order optimality violation of
/// min_theta f_j(theta) + lambda_j ||theta - gamma_j||.
double kkt_residual(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const FitResult& result);
double kkt_residual(const TaskCollection& tasks, LossModel loss, const PenaltyConfig& penalty,
                    const FitResult& result);

/// Per-task first-order residual for a single penalized problem.
double prox_kkt_residual(const TaskLoss& loss, double lambda, const Vec& theta, const Vec& center);

}  // namespace armul
