#include "armul/solver.hpp"

#include "armul/baselines.hpp"
#include "armul/linalg.hpp"
#include "armul/prox.hpp"
#include "armul/rng.hpp"
#include "cluster_util.hpp"

#include <cmath>
#include <limits>

namespace armul {

namespace {

Eigen::Index cols(std::span<const TaskLoss> losses) { return static_cast<Eigen::Index>(losses.size()); }

double max_lipschitz(std::span<const TaskLoss> losses) {
  double l = 0.0;
  for (const auto& t : losses) l = std::max(l, t.lipschitz());
  return l;
}

void check_shapes(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const ParamMatrix& a) {
  if (a.cols() != cols(losses) || (!losses.empty() && a.rows() != losses.front().dim())) {
    throw Error(ErrorCode::DimensionMismatch, "parameter matrix shape does not match the task collection");
  }
  penalty.validate(losses.size());
}

double finite_or_throw(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "objective is not finite");
  return v;
}

}  // namespace

double objective(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const ParamMatrix& theta,
                 const ParamMatrix& gamma) {
  check_shapes(losses, penalty, theta);
  check_shapes(losses, penalty, gamma);
  double s = 0.0;
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    s += penalty.weights[j] * (losses[static_cast<std::size_t>(j)].value(theta.col(j)) +
                               penalty.lambdas[j] * (theta.col(j) - gamma.col(j)).norm());
  }
  return finite_or_throw(s);
}

double objective(const TaskCollection& tasks, LossModel loss, const PenaltyConfig& penalty, const ParamMatrix& theta,
                 const ParamMatrix& gamma) {
  const auto losses = make_task_losses(loss, tasks);
  return objective(losses, penalty, theta, gamma);
}

double state_objective(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const SolverState& state) {
  const ParamMatrix gamma = prototype_matrix(state.gamma, losses.size());
  double s = 0.0;
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    s += penalty.weights[j] * (losses[static_cast<std::size_t>(j)].value(gamma.col(j) + state.V.col(j)) +
                               penalty.lambdas[j] * state.V.col(j).norm());
  }
  return finite_or_throw(s);
}

ParamMatrix v_step(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                   const Vec& eta_v) {
  const ParamMatrix gamma = prototype_matrix(state.gamma, losses.size());
  ParamMatrix next(state.V.rows(), state.V.cols());
  for (Eigen::Index j = 0; j < state.V.cols(); ++j) {
    const double eta = eta_v[j];
    if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
    const Vec g = losses[static_cast<std::size_t>(j)].grad(gamma.col(j) + state.V.col(j));
    next.col(j) = group_soft_threshold(state.V.col(j) - eta * g, eta * penalty.lambdas[j]);
  }
  return next;
}

ParamMatrix v_step(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                   double eta_v) {
  return v_step(state, losses, penalty, Vec::Constant(state.V.cols(), eta_v));
}

Vec gamma_step_vanilla(const SolverState& state, std::span<const TaskLoss> losses, const PenaltyConfig& penalty,
                       std::optional<double> eta, int inner_iters) {
  Vec beta = std::get<CenterArtifact>(state.gamma).beta;
  const double step = eta.value_or(1.0 / max_lipschitz(losses));
  const double wsum = penalty.weights.sum();
  for (int it = 0; it < inner_iters; ++it) {
    Vec g = Vec::Zero(beta.size());
    for (Eigen::Index j = 0; j < state.V.cols(); ++j) {
      g += penalty.weights[j] * losses[static_cast<std::size_t>(j)].grad(beta + state.V.col(j));
    }
    g /= wsum;
    if (g.squaredNorm() == 0.0) break;
    beta -= step * g;
  }
  return beta;
}

ClusterArtifact gamma_step_clustered(const SolverState& state, std::span<const TaskLoss> losses,
                                     const PenaltyConfig& penalty, std::optional<double> eta, int inner_iters,
                                     std::optional<double> min_fraction, const GammaStepContext& ctx) {
  ClusterArtifact c = std::get<ClusterArtifact>(state.gamma);
  const int K = static_cast<int>(c.centers.cols());
  const auto m = losses.size();
  const double step = eta.value_or(1.0 / max_lipschitz(losses));
  const int floor = min_fraction ? detail::cardinality_floor(*min_fraction, m, K) : 0;

  for (int it = 0; it < inner_iters; ++it) {
    Mat costs = detail::assignment_costs(losses, c.centers, &state.V);
    std::vector<int> labels = detail::argmin_labels(costs);
    if (min_fraction) {
      detail::repair_cardinality(costs, penalty.weights, labels, K, floor);
      // Keep the incoming labels if the greedy repair did worse than them.
      if (c.labels.size() == m && detail::assignment_cost(costs, penalty.weights, c.labels) <
                                      detail::assignment_cost(costs, penalty.weights, labels)) {
        const auto sizes = detail::cluster_sizes(c.labels, K);
        bool feasible = true;
        for (int s : sizes) feasible = feasible && s >= floor;
        if (feasible) labels = c.labels;
      }
    } else {
      for (;;) {
        const auto sizes = detail::cluster_sizes(labels, K);
        int empty = -1;
        for (int k = 0; k < K; ++k) {
          if (sizes[static_cast<std::size_t>(k)] == 0) {
            empty = k;
            break;
          }
        }
        if (empty < 0) break;
        Vec best(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) {
          best[static_cast<Eigen::Index>(j)] =
              ctx.single_task ? losses[j].value(ctx.single_task->col(static_cast<Eigen::Index>(j))) : 0.0;
        }
        const int j = detail::worst_fit_task(costs, labels, best, K);
        if (j < 0) break;
        const Vec target = ctx.single_task ? Vec(ctx.single_task->col(j)) : Vec(c.centers.col(labels[static_cast<std::size_t>(j)]) + state.V.col(j));
        c.centers.col(empty) = target - state.V.col(j);
        labels[static_cast<std::size_t>(j)] = empty;
        for (Eigen::Index t = 0; t < costs.rows(); ++t) {
          costs(t, empty) = losses[static_cast<std::size_t>(t)].value(c.centers.col(empty) + state.V.col(t));
        }
      }
    }
    c.labels = std::move(labels);

    // One normalized gradient step per non-empty center.
    Mat grads = Mat::Zero(c.centers.rows(), K);
    Vec wsum = Vec::Zero(K);
    for (std::size_t j = 0; j < m; ++j) {
      const int z = c.labels[j];
      const auto jj = static_cast<Eigen::Index>(j);
      grads.col(z) += penalty.weights[jj] * losses[j].grad(c.centers.col(z) + state.V.col(jj));
      wsum[z] += penalty.weights[jj];
    }
    for (int k = 0; k < K; ++k) {
      if (wsum[k] > 0.0) c.centers.col(k) -= step * grads.col(k) / wsum[k];
    }
  }
  return c;
}

SubspaceArtifact gamma_step_lowrank(const SolverState& state, std::span<const TaskLoss> losses,
                                    const PenaltyConfig& penalty, std::optional<double> eta, int inner_iters) {
  SubspaceArtifact s = std::get<SubspaceArtifact>(state.gamma);
  const auto m = static_cast<Eigen::Index>(losses.size());
  const double wsum = penalty.weights.sum();
  const double lmax = max_lipschitz(losses);

  for (int it = 0; it < inner_iters; ++it) {
    // B-step on sum_j w_j f_j(B z_j + v_j) / sum_j w_j.
    Mat gb = Mat::Zero(s.basis.rows(), s.basis.cols());
    double zscale = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Vec g = losses[static_cast<std::size_t>(j)].grad(s.basis * s.coeffs.col(j) + state.V.col(j));
      gb.noalias() += (penalty.weights[j] / wsum) * g * s.coeffs.col(j).transpose();
      zscale += penalty.weights[j] / wsum * s.coeffs.col(j).squaredNorm();
    }
    if (zscale > 0.0) {
      const double step_b = eta.value_or(1.0 / (lmax * zscale));
      s.basis -= step_b * gb;
    }

    // Z-step, independent across tasks.
    // K x K, so a dense eigensolve is cheap; power iteration stalls when B is
    // close to orthonormal.
    const Mat btb = s.basis.transpose() * s.basis;
    const double bnorm2 = Eigen::SelfAdjointEigenSolver<Mat>(btb, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (bnorm2 <= 0.0) continue;
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& loss = losses[static_cast<std::size_t>(j)];
      const Vec g = loss.grad(s.basis * s.coeffs.col(j) + state.V.col(j));
      const double step_z = eta.value_or(1.0 / (loss.lipschitz() * bnorm2));
      s.coeffs.col(j) -= step_z * (s.basis.transpose() * g);
    }
  }
  return s;
}

ArmulInit default_init(std::span<const TaskLoss> losses, const StructureSpec& structure,
                       const PenaltyConfig& penalty, const SolverConfig& config, const ParamMatrix& single_task) {
  const auto m = cols(losses);
  ArmulInit init;
  if (std::holds_alternative<VanillaStructure>(structure)) {
    Vec beta = single_task * penalty.weights / penalty.weights.sum();
    init.gamma = CenterArtifact{beta};
  } else if (const auto* cs = std::get_if<ClusteredStructure>(&structure)) {
    auto rng = make_stream(config.seed, 0);
    Mat centers = detail::farthest_point_seeds(single_task, cs->K, rng);
    auto labels = detail::lloyd(single_task, penalty.weights, centers, config.lloyd_rounds);
    if (cs->min_fraction) {
      Mat dist(m, cs->K);
      for (Eigen::Index j = 0; j < m; ++j) {
        for (int k = 0; k < cs->K; ++k) dist(j, k) = (single_task.col(j) - centers.col(k)).squaredNorm();
      }
      detail::repair_cardinality(dist, Vec::Ones(m), labels, cs->K,
                                 detail::cardinality_floor(*cs->min_fraction, losses.size(), cs->K));
    }
    init.gamma = ClusterArtifact{centers, labels};
  } else {
    const int K = std::get<LowRankStructure>(structure).K;
    Mat basis = linalg::top_left_singular_vectors(single_task, K);
    init.gamma = SubspaceArtifact{basis, basis.transpose() * single_task};
  }
  init.V = single_task - prototype_matrix(init.gamma, losses.size());
  return init;
}

namespace {

StructureArtifacts finalize_artifacts(StructureArtifacts gamma) {
  if (auto* s = std::get_if<SubspaceArtifact>(&gamma)) {
    Mat q, r;
    linalg::thin_qr(s->basis, q, r);
    s->coeffs = r * s->coeffs;
    s->basis = q;
  }
  return gamma;
}

}  // namespace

FitResult fit_armul(std::span<const TaskLoss> losses, const StructureSpec& structure, const PenaltyConfig& penalty,
                    const SolverConfig& config, const std::optional<ArmulInit>& init) {
  if (losses.empty()) throw Error(ErrorCode::TooFewTasks, "no tasks");
  penalty.validate(losses.size());
  const Eigen::Index d = losses.front().dim();
  validate_structure(structure, losses.size(), d);
  if (config.outer_iters < 1 || config.inner_gamma_iters < 1 || config.tol < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid solver configuration");
  }

  BaselineConfig stl_config;
  const ParamMatrix single_task = fit_single_task(losses, stl_config);

  SolverState state;
  if (init) {
    state.V = init->V;
    state.gamma = init->gamma;
  } else {
    ArmulInit start = default_init(losses, structure, penalty, config, single_task);
    state.V = std::move(start.V);
    state.gamma = std::move(start.gamma);
  }
  if (state.V.rows() != d || state.V.cols() != cols(losses)) {
    throw Error(ErrorCode::DimensionMismatch, "initial V has the wrong shape");
  }

  Vec eta_v(cols(losses));
  for (Eigen::Index j = 0; j < eta_v.size(); ++j) {
    eta_v[j] = config.step_size_v.value_or(1.0 / losses[static_cast<std::size_t>(j)].lipschitz());
  }
  GammaStepContext ctx{&single_task};

  FitResult result;
  state.objective = state_objective(losses, penalty, state);
  result.objective_trace.push_back(state.objective);
  for (int t = 0; t < config.outer_iters; ++t) {
    state.V = v_step(state, losses, penalty, eta_v);
    switch (structure.index()) {
      case 0:
        state.gamma = CenterArtifact{gamma_step_vanilla(state, losses, penalty, config.step_size_gamma,
                                                        config.inner_gamma_iters)};
        break;
      case 1:
        state.gamma = gamma_step_clustered(state, losses, penalty, config.step_size_gamma, config.inner_gamma_iters,
                                           std::get<ClusteredStructure>(structure).min_fraction, ctx);
        break;
      default:
        state.gamma =
            gamma_step_lowrank(state, losses, penalty, config.step_size_gamma, config.inner_gamma_iters);
        break;
    }
    state.iteration = t + 1;
    const double prev = state.objective;
    state.objective = state_objective(losses, penalty, state);
    result.objective_trace.push_back(state.objective);
    if (std::abs(prev - state.objective) <= config.tol * std::max(std::abs(prev), 1e-300)) {
      result.converged = true;
      break;
    }
  }

  result.artifacts = finalize_artifacts(std::move(state.gamma));
  result.theta_hat = prototype_matrix(result.artifacts, losses.size()) + state.V;
  result.iterations = state.iteration;
  result.kkt_residual = kkt_residual(losses, penalty, result);
  return result;
}

FitResult fit_armul(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure,
                    const PenaltyConfig& penalty, const SolverConfig& config, const std::optional<ArmulInit>& init) {
  validate_collection(tasks, loss);
  const auto losses = make_task_losses(loss, tasks);
  return fit_armul(losses, structure, penalty, config, init);
}

ArmulInit warm_start_from(const FitResult& result) {
  ArmulInit init;
  init.gamma = result.artifacts;
  init.V = result.theta_hat - prototype_matrix(result.artifacts, static_cast<std::size_t>(result.theta_hat.cols()));
  return init;
}

double prox_kkt_residual(const TaskLoss& loss, double lambda, const Vec& theta, const Vec& center) {
  const Vec g = loss.grad(theta);
  const Vec diff = theta - center;
  const double nd = diff.norm();
  if (nd == 0.0) return std::max(g.norm() - lambda, 0.0);
  return (g + lambda * diff / nd).norm();
}

double kkt_residual(std::span<const TaskLoss> losses, const PenaltyConfig& penalty, const FitResult& result) {
  const ParamMatrix gamma = prototype_matrix(result.artifacts, losses.size());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < gamma.cols(); ++j) {
    worst = std::max(worst, prox_kkt_residual(losses[static_cast<std::size_t>(j)], penalty.lambdas[j],
                                              result.theta_hat.col(j), gamma.col(j)));
  }
  return worst;
}

double kkt_residual(const TaskCollection& tasks, LossModel loss, const PenaltyConfig& penalty,
                    const FitResult& result) {
  const auto losses = make_task_losses(loss, tasks);
  return kkt_residual(losses, penalty, result);
}

}  // namespace armul
