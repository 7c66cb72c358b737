#include "armul/baselines.hpp"

#include "armul/linalg.hpp"
#include "armul/rng.hpp"
#include "armul/solver.hpp"
#include "cluster_util.hpp"

#include <cmath>
#include <limits>

namespace armul {

namespace {

std::vector<const TaskLoss*> pointers(std::span<const TaskLoss> losses) {
  std::vector<const TaskLoss*> out;
  out.reserve(losses.size());
  for (const auto& l : losses) out.push_back(&l);
  return out;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Vec minimize_weighted(std::span<const TaskLoss* const> losses, std::span<const double> weights, const Vec& start,
                      const BaselineConfig& config) {
  if (losses.empty()) return start;
  const Eigen::Index d = losses.front()->dim();
  double wsum = 0.0;
  for (double w : weights) wsum += w;

  bool quadratic = true;
  for (const auto* l : losses) quadratic = quadratic && l->is_quadratic();

  if (quadratic) {
    Mat a = Mat::Zero(d, d);
    Vec b = Vec::Zero(d);
    for (std::size_t j = 0; j < losses.size(); ++j) {
      a += (weights[j] / wsum) * losses[j]->quad_a();
      b += (weights[j] / wsum) * losses[j]->quad_b();
    }
    Eigen::LLT<Mat> llt(a);
    if (llt.info() == Eigen::Success) {
      const Vec diag = llt.matrixLLT().diagonal();
      if (diag.minCoeff() > 1e-7 * diag.maxCoeff()) {
        Vec sol = llt.solve(b);
        if (sol.allFinite()) return sol;
      }
    }
    if (config.exact) throw Error(ErrorCode::SingularDesign, "normal equations are singular");
  }

  double lip = 0.0;
  for (std::size_t j = 0; j < losses.size(); ++j) lip += weights[j] / wsum * losses[j]->lipschitz();
  if (lip <= 0.0) return start;
  const double step = 1.0 / lip;
  Vec beta = start;
  for (int it = 0; it < config.max_iters; ++it) {
    Vec g = Vec::Zero(d);
    for (std::size_t j = 0; j < losses.size(); ++j) g += (weights[j] / wsum) * losses[j]->grad(beta);
    if (g.norm() <= config.tol) break;
    beta -= step * g;
  }
  return beta;
}

Vec minimize_task(const TaskLoss& loss, const Vec& start, const BaselineConfig& config) {
  const TaskLoss* p = &loss;
  const double w = 1.0;
  return minimize_weighted(std::span<const TaskLoss* const>(&p, 1), std::span<const double>(&w, 1), start, config);
}

ParamMatrix fit_single_task(std::span<const TaskLoss> losses, const BaselineConfig& config) {
  if (losses.empty()) throw Error(ErrorCode::TooFewTasks, "no tasks");
  const Eigen::Index d = losses.front().dim();
  ParamMatrix theta(d, static_cast<Eigen::Index>(losses.size()));
  for (std::size_t j = 0; j < losses.size(); ++j) {
    theta.col(static_cast<Eigen::Index>(j)) = minimize_task(losses[j], Vec::Zero(d), config);
  }
  return theta;
}

ParamMatrix fit_single_task(const TaskCollection& tasks, LossModel loss, const BaselineConfig& config) {
  validate_collection(tasks, loss);
  const auto losses = make_task_losses(loss, tasks);
  return fit_single_task(losses, config);
}

Vec fit_pooled(std::span<const TaskLoss> losses, const Vec& weights, const BaselineConfig& config) {
  if (losses.empty()) throw Error(ErrorCode::TooFewTasks, "no tasks");
  const auto ptrs = pointers(losses);
  const auto w = to_std(weights);
  return minimize_weighted(ptrs, w, Vec::Zero(losses.front().dim()), config);
}

Vec fit_pooled(const TaskCollection& tasks, LossModel loss, const Vec& weights, const BaselineConfig& config) {
  validate_collection(tasks, loss);
  const auto losses = make_task_losses(loss, tasks);
  return fit_pooled(losses, weights, config);
}

double clustered_objective(std::span<const TaskLoss> losses, const Vec& weights, const ClusterArtifact& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < losses.size(); ++j) {
    s += weights[static_cast<Eigen::Index>(j)] * losses[j].value(c.centers.col(c.labels[j]));
  }
  return s;
}

namespace {

// Refits every non-empty cluster center to its pooled minimizer.
void refit_centers(std::span<const TaskLoss> losses, const Vec& weights, ClusterArtifact& c,
                   const BaselineConfig& config) {
  const int K = static_cast<int>(c.centers.cols());
  for (int k = 0; k < K; ++k) {
    std::vector<const TaskLoss*> members;
    std::vector<double> w;
    for (std::size_t j = 0; j < losses.size(); ++j) {
      if (c.labels[j] == k) {
        members.push_back(&losses[j]);
        w.push_back(weights[static_cast<Eigen::Index>(j)]);
      }
    }
    if (!members.empty()) c.centers.col(k) = minimize_weighted(members, w, c.centers.col(k), config);
  }
}

ClusterArtifact alternate_clusters(std::span<const TaskLoss> losses, const Vec& weights, Mat centers,
                                   const ParamMatrix& single_task, const Vec& best_loss,
                                   const BaselineConfig& config) {
  const int K = static_cast<int>(centers.cols());
  ClusterArtifact c{std::move(centers), {}};
  std::vector<int> previous;
  for (int round = 0; round < config.max_rounds; ++round) {
    Mat costs = detail::assignment_costs(losses, c.centers, nullptr);
    c.labels = detail::argmin_labels(costs);
    // Re-seed empty clusters at the worst-fitting task.
    for (;;) {
      const auto sizes = detail::cluster_sizes(c.labels, K);
      int empty = -1;
      for (int k = 0; k < K; ++k) {
        if (sizes[static_cast<std::size_t>(k)] == 0) {
          empty = k;
          break;
        }
      }
      if (empty < 0) break;
      const int j = detail::worst_fit_task(costs, c.labels, best_loss, K);
      if (j < 0) break;
      c.centers.col(empty) = single_task.col(j);
      c.labels[static_cast<std::size_t>(j)] = empty;
      for (Eigen::Index t = 0; t < costs.rows(); ++t) {
        costs(t, empty) = losses[static_cast<std::size_t>(t)].value(c.centers.col(empty));
      }
    }
    if (c.labels == previous) break;
    refit_centers(losses, weights, c, config);
    previous = c.labels;
  }
  return c;
}

}  // namespace

ClusterArtifact fit_clustered_mtl(std::span<const TaskLoss> losses, int K, const Vec& weights,
                                  const BaselineConfig& config) {
  const std::size_t m = losses.size();
  if (K < 1 || static_cast<std::size_t>(K) > m) throw Error(ErrorCode::InvalidArgument, "clustered MTL requires 1 <= K <= m");
  const ParamMatrix stl = fit_single_task(losses, config);
  Vec best_loss(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) best_loss[static_cast<Eigen::Index>(j)] = losses[j].value(stl.col(static_cast<Eigen::Index>(j)));

  ClusterArtifact best;
  double best_obj = std::numeric_limits<double>::infinity();
  const int restarts = std::max(1, config.restarts);
  for (int r = 0; r < restarts; ++r) {
    Mat centers;
    if (r == 0) {
      centers = fit_pooled(losses, weights, config).replicate(1, K);
    } else {
      auto rng = make_stream(config.seed, static_cast<std::uint64_t>(r));
      centers = detail::kmeanspp_seeds(stl, K, rng);
    }
    ClusterArtifact c = alternate_clusters(losses, weights, std::move(centers), stl, best_loss, config);
    const double obj = clustered_objective(losses, weights, c);
    if (obj < best_obj) {
      best_obj = obj;
      best = std::move(c);
    }
  }
  return best;
}

ClusterArtifact fit_clustered_mtl(const TaskCollection& tasks, LossModel loss, int K, const Vec& weights,
                                  const BaselineConfig& config) {
  validate_collection(tasks, loss);
  const auto losses = make_task_losses(loss, tasks);
  return fit_clustered_mtl(losses, K, weights, config);
}

double lowrank_objective(std::span<const TaskLoss> losses, const Vec& weights, const SubspaceArtifact& s) {
  double total = 0.0;
  for (std::size_t j = 0; j < losses.size(); ++j) {
    total += weights[static_cast<Eigen::Index>(j)] * losses[j].value(s.basis * s.coeffs.col(static_cast<Eigen::Index>(j)));
  }
  return total;
}

SubspaceArtifact fit_lowrank_mtl(std::span<const TaskLoss> losses, int K, const Vec& weights,
                                 const BaselineConfig& config) {
  const std::size_t m = losses.size();
  if (m == 0) throw Error(ErrorCode::TooFewTasks, "no tasks");
  const Eigen::Index d = losses.front().dim();
  if (K < 1 || K > d || static_cast<std::size_t>(K) > m) {
    throw Error(ErrorCode::InvalidArgument, "low-rank MTL requires 1 <= K <= min(d, m)");
  }
  const ParamMatrix stl = fit_single_task(losses, config);
  SolverState state;
  state.V = ParamMatrix::Zero(d, static_cast<Eigen::Index>(m));
  Mat basis = linalg::top_left_singular_vectors(stl, K);
  state.gamma = SubspaceArtifact{basis, basis.transpose() * stl};

  const auto penalty = PenaltyConfig::explicit_values(weights, Vec::Zero(static_cast<Eigen::Index>(m)));
  double prev = lowrank_objective(losses, weights, std::get<SubspaceArtifact>(state.gamma));
  for (int round = 0; round < config.lowrank_rounds; ++round) {
    state.gamma = gamma_step_lowrank(state, losses, penalty, std::nullopt, 1);
    const double obj = lowrank_objective(losses, weights, std::get<SubspaceArtifact>(state.gamma));
    const bool done = std::abs(prev - obj) <= config.lowrank_tol * std::max(std::abs(prev), 1e-300);
    prev = obj;
    if (done) break;
  }
  auto s = std::get<SubspaceArtifact>(std::move(state.gamma));
  Mat q, r;
  linalg::thin_qr(s.basis, q, r);
  return SubspaceArtifact{q, r * s.coeffs};
}

SubspaceArtifact fit_lowrank_mtl(const TaskCollection& tasks, LossModel loss, int K, const Vec& weights,
                                 const BaselineConfig& config) {
  validate_collection(tasks, loss);
  const auto losses = make_task_losses(loss, tasks);
  return fit_lowrank_mtl(losses, K, weights, config);
}

}  // namespace armul
