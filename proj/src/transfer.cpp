#include "armul/transfer.hpp"

#include "armul/prox.hpp"

#include <cmath>
#include <limits>

namespace armul {

namespace {

void check_dims(const TaskLoss& loss, Eigen::Index rows) {
  if (loss.dim() != rows) throw Error(ErrorCode::DimensionMismatch, "summary dimension does not match the new task");
}

bool small_step(const Vec& next, const Vec& cur, double tol) {
  return (next - cur).norm() <= tol * std::max(1.0, cur.norm());
}

}  // namespace

double penalized_objective(const TaskLoss& loss, const Vec& theta, const Vec& center, double lam) {
  return loss.value(theta) + lam * (theta - center).norm();
}

Vec solve_penalized(const TaskLoss& loss, const Vec& center, double lam, const Vec& start,
                    const TransferConfig& config) {
  if (lam < 0.0) throw Error(ErrorCode::InvalidArgument, "lam must be non-negative");
  check_dims(loss, center.size());
  const double eta = 1.0 / loss.lipschitz();
  Vec theta = start;
  for (int it = 0; it < config.max_iters; ++it) {
    const Vec u = theta - eta * loss.grad(theta);
    Vec next = center + group_soft_threshold(u - center, eta * lam);
    if (!next.allFinite()) throw Error(ErrorCode::NonFinite, "transfer iterate diverged");
    const bool done = small_step(next, theta, config.tol);
    theta = std::move(next);
    if (done) break;
  }
  return theta;
}

Vec transfer_vanilla(const TaskDataset& data, LossModel loss, const Vec& beta_hat, double lam,
                     const TransferConfig& config) {
  const TaskLoss f(loss, data);
  return solve_penalized(f, beta_hat, lam, beta_hat, config);
}

ClusterTransfer transfer_clustered(const TaskDataset& data, LossModel loss, const Mat& centers, double lam,
                                   const TransferConfig& config) {
  if (centers.cols() < 1) throw Error(ErrorCode::InvalidArgument, "need at least one center");
  const TaskLoss f(loss, data);
  check_dims(f, centers.rows());
  ClusterTransfer best;
  best.objective = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < centers.cols(); ++k) {
    const Vec c = centers.col(k);
    Vec theta = solve_penalized(f, c, lam, c, config);
    const double obj = penalized_objective(f, theta, c, lam);
    if (obj < best.objective) {
      best.objective = obj;
      best.theta = std::move(theta);
      best.z = static_cast<int>(k);
    }
  }
  return best;
}

SubspaceTransfer transfer_lowrank(const TaskDataset& data, LossModel loss, const Mat& basis, double lam,
                                  const TransferConfig& config) {
  if (lam < 0.0) throw Error(ErrorCode::InvalidArgument, "lam must be non-negative");
  const TaskLoss f(loss, data);
  check_dims(f, basis.rows());
  Eigen::ColPivHouseholderQR<Mat> qr(basis);
  qr.setThreshold(1e-10);
  if (basis.cols() == 0 || qr.rank() < basis.cols()) {
    throw Error(ErrorCode::RankDeficientBasis, "basis does not have full column rank");
  }

  // Each round: gradient step on theta, z by least squares on the result,
  // then the prox step toward B z. This is proximal gradient on
  // f(theta) + lam dist(theta, range B).
  const double eta = 1.0 / f.lipschitz();
  Vec theta = Vec::Zero(basis.rows());
  Vec z = Vec::Zero(basis.cols());
  for (int it = 0; it < config.max_iters; ++it) {
    const Vec u = theta - eta * f.grad(theta);
    z = qr.solve(u);
    const Vec proj = basis * z;
    Vec next = proj + group_soft_threshold(u - proj, eta * lam);
    if (!next.allFinite()) throw Error(ErrorCode::NonFinite, "transfer iterate diverged");
    const bool done = small_step(next, theta, config.tol);
    theta = std::move(next);
    if (done) break;
  }
  z = qr.solve(theta);
  SubspaceTransfer out;
  out.objective = penalized_objective(f, theta, basis * z, lam);
  out.theta = std::move(theta);
  out.z = std::move(z);
  return out;
}

}  // namespace armul
