#include "cluster_util.hpp"

#include <cmath>
#include <limits>

namespace armul::detail {

Mat assignment_costs(std::span<const TaskLoss> losses, const Mat& centers, const Mat* shifts) {
  const auto m = static_cast<Eigen::Index>(losses.size());
  Mat costs(m, centers.cols());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index k = 0; k < centers.cols(); ++k) {
      if (shifts) {
        costs(j, k) = losses[static_cast<std::size_t>(j)].value(centers.col(k) + shifts->col(j));
      } else {
        costs(j, k) = losses[static_cast<std::size_t>(j)].value(centers.col(k));
      }
    }
  }
  return costs;
}

std::vector<int> argmin_labels(const Mat& costs) {
  std::vector<int> labels(static_cast<std::size_t>(costs.rows()), 0);
  for (Eigen::Index j = 0; j < costs.rows(); ++j) {
    int best = 0;
    for (Eigen::Index k = 1; k < costs.cols(); ++k) {
      if (costs(j, k) < costs(j, best)) best = static_cast<int>(k);
    }
    labels[static_cast<std::size_t>(j)] = best;
  }
  return labels;
}

std::vector<int> cluster_sizes(const std::vector<int>& labels, int K) {
  std::vector<int> sizes(static_cast<std::size_t>(K), 0);
  for (int z : labels) ++sizes[static_cast<std::size_t>(z)];
  return sizes;
}

double assignment_cost(const Mat& costs, const Vec& weights, const std::vector<int>& labels) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < costs.rows(); ++j) s += weights[j] * costs(j, labels[static_cast<std::size_t>(j)]);
  return s;
}

int cardinality_floor(double alpha, std::size_t m, int K) {
  const double raw = alpha * static_cast<double>(m) / K;
  return static_cast<int>(std::ceil(raw - 1e-9));
}

void repair_cardinality(const Mat& costs, const Vec& weights, std::vector<int>& labels, int K, int floor) {
  auto sizes = cluster_sizes(labels, K);
  for (;;) {
    int deficient = -1;
    for (int k = 0; k < K; ++k) {
      if (sizes[static_cast<std::size_t>(k)] < floor) {
        deficient = k;
        break;
      }
    }
    if (deficient < 0) return;
    int best_task = -1;
    double best_increase = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < costs.rows(); ++j) {
      const int from = labels[static_cast<std::size_t>(j)];
      if (from == deficient || sizes[static_cast<std::size_t>(from)] <= floor) continue;
      const double inc = weights[j] * (costs(j, deficient) - costs(j, from));
      if (inc < best_increase) {
        best_increase = inc;
        best_task = static_cast<int>(j);
      }
    }
    if (best_task < 0) return;  // infeasible floor; leave as is
    --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(best_task)])];
    labels[static_cast<std::size_t>(best_task)] = deficient;
    ++sizes[static_cast<std::size_t>(deficient)];
  }
}

int worst_fit_task(const Mat& costs, const std::vector<int>& labels, const Vec& best_loss, int K) {
  const auto sizes = cluster_sizes(labels, K);
  int worst = -1;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < costs.rows(); ++j) {
    const int z = labels[static_cast<std::size_t>(j)];
    if (sizes[static_cast<std::size_t>(z)] < 2) continue;
    const double gap = costs(j, z) - best_loss[j];
    if (gap > worst_gap) {
      worst_gap = gap;
      worst = static_cast<int>(j);
    }
  }
  return worst;
}

namespace {

Vec min_sq_dist(const Mat& points, const Mat& centers, Eigen::Index used) {
  Vec d2 = Vec::Constant(points.cols(), std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index k = 0; k < used; ++k) d2[j] = std::min(d2[j], (points.col(j) - centers.col(k)).squaredNorm());
  }
  return d2;
}

}  // namespace

Mat farthest_point_seeds(const Mat& points, int K, std::mt19937_64& rng) {
  Mat centers(points.rows(), K);
  std::uniform_int_distribution<Eigen::Index> pick(0, points.cols() - 1);
  centers.col(0) = points.col(pick(rng));
  for (int k = 1; k < K; ++k) {
    const Vec d2 = min_sq_dist(points, centers, k);
    Eigen::Index far = 0;
    d2.maxCoeff(&far);
    centers.col(k) = points.col(far);
  }
  return centers;
}

Mat kmeanspp_seeds(const Mat& points, int K, std::mt19937_64& rng) {
  Mat centers(points.rows(), K);
  std::uniform_int_distribution<Eigen::Index> pick(0, points.cols() - 1);
  centers.col(0) = points.col(pick(rng));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 1; k < K; ++k) {
    const Vec d2 = min_sq_dist(points, centers, k);
    const double total = d2.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      double u = unif(rng) * total;
      for (chosen = 0; chosen < d2.size() - 1; ++chosen) {
        u -= d2[chosen];
        if (u < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    centers.col(k) = points.col(chosen);
  }
  return centers;
}

std::vector<int> lloyd(const Mat& points, const Vec& weights, Mat& centers, int rounds) {
  const Eigen::Index m = points.cols();
  const int K = static_cast<int>(centers.cols());
  std::vector<int> labels(static_cast<std::size_t>(m), 0);
  auto assign = [&] {
    for (Eigen::Index j = 0; j < m; ++j) {
      int best = 0;
      double bd = (points.col(j) - centers.col(0)).squaredNorm();
      for (int k = 1; k < K; ++k) {
        const double dk = (points.col(j) - centers.col(k)).squaredNorm();
        if (dk < bd) {
          bd = dk;
          best = k;
        }
      }
      labels[static_cast<std::size_t>(j)] = best;
    }
  };
  assign();
  for (int r = 0; r < rounds; ++r) {
    Mat sums = Mat::Zero(points.rows(), K);
    Vec wsum = Vec::Zero(K);
    for (Eigen::Index j = 0; j < m; ++j) {
      sums.col(labels[static_cast<std::size_t>(j)]) += weights[j] * points.col(j);
      wsum[labels[static_cast<std::size_t>(j)]] += weights[j];
    }
    for (int k = 0; k < K; ++k) {
      if (wsum[k] > 0.0) {
        centers.col(k) = sums.col(k) / wsum[k];
      } else {
        Eigen::Index far = 0;
        double fd = -1.0;
        for (Eigen::Index j = 0; j < m; ++j) {
          const double dj = (points.col(j) - centers.col(labels[static_cast<std::size_t>(j)])).squaredNorm();
          if (dj > fd) {
            fd = dj;
            far = j;
          }
        }
        centers.col(k) = points.col(far);
      }
    }
    const auto previous = labels;
    assign();
    if (labels == previous) break;
  }
  return labels;
}

}  // namespace armul::detail
