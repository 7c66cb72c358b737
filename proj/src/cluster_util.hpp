#pragma once

#include "armul/core.hpp"
#include "armul/losses.hpp"

#include <random>
#include <span>
#include <vector>

namespace armul::detail {

/// costs(j, k) = f_j(beta_k + v_j); `shifts` may be null (v = 0).
Mat assignment_costs(std::span<const TaskLoss> losses, const Mat& centers, const Mat* shifts);

/// Row-wise argmin, ties to the smallest index.
std::vector<int> argmin_labels(const Mat& costs);

std::vector<int> cluster_sizes(const std::vector<int>& labels, int K);

double assignment_cost(const Mat& costs, const Vec& weights, const std::vector<int>& labels);

/// Greedily moves tasks into clusters holding fewer than `floor` tasks,
/// each move picking the smallest cost increase (ties to the smallest task
/// index) among tasks whose cluster stays at or above the floor.
void repair_cardinality(const Mat& costs, const Vec& weights, std::vector<int>& labels, int K, int floor);

/// ceil(alpha m / K), guarded against representation error.
int cardinality_floor(double alpha, std::size_t m, int K);

/// Task whose current assignment is worst relative to its best achievable
/// loss, among tasks in clusters with at least two members. -1 if none.
int worst_fit_task(const Mat& costs, const std::vector<int>& labels, const Vec& best_loss, int K);

/// Farthest-point seeding on the columns of `points`: the first center is a
/// uniformly drawn column, each next one the column farthest from the
/// centers chosen so far.
Mat farthest_point_seeds(const Mat& points, int K, std::mt19937_64& rng);

/// k-means++ seeding (D^2 sampling) on the columns of `points`.
Mat kmeanspp_seeds(const Mat& points, int K, std::mt19937_64& rng);

/// Weighted Lloyd iterations in Euclidean space; empty clusters are moved to
/// the point farthest from its center. Returns labels.
std::vector<int> lloyd(const Mat& points, const Vec& weights, Mat& centers, int rounds);

}  // namespace armul::detail
