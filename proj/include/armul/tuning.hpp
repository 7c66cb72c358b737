#pragma once

#include "armul/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace armul {

enum class CvMetric { Mse, Misclassification };

struct CvPlan {
  int folds = 5;
  std::vector<double> c_grid;
  std::optional<std::vector<int>> k_grid;
  CvMetric metric = CvMetric::Mse;
  std::uint64_t seed = 0;

  void validate() const;
};

/// 0.2, 0.4, ..., 2
std::vector<double> regression_c_grid();
/// 0.05, 0.1, ..., 0.5
std::vector<double> logistic_c_grid();

/// CvPlan with the default grid and metric for `loss`.
CvPlan default_plan(LossModel loss, std::uint64_t seed = 0);

/// fold id of every sample, per task.
using FoldAssignment = std::vector<std::vector<int>>;

/// Per task, a seeded random split into `folds` groups whose sizes differ by
/// at most one. Throws TooFewSamples if some n_j < folds.
FoldAssignment make_folds(const TaskCollection& tasks, int folds, std::uint64_t seed);

struct FoldSplit {
  TaskCollection train;
  TaskCollection test;
};

FoldSplit split_fold(const TaskCollection& tasks, const FoldAssignment& folds, int fold_index);

/// Unweighted average over tasks of the held-out metric of column j on task j.
double heldout_score(const ParamMatrix& theta, const TaskCollection& test, CvMetric metric);

/// lambda = c sqrt(d)
double lambda_from_c(double c, Eigen::Index d);

/// Fits one ARMUL model on the training part of `fold_index` and scores it on
/// the held-out part.
double cv_score(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure, double c,
                const CvPlan& plan, int fold_index, const SolverConfig& solver = {});

struct CvEntry {
  int K = 0;  // 0 when the structure has no size parameter
  double c = 0.0;
  double score = 0.0;
};

struct CvSelection {
  double best_c = 0.0;
  int best_K = 0;
  std::vector<CvEntry> table;  // mean score for every grid cell
};

/// Fits a whole c path on one training collection, one matrix per c in
/// `c_grid` (in order). Implementations may warm start along the path.
using PathFitter = std::function<std::vector<ParamMatrix>(const TaskCollection& train, int K,
                                                          const std::vector<double>& c_grid)>;

/// Mean CV score over folds for every (K, c) cell; best cell by smallest
/// score, ties to the smaller K then the smaller c.
CvSelection cross_validate(const TaskCollection& tasks, const CvPlan& plan, const std::vector<int>& k_values,
                           const PathFitter& fitter);

/// ARMUL path fitter: lambda_j = c sqrt(d) / sqrt(n_j), consecutive c values
/// warm started from the previous fit.
PathFitter armul_path_fitter(LossModel loss, std::function<StructureSpec(int K)> structure,
                             SolverConfig solver = {});

CvSelection select_c(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure,
                     const CvPlan& plan, const SolverConfig& solver = {});

enum class StructureFamily { Clustered, LowRank };

/// Joint grid over K in plan.k_grid and c in plan.c_grid.
CvSelection select_structure_param(const TaskCollection& tasks, LossModel loss, StructureFamily family,
                                   const CvPlan& plan, const SolverConfig& solver = {},
                                   std::optional<double> min_fraction = std::nullopt);

}  // namespace armul
