#include "armul/tuning.hpp"

#include "armul/metrics.hpp"
#include "armul/rng.hpp"
#include "armul/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace armul {

namespace {

std::vector<double> linear_grid(double step, int count) {
  std::vector<double> g;
  for (int i = 1; i <= count; ++i) g.push_back(step * i);
  return g;
}

TaskDataset take_rows(const TaskDataset& t, const std::vector<Eigen::Index>& rows) {
  TaskDataset out;
  out.task_id = t.task_id;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), t.dim());
  out.responses.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = t.features.row(rows[i]);
    out.responses[static_cast<Eigen::Index>(i)] = t.responses[rows[i]];
  }
  return out;
}

}  // namespace

void CvPlan::validate() const {
  if (folds < 2) throw Error(ErrorCode::ConfigError, "cv.folds must be at least 2");
  if (c_grid.empty()) throw Error(ErrorCode::ConfigError, "cv.c_grid must not be empty");
  for (double c : c_grid) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw Error(ErrorCode::ConfigError, "cv.c_grid entries must be >= 0");
  }
  if (k_grid && k_grid->empty()) throw Error(ErrorCode::ConfigError, "cv.k_grid must not be empty");
}

std::vector<double> regression_c_grid() { return linear_grid(0.2, 10); }
std::vector<double> logistic_c_grid() { return linear_grid(0.05, 10); }

CvPlan default_plan(LossModel loss, std::uint64_t seed) {
  CvPlan plan;
  if (loss == LossModel::Logistic) {
    plan.c_grid = logistic_c_grid();
    plan.metric = CvMetric::Misclassification;
  } else {
    plan.c_grid = regression_c_grid();
    plan.metric = CvMetric::Mse;
  }
  plan.seed = seed;
  return plan;
}

FoldAssignment make_folds(const TaskCollection& tasks, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "folds must be at least 2");
  FoldAssignment out;
  out.reserve(tasks.size());
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    const auto n = static_cast<int>(tasks[j].size());
    if (n < folds) throw Error(ErrorCode::TooFewSamples, "task " + std::to_string(j) + " has fewer samples than folds");
    auto rng = make_stream(seed, j);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::uniform_int_distribution<int> pick(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) fold[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = p % folds;
    out.push_back(std::move(fold));
  }
  return out;
}

FoldSplit split_fold(const TaskCollection& tasks, const FoldAssignment& folds, int fold_index) {
  if (folds.size() != tasks.size()) throw Error(ErrorCode::DimensionMismatch, "fold assignment does not match tasks");
  std::vector<TaskDataset> train, test;
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    std::vector<Eigen::Index> in, out;
    for (std::size_t i = 0; i < folds[j].size(); ++i) {
      (folds[j][i] == fold_index ? out : in).push_back(static_cast<Eigen::Index>(i));
    }
    if (in.empty() || out.empty()) throw Error(ErrorCode::InvalidArgument, "fold leaves a task without samples");
    train.push_back(take_rows(tasks[j], in));
    test.push_back(take_rows(tasks[j], out));
  }
  FoldSplit s;
  s.train = make_collection(std::move(train));
  s.test = make_collection(std::move(test));
  return s;
}

double heldout_score(const ParamMatrix& theta, const TaskCollection& test, CvMetric metric) {
  if (static_cast<std::size_t>(theta.cols()) != test.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one parameter column per task expected");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < test.size(); ++j) {
    const Vec th = theta.col(static_cast<Eigen::Index>(j));
    s += metric == CvMetric::Mse ? mean_squared_error(th, test[j]) : misclassification_rate(th, test[j]);
  }
  return s / static_cast<double>(test.size());
}

double lambda_from_c(double c, Eigen::Index d) { return c * std::sqrt(static_cast<double>(d)); }

double cv_score(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure, double c,
                const CvPlan& plan, int fold_index, const SolverConfig& solver) {
  plan.validate();
  if (fold_index < 0 || fold_index >= plan.folds) throw Error(ErrorCode::InvalidArgument, "fold index out of range");
  const auto folds = make_folds(tasks, plan.folds, plan.seed);
  const auto split = split_fold(tasks, folds, fold_index);
  const auto penalty = PenaltyConfig::global(split.train, lambda_from_c(c, tasks.shared_dim));
  const FitResult fit = fit_armul(split.train, loss, structure, penalty, solver);
  return heldout_score(fit.theta_hat, split.test, plan.metric);
}

CvSelection cross_validate(const TaskCollection& tasks, const CvPlan& plan, const std::vector<int>& k_values,
                           const PathFitter& fitter) {
  plan.validate();
  if (k_values.empty()) throw Error(ErrorCode::ConfigError, "no structure sizes to evaluate");
  std::vector<double> cs = plan.c_grid;
  std::sort(cs.begin(), cs.end());
  std::vector<int> ks = k_values;
  std::sort(ks.begin(), ks.end());

  const auto folds = make_folds(tasks, plan.folds, plan.seed);
  std::vector<FoldSplit> splits;
  splits.reserve(static_cast<std::size_t>(plan.folds));
  for (int f = 0; f < plan.folds; ++f) splits.push_back(split_fold(tasks, folds, f));

  CvSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (int K : ks) {
    std::vector<double> sums(cs.size(), 0.0);
    for (const auto& split : splits) {
      const auto path = fitter(split.train, K, cs);
      if (path.size() != cs.size()) throw Error(ErrorCode::InvalidArgument, "path fitter returned the wrong length");
      for (std::size_t i = 0; i < cs.size(); ++i) sums[i] += heldout_score(path[i], split.test, plan.metric);
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const double mean = sums[i] / plan.folds;
      sel.table.push_back(CvEntry{K, cs[i], mean});
      if (mean < best) {
        best = mean;
        sel.best_c = cs[i];
        sel.best_K = K;
      }
    }
  }
  return sel;
}

PathFitter armul_path_fitter(LossModel loss, std::function<StructureSpec(int K)> structure, SolverConfig solver) {
  return [loss, structure = std::move(structure), solver](const TaskCollection& train, int K,
                                                          const std::vector<double>& c_grid) {
    const auto losses = make_task_losses(loss, train);
    const StructureSpec spec = structure(K);
    std::vector<ParamMatrix> path;
    path.reserve(c_grid.size());
    std::optional<ArmulInit> warm;
    for (double c : c_grid) {
      const auto penalty = PenaltyConfig::global(train, lambda_from_c(c, train.shared_dim));
      FitResult fit = fit_armul(losses, spec, penalty, solver, warm);
      warm = warm_start_from(fit);
      path.push_back(std::move(fit.theta_hat));
    }
    return path;
  };
}

CvSelection select_c(const TaskCollection& tasks, LossModel loss, const StructureSpec& structure,
                     const CvPlan& plan, const SolverConfig& solver) {
  validate_collection(tasks, loss);
  auto fitter = armul_path_fitter(loss, [structure](int) { return structure; }, solver);
  return cross_validate(tasks, plan, {0}, fitter);
}

CvSelection select_structure_param(const TaskCollection& tasks, LossModel loss, StructureFamily family,
                                   const CvPlan& plan, const SolverConfig& solver,
                                   std::optional<double> min_fraction) {
  validate_collection(tasks, loss);
  if (!plan.k_grid) throw Error(ErrorCode::ConfigError, "cv.k_grid is required to select K");
  auto make = [family, min_fraction](int K) -> StructureSpec {
    if (family == StructureFamily::Clustered) return ClusteredStructure{K, min_fraction};
    return LowRankStructure{K};
  };
  return cross_validate(tasks, plan, *plan.k_grid, armul_path_fitter(loss, make, solver));
}

}  // namespace armul
