#include "armul/core.hpp"

#include <cmath>

namespace armul {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTask: return "EmptyTask";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::TooFewTasks: return "TooFewTasks";
    case ErrorCode::DegenerateS: return "DegenerateS";
    case ErrorCode::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorCode::BadFraction: return "BadFraction";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::StructureMismatch: return "StructureMismatch";
  }
  return "Unknown";
}

const char* to_string(LossModel model) {
  switch (model) {
    case LossModel::SquaredError: return "squared";
    case LossModel::Logistic: return "logistic";
    case LossModel::GaussianMean: return "gaussian_mean";
  }
  return "unknown";
}

LossModel parse_loss_model(const std::string& name) {
  if (name == "squared" || name == "squared_error" || name == "linear") return LossModel::SquaredError;
  if (name == "logistic") return LossModel::Logistic;
  if (name == "gaussian_mean" || name == "mean") return LossModel::GaussianMean;
  throw Error(ErrorCode::ConfigError, "unknown loss '" + name + "'");
}

TaskCollection make_collection(std::vector<TaskDataset> tasks) {
  TaskCollection c;
  c.shared_dim = tasks.empty() ? 0 : tasks.front().dim();
  c.tasks = std::move(tasks);
  return c;
}

void validate_collection(const TaskCollection& tasks, std::optional<LossModel> loss) {
  if (tasks.tasks.empty()) throw Error(ErrorCode::TooFewTasks, "collection has no tasks");
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    const auto& t = tasks[j];
    if (t.dim() != tasks.shared_dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "task " + std::to_string(t.task_id) + " has width " + std::to_string(t.dim()) +
                      ", expected " + std::to_string(tasks.shared_dim));
    }
    if (t.size() == 0) throw Error(ErrorCode::EmptyTask, "task " + std::to_string(t.task_id) + " has no samples");
    if (t.responses.size() != t.size()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "task " + std::to_string(t.task_id) + " has mismatched response length");
    }
    if (loss == LossModel::Logistic) {
      for (Eigen::Index i = 0; i < t.responses.size(); ++i) {
        double y = t.responses[i];
        if (y != 1.0 && y != -1.0) {
          throw Error(ErrorCode::BadLabel, "task " + std::to_string(t.task_id) + " has label " + std::to_string(y));
        }
      }
    }
  }
}

std::string structure_name(const StructureSpec& s) {
  switch (s.index()) {
    case 0: return "vanilla";
    case 1: return "clustered";
    default: return "lowrank";
  }
}

void validate_structure(const StructureSpec& s, std::size_t m, Eigen::Index d) {
  if (const auto* c = std::get_if<ClusteredStructure>(&s)) {
    if (c->K < 1 || static_cast<std::size_t>(c->K) > m) {
      throw Error(ErrorCode::InvalidArgument, "clustered structure requires 1 <= K <= m");
    }
    if (c->min_fraction && (*c->min_fraction <= 0.0 || *c->min_fraction > 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "min_fraction must lie in (0, 1]");
    }
  } else if (const auto* l = std::get_if<LowRankStructure>(&s)) {
    if (l->K < 1 || static_cast<std::size_t>(l->K) > m || l->K > d) {
      throw Error(ErrorCode::InvalidArgument, "low-rank structure requires 1 <= K <= min(d, m)");
    }
  }
}

Vec sample_size_weights(const TaskCollection& tasks) {
  Vec w(static_cast<Eigen::Index>(tasks.size()));
  for (std::size_t j = 0; j < tasks.size(); ++j) w[static_cast<Eigen::Index>(j)] = static_cast<double>(tasks[j].size());
  return w;
}

PenaltyConfig PenaltyConfig::global(const TaskCollection& tasks, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  PenaltyConfig p;
  p.weights = sample_size_weights(tasks);
  p.lambdas.resize(p.weights.size());
  for (Eigen::Index j = 0; j < p.weights.size(); ++j) p.lambdas[j] = lambda / std::sqrt(p.weights[j]);
  return p;
}

PenaltyConfig PenaltyConfig::per_task(const TaskCollection& tasks, Vec lambdas) {
  PenaltyConfig p;
  p.weights = sample_size_weights(tasks);
  p.lambdas = std::move(lambdas);
  p.validate(tasks.size());
  return p;
}

PenaltyConfig PenaltyConfig::explicit_values(Vec weights, Vec lambdas) {
  PenaltyConfig p{std::move(weights), std::move(lambdas)};
  p.validate(static_cast<std::size_t>(p.weights.size()));
  return p;
}

void PenaltyConfig::validate(std::size_t m) const {
  if (static_cast<std::size_t>(weights.size()) != m || static_cast<std::size_t>(lambdas.size()) != m) {
    throw Error(ErrorCode::DimensionMismatch, "penalty config must have one weight and one lambda per task");
  }
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (!(weights[j] > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights must be positive");
    if (!(lambdas[j] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambdas must be non-negative");
  }
}

ParamMatrix prototype_matrix(const StructureArtifacts& artifacts, std::size_t m) {
  const auto cols = static_cast<Eigen::Index>(m);
  if (const auto* a = std::get_if<CenterArtifact>(&artifacts)) {
    return a->beta.replicate(1, cols);
  }
  if (const auto* a = std::get_if<ClusterArtifact>(&artifacts)) {
    ParamMatrix g(a->centers.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) g.col(j) = a->centers.col(a->labels[static_cast<std::size_t>(j)]);
    return g;
  }
  const auto& a = std::get<SubspaceArtifact>(artifacts);
  return a.basis * a.coeffs;
}

}  // namespace armul
