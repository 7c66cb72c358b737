#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace armul {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// d x m matrix whose column j is the parameter vector of task j.
using ParamMatrix = Mat;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  EmptyTask,
  BadLabel,
  NonFinite,
  EmptyCluster,
  SingularDesign,
  TooFewTasks,
  DegenerateS,
  RankDeficientBasis,
  BadFraction,
  TooFewSamples,
  EmptySubset,
  KTooLarge,
  ParseError,
  ConfigError,
  StructureMismatch,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class LossModel { SquaredError, Logistic, GaussianMean };

const char* to_string(LossModel model);
LossModel parse_loss_model(const std::string& name);

struct TaskDataset {
  int task_id = 0;
  Mat features;   // n_j x d
  Vec responses;  // length n_j; +-1 labels for the logistic loss

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct TaskCollection {
  std::vector<TaskDataset> tasks;
  Eigen::Index shared_dim = 0;

  std::size_t size() const { return tasks.size(); }
  const TaskDataset& operator[](std::size_t j) const { return tasks[j]; }
};

/// Builds a collection and infers shared_dim from the first task.
TaskCollection make_collection(std::vector<TaskDataset> tasks);

/// Throws DimensionMismatch, EmptyTask or BadLabel (the latter only when
/// `loss` is Logistic) if a dataset invariant is broken.
void validate_collection(const TaskCollection& tasks,
                         std::optional<LossModel> loss = std::nullopt);

struct VanillaStructure {};
struct ClusteredStructure {
  int K = 2;
  std::optional<double> min_fraction;  // alpha in (0, 1]
};
struct LowRankStructure {
  int K = 1;
};
using StructureSpec = std::variant<VanillaStructure, ClusteredStructure, LowRankStructure>;

std::string structure_name(const StructureSpec& s);
void validate_structure(const StructureSpec& s, std::size_t m, Eigen::Index d);

/// Resolved per-task weights and penalty levels.
struct PenaltyConfig {
  Vec weights;
  Vec lambdas;

  /// lambda_j = lambda / sqrt(n_j), w_j = n_j.
  static PenaltyConfig global(const TaskCollection& tasks, double lambda);
  /// Explicit lambda_j, w_j = n_j.
  static PenaltyConfig per_task(const TaskCollection& tasks, Vec lambdas);
  /// Explicit weights and lambdas.
  static PenaltyConfig explicit_values(Vec weights, Vec lambdas);

  void validate(std::size_t m) const;
};

Vec sample_size_weights(const TaskCollection& tasks);

struct SolverConfig {
  std::optional<double> step_size_v;      // nullopt = Auto (1 / L_j)
  std::optional<double> step_size_gamma;  // nullopt = Auto
  int outer_iters = 500;
  int inner_gamma_iters = 5;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  int lloyd_rounds = 10;
};

struct CenterArtifact {
  Vec beta;
};
struct ClusterArtifact {
  Mat centers;              // d x K
  std::vector<int> labels;  // 0-based, length m
};
struct SubspaceArtifact {
  Mat basis;   // d x K
  Mat coeffs;  // K x m
};
using StructureArtifacts = std::variant<CenterArtifact, ClusterArtifact, SubspaceArtifact>;

/// Gamma = structure prototype, one column per task.
ParamMatrix prototype_matrix(const StructureArtifacts& artifacts, std::size_t m);

struct FitResult {
  ParamMatrix theta_hat;
  StructureArtifacts artifacts;
  std::vector<double> objective_trace;
  bool converged = false;
  double kkt_residual = 0.0;
  int iterations = 0;
};

}  // namespace armul
