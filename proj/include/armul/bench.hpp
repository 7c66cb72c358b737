#pragma once

#include "armul/core.hpp"
#include "armul/io.hpp"
#include "armul/simgen.hpp"
#include "armul/tuning.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace armul::bench {

namespace fs = std::filesystem;

/// Worker count: `requested` if positive, otherwise hardware concurrency,
/// capped in both cases by ARMUL_THREADS when set.
int resolve_threads(int requested = 0);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

struct SimulationConfig {
  ScenarioCase scenario = ScenarioCase::Vanilla;
  std::vector<double> epsilons{0.0};
  std::vector<double> deltas{0.0};
  int reps = 1;
  /// stl, pooling, clustered_mtl, lowrank_mtl, armul ("structured" expands to
  /// the case's structured baseline).
  std::vector<std::string> methods{"stl", "pooling", "structured", "armul"};
  int m = 30;
  int n = 200;
  int d = 50;
  int K = 3;
  std::uint64_t seed = 0;
  CvPlan cv = default_plan(LossModel::SquaredError);
  SolverConfig solver;
  int threads = 0;
  bool timing = true;  // false writes runtime_ms = 0 for byte-stable output
};

/// Reads a simulate config; errors are ConfigError naming the field path.
SimulationConfig parse_simulation_config(const nlohmann::json& j);

/// Methods after alias expansion, validated against the case.
std::vector<std::string> expand_methods(const SimulationConfig& config);

/// Seed of replication `rep` at grid point (eps_index, delta_index).
std::uint64_t scenario_seed(const SimulationConfig& config, std::size_t eps_index, std::size_t delta_index, int rep);

struct MethodOutcome {
  ParamMatrix theta;
  std::optional<double> selected_c;
  std::optional<int> selected_K;
};

/// Fits one named method on a scenario's tasks.
MethodOutcome run_method(const std::string& method, const TaskCollection& tasks, const SimulationConfig& config,
                         std::uint64_t seed);

/// Rows in (epsilon, delta, rep, method) order; `progress` is called after
/// every finished cell from the worker that finished it.
std::vector<io::ResultRow> run_simulation(const SimulationConfig& config,
                                          const std::function<void(std::size_t done, std::size_t total)>& progress = {});

struct CheckOutcome {
  std::string name;
  double max_deviation = 0.0;
  double threshold = 0.0;
  int trials = 0;
  int failures = 0;
  bool passed() const { return failures == 0; }
};

struct OracleCheckConfig {
  int trials = 50;
  std::uint64_t seed = 0;
  SolverConfig solver{std::nullopt, std::nullopt, 5000, 5, 1e-15, 0, 10};
};

/// 1-D closed-form oracle, merge under a dominant penalty, personalization
/// bound and prox identities.
std::vector<CheckOutcome> oracle_check(const OracleCheckConfig& config = {});

void print_report(std::ostream& os, const std::vector<CheckOutcome>& checks);

// ---------------------------------------------------------------------------
// Commands. Each returns the process exit code.

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Exit code for an exception escaping a command.
int exit_code_for(const Error& e);

struct FitOptions {
  std::string method = "armul";  // armul | stl | pooling | clustered_mtl | lowrank_mtl
  std::string structure = "vanilla";
  int K = 2;
  std::optional<double> min_fraction;
  LossModel loss = LossModel::SquaredError;
  std::optional<double> lambda;  // global lambda; lambda_j = lambda / sqrt(n_j)
  std::optional<double> c;       // lambda = c sqrt(d)
  bool select_c = false;         // choose c by cross-validation
  CvPlan cv = default_plan(LossModel::SquaredError);
  SolverConfig solver;
  std::optional<fs::path> test_path;
  fs::path output = "fit.json";
  std::optional<fs::path> metrics_output;
};

FitOptions parse_fit_options(const nlohmann::json& j, FitOptions base = {});

/// Fits and writes a FitResult document; prints a metrics row when a test set is given.
int cmd_fit(const fs::path& dataset, const FitOptions& options, std::ostream& out);

struct CvOptions {
  FitOptions fit;
  fs::path output = "cv.csv";
};

int cmd_cv(const fs::path& dataset, const CvOptions& options, std::ostream& out);

int cmd_simulate(const SimulationConfig& config, const fs::path& output, std::ostream& log);

struct TransferOptions {
  double lambda = 0.0;
  LossModel loss = LossModel::SquaredError;
  std::optional<std::string> expect_structure;
  fs::path output = "transfer.json";
};

int cmd_transfer(const fs::path& summary, const fs::path& dataset, const TransferOptions& options,
                 std::ostream& out);

int cmd_oracle_check(const OracleCheckConfig& config, std::ostream& out);

struct PcaOptions {
  int target_dim = 100;
  bool add_intercept = false;
  bool standardize = false;
  fs::path output = "reduced.csv";
};

int cmd_pca(const fs::path& dataset, const PcaOptions& options, std::ostream& out);

}  // namespace armul::bench
