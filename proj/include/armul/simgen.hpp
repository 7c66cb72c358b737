#pragma once

#include "armul/core.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace armul {

enum class ScenarioCase { Vanilla, Clustered, LowRank };

const char* to_string(ScenarioCase c);
ScenarioCase parse_scenario_case(const std::string& name);

struct ScenarioMeta {
  ScenarioCase scenario = ScenarioCase::Vanilla;
  double epsilon = 0.0;
  double delta = 0.0;
  int m = 30;
  int n = 200;
  int d = 50;
  int K = 1;
  std::uint64_t seed = 0;
};

struct Scenario {
  TaskCollection tasks;
  ParamMatrix theta_star;
  std::vector<int> inliers;     // sorted, 0-based
  std::vector<int> true_labels; // clustered case only, 0-based
  ScenarioMeta meta;
};

/// Uniform draw on the sphere of radius r in R^d.
Vec sample_uniform_sphere(int d, double r, std::mt19937_64& rng);

/// ceil(epsilon m), the number of outlier tasks.
int outlier_count(double epsilon, int m);

struct ScenarioParams {
  int m = 30;
  int n = 200;
  int d = 50;
  int K = 3;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// theta*_j = 2 e_1 + delta_j.
Scenario gen_vanilla_scenario(const ScenarioParams& p);
/// theta*_j = 2 e_{z_j} + delta_j, z_j = ((j + 1) mod K) for 0-based j.
Scenario gen_clustered_scenario(const ScenarioParams& p);
/// theta*_j = (e_1 .. e_K) z_j + delta_j, z_j ~ N(0, I_K).
Scenario gen_lowrank_scenario(const ScenarioParams& p);

Scenario gen_scenario(ScenarioCase c, const ScenarioParams& p);

/// Regression samples y = x^T theta + N(0, 1), x ~ N(0, I_d), one task per
/// column of theta, each task on its own stream.
TaskCollection sample_regression_tasks(const ParamMatrix& theta, int n, std::uint64_t seed);

}  // namespace armul
