#include "armul/simgen.hpp"

#include "armul/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace armul {

namespace {

enum Stream : std::uint64_t { kTargets = 1, kOutliers = 2, kTaskBase = 1000 };

void check_params(const ScenarioParams& p, bool needs_k) {
  if (!(p.epsilon >= 0.0 && p.epsilon < 1.0)) throw Error(ErrorCode::BadFraction, "epsilon must lie in [0, 1)");
  if (!(p.delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be non-negative");
  if (p.m < 1 || p.n < 1 || p.d < 1) throw Error(ErrorCode::InvalidArgument, "m, n and d must be positive");
  if (needs_k && (p.K < 1 || p.K > p.d)) throw Error(ErrorCode::InvalidArgument, "K must lie in [1, d]");
}

// Replaces ceil(eps m) columns, drawn without replacement, by points on the
// radius-2 sphere; returns the inlier indices.
std::vector<int> plant_outliers(ParamMatrix& theta, double epsilon, std::uint64_t seed) {
  const int m = static_cast<int>(theta.cols());
  const int d = static_cast<int>(theta.rows());
  auto rng = make_stream(seed, kOutliers);
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates with an explicit draw so results do not depend on
  // the standard library's shuffle.
  const int count = outlier_count(epsilon, m);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, m - 1);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<char> is_out(static_cast<std::size_t>(m), 0);
  std::vector<int> outs(order.begin(), order.begin() + count);
  std::sort(outs.begin(), outs.end());
  for (int j : outs) {
    is_out[static_cast<std::size_t>(j)] = 1;
    theta.col(j) = sample_uniform_sphere(d, 2.0, rng);
  }
  std::vector<int> inliers;
  for (int j = 0; j < m; ++j) {
    if (!is_out[static_cast<std::size_t>(j)]) inliers.push_back(j);
  }
  return inliers;
}

Scenario finish(ParamMatrix theta, const ScenarioParams& p, ScenarioCase c, int K) {
  Scenario s;
  s.inliers = plant_outliers(theta, p.epsilon, p.seed);
  s.tasks = sample_regression_tasks(theta, p.n, p.seed);
  s.theta_star = std::move(theta);
  s.meta = ScenarioMeta{c, p.epsilon, p.delta, p.m, p.n, p.d, K, p.seed};
  return s;
}

}  // namespace

const char* to_string(ScenarioCase c) {
  switch (c) {
    case ScenarioCase::Vanilla: return "vanilla";
    case ScenarioCase::Clustered: return "clustered";
    case ScenarioCase::LowRank: return "lowrank";
  }
  return "?";
}

ScenarioCase parse_scenario_case(const std::string& name) {
  if (name == "vanilla") return ScenarioCase::Vanilla;
  if (name == "clustered") return ScenarioCase::Clustered;
  if (name == "lowrank" || name == "low-rank") return ScenarioCase::LowRank;
  throw Error(ErrorCode::ConfigError, "unknown case '" + name + "'");
}

int outlier_count(double epsilon, int m) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorCode::BadFraction, "epsilon must lie in [0, 1)");
  // Guard against 0.2 * 30 = 6.000000000000001.
  return static_cast<int>(std::ceil(epsilon * m - 1e-9));
}

Vec sample_uniform_sphere(int d, double r, std::mt19937_64& rng) {
  if (r < 0.0) throw Error(ErrorCode::InvalidArgument, "radius must be non-negative");
  if (r == 0.0) return Vec::Zero(d);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(d);
  double nv = 0.0;
  while (nv == 0.0) {
    for (int i = 0; i < d; ++i) v[i] = gauss(rng);
    nv = v.norm();
  }
  return v * (r / nv);
}

TaskCollection sample_regression_tasks(const ParamMatrix& theta, int n, std::uint64_t seed) {
  std::vector<TaskDataset> tasks;
  tasks.reserve(static_cast<std::size_t>(theta.cols()));
  const Eigen::Index d = theta.rows();
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    auto rng = make_stream(seed, kTaskBase + static_cast<std::uint64_t>(j));
    std::normal_distribution<double> gauss(0.0, 1.0);
    TaskDataset t;
    t.task_id = static_cast<int>(j);
    t.features.resize(n, d);
    t.responses.resize(n);
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) t.features(i, c) = gauss(rng);
    }
    for (int i = 0; i < n; ++i) t.responses[i] = t.features.row(i).dot(theta.col(j)) + gauss(rng);
    tasks.push_back(std::move(t));
  }
  return make_collection(std::move(tasks));
}

Scenario gen_vanilla_scenario(const ScenarioParams& p) {
  check_params(p, false);
  auto rng = make_stream(p.seed, kTargets);
  ParamMatrix theta(p.d, p.m);
  for (int j = 0; j < p.m; ++j) {
    theta.col(j) = 2.0 * Vec::Unit(p.d, 0) + sample_uniform_sphere(p.d, p.delta, rng);
  }
  return finish(std::move(theta), p, ScenarioCase::Vanilla, 1);
}

Scenario gen_clustered_scenario(const ScenarioParams& p) {
  check_params(p, true);
  auto rng = make_stream(p.seed, kTargets);
  ParamMatrix theta(p.d, p.m);
  std::vector<int> labels(static_cast<std::size_t>(p.m));
  for (int j = 0; j < p.m; ++j) {
    // 1-based task index t = j + 1 gets label (t mod K) + 1, i.e. 0-based (j + 1) mod K.
    const int z = (j + 1) % p.K;
    labels[static_cast<std::size_t>(j)] = z;
    theta.col(j) = 2.0 * Vec::Unit(p.d, z) + sample_uniform_sphere(p.d, p.delta, rng);
  }
  Scenario s = finish(std::move(theta), p, ScenarioCase::Clustered, p.K);
  s.true_labels = std::move(labels);
  return s;
}

Scenario gen_lowrank_scenario(const ScenarioParams& p) {
  check_params(p, true);
  auto rng = make_stream(p.seed, kTargets);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParamMatrix theta = ParamMatrix::Zero(p.d, p.m);
  for (int j = 0; j < p.m; ++j) {
    for (int k = 0; k < p.K; ++k) theta(k, j) = gauss(rng);
    theta.col(j) += sample_uniform_sphere(p.d, p.delta, rng);
  }
  return finish(std::move(theta), p, ScenarioCase::LowRank, p.K);
}

Scenario gen_scenario(ScenarioCase c, const ScenarioParams& p) {
  switch (c) {
    case ScenarioCase::Vanilla: return gen_vanilla_scenario(p);
    case ScenarioCase::Clustered: return gen_clustered_scenario(p);
    case ScenarioCase::LowRank: return gen_lowrank_scenario(p);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario case");
}

}  // namespace armul
