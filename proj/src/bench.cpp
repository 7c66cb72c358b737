#include "armul/bench.hpp"

#include "armul/baselines.hpp"
#include "armul/losses.hpp"
#include "armul/metrics.hpp"
#include "armul/pca.hpp"
#include "armul/prox.hpp"
#include "armul/rng.hpp"
#include "armul/solver.hpp"
#include "armul/transfer.hpp"
#include "armul/warmup.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

namespace armul::bench {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, path + ": " + what);
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    config_fail(path + "." + key, "wrong type");
  }
}

std::optional<double> step_field(const json& j, const std::string& key, const std::string& path,
                                 std::optional<double> fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (j[key].is_string()) {
    if (j[key].get<std::string>() == "auto") return std::nullopt;
    config_fail(path + "." + key, "expected a number or \"auto\"");
  }
  if (!j[key].is_number()) config_fail(path + "." + key, "expected a number or \"auto\"");
  const double v = j[key].get<double>();
  if (!(v > 0.0)) config_fail(path + "." + key, "step size must be positive");
  return v;
}

SolverConfig parse_solver(const json& j, const std::string& path, SolverConfig s) {
  if (!j.is_object()) config_fail(path, "expected an object");
  s.outer_iters = get_field(j, "outer_iters", path, s.outer_iters);
  s.inner_gamma_iters = get_field(j, "inner_gamma_iters", path, s.inner_gamma_iters);
  s.tol = get_field(j, "tol", path, s.tol);
  s.seed = get_field(j, "seed", path, s.seed);
  s.lloyd_rounds = get_field(j, "lloyd_rounds", path, s.lloyd_rounds);
  s.step_size_v = step_field(j, "step_size_v", path, s.step_size_v);
  s.step_size_gamma = step_field(j, "step_size_gamma", path, s.step_size_gamma);
  if (s.outer_iters < 1) config_fail(path + ".outer_iters", "must be >= 1");
  if (s.inner_gamma_iters < 1) config_fail(path + ".inner_gamma_iters", "must be >= 1");
  if (!(s.tol >= 0.0)) config_fail(path + ".tol", "must be >= 0");
  return s;
}

CvPlan parse_cv(const json& j, const std::string& path, CvPlan plan) {
  if (!j.is_object()) config_fail(path, "expected an object");
  plan.folds = get_field(j, "folds", path, plan.folds);
  plan.c_grid = get_field(j, "c_grid", path, plan.c_grid);
  if (j.contains("k_grid") && !j["k_grid"].is_null()) plan.k_grid = get_field<std::vector<int>>(j, "k_grid", path, {});
  plan.seed = get_field(j, "seed", path, plan.seed);
  if (j.contains("metric")) {
    const auto m = get_field<std::string>(j, "metric", path, "mse");
    if (m == "mse") {
      plan.metric = CvMetric::Mse;
    } else if (m == "misclassification") {
      plan.metric = CvMetric::Misclassification;
    } else {
      config_fail(path + ".metric", "expected \"mse\" or \"misclassification\"");
    }
  }
  try {
    plan.validate();
  } catch (const Error& e) {
    config_fail(path, e.what());
  }
  return plan;
}

std::vector<double> number_list(const json& j, const std::string& key, const std::string& path,
                                std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_number()) return {j[key].get<double>()};
  return get_field(j, key, path, fallback);
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

ParamMatrix replicate(const Vec& beta, std::size_t m) { return beta.replicate(1, static_cast<Eigen::Index>(m)); }

StructureSpec case_structure(ScenarioCase c, int K) {
  switch (c) {
    case ScenarioCase::Vanilla: return VanillaStructure{};
    case ScenarioCase::Clustered: return ClusteredStructure{K, std::nullopt};
    case ScenarioCase::LowRank: return LowRankStructure{K};
  }
  return VanillaStructure{};
}

// Cross-validates K for a structured baseline; the c grid is irrelevant there.
int select_baseline_K(const std::string& method, const TaskCollection& tasks, const CvPlan& plan,
                      const BaselineConfig& bc) {
  CvPlan p = plan;
  p.c_grid = {0.0};
  PathFitter fitter = [method, bc](const TaskCollection& train, int K, const std::vector<double>&) {
    const auto losses = make_task_losses(LossModel::SquaredError, train);
    const Vec w = sample_size_weights(train);
    ParamMatrix theta;
    if (method == "clustered_mtl") {
      theta = prototype_matrix(fit_clustered_mtl(losses, K, w, bc), train.size());
    } else {
      theta = prototype_matrix(fit_lowrank_mtl(losses, K, w, bc), train.size());
    }
    return std::vector<ParamMatrix>{theta};
  };
  return cross_validate(tasks, p, *plan.k_grid, fitter).best_K;
}

}  // namespace

int resolve_threads(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ARMUL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<int>(n, static_cast<int>(cap));
  }
  return n;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SimulationConfig parse_simulation_config(const json& j) {
  if (!j.is_object()) config_fail("$", "expected an object");
  SimulationConfig c;
  const std::string root = "$";
  if (j.contains("case")) {
    try {
      c.scenario = parse_scenario_case(get_field<std::string>(j, "case", root, "vanilla"));
    } catch (const Error&) {
      config_fail("$.case", "expected vanilla, clustered or lowrank");
    }
  }
  c.epsilons = number_list(j, "epsilon", root, c.epsilons);
  c.deltas = number_list(j, "delta", root, c.deltas);
  c.reps = get_field(j, "reps", root, c.reps);
  c.methods = get_field(j, "methods", root, c.methods);
  c.m = get_field(j, "m", root, c.m);
  c.n = get_field(j, "n", root, c.n);
  c.d = get_field(j, "d", root, c.d);
  c.K = get_field(j, "K", root, c.K);
  c.seed = get_field(j, "seed", root, c.seed);
  c.threads = get_field(j, "threads", root, c.threads);
  c.timing = get_field(j, "timing", root, c.timing);
  if (j.contains("cv")) c.cv = parse_cv(j["cv"], "$.cv", c.cv);
  if (j.contains("solver")) c.solver = parse_solver(j["solver"], "$.solver", c.solver);

  if (c.reps < 1) config_fail("$.reps", "must be >= 1");
  if (c.m < 1 || c.n < 1 || c.d < 1) config_fail("$", "m, n and d must be positive");
  if (c.epsilons.empty()) config_fail("$.epsilon", "must not be empty");
  if (c.deltas.empty()) config_fail("$.delta", "must not be empty");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    if (!(c.epsilons[i] >= 0.0 && c.epsilons[i] < 1.0)) config_fail("$.epsilon[" + std::to_string(i) + "]", "must lie in [0, 1)");
  }
  for (std::size_t i = 0; i < c.deltas.size(); ++i) {
    if (!(c.deltas[i] >= 0.0)) config_fail("$.delta[" + std::to_string(i) + "]", "must be >= 0");
  }
  if (c.scenario != ScenarioCase::Vanilla && (c.K < 1 || c.K > c.d)) config_fail("$.K", "must lie in [1, d]");
  expand_methods(c);
  return c;
}

std::vector<std::string> expand_methods(const SimulationConfig& config) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < config.methods.size(); ++i) {
    std::string m = config.methods[i];
    if (m == "structured") {
      if (config.scenario == ScenarioCase::Vanilla) continue;  // pooling is the vanilla structured fit
      m = config.scenario == ScenarioCase::Clustered ? "clustered_mtl" : "lowrank_mtl";
    }
    if (m != "stl" && m != "pooling" && m != "clustered_mtl" && m != "lowrank_mtl" && m != "armul") {
      config_fail("$.methods[" + std::to_string(i) + "]", "unknown method '" + m + "'");
    }
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) config_fail("$.methods", "no methods to run");
  return out;
}

std::uint64_t scenario_seed(const SimulationConfig& config, std::size_t eps_index, std::size_t delta_index, int rep) {
  std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(config.scenario));
  s = derive_seed(s, eps_index);
  s = derive_seed(s, delta_index);
  return derive_seed(s, static_cast<std::uint64_t>(rep));
}

MethodOutcome run_method(const std::string& method, const TaskCollection& tasks, const SimulationConfig& config,
                         std::uint64_t seed) {
  const auto losses = make_task_losses(LossModel::SquaredError, tasks);
  const Vec w = sample_size_weights(tasks);
  BaselineConfig bc;
  bc.seed = seed;
  MethodOutcome out;
  CvPlan plan = config.cv;
  plan.seed = derive_seed(seed, 7);

  if (method == "stl") {
    out.theta = fit_single_task(losses, bc);
  } else if (method == "pooling") {
    out.theta = replicate(fit_pooled(losses, w, bc), tasks.size());
  } else if (method == "clustered_mtl" || method == "lowrank_mtl") {
    int K = config.K;
    if (plan.k_grid) K = select_baseline_K(method, tasks, plan, bc);
    out.selected_K = K;
    if (method == "clustered_mtl") {
      out.theta = prototype_matrix(fit_clustered_mtl(losses, K, w, bc), tasks.size());
    } else {
      out.theta = prototype_matrix(fit_lowrank_mtl(losses, K, w, bc), tasks.size());
    }
  } else if (method == "armul") {
    SolverConfig solver = config.solver;
    solver.seed = seed;
    int K = config.K;
    CvSelection sel;
    if (config.scenario != ScenarioCase::Vanilla && plan.k_grid) {
      const auto family =
          config.scenario == ScenarioCase::Clustered ? StructureFamily::Clustered : StructureFamily::LowRank;
      sel = select_structure_param(tasks, LossModel::SquaredError, family, plan, solver);
      K = sel.best_K;
    } else {
      sel = select_c(tasks, LossModel::SquaredError, case_structure(config.scenario, K), plan, solver);
    }
    const auto penalty = PenaltyConfig::global(tasks, lambda_from_c(sel.best_c, tasks.shared_dim));
    out.theta = fit_armul(losses, case_structure(config.scenario, K), penalty, solver).theta_hat;
    out.selected_c = sel.best_c;
    if (config.scenario != ScenarioCase::Vanilla) out.selected_K = K;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown method '" + method + "'");
  }
  return out;
}

std::vector<io::ResultRow> run_simulation(const SimulationConfig& config,
                                          const std::function<void(std::size_t, std::size_t)>& progress) {
  const auto methods = expand_methods(config);
  struct Cell {
    std::size_t ei, di;
    int rep;
  };
  std::vector<Cell> cells;
  for (std::size_t ei = 0; ei < config.epsilons.size(); ++ei) {
    for (std::size_t di = 0; di < config.deltas.size(); ++di) {
      for (int rep = 0; rep < config.reps; ++rep) cells.push_back({ei, di, rep});
    }
  }
  std::vector<std::vector<io::ResultRow>> rows(cells.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(cells.size(), resolve_threads(config.threads), [&](std::size_t i) {
    const Cell& cell = cells[i];
    ScenarioParams p;
    p.m = config.m;
    p.n = config.n;
    p.d = config.d;
    p.K = config.K;
    p.epsilon = config.epsilons[cell.ei];
    p.delta = config.deltas[cell.di];
    p.seed = scenario_seed(config, cell.ei, cell.di, cell.rep);
    const Scenario s = gen_scenario(config.scenario, p);
    for (const auto& method : methods) {
      const auto t0 = std::chrono::steady_clock::now();
      const MethodOutcome r = run_method(method, s.tasks, config, p.seed);
      io::ResultRow row;
      row.runtime_ms = config.timing ? elapsed_ms(t0) : 0.0;
      row.scenario = to_string(config.scenario);
      row.method = method;
      row.epsilon = p.epsilon;
      row.delta = p.delta;
      row.rep = cell.rep;
      row.max_err_S = max_l2_error(r.theta, s.theta_star, s.inliers);
      row.max_err_all = max_l2_error(r.theta, s.theta_star);
      row.selected_c = r.selected_c;
      row.selected_K = r.selected_K;
      rows[i].push_back(std::move(row));
    }
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard<std::mutex> lock(progress_mutex);
      progress(finished, cells.size());
    }
  });

  std::vector<io::ResultRow> flat;
  for (auto& r : rows) {
    for (auto& row : r) flat.push_back(std::move(row));
  }
  return flat;
}

// ---------------------------------------------------------------------------

namespace {

CheckOutcome check_closed_form(const OracleCheckConfig& cfg) {
  CheckOutcome out{"closed_form_1d", 0.0, 1e-5, cfg.trials, 0};
  auto rng = make_stream(cfg.seed, 1);
  std::uniform_int_distribution<int> mdist(3, 20);
  std::uniform_int_distribution<int> ndist(1, 5);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_real_distribution<double> ldist(0.1, 3.0);
  for (int t = 0; t < cfg.trials; ++t) {
    const int m = mdist(rng);
    const double lam = ldist(rng);
    std::vector<TaskDataset> tasks;
    Vec means(m);
    for (int j = 0; j < m; ++j) {
      const int n = ndist(rng);
      TaskDataset task;
      task.task_id = j;
      task.features.resize(n, 1);
      const double center = gauss(rng);
      for (int i = 0; i < n; ++i) task.features(i, 0) = center + 0.5 * gauss(rng);
      task.responses = Vec::Zero(n);
      means[j] = task.features.col(0).mean();
      tasks.push_back(std::move(task));
    }
    const auto coll = make_collection(std::move(tasks));
    const auto penalty = PenaltyConfig::explicit_values(Vec::Ones(m), Vec::Constant(m, lam));
    const FitResult fit = fit_armul(coll, LossModel::GaussianMean, VanillaStructure{}, penalty, cfg.solver);
    // f_j = (theta - mean_j)^2 + const, twice the closed form's objective at lam / 2.
    const MeansEstimate oracle = armul_means_closed_form(MeansProblem{means, 1, lam / 2.0});
    const double dev = (fit.theta_hat.row(0).transpose() - oracle.thetas).cwiseAbs().maxCoeff();
    out.max_deviation = std::max(out.max_deviation, dev);
    if (!(dev <= out.threshold)) ++out.failures;
  }
  return out;
}

CheckOutcome check_merge(const OracleCheckConfig& cfg) {
  CheckOutcome out{"merge_dominant_penalty", 0.0, 1e-6, std::max(1, cfg.trials / 5), 0};
  for (int t = 0; t < out.trials; ++t) {
    ScenarioParams p;
    p.m = 6;
    p.n = 40;
    p.d = 3;
    p.delta = 0.3;
    p.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(t));
    const Scenario s = gen_vanilla_scenario(p);
    const auto losses = make_task_losses(LossModel::SquaredError, s.tasks);
    const auto penalty = PenaltyConfig::global(s.tasks, 1e4);
    const FitResult fit = fit_armul(losses, VanillaStructure{}, penalty, cfg.solver);
    const Vec pooled = fit_pooled(losses, penalty.weights);
    double dev = 0.0;
    for (Eigen::Index j = 0; j < fit.theta_hat.cols(); ++j) dev = std::max(dev, (fit.theta_hat.col(j) - pooled).norm());
    out.max_deviation = std::max(out.max_deviation, dev);
    if (!(dev <= out.threshold)) ++out.failures;
  }
  return out;
}

CheckOutcome check_personalization(const OracleCheckConfig& cfg) {
  CheckOutcome out{"personalization_bound", 0.0, 0.0, 0, 0};
  const double lams[] = {0.1, 1.0, 10.0};
  for (int t = 0; t < std::max(1, cfg.trials / 5); ++t) {
    ScenarioParams p;
    p.m = 5;
    p.n = 60;
    p.d = 4;
    p.delta = 0.5;
    p.seed = derive_seed(cfg.seed, 200 + static_cast<std::uint64_t>(t));
    const Scenario s = gen_vanilla_scenario(p);
    const auto losses = make_task_losses(LossModel::SquaredError, s.tasks);
    const ParamMatrix stl = fit_single_task(losses);
    for (double lam : lams) {
      const auto penalty = PenaltyConfig::global(s.tasks, lam);
      const FitResult fit = fit_armul(losses, VanillaStructure{}, penalty, cfg.solver);
      for (std::size_t j = 0; j < s.tasks.size(); ++j) {
        const auto& x = s.tasks[j].features;
        const Mat gram = x.transpose() * x / static_cast<double>(x.rows());
        const double rho = 2.0 * Eigen::SelfAdjointEigenSolver<Mat>(gram).eigenvalues().minCoeff();
        const auto jj = static_cast<Eigen::Index>(j);
        const double bound = 2.0 * penalty.lambdas[jj] / rho;
        const double dist = (fit.theta_hat.col(jj) - stl.col(jj)).norm();
        // Reported deviation is the excess over the bound.
        out.max_deviation = std::max(out.max_deviation, dist - bound);
        ++out.trials;
        if (dist > bound) ++out.failures;
      }
    }
  }
  out.max_deviation = std::max(out.max_deviation, 0.0);
  return out;
}

CheckOutcome check_prox(const OracleCheckConfig& cfg) {
  CheckOutcome out{"prox_identities", 0.0, 1e-9, cfg.trials * 10, 0};
  auto rng = make_stream(cfg.seed, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> cdist(0.0, 3.0);
  for (int t = 0; t < out.trials; ++t) {
    const int d = 1 + t % 5;
    Vec x(d), y(d);
    for (int i = 0; i < d; ++i) {
      x[i] = 2.0 * gauss(rng);
      y[i] = 2.0 * gauss(rng);
    }
    const double c = cdist(rng);
    const Vec px = group_soft_threshold(x, c);
    const Vec py = group_soft_threshold(y, c);
    double dev = std::abs(px.norm() - std::max(x.norm() - c, 0.0));
    // optimality of the prox: x - p is a subgradient of c ||.|| at p
    if (px.norm() > 0.0) {
      dev = std::max(dev, (px - x + c * px / px.norm()).norm());
    } else {
      dev = std::max(dev, std::max(x.norm() - c, 0.0));
    }
    dev = std::max(dev, (px - py).norm() - (x - y).norm());
    out.max_deviation = std::max(out.max_deviation, dev);
    if (!(dev <= out.threshold)) ++out.failures;
  }
  return out;
}

}  // namespace

std::vector<CheckOutcome> oracle_check(const OracleCheckConfig& config) {
  return {check_closed_form(config), check_merge(config), check_personalization(config), check_prox(config)};
}

void print_report(std::ostream& os, const std::vector<CheckOutcome>& checks) {
  for (const auto& c : checks) {
    os << (c.passed() ? "PASS " : "FAIL ") << c.name << " trials=" << c.trials << " failures=" << c.failures
       << " max_deviation=" << io::format_double(c.max_deviation) << " threshold=" << io::format_double(c.threshold)
       << '\n';
  }
}

int exit_code_for(const Error& e) { return e.code() == ErrorCode::ParseError ? kExitIo : kExitUsage; }

// ---------------------------------------------------------------------------

FitOptions parse_fit_options(const json& j, FitOptions o) {
  if (!j.is_object()) config_fail("$", "expected an object");
  const std::string root = "$";
  o.method = get_field(j, "method", root, o.method);
  o.structure = get_field(j, "structure", root, o.structure);
  o.K = get_field(j, "K", root, o.K);
  if (j.contains("min_fraction")) o.min_fraction = get_field<double>(j, "min_fraction", root, 0.0);
  if (j.contains("loss")) {
    try {
      o.loss = parse_loss_model(get_field<std::string>(j, "loss", root, "squared"));
    } catch (const Error&) {
      config_fail("$.loss", "expected squared, logistic or gaussian_mean");
    }
    o.cv = default_plan(o.loss);
  }
  if (j.contains("lambda")) o.lambda = get_field<double>(j, "lambda", root, 0.0);
  if (j.contains("c")) o.c = get_field<double>(j, "c", root, 0.0);
  o.select_c = get_field(j, "select_c", root, o.select_c);
  if (j.contains("cv")) o.cv = parse_cv(j["cv"], "$.cv", o.cv);
  if (j.contains("solver")) o.solver = parse_solver(j["solver"], "$.solver", o.solver);
  if (j.contains("seed")) o.solver.seed = get_field<std::uint64_t>(j, "seed", root, 0);
  if (j.contains("test")) o.test_path = get_field<std::string>(j, "test", root, "");
  if (j.contains("output")) o.output = get_field<std::string>(j, "output", root, "fit.json");
  if (j.contains("metrics_output")) o.metrics_output = get_field<std::string>(j, "metrics_output", root, "");
  return o;
}

namespace {

StructureSpec fit_structure(const FitOptions& o, int K) {
  if (o.structure == "vanilla") return VanillaStructure{};
  if (o.structure == "clustered") return ClusteredStructure{K, o.min_fraction};
  if (o.structure == "lowrank") return LowRankStructure{K};
  config_fail("$.structure", "expected vanilla, clustered or lowrank");
}

double task_metric(LossModel loss, const Vec& theta, const TaskDataset& t) {
  switch (loss) {
    case LossModel::Logistic: return misclassification_rate(theta, t);
    case LossModel::SquaredError: return mean_squared_error(theta, t);
    case LossModel::GaussianMean: return loss_value(loss, theta, t);
  }
  return 0.0;
}

struct FitOutput {
  FitResult result;
  io::FitInfo info;
};

FitOutput run_fit(const TaskCollection& tasks, const FitOptions& o) {
  validate_collection(tasks, o.loss);
  const auto losses = make_task_losses(o.loss, tasks);
  const Vec w = sample_size_weights(tasks);
  BaselineConfig bc;
  bc.seed = o.solver.seed;
  FitOutput out;
  out.info.method = o.method;
  out.info.loss = to_string(o.loss);
  out.info.seed = o.solver.seed;

  if (o.method == "stl") {
    out.result.theta_hat = fit_single_task(losses, bc);
    out.info.has_artifacts = false;
    out.result.converged = true;
  } else if (o.method == "pooling") {
    const Vec beta = fit_pooled(losses, w, bc);
    out.result.artifacts = CenterArtifact{beta};
    out.result.theta_hat = replicate(beta, tasks.size());
    out.result.converged = true;
  } else if (o.method == "clustered_mtl") {
    auto c = fit_clustered_mtl(losses, o.K, w, bc);
    out.result.theta_hat = prototype_matrix(c, tasks.size());
    out.result.artifacts = std::move(c);
    out.result.converged = true;
  } else if (o.method == "lowrank_mtl") {
    auto s = fit_lowrank_mtl(losses, o.K, w, bc);
    out.result.theta_hat = prototype_matrix(s, tasks.size());
    out.result.artifacts = std::move(s);
    out.result.converged = true;
  } else if (o.method == "armul") {
    int K = o.K;
    double lambda = 0.0;
    if (o.select_c) {
      CvPlan plan = o.cv;
      CvSelection sel;
      if (o.structure != "vanilla" && plan.k_grid) {
        sel = select_structure_param(tasks, o.loss,
                                     o.structure == "clustered" ? StructureFamily::Clustered : StructureFamily::LowRank,
                                     plan, o.solver, o.min_fraction);
        K = sel.best_K;
      } else {
        sel = select_c(tasks, o.loss, fit_structure(o, K), plan, o.solver);
      }
      lambda = lambda_from_c(sel.best_c, tasks.shared_dim);
    } else if (o.lambda) {
      lambda = *o.lambda;
    } else if (o.c) {
      lambda = lambda_from_c(*o.c, tasks.shared_dim);
    } else {
      config_fail("$.lambda", "armul needs one of lambda, c or select_c");
    }
    if (!(lambda >= 0.0)) config_fail("$.lambda", "must be >= 0");
    const auto penalty = PenaltyConfig::global(tasks, lambda);
    out.result = fit_armul(losses, fit_structure(o, K), penalty, o.solver);
    out.info.lambda = lambda;
  } else {
    config_fail("$.method", "unknown method '" + o.method + "'");
  }
  return out;
}

}  // namespace

int cmd_fit(const fs::path& dataset, const FitOptions& options, std::ostream& out) {
  const TaskCollection tasks = io::read_dataset_csv(dataset, options.loss);
  const FitOutput fit = run_fit(tasks, options);
  io::write_fit_result(options.output, fit.result, fit.info);
  out << "wrote " << options.output.string() << '\n';
  if (options.test_path) {
    const TaskCollection test = io::read_dataset_csv(*options.test_path, options.loss);
    if (test.size() != tasks.size() || test.shared_dim != tasks.shared_dim) {
      throw Error(ErrorCode::DimensionMismatch, "test set must have the same tasks and width as the training set");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < test.size(); ++j) {
      sum += task_metric(options.loss, fit.result.theta_hat.col(static_cast<Eigen::Index>(j)), test[j]);
    }
    const std::string metric = options.loss == LossModel::Logistic ? "misclassification" : "mse";
    const std::string row = options.method + "," + metric + "," + io::format_double(sum / static_cast<double>(test.size()));
    out << "method,metric,value\n" << row << '\n';
    if (options.metrics_output) {
      const bool fresh = !fs::exists(*options.metrics_output);
      std::ofstream m(*options.metrics_output, std::ios::app);
      if (!m) throw Error(ErrorCode::ParseError, options.metrics_output->string() + ": cannot open file for writing");
      if (fresh) m << "method,metric,value\n";
      m << row << '\n';
    }
  }
  return kExitOk;
}

int cmd_cv(const fs::path& dataset, const CvOptions& options, std::ostream& out) {
  const FitOptions& o = options.fit;
  const TaskCollection tasks = io::read_dataset_csv(dataset, o.loss);
  if (o.method != "armul") config_fail("$.method", "cross-validation is available for armul only");
  CvSelection sel;
  if (o.structure != "vanilla" && o.cv.k_grid) {
    sel = select_structure_param(tasks, o.loss,
                                 o.structure == "clustered" ? StructureFamily::Clustered : StructureFamily::LowRank,
                                 o.cv, o.solver, o.min_fraction);
  } else {
    sel = select_c(tasks, o.loss, fit_structure(o, o.K), o.cv, o.solver);
    if (o.structure != "vanilla") sel.best_K = o.K;
  }
  std::ofstream f(options.output);
  if (!f) throw Error(ErrorCode::ParseError, options.output.string() + ": cannot open file for writing");
  f << "K,c,score\n";
  for (const auto& e : sel.table) f << e.K << ',' << io::format_double(e.c) << ',' << io::format_double(e.score) << '\n';
  out << "best_c=" << io::format_double(sel.best_c);
  if (o.structure != "vanilla") out << " best_K=" << sel.best_K;
  out << '\n';
  return kExitOk;
}

int cmd_simulate(const SimulationConfig& config, const fs::path& output, std::ostream& log) {
  const auto rows = run_simulation(config, [&log](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) log << "cells " << done << "/" << total << '\n';
  });
  io::write_results_csv(output, rows);
  log << "wrote " << rows.size() << " rows to " << output.string() << '\n';
  return kExitOk;
}

int cmd_transfer(const fs::path& summary, const fs::path& dataset, const TransferOptions& options,
                 std::ostream& out) {
  const io::LoadedFit fit = io::read_fit_result(summary);
  if (fit.structure == "none") throw Error(ErrorCode::StructureMismatch, "summary has no structure artifacts");
  if (options.expect_structure && *options.expect_structure != fit.structure) {
    throw Error(ErrorCode::StructureMismatch,
                "summary holds a " + fit.structure + " fit, expected " + *options.expect_structure);
  }
  const TaskCollection tasks = io::read_dataset_csv(dataset, options.loss);
  validate_collection(tasks, options.loss);
  if (tasks.size() != 1) throw Error(ErrorCode::InvalidArgument, "the new dataset must contain exactly one task");
  const TaskDataset& data = tasks[0];

  json j;
  j["structure"] = fit.structure;
  j["lambda"] = options.lambda;
  if (const auto* c = std::get_if<CenterArtifact>(&fit.result.artifacts)) {
    const Vec theta = transfer_vanilla(data, options.loss, c->beta, options.lambda);
    j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  } else if (const auto* k = std::get_if<ClusterArtifact>(&fit.result.artifacts)) {
    const ClusterTransfer t = transfer_clustered(data, options.loss, k->centers, options.lambda);
    j["theta"] = std::vector<double>(t.theta.data(), t.theta.data() + t.theta.size());
    j["z"] = t.z;
    j["objective"] = t.objective;
  } else {
    const auto& s = std::get<SubspaceArtifact>(fit.result.artifacts);
    const SubspaceTransfer t = transfer_lowrank(data, options.loss, s.basis, options.lambda);
    j["theta"] = std::vector<double>(t.theta.data(), t.theta.data() + t.theta.size());
    j["z"] = std::vector<double>(t.z.data(), t.z.data() + t.z.size());
    j["objective"] = t.objective;
  }
  std::ofstream f(options.output);
  if (!f) throw Error(ErrorCode::ParseError, options.output.string() + ": cannot open file for writing");
  f << j.dump(2) << '\n';
  out << "wrote " << options.output.string() << '\n';
  return kExitOk;
}

int cmd_oracle_check(const OracleCheckConfig& config, std::ostream& out) {
  const auto checks = oracle_check(config);
  print_report(out, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckOutcome& c) { return c.passed(); });
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_pca(const fs::path& dataset, const PcaOptions& options, std::ostream& out) {
  const TaskCollection tasks = io::read_dataset_csv(dataset);
  if (options.target_dim < 1 || options.target_dim > tasks.shared_dim) {
    throw Error(ErrorCode::ConfigError, "target_dim: must lie in [1, " + std::to_string(tasks.shared_dim) + "]");
  }
  const TaskCollection reduced = preprocess_pca(tasks, options.target_dim, options.add_intercept, options.standardize);
  io::write_dataset_csv(options.output, reduced);
  out << "wrote " << options.output.string() << " with d=" << reduced.shared_dim << '\n';
  return kExitOk;
}

}  // namespace armul::bench
