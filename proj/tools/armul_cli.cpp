// armul: command-line front end for simulation, fitting, cross-validation,
// transfer, self-checks and PCA preprocessing.

#include "armul/bench.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using armul::Error;
using armul::ErrorCode;
using nlohmann::json;
namespace bench = armul::bench;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open config");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

struct FitFlags {
  std::string config;
  std::string method, structure, loss, test, output, metrics_output;
  int K = 0;
  double min_fraction = 0, lambda = 0, c = 0, tol = 0;
  std::uint64_t seed = 0;
  int outer_iters = 0, folds = 0;
  std::vector<double> c_grid;
  std::vector<int> k_grid;
  bool select_c = false;
  CLI::Option *o_method{}, *o_structure{}, *o_loss{}, *o_test{}, *o_output{}, *o_metrics{}, *o_K{}, *o_alpha{},
      *o_lambda{}, *o_c{}, *o_tol{}, *o_seed{}, *o_outer{}, *o_folds{}, *o_cgrid{}, *o_kgrid{}, *o_select{};

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    o_method = app->add_option("--method", method, "armul | stl | pooling | clustered_mtl | lowrank_mtl");
    o_structure = app->add_option("--structure", structure, "vanilla | clustered | lowrank");
    o_loss = app->add_option("--loss", loss, "squared | logistic | gaussian_mean");
    o_K = app->add_option("-K,--clusters", K, "number of clusters or rank");
    o_alpha = app->add_option("--min-fraction", min_fraction, "cluster cardinality fraction");
    o_lambda = app->add_option("--lambda", lambda, "global penalty level");
    o_c = app->add_option("--c", c, "penalty pre-constant, lambda = c sqrt(d)");
    o_select = app->add_flag("--select-c", select_c, "choose c by cross-validation");
    o_tol = app->add_option("--tol", tol, "relative objective tolerance");
    o_outer = app->add_option("--outer-iters", outer_iters, "maximum outer iterations");
    o_seed = app->add_option("--seed", seed, "random seed");
    o_folds = app->add_option("--folds", folds, "cross-validation folds");
    o_cgrid = app->add_option("--c-grid", c_grid, "cross-validation grid for c");
    o_kgrid = app->add_option("--k-grid", k_grid, "cross-validation grid for K");
    o_test = app->add_option("--test", test, "held-out dataset CSV");
    o_output = app->add_option("-o,--output", output, "output path");
    o_metrics = app->add_option("--metrics-output", metrics_output, "append the metrics row to this CSV");
  }

  bench::FitOptions resolve() const {
    const json j = load_config(config);
    json merged = j;
    if (*o_method) merged["method"] = method;
    if (*o_structure) merged["structure"] = structure;
    if (*o_loss) merged["loss"] = loss;
    if (*o_K) merged["K"] = K;
    if (*o_alpha) merged["min_fraction"] = min_fraction;
    if (*o_lambda) merged["lambda"] = lambda;
    if (*o_c) merged["c"] = c;
    if (*o_select) merged["select_c"] = select_c;
    if (*o_seed) merged["seed"] = seed;
    if (*o_test) merged["test"] = test;
    if (*o_output) merged["output"] = output;
    if (*o_metrics) merged["metrics_output"] = metrics_output;
    if (*o_tol || *o_outer) {
      json& s = merged["solver"];
      if (s.is_null()) s = json::object();
      if (*o_tol) s["tol"] = tol;
      if (*o_outer) s["outer_iters"] = outer_iters;
    }
    if (*o_folds || *o_cgrid || *o_kgrid) {
      json& cv = merged["cv"];
      if (cv.is_null()) cv = json::object();
      if (*o_folds) cv["folds"] = folds;
      if (*o_cgrid) cv["c_grid"] = c_grid;
      if (*o_kgrid) cv["k_grid"] = k_grid;
    }
    // The loss must be known before the cv block takes its defaults.
    bench::FitOptions base;
    if (merged.contains("loss")) {
      base.loss = armul::parse_loss_model(merged["loss"].get<std::string>());
      base.cv = armul::default_plan(base.loss);
    }
    return bench::parse_fit_options(merged, base);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task estimation with adaptive shrinkage toward structured prototypes"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a synthetic benchmark and write a results CSV");
  std::string sim_config, sim_output = "results.csv", sim_case;
  int sim_reps = 0, sim_threads = 0;
  std::uint64_t sim_seed = 0;
  std::vector<double> sim_eps, sim_delta;
  std::vector<std::string> sim_methods;
  bool sim_no_timing = false;
  sim->add_option("--config", sim_config, "JSON config file");
  auto* o_case = sim->add_option("--case", sim_case, "vanilla | clustered | lowrank");
  auto* o_reps = sim->add_option("--reps", sim_reps, "replications per grid point");
  auto* o_sseed = sim->add_option("--seed", sim_seed, "master seed");
  auto* o_threads = sim->add_option("--threads", sim_threads, "worker threads (capped by ARMUL_THREADS)");
  auto* o_eps = sim->add_option("--epsilon", sim_eps, "outlier fractions");
  auto* o_delta = sim->add_option("--delta", sim_delta, "perturbation radii");
  auto* o_methods = sim->add_option("--methods", sim_methods, "methods to run");
  sim->add_flag("--no-timing", sim_no_timing, "write runtime_ms = 0");
  sim->add_option("-o,--output", sim_output, "results CSV");

  // fit / cv
  auto* fit = app.add_subcommand("fit", "fit a method on a dataset CSV and write the fit as JSON");
  std::string fit_data;
  FitFlags fit_flags;
  fit->add_option("dataset", fit_data, "dataset CSV")->required();
  fit_flags.add(fit);

  auto* cv = app.add_subcommand("cv", "cross-validate the penalty (and K) and write the score table");
  std::string cv_data;
  FitFlags cv_flags;
  cv->add_option("dataset", cv_data, "dataset CSV")->required();
  cv_flags.add(cv);

  // transfer
  auto* tr = app.add_subcommand("transfer", "solve a new task against a saved fit");
  std::string tr_summary, tr_data, tr_output = "transfer.json", tr_loss = "squared", tr_structure;
  double tr_lambda = 0.0;
  tr->add_option("summary", tr_summary, "fit JSON written by `fit`")->required();
  tr->add_option("dataset", tr_data, "dataset CSV holding one task")->required();
  tr->add_option("--lambda", tr_lambda, "penalty level")->required();
  tr->add_option("--loss", tr_loss, "squared | logistic | gaussian_mean");
  auto* o_trs = tr->add_option("--structure", tr_structure, "require this structure in the summary");
  tr->add_option("-o,--output", tr_output, "output JSON");

  // oracle-check
  auto* oc = app.add_subcommand("oracle-check", "run the built-in correctness checks");
  bench::OracleCheckConfig oc_config;
  oc->add_option("--trials", oc_config.trials, "randomized trials per check");
  oc->add_option("--seed", oc_config.seed, "seed");
  oc->add_option("--solver-tol", oc_config.solver.tol, "solver tolerance used by the checks");
  oc->add_option("--outer-iters", oc_config.solver.outer_iters, "solver iteration cap used by the checks");

  // pca
  auto* pca = app.add_subcommand("pca", "reduce the features of a dataset CSV by PCA");
  std::string pca_data;
  bench::PcaOptions pca_options;
  pca->add_option("dataset", pca_data, "dataset CSV")->required();
  pca->add_option("--target-dim", pca_options.target_dim, "number of components")->required();
  pca->add_flag("--intercept", pca_options.add_intercept, "append a constant-1 column");
  pca->add_flag("--standardize", pca_options.standardize, "scale every component to unit variance");
  pca->add_option("-o,--output", pca_options.output, "output dataset CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bench::kExitUsage;
  }

  try {
    if (*sim) {
      json j = load_config(sim_config);
      if (*o_case) j["case"] = sim_case;
      if (*o_reps) j["reps"] = sim_reps;
      if (*o_sseed) j["seed"] = sim_seed;
      if (*o_threads) j["threads"] = sim_threads;
      if (*o_eps) j["epsilon"] = sim_eps;
      if (*o_delta) j["delta"] = sim_delta;
      if (*o_methods) j["methods"] = sim_methods;
      if (sim_no_timing) j["timing"] = false;
      return bench::cmd_simulate(bench::parse_simulation_config(j), sim_output, std::cerr);
    }
    if (*fit) return bench::cmd_fit(fit_data, fit_flags.resolve(), std::cout);
    if (*cv) {
      bench::CvOptions o;
      o.fit = cv_flags.resolve();
      o.output = *cv_flags.o_output ? cv_flags.output : "cv.csv";
      return bench::cmd_cv(cv_data, o, std::cout);
    }
    if (*tr) {
      bench::TransferOptions o;
      o.lambda = tr_lambda;
      o.loss = armul::parse_loss_model(tr_loss);
      if (*o_trs) o.expect_structure = tr_structure;
      o.output = tr_output;
      return bench::cmd_transfer(tr_summary, tr_data, o, std::cout);
    }
    if (*oc) return bench::cmd_oracle_check(oc_config, std::cout);
    if (*pca) return bench::cmd_pca(pca_data, pca_options, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bench::exit_code_for(e);
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return bench::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bench::kExitUsage;
  }
  return bench::kExitUsage;
}
