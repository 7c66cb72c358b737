#include "armul/io.hpp"
#include "armul/simgen.hpp"
#include "armul/solver.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "scratch_dir.hpp"

#include <doctest.h>

using namespace armul;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an armul::Error");
  return ErrorCode::InvalidArgument;
}

void check_same(const TaskCollection& a, const TaskCollection& b) {
  REQUIRE(a.size() == b.size());
  CHECK(a.shared_dim == b.shared_dim);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].task_id == b[j].task_id);
    CHECK(a[j].features == b[j].features);
    CHECK(a[j].responses == b[j].responses);
  }
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("dataset round trip is bit exact") {
    ScratchDir dir("io_roundtrip");
    ScenarioParams p;
    p.m = 5;
    p.n = 7;
    p.d = 4;
    p.K = 2;
    p.epsilon = 0.2;
    p.delta = 0.3;
    p.seed = 5;
    const auto s = gen_clustered_scenario(p);
    io::write_scenario(dir / "data.csv", s);
    check_same(s.tasks, io::read_dataset_csv(dir / "data.csv"));
    const auto meta = io::read_meta(io::meta_path_for(dir / "data.csv"));
    REQUIRE(meta.theta_star);
    CHECK(*meta.theta_star == s.theta_star);
    CHECK(*meta.inliers == s.inliers);
    CHECK(*meta.labels == s.true_labels);
    CHECK(meta.m == 5);
    CHECK(meta.d == 4);
    CHECK(meta.seed == 5);
    CHECK(io::meta_path_for("a/b/data.csv") == std::filesystem::path("a/b/data.meta.json"));
  }

  TEST_CASE("interleaved rows and 0/1 labels") {
    ScratchDir dir("io_labels");
    spit(dir / "d.csv", "task_id,y,x1,x2\n7,1,0.5,1\n3,0,1,2\n7,0,2,3\n3,1,-1,0\n");
    const auto t = io::read_dataset_csv(dir / "d.csv", LossModel::Logistic);
    REQUIRE(t.size() == 2);
    CHECK(t[0].task_id == 7);
    CHECK(t[1].task_id == 3);
    CHECK(t[0].responses[0] == 1.0);
    CHECK(t[0].responses[1] == -1.0);
    CHECK(t[0].features(1, 1) == 3.0);
    const auto raw = io::read_dataset_csv(dir / "d.csv");
    CHECK(raw[1].responses[0] == 0.0);
  }

  TEST_CASE("parse errors name the file") {
    ScratchDir dir("io_errors");
    try {
      io::read_dataset_csv(dir / "missing.csv");
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
    }
    spit(dir / "short.csv", "task_id,y,x1,x2\n0,1,2\n");
    CHECK(code_of([&] { io::read_dataset_csv(dir / "short.csv"); }) == ErrorCode::ParseError);
    spit(dir / "nan.csv", "task_id,y,x1\n0,abc,2\n");
    CHECK(code_of([&] { io::read_dataset_csv(dir / "nan.csv"); }) == ErrorCode::ParseError);
    spit(dir / "header.csv", "id,y,x1\n0,1,2\n");
    CHECK(code_of([&] { io::read_dataset_csv(dir / "header.csv"); }) == ErrorCode::ParseError);
    spit(dir / "bad.json", "{not json");
    CHECK(code_of([&] { io::read_fit_result(dir / "bad.json"); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { io::read_meta(dir / "none.meta.json"); }) == ErrorCode::ParseError);
  }

  TEST_CASE("fit results round trip for every structure") {
    std::mt19937_64 rng(2);
    const auto tasks = fixtures::regression(oracle::gaussian_matrix(3, 6, rng), 30, rng);
    const auto p = PenaltyConfig::global(tasks, 1.0);
    const std::vector<StructureSpec> specs{VanillaStructure{}, ClusteredStructure{2, std::nullopt}, LowRankStructure{2}};
    const std::vector<std::string> names{"vanilla", "clustered", "lowrank"};
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto r = fit_armul(tasks, LossModel::SquaredError, specs[i], p);
      io::FitInfo info;
      info.lambda = 1.0;
      info.seed = 4;
      const auto text = io::fit_result_to_json(r, info);
      const auto back = io::parse_fit_result(text);
      CHECK(back.structure == names[i]);
      CHECK(back.result.theta_hat == r.theta_hat);
      CHECK(back.result.objective_trace == r.objective_trace);
      CHECK(back.result.iterations == r.iterations);
      CHECK(back.result.converged == r.converged);
      CHECK(back.info.seed == 4);
      CHECK(*back.info.lambda == 1.0);
      CHECK(prototype_matrix(back.result.artifacts, 6) == prototype_matrix(r.artifacts, 6));
      CHECK(io::fit_result_to_json(back.result, back.info) == text);
    }
  }

  TEST_CASE("results rows") {
    io::ResultRow row;
    row.scenario = "vanilla";
    row.method = "stl";
    row.epsilon = 0.2;
    row.delta = 0.1;
    row.rep = 3;
    row.max_err_S = 1.5;
    row.max_err_all = 2.0;
    CHECK(io::format_result_row(row) == "vanilla,stl,0.20000000000000001,0.10000000000000001,3,1.5,2,0,,");
    row.selected_c = 0.4;
    row.selected_K = 3;
    CHECK(io::format_result_row(row).substr(io::format_result_row(row).size() - 22) == ",0.40000000000000002,3");
    CHECK(io::format_double(0.1) == "0.10000000000000001");
  }

  TEST_CASE("matrix csv") {
    ScratchDir dir("io_matrix");
    Mat m(2, 3);
    m << 1, 2.5, -3, 1e-300, 0.1, 7;
    io::write_matrix_csv(dir / "m.csv", m, {"a", "b", "c"});
    CHECK(io::read_matrix_csv(dir / "m.csv", true) == m);
  }
}
