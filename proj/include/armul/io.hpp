#pragma once

#include "armul/core.hpp"
#include "armul/simgen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace armul::io {

namespace fs = std::filesystem;

/// CSV with header `task_id,y,x1,...,xd`, one sample per row. Rows of a task
/// need not be contiguous; tasks are ordered by first appearance.
void write_dataset_csv(const fs::path& path, const TaskCollection& tasks);

/// Reads a dataset CSV. With `loss` = Logistic, 0/1 labels are mapped to -1/+1.
/// Missing or malformed files throw ParseError naming the path.
TaskCollection read_dataset_csv(const fs::path& path, std::optional<LossModel> loss = std::nullopt);

struct DatasetMeta {
  int m = 0;
  int d = 0;
  std::string loss = "squared";
  std::optional<ParamMatrix> theta_star;
  std::optional<std::vector<int>> inliers;
  std::optional<std::vector<int>> labels;  // true cluster labels, when known
  std::uint64_t seed = 0;
};

/// `data.csv` -> `data.meta.json`
fs::path meta_path_for(const fs::path& csv);

void write_meta(const fs::path& path, const DatasetMeta& meta);
DatasetMeta read_meta(const fs::path& path);

/// Writes the dataset CSV and its metadata next to it.
void write_scenario(const fs::path& csv, const Scenario& s);

struct FitInfo {
  std::string method = "armul";
  std::string loss = "squared";
  std::uint64_t seed = 0;
  std::optional<double> lambda;
  bool has_artifacts = true;  // false for single-task fits
};

std::string fit_result_to_json(const FitResult& r, const FitInfo& info);
void write_fit_result(const fs::path& path, const FitResult& r, const FitInfo& info);

struct LoadedFit {
  FitResult result;
  FitInfo info;
  std::string structure;  // "vanilla" | "clustered" | "lowrank" | "none"
};

LoadedFit read_fit_result(const fs::path& path);
LoadedFit parse_fit_result(const std::string& text, const std::string& origin = "<memory>");

struct ResultRow {
  std::string scenario;
  std::string method;
  double epsilon = 0.0;
  double delta = 0.0;
  int rep = 0;
  double max_err_S = 0.0;
  double max_err_all = 0.0;
  double runtime_ms = 0.0;
  std::optional<double> selected_c;
  std::optional<int> selected_K;
};

inline constexpr const char* kResultsHeader =
    "case,method,epsilon,delta,rep,max_err_S,max_err_all,runtime_ms,selected_c,selected_K";

std::string format_result_row(const ResultRow& row);
void write_results_csv(const fs::path& path, const std::vector<ResultRow>& rows);

/// %.17g
std::string format_double(double v);

/// Plain numeric matrix CSV (no header), one row per line.
Mat read_matrix_csv(const fs::path& path, bool skip_header = false);
void write_matrix_csv(const fs::path& path, const Mat& m, const std::vector<std::string>& header = {});

}  // namespace armul::io
