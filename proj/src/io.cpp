#include "armul/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace armul::io {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const fs::path& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path.string() + ": " + what);
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, path.string() + ": cannot open file for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& v) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

json matrix_columns(const Mat& m) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    json c = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) c.push_back(m(i, j));
    cols.push_back(std::move(c));
  }
  return cols;
}

Mat columns_matrix(const json& cols, const std::string& origin, const char* field) {
  if (!cols.is_array()) parse_fail(origin, std::string("field '") + field + "' must be an array of columns");
  const auto ncols = static_cast<Eigen::Index>(cols.size());
  const Eigen::Index nrows = ncols == 0 ? 0 : static_cast<Eigen::Index>(cols.front().size());
  Mat m(nrows, ncols);
  for (Eigen::Index j = 0; j < ncols; ++j) {
    const auto& c = cols[static_cast<std::size_t>(j)];
    if (!c.is_array() || static_cast<Eigen::Index>(c.size()) != nrows) {
      parse_fail(origin, std::string("field '") + field + "' has ragged columns");
    }
    for (Eigen::Index i = 0; i < nrows; ++i) m(i, j) = c[static_cast<std::size_t>(i)].get<double>();
  }
  return m;
}

Vec json_vec(const json& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_dataset_csv(const fs::path& path, const TaskCollection& tasks) {
  auto out = open_out(path);
  const Eigen::Index d = tasks.shared_dim;
  out << "task_id,y";
  for (Eigen::Index c = 0; c < d; ++c) out << ",x" << (c + 1);
  out << '\n';
  for (const auto& t : tasks.tasks) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      out << t.task_id << ',' << format_double(t.responses.size() ? t.responses[i] : 0.0);
      for (Eigen::Index c = 0; c < d; ++c) out << ',' << format_double(t.features(i, c));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::ParseError, path.string() + ": write failed");
}

TaskCollection read_dataset_csv(const fs::path& path, std::optional<LossModel> loss) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) parse_fail(path, "empty file");
  const auto header = split_commas(line);
  if (header.size() < 3 || header[0] != "task_id" || header[1] != "y") {
    parse_fail(path, "header must start with task_id,y,x1");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 2);

  std::vector<int> order;
  std::map<int, std::vector<std::vector<double>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (static_cast<Eigen::Index>(fields.size()) != d + 2) {
      parse_fail(path, "line " + std::to_string(lineno) + ": expected " + std::to_string(d + 2) + " fields");
    }
    std::vector<double> vals(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!parse_number(fields[k], vals[k])) {
        parse_fail(path, "line " + std::to_string(lineno) + ": bad number '" + std::string(fields[k]) + "'");
      }
    }
    const int id = static_cast<int>(vals[0]);
    if (static_cast<double>(id) != vals[0]) parse_fail(path, "line " + std::to_string(lineno) + ": task_id must be an integer");
    auto [it, fresh] = rows.try_emplace(id);
    if (fresh) order.push_back(id);
    it->second.push_back(std::move(vals));
  }
  if (order.empty()) parse_fail(path, "no samples");

  std::vector<TaskDataset> tasks;
  for (int id : order) {
    const auto& r = rows[id];
    TaskDataset t;
    t.task_id = id;
    t.features.resize(static_cast<Eigen::Index>(r.size()), d);
    t.responses.resize(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) {
      t.responses[static_cast<Eigen::Index>(i)] = r[i][1];
      for (Eigen::Index c = 0; c < d; ++c) t.features(static_cast<Eigen::Index>(i), c) = r[i][static_cast<std::size_t>(c + 2)];
    }
    tasks.push_back(std::move(t));
  }

  if (loss == LossModel::Logistic) {
    bool zero_one = true;
    for (const auto& t : tasks) {
      for (double y : t.responses) zero_one = zero_one && (y == 0.0 || y == 1.0);
    }
    if (zero_one) {
      for (auto& t : tasks) t.responses = (2.0 * t.responses.array() - 1.0).matrix();
    }
  }
  return make_collection(std::move(tasks));
}

fs::path meta_path_for(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void write_meta(const fs::path& path, const DatasetMeta& meta) {
  json j;
  j["m"] = meta.m;
  j["d"] = meta.d;
  j["loss"] = meta.loss;
  j["seed"] = meta.seed;
  if (meta.theta_star) j["theta_star"] = matrix_columns(*meta.theta_star);
  if (meta.inliers) j["inliers"] = *meta.inliers;
  if (meta.labels) j["labels"] = *meta.labels;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

DatasetMeta read_meta(const fs::path& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    parse_fail(path, e.what());
  }
  DatasetMeta meta;
  try {
    meta.m = j.at("m").get<int>();
    meta.d = j.at("d").get<int>();
    meta.loss = j.value("loss", std::string("squared"));
    meta.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("theta_star")) meta.theta_star = columns_matrix(j["theta_star"], path.string(), "theta_star");
    if (j.contains("inliers")) meta.inliers = j["inliers"].get<std::vector<int>>();
    if (j.contains("labels")) meta.labels = j["labels"].get<std::vector<int>>();
  } catch (const json::exception& e) {
    parse_fail(path, e.what());
  }
  return meta;
}

void write_scenario(const fs::path& csv, const Scenario& s) {
  write_dataset_csv(csv, s.tasks);
  DatasetMeta meta;
  meta.m = static_cast<int>(s.tasks.size());
  meta.d = static_cast<int>(s.tasks.shared_dim);
  meta.loss = "squared";
  meta.theta_star = s.theta_star;
  meta.inliers = s.inliers;
  if (!s.true_labels.empty()) meta.labels = s.true_labels;
  meta.seed = s.meta.seed;
  write_meta(meta_path_for(csv), meta);
}

std::string fit_result_to_json(const FitResult& r, const FitInfo& info) {
  json j;
  j["method"] = info.method;
  j["loss"] = info.loss;
  j["seed"] = info.seed;
  if (info.lambda) j["lambda"] = *info.lambda;
  j["m"] = r.theta_hat.cols();
  j["d"] = r.theta_hat.rows();
  j["theta_hat"] = matrix_columns(r.theta_hat);
  if (!info.has_artifacts) {
    j["structure"] = "none";
  } else if (const auto* c = std::get_if<CenterArtifact>(&r.artifacts)) {
    j["structure"] = "vanilla";
    j["beta"] = vec_json(c->beta);
  } else if (const auto* k = std::get_if<ClusterArtifact>(&r.artifacts)) {
    j["structure"] = "clustered";
    j["centers"] = matrix_columns(k->centers);
    j["labels"] = k->labels;
  } else {
    const auto& s = std::get<SubspaceArtifact>(r.artifacts);
    j["structure"] = "lowrank";
    j["basis"] = matrix_columns(s.basis);
    j["coeffs"] = matrix_columns(s.coeffs);
  }
  j["objective_trace"] = r.objective_trace;
  j["converged"] = r.converged;
  j["kkt_residual"] = r.kkt_residual;
  j["iterations"] = r.iterations;
  return j.dump(2);
}

void write_fit_result(const fs::path& path, const FitResult& r, const FitInfo& info) {
  auto out = open_out(path);
  out << fit_result_to_json(r, info) << '\n';
}

LoadedFit parse_fit_result(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(origin, e.what());
  }
  LoadedFit f;
  try {
    f.info.method = j.value("method", std::string("armul"));
    f.info.loss = j.value("loss", std::string("squared"));
    f.info.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("lambda")) f.info.lambda = j["lambda"].get<double>();
    f.result.theta_hat = columns_matrix(j.at("theta_hat"), origin, "theta_hat");
    f.structure = j.at("structure").get<std::string>();
    f.info.has_artifacts = f.structure != "none";
    if (f.structure == "vanilla") {
      f.result.artifacts = CenterArtifact{json_vec(j.at("beta"))};
    } else if (f.structure == "clustered") {
      f.result.artifacts =
          ClusterArtifact{columns_matrix(j.at("centers"), origin, "centers"), j.at("labels").get<std::vector<int>>()};
    } else if (f.structure == "lowrank") {
      f.result.artifacts = SubspaceArtifact{columns_matrix(j.at("basis"), origin, "basis"),
                                            columns_matrix(j.at("coeffs"), origin, "coeffs")};
    } else if (f.structure != "none") {
      parse_fail(origin, "unknown structure '" + f.structure + "'");
    }
    f.result.objective_trace = j.value("objective_trace", std::vector<double>{});
    f.result.converged = j.value("converged", false);
    f.result.kkt_residual = j.value("kkt_residual", 0.0);
    f.result.iterations = j.value("iterations", 0);
  } catch (const json::exception& e) {
    parse_fail(origin, e.what());
  }
  return f;
}

LoadedFit read_fit_result(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_fit_result(ss.str(), path.string());
}

std::string format_result_row(const ResultRow& row) {
  std::ostringstream os;
  os << row.scenario << ',' << row.method << ',' << format_double(row.epsilon) << ',' << format_double(row.delta)
     << ',' << row.rep << ',' << format_double(row.max_err_S) << ',' << format_double(row.max_err_all) << ','
     << format_double(row.runtime_ms) << ',';
  if (row.selected_c) os << format_double(*row.selected_c);
  os << ',';
  if (row.selected_K) os << *row.selected_K;
  return os.str();
}

void write_results_csv(const fs::path& path, const std::vector<ResultRow>& rows) {
  auto out = open_out(path);
  out << kResultsHeader << '\n';
  for (const auto& r : rows) out << format_result_row(r) << '\n';
  if (!out) throw Error(ErrorCode::ParseError, path.string() + ": write failed");
}

Mat read_matrix_csv(const fs::path& path, bool skip_header) {
  auto in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 0;
  if (skip_header && std::getline(in, line)) ++lineno;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    std::vector<double> vals(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!parse_number(fields[k], vals[k])) {
        parse_fail(path, "line " + std::to_string(lineno) + ": bad number '" + std::string(fields[k]) + "'");
      }
    }
    if (!rows.empty() && vals.size() != rows.front().size()) {
      parse_fail(path, "line " + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) parse_fail(path, "no rows");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

void write_matrix_csv(const fs::path& path, const Mat& m, const std::vector<std::string>& header) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(i, c));
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::ParseError, path.string() + ": write failed");
}

}  // namespace armul::io
