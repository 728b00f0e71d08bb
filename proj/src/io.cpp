// Copyright 2026 The activeinv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "activeinv/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace activeinv {
namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) fields.push_back(item);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw IoError("bad number '" + s + "' in " + path.string());
  return v;
}

template <typename Row>
void write_row(std::ofstream& out, const Row& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

json vec_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string> trajectory_csv_header(Eigen::Index n, Eigen::Index h,
                                               Eigen::Index m) {
  std::vector<std::string> cols{"path_id", "t"};
  for (Eigen::Index i = 1; i <= n; ++i) cols.push_back("uL_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= h; ++i) cols.push_back("uF_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= m; ++i) cols.push_back("theta" + std::to_string(i));
  cols.insert(cols.end(), {"rho", "criterion", "expected_cost"});
  return cols;
}

void write_trajectories_csv(const std::vector<RunTrajectory>& runs,
                            const std::filesystem::path& path) {
  if (runs.empty() || runs.front().steps.empty())
    throw DomainError("no trajectory steps to write");
  const auto& first = runs.front().steps.front();
  auto out = open_out(path);
  write_row(out, trajectory_csv_header(first.uL.size(), first.uF.size(), first.theta_hat.size()));
  for (const auto& run : runs) {
    for (const auto& s : run.steps) {
      std::vector<std::string> row{std::to_string(run.path_id), std::to_string(s.t)};
      for (Eigen::Index i = 0; i < s.uL.size(); ++i) row.push_back(format_double(s.uL(i)));
      for (Eigen::Index i = 0; i < s.uF.size(); ++i) row.push_back(format_double(s.uF(i)));
      for (Eigen::Index i = 0; i < s.theta_hat.size(); ++i)
        row.push_back(format_double(s.theta_hat[i]));
      row.push_back(format_double(s.rho));
      row.push_back(format_double(s.criterion));
      row.push_back(format_double(s.expected_cost));
      write_row(out, row);
    }
  }
  finish(out, path);
}

std::vector<RunTrajectory> read_trajectories_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file " + path.string());
  const auto header = split(line);
  Eigen::Index n = 0, h = 0, m = 0;
  for (const auto& col : header) {
    if (col.rfind("uL_", 0) == 0) ++n;
    else if (col.rfind("uF_", 0) == 0) ++h;
    else if (col.rfind("theta", 0) == 0) ++m;
  }
  if (header != trajectory_csv_header(n, h, m))
    throw IoError("unexpected trajectory header in " + path.string());

  std::vector<RunTrajectory> runs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw IoError("short row in " + path.string());
    const int path_id = std::stoi(f[0]);
    StepRecord s;
    s.t = std::stoi(f[1]);
    std::size_t k = 2;
    s.uL.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) s.uL(i) = parse_double(f[k++], path);
    s.uF.resize(h);
    for (Eigen::Index i = 0; i < h; ++i) s.uF(i) = parse_double(f[k++], path);
    s.theta_hat.theta.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) s.theta_hat[i] = parse_double(f[k++], path);
    s.rho = parse_double(f[k++], path);
    s.criterion = parse_double(f[k++], path);
    s.expected_cost = parse_double(f[k++], path);
    if (runs.empty() || runs.back().path_id != path_id) {
      runs.emplace_back();
      runs.back().path_id = path_id;
    }
    runs.back().steps.push_back(std::move(s));
  }
  return runs;
}

json bundle_metadata(const ExperimentConfig& ec) {
  return json{{"artifact", "activeinv"},
              {"version", std::string(kArtifactVersion)},
              {"master_seed", ec.master_seed},
              {"config", to_json(ec)}};
}

json to_json(const RunTrajectory& run) {
  json steps = json::array();
  for (const auto& s : run.steps) {
    steps.push_back({{"t", s.t},
                     {"uL", vec_json(s.uL)},
                     {"uF", vec_json(s.uF)},
                     {"theta_hat", vec_json(s.theta_hat.theta)},
                     {"rho", s.rho},
                     {"criterion", s.criterion},
                     {"expected_cost", s.expected_cost}});
  }
  return json{{"path_id", run.path_id},
              {"algorithm", std::string(to_string(run.algorithm))},
              {"criterion", std::string(to_string(run.criterion))},
              {"seed", run.seed},
              {"steps", std::move(steps)}};
}

RunTrajectory trajectory_from_json(const json& j) {
  RunTrajectory run;
  run.path_id = j.at("path_id").get<int>();
  run.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  run.criterion = parse_criterion(j.at("criterion").get<std::string>());
  run.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& s : j.at("steps")) {
    StepRecord r;
    r.t = s.at("t").get<int>();
    r.uL = vec_from(s.at("uL"));
    r.uF = vec_from(s.at("uF"));
    r.theta_hat = ParamVector(vec_from(s.at("theta_hat")));
    r.rho = s.at("rho").get<double>();
    r.criterion = s.at("criterion").get<double>();
    r.expected_cost = s.at("expected_cost").get<double>();
    run.steps.push_back(std::move(r));
  }
  return run;
}

void write_bundle_json(const TrajectoryBundle& bundle, const std::filesystem::path& path) {
  json trajectories = json::array();
  for (const auto& run : bundle.runs) trajectories.push_back(to_json(run));
  auto out = open_out(path);
  out << json{{"metadata", bundle.metadata}, {"trajectories", std::move(trajectories)}}.dump(1)
      << '\n';
  finish(out, path);
}

TrajectoryBundle read_bundle_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    TrajectoryBundle b;
    b.metadata = j.at("metadata");
    for (const auto& t : j.at("trajectories")) b.runs.push_back(trajectory_from_json(t));
    return b;
  } catch (const json::exception& e) {
    throw IoError("invalid trajectory bundle " + path.string() + ": " + e.what());
  }
}

void write_error_series_csv(const ErrorSeries& series, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,min,p25,median,p75\n";
  for (const auto& r : series.rows) {
    write_row(out, std::vector<std::string>{std::to_string(r.t), format_double(r.min),
                                            format_double(r.p25), format_double(r.median),
                                            format_double(r.p75)});
  }
  finish(out, path);
}

void write_bias_csv(const BiasSummary& bias, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "component,sample\n";
  for (std::size_t c = 0; c < bias.components.size(); ++c)
    for (double s : bias.components[c].samples)
      out << "theta" << c + 1 << ',' << format_double(s) << '\n';
  finish(out, path);
}

void write_density_csv(const BiasSummary& bias, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "component,x,density\n";
  for (std::size_t c = 0; c < bias.components.size(); ++c) {
    const auto& comp = bias.components[c];
    for (std::size_t i = 0; i < comp.density_x.size(); ++i)
      out << "theta" << c + 1 << ',' << format_double(comp.density_x[i]) << ','
          << format_double(comp.density_y[i]) << '\n';
  }
  finish(out, path);
}

void write_normality_csv(const std::vector<NormalityReport>& reports,
                         const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "component,qq_correlation,skewness,excess_kurtosis\n";
  for (std::size_t c = 0; c < reports.size(); ++c)
    out << "theta" << c + 1 << ',' << format_double(reports[c].qq_correlation) << ','
        << format_double(reports[c].skewness) << ','
        << format_double(reports[c].excess_kurtosis) << '\n';
  finish(out, path);
}

void write_fisher_map_csv(const std::vector<GridCell>& cells,
                          const std::filesystem::path& path) {
  if (cells.empty()) throw DomainError("empty fisher map");
  auto out = open_out(path);
  const Eigen::Index n = cells.front().u.size();
  for (Eigen::Index i = 1; i <= n; ++i) out << "uL_" << i << ',';
  out << "H\n";
  for (const auto& c : cells) {
    for (Eigen::Index i = 0; i < n; ++i) out << format_double(c.u(i)) << ',';
    out << format_double(c.value) << '\n';
  }
  finish(out, path);
}

}  // namespace activeinv
