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

#include "activeinv/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <initializer_list>
#include <set>
#include <thread>

namespace activeinv {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& section) {
  if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items())
    if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in '" + section + "'");
}

const json& require(const json& j, const char* key, const std::string& section) {
  if (!j.contains(key))
    throw ConfigError("missing key '" + std::string(key) + "' in '" + section + "'");
  return j.at(key);
}

double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError("'" + what + "' must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw ConfigError("'" + what + "' must be an integer");
  return j.get<int>();
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + what + "' must be a nonempty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], what);
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw ConfigError("'" + what + "' must be an array of row arrays");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw ConfigError("'" + what + "' has rows of unequal length");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], what);
  }
  return M;
}

json to_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(M.row(r).transpose())));
  return rows;
}

GameConfig game_from_json(const json& j) {
  check_keys(j, {"QL", "R1L", "R2L", "R1F", "R2F", "lambda", "kappa", "leader_box", "theta_true"},
             "game");
  GameConfig cfg;
  cfg.QL = matrix_from_json(require(j, "QL", "game"), "QL");
  cfg.R1L = matrix_from_json(require(j, "R1L", "game"), "R1L");
  cfg.R2L = matrix_from_json(require(j, "R2L", "game"), "R2L");
  cfg.R1F = matrix_from_json(require(j, "R1F", "game"), "R1F");
  cfg.R2F = j.contains("R2F") ? matrix_from_json(j.at("R2F"), "R2F")
                              : Eigen::MatrixXd::Zero(cfg.QL.rows(), cfg.QL.cols());
  cfg.lambda = number(require(j, "lambda", "game"), "lambda");
  cfg.kappa = j.contains("kappa") ? number(j.at("kappa"), "kappa") : 1e-3;
  const json& box = require(j, "leader_box", "game");
  check_keys(box, {"lower", "upper"}, "leader_box");
  cfg.leader_box.lower = vector_from_json(require(box, "lower", "leader_box"), "leader_box.lower");
  cfg.leader_box.upper = vector_from_json(require(box, "upper", "leader_box"), "leader_box.upper");
  cfg.theta_true = ParamVector(vector_from_json(require(j, "theta_true", "game"), "theta_true"));
  return cfg;
}

template <typename F>
void as_config_error(F&& f) {
  try {
    f();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ExperimentConfig table1_experiment(Algorithm alg) {
  ExperimentConfig ec;
  ec.algorithm = alg;
  const bool second_study = alg == Algorithm::ActiveInverseGame || alg == Algorithm::NoExploration;
  ec.criterion = second_study ? Criterion::E : Criterion::D;
  ec.horizon = second_study ? 100 : 20;
  ec.num_paths = second_study ? 300 : 50;
  return ec;
}

void validate(const ExperimentConfig& ec) {
  validate(ec.game);
  if (!(ec.game.lambda > 0.0)) throw ConfigError("lambda must be positive for simulation");
  if (ec.game.theta_true.size() != ec.game.m())
    throw ConfigError("theta_true must have h(h+1)/2 entries");
  if (!is_feasible(ec.game.theta_true, ec.game.kappa))
    throw ConfigError("theta_true outside the feasible set");
  if (ec.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (ec.num_paths < 1) throw ConfigError("num_paths must be at least 1");
  if (ec.threads < 0) throw ConfigError("threads must be nonnegative");
  if (ec.loop.search.grid_resolution < 2) throw ConfigError("grid_resolution must be at least 2");
  if (ec.loop.search.local_starts < 1) throw ConfigError("local_starts must be at least 1");
  if (ec.loop.search.max_local_iters < 0) throw ConfigError("max_local_iters must be nonnegative");
  if (ec.output.format != "csv" && ec.output.format != "json")
    throw ConfigError("output format must be csv or json");
  as_config_error([&] { validate(ec.rho_schedule); });
  as_config_error([&] { validate(ec.loop.mle, ec.game); });
}

json to_json(const GameConfig& cfg) {
  return json{{"QL", to_json(cfg.QL)},
              {"R1L", to_json(cfg.R1L)},
              {"R2L", to_json(cfg.R2L)},
              {"R1F", to_json(cfg.R1F)},
              {"R2F", to_json(cfg.R2F)},
              {"lambda", cfg.lambda},
              {"kappa", cfg.kappa},
              {"leader_box", {{"lower", to_json(cfg.leader_box.lower)},
                              {"upper", to_json(cfg.leader_box.upper)}}},
              {"theta_true", to_json(cfg.theta_true.theta)}};
}

json to_json(const ExperimentConfig& ec) {
  const auto& mle = ec.loop.mle;
  const auto& search = ec.loop.search;
  return json{
      {"game", to_json(ec.game)},
      {"algorithm", std::string(to_string(ec.algorithm))},
      {"criterion", std::string(to_string(ec.criterion))},
      {"horizon", ec.horizon},
      {"num_paths", ec.num_paths},
      {"master_seed", ec.master_seed},
      {"rho_schedule",
       {{"mu0", ec.rho_schedule.mu0}, {"alpha", ec.rho_schedule.alpha}, {"eta", ec.rho_schedule.eta}}},
      {"mle",
       {{"max_iters", mle.max_iters},
        {"grad_tol", mle.grad_tol},
        {"init_theta", to_json(mle.init_theta.theta)},
        {"initial_step", mle.line_search.initial_step},
        {"shrink", mle.line_search.shrink},
        {"sufficient_increase", mle.line_search.sufficient_increase},
        {"param_bound", mle.param_bound}}},
      {"search",
       {{"grid_resolution", search.grid_resolution},
        {"local_starts", search.local_starts},
        {"max_local_iters", search.max_local_iters}}},
      {"threads", ec.threads},
      {"output", {{"dir", ec.output.dir}, {"format", ec.output.format}}}};
}

ExperimentConfig experiment_from_json(const json& j) {
  check_keys(j,
             {"game", "algorithm", "criterion", "horizon", "num_paths", "master_seed",
              "rho_schedule", "mle", "search", "threads", "output"},
             "config");
  ExperimentConfig ec;
  ec.game = game_from_json(require(j, "game", "config"));

  const json& alg = require(j, "algorithm", "config");
  if (!alg.is_string()) throw ConfigError("'algorithm' must be a string");
  as_config_error([&] { ec.algorithm = parse_algorithm(alg.get<std::string>()); });
  const bool second_study = ec.algorithm == Algorithm::ActiveInverseGame ||
                            ec.algorithm == Algorithm::NoExploration;
  ec.criterion = second_study ? Criterion::E : Criterion::D;
  if (j.contains("criterion")) {
    if (!j.at("criterion").is_string()) throw ConfigError("'criterion' must be a string");
    as_config_error([&] { ec.criterion = parse_criterion(j.at("criterion").get<std::string>()); });
  }
  ec.horizon = integer(require(j, "horizon", "config"), "horizon");
  ec.num_paths = integer(require(j, "num_paths", "config"), "num_paths");
  const json& seed = require(j, "master_seed", "config");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
    throw ConfigError("'master_seed' must be a nonnegative integer");
  ec.master_seed = seed.get<std::uint64_t>();

  if (j.contains("rho_schedule")) {
    const json& r = j.at("rho_schedule");
    check_keys(r, {"mu0", "alpha", "eta"}, "rho_schedule");
    if (r.contains("mu0")) ec.rho_schedule.mu0 = number(r.at("mu0"), "mu0");
    if (r.contains("alpha")) ec.rho_schedule.alpha = number(r.at("alpha"), "alpha");
    if (r.contains("eta")) ec.rho_schedule.eta = number(r.at("eta"), "eta");
  }
  if (j.contains("mle")) {
    const json& m = j.at("mle");
    check_keys(m,
               {"max_iters", "grad_tol", "init_theta", "initial_step", "shrink",
                "sufficient_increase", "param_bound"},
               "mle");
    auto& s = ec.loop.mle;
    if (m.contains("max_iters")) s.max_iters = integer(m.at("max_iters"), "max_iters");
    if (m.contains("grad_tol")) s.grad_tol = number(m.at("grad_tol"), "grad_tol");
    if (m.contains("init_theta"))
      s.init_theta = ParamVector(vector_from_json(m.at("init_theta"), "init_theta"));
    if (m.contains("initial_step"))
      s.line_search.initial_step = number(m.at("initial_step"), "initial_step");
    if (m.contains("shrink")) s.line_search.shrink = number(m.at("shrink"), "shrink");
    if (m.contains("sufficient_increase"))
      s.line_search.sufficient_increase = number(m.at("sufficient_increase"), "sufficient_increase");
    if (m.contains("param_bound")) s.param_bound = number(m.at("param_bound"), "param_bound");
  }
  if (j.contains("search")) {
    const json& s = j.at("search");
    check_keys(s, {"grid_resolution", "local_starts", "max_local_iters"}, "search");
    auto& o = ec.loop.search;
    if (s.contains("grid_resolution")) o.grid_resolution = integer(s.at("grid_resolution"), "grid_resolution");
    if (s.contains("local_starts")) o.local_starts = integer(s.at("local_starts"), "local_starts");
    if (s.contains("max_local_iters")) o.max_local_iters = integer(s.at("max_local_iters"), "max_local_iters");
  }
  if (j.contains("threads")) ec.threads = integer(j.at("threads"), "threads");
  if (j.contains("output")) {
    const json& o = j.at("output");
    check_keys(o, {"dir", "format"}, "output");
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("'output.dir' must be a string");
      ec.output.dir = o.at("dir").get<std::string>();
    }
    if (o.contains("format")) {
      if (!o.at("format").is_string()) throw ConfigError("'output.format' must be a string");
      ec.output.format = o.at("format").get<std::string>();
    }
  }
  validate(ec);
  return ec;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in " + path.string() + ": " + e.what());
  }
  try {
    return experiment_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  }
}

void save_config(const ExperimentConfig& ec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << to_json(ec).dump(2) << '\n';
  if (!out) throw IoError("error writing config file " + path.string());
}

RunTrajectory run_path(const ExperimentConfig& ec, int path_id) {
  RandomStream rng(split_seed(ec.master_seed, static_cast<std::uint64_t>(path_id)));
  RunTrajectory traj;
  switch (ec.algorithm) {
    case Algorithm::ActiveLearning:
      traj = run_algorithm1(ec.game, ec.loop, ec.criterion, ec.horizon, rng);
      break;
    case Algorithm::ActiveInverseGame:
      traj = run_algorithm2(ec.game, ec.loop, ec.criterion, ec.rho_schedule, ec.horizon, rng);
      break;
    case Algorithm::Uniform:
      traj = run_baseline_uniform(ec.game, ec.loop, ec.horizon, rng, ec.criterion);
      break;
    case Algorithm::NoExploration:
      traj = run_baseline_no_exploration(ec.game, ec.loop, ec.horizon, rng, ec.criterion);
      break;
  }
  traj.path_id = path_id;
  return traj;
}

std::vector<RunTrajectory> run_experiment(const ExperimentConfig& ec) {
  validate(ec);
  const auto paths = static_cast<std::size_t>(ec.num_paths);
  std::vector<RunTrajectory> out(paths);
  std::vector<std::exception_ptr> errors(paths);

  unsigned workers = ec.threads > 0 ? static_cast<unsigned>(ec.threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(paths));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < paths && !failed; i = next++) {
      try {
        out[i] = run_path(ec, static_cast<int>(i));
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t i = 0; i < paths; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw NumericalError("path " + std::to_string(i) + " failed: " + e.what());
    }
  }
  return out;
}

}  // namespace activeinv
