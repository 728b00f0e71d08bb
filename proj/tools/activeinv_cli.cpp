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

// Command-line front end.
//
//   activeinv simulate    --config PATH [--seed N] [--out DIR] [--format csv|json]
//                         [--paths N] [--horizon N] [--criterion A|D|E]
//   activeinv equilibrium --config PATH [--format csv|json]
//   activeinv fisher-map  --config PATH [--criterion A|D|E] [--theta a,b,c]
//                         [--resolution N] [--out DIR]
//   activeinv summarize   --config PATH --input FILE [--out DIR]
//
// Exit codes: 0 success, 1 configuration or validation error, 2 runtime or
// numerical error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "activeinv/active_loop.hpp"
#include "activeinv/experiment.hpp"
#include "activeinv/fisher_design.hpp"
#include "activeinv/io.hpp"
#include "activeinv/summary.hpp"

namespace fs = std::filesystem;
using namespace activeinv;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> paths;
  std::optional<int> horizon;
  std::optional<std::string> criterion;
};

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig ec = load_config(o.config);
  try {
    if (o.seed) ec.master_seed = *o.seed;
    if (o.out) ec.output.dir = *o.out;
    if (o.format) ec.output.format = *o.format;
    if (o.paths) ec.num_paths = *o.paths;
    if (o.horizon) ec.horizon = *o.horizon;
    if (o.criterion) ec.criterion = parse_criterion(*o.criterion);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  validate(ec);
  return ec;
}

std::string join(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v(i));
  return s;
}

int cmd_simulate(const CommonOptions& o) {
  const ExperimentConfig ec = resolve(o);
  const auto runs = run_experiment(ec);
  const fs::path dir = ec.output.dir;
  fs::path written;
  if (ec.output.format == "json") {
    written = dir / "trajectories.json";
    write_bundle_json({bundle_metadata(ec), runs}, written);
  } else {
    written = dir / "trajectories.csv";
    write_trajectories_csv(runs, written);
    std::ofstream meta(dir / "metadata.json");
    meta << bundle_metadata(ec).dump(2) << '\n';
  }
  std::cout << "wrote " << runs.size() << " trajectories to " << written.string() << '\n';
  return 0;
}

int cmd_equilibrium(const CommonOptions& o) {
  const ExperimentConfig ec = resolve(o);
  const auto& g = ec.game;
  const EquilibriumResult eq = stackelberg_equilibrium(g.theta_true, g);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> c_eig(compute_C(g.theta_true, g));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> h_eig(expected_cost_hessian(g.theta_true, g));
  const Eigen::VectorXd c_vals = c_eig.eigenvalues().reverse();
  const Eigen::VectorXd h_vals = h_eig.eigenvalues().reverse();
  if (ec.output.format == "json") {
    nlohmann::json j{{"uL_star", std::vector<double>(eq.uL_star.data(), eq.uL_star.data() + eq.uL_star.size())},
                     {"cost", eq.cost},
                     {"C_eigenvalues", std::vector<double>(c_vals.data(), c_vals.data() + c_vals.size())},
                     {"hessian_eigenvalues", std::vector<double>(h_vals.data(), h_vals.data() + h_vals.size())}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "uL_star," << join(eq.uL_star) << '\n'
              << "cost," << format_double(eq.cost) << '\n'
              << "C_eigenvalues," << join(c_vals) << '\n'
              << "hessian_eigenvalues," << join(h_vals) << '\n';
  }
  return 0;
}

int cmd_fisher_map(const CommonOptions& o, const std::vector<double>& theta, int resolution) {
  const ExperimentConfig ec = resolve(o);
  ParamVector at = ec.game.theta_true;
  if (!theta.empty()) {
    at = ParamVector(Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                       static_cast<Eigen::Index>(theta.size())));
    if (at.size() != ec.game.m() || !is_feasible(at, ec.game.kappa))
      throw ConfigError("--theta outside the feasible set");
  }
  const auto cells = fisher_map(at, ec.criterion, ec.game, resolution);
  const fs::path out = fs::path(ec.output.dir) / "fisher_map.csv";
  write_fisher_map_csv(cells, out);
  std::cout << "top cells (" << to_string(ec.criterion) << "):\n";
  for (const auto& c : top_information_cells(at, ec.criterion, ec.game, resolution, 5))
    std::cout << "  " << join(c.u) << " H=" << format_double(c.value) << '\n';
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_summarize(const CommonOptions& o, const std::string& input) {
  const ExperimentConfig ec = resolve(o);
  const fs::path in = input;
  const std::vector<RunTrajectory> runs =
      in.extension() == ".json" ? read_bundle_json(in).runs : read_trajectories_csv(in);
  const fs::path dir = ec.output.dir;

  const BiasSummary bias = summarize_bias(runs, ec.game.theta_true);
  write_bias_csv(bias, dir / "bias.csv");
  write_density_csv(bias, dir / "bias_density.csv");
  for (std::size_t c = 0; c < bias.components.size(); ++c)
    std::cout << "theta" << c + 1 << ": mean " << format_double(bias.components[c].mean)
              << " variance " << format_double(bias.components[c].variance) << '\n';
  if (runs.size() >= 20) write_normality_csv(normality_diagnostics(bias), dir / "normality.csv");

  const EquilibriumResult eq = stackelberg_equilibrium(ec.game.theta_true, ec.game);
  const ErrorSeries series = relative_error_series(runs, eq.uL_star);
  write_error_series_csv(series, dir / "error_series.csv");
  std::cout << "final median relative error " << format_double(series.rows.back().median) << '\n';
  std::cout << "wrote summaries to " << dir.string() << '\n';
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& o, bool run_flags) {
  sub->add_option("--config", o.config, "experiment config file")->required();
  sub->add_option("--seed", o.seed, "master seed override");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--criterion", o.criterion, "A, D or E");
  if (run_flags) {
    sub->add_option("--paths", o.paths, "number of sample paths");
    sub->add_option("--horizon", o.horizon, "steps per path");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active inverse Stackelberg game simulator"};
  app.require_subcommand(1);

  CommonOptions sim_opts, eq_opts, map_opts, sum_opts;
  auto* sim = app.add_subcommand("simulate", "run a batch of sample paths");
  add_common(sim, sim_opts, true);
  auto* eq = app.add_subcommand("equilibrium", "print uL* and the eigenvalues of C(theta0)");
  add_common(eq, eq_opts, false);
  auto* map = app.add_subcommand("fisher-map", "dump H over the leader box as CSV");
  add_common(map, map_opts, false);
  std::vector<double> theta;
  int resolution = 25;
  map->add_option("--theta", theta, "parameter at which to evaluate H")->delimiter(',');
  map->add_option("--resolution", resolution, "grid nodes per coordinate")
      ->check(CLI::Range(2, 100000));
  auto* sum = app.add_subcommand("summarize", "bias and error summaries of stored trajectories");
  add_common(sum, sum_opts, false);
  std::string input;
  sum->add_option("--input", input, "trajectories.csv or trajectories.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_opts);
    if (*eq) return cmd_equilibrium(eq_opts);
    if (*map) return cmd_fisher_map(map_opts, theta, resolution);
    if (*sum) return cmd_summarize(sum_opts, input);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
