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

// Batch experiments: configuration, loading/saving, and the path runner.
//
// Config files are JSON documents:
//
//   {
//     "game": {
//       "QL": [[41, 2], [2, 8]], "R1L": ..., "R2L": ..., "R1F": ..., "R2F": ...,
//       "lambda": 1.0, "kappa": 0.001,
//       "leader_box": {"lower": [10, 10], "upper": [100, 100]},
//       "theta_true": [20, 10, 30]
//     },
//     "algorithm": "alg1" | "alg2" | "uniform" | "no_exploration",
//     "criterion": "A" | "D" | "E",
//     "horizon": 20, "num_paths": 50, "master_seed": 2024,
//     "rho_schedule": {"mu0": 4e7, "alpha": 1000, "eta": 2},
//     "mle": {"max_iters": 500, "grad_tol": 1e-8, "init_theta": [10, 0, 10],
//             "initial_step": 1, "shrink": 0.5, "sufficient_increase": 1e-4,
//             "param_bound": 1000},
//     "search": {"grid_resolution": 25, "local_starts": 3, "max_local_iters": 200},
//     "threads": 0,
//     "output": {"dir": "out", "format": "csv"}
//   }
//
// Matrices are row-major arrays of arrays. "game", "algorithm", "horizon",
// "num_paths" and "master_seed" are required; the other sections fall back
// to the defaults below. Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "activeinv/active_loop.hpp"
#include "activeinv/game_config.hpp"

namespace activeinv {

struct OutputSettings {
  std::string dir = "out";
  std::string format = "csv";  // csv | json
};

struct ExperimentConfig {
  GameConfig game = reference_game();
  Algorithm algorithm = Algorithm::ActiveLearning;
  Criterion criterion = Criterion::D;
  int horizon = 20;
  int num_paths = 50;
  std::uint64_t master_seed = 2024;
  RhoSchedule rho_schedule;
  LoopSettings loop;
  int threads = 0;  // 0: one worker per hardware thread
  OutputSettings output;
};

// The experiment settings of the reference study for each algorithm:
// T = 20 with 50 paths for alg1/uniform, T = 100 with 300 paths for
// alg2/no_exploration, criterion D and E respectively.
ExperimentConfig table1_experiment(Algorithm alg);

// Throws ConfigError naming the violated invariant.
void validate(const ExperimentConfig& ec);

nlohmann::json to_json(const ExperimentConfig& ec);
nlohmann::json to_json(const GameConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& ec, const std::filesystem::path& path);

// Path `path_id` runs on RandomStream(split_seed(master_seed, path_id)).
RunTrajectory run_path(const ExperimentConfig& ec, int path_id);

// All paths in path-id order. Paths run on a worker pool; the output does
// not depend on scheduling. A failing path aborts the batch with its id.
std::vector<RunTrajectory> run_experiment(const ExperimentConfig& ec);

}  // namespace activeinv
