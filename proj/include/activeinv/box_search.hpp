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

// Minimization of a continuous function over a coordinate box: a tensor grid
// scan followed by projected descent (central-difference gradient, Armijo
// backtracking) from the best few grid cells.
//
// Ties are resolved towards the lexicographically smallest point, so flat or
// symmetric objectives give deterministic answers.

#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "activeinv/game_config.hpp"

namespace activeinv {

struct BoxSearchOptions {
  int grid_resolution = 25;  // nodes per coordinate
  int local_starts = 3;      // best grid cells refined by local descent
  int max_local_iters = 200;
  // Values within tie_tolerance * max(1, |value|) count as equal.
  double tie_tolerance = 1e-12;
};

struct GridCell {
  Eigen::VectorXd u;
  double value = 0.0;
};

struct BoxSearchResult {
  Eigen::VectorXd argmin;
  double value = 0.0;
  // Best grid cells before refinement, best first.
  std::vector<GridCell> top_cells;
};

using BoxObjective = std::function<double(const Eigen::VectorXd&)>;

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Grid nodes in lexicographic order (first coordinate slowest).
std::vector<Eigen::VectorXd> box_grid(const Box& box, int resolution);

BoxSearchResult minimize_over_box(const BoxObjective& f, const Box& box,
                                  const BoxSearchOptions& options = {});

// Projected descent from `start`; never returns a point worse than `start`.
GridCell refine_in_box(const BoxObjective& f, const Box& box,
                       const Eigen::VectorXd& start, int max_iters);

}  // namespace activeinv
