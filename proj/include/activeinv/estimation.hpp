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

// Maximum-likelihood estimation of the follower parameters over Theta.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "activeinv/game_config.hpp"
#include "activeinv/game_model.hpp"

namespace activeinv {

// Backtracking parameters: the trial step starts at `initial_step` and is
// multiplied by `shrink` until the objective rises by at least
// `sufficient_increase` times the first-order prediction.
struct LineSearch {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_increase = 1e-4;
};

struct MleSettings {
  int max_iters = 500;
  double grad_tol = 1e-8;
  ParamVector init_theta{10.0, 0.0, 10.0};
  LineSearch line_search;
  // Every |theta_i| is kept below this bound so the search set is compact.
  double param_bound = 1e3;
};

// Throws DomainError on nonpositive tolerances or an infeasible start.
void validate(const MleSettings& settings, const GameConfig& cfg);

struct MleResult {
  ParamVector theta_hat;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  // The estimate touches the boundary of Theta (degenerate data).
  bool on_boundary = false;
  // Objective after each accepted iterate, starting with the initial point.
  std::vector<double> objective_trace;
};

// Mean log-density of the records under theta.
double log_likelihood(const ParamVector& theta, const Dataset& data,
                      const GameConfig& cfg);

// Gradient and Hessian of log_likelihood in theta. Unlike the per-record
// derivatives these are defined up to the boundary of Theta.
Eigen::VectorXd log_likelihood_gradient(const ParamVector& theta,
                                        const Dataset& data,
                                        const GameConfig& cfg);
Eigen::MatrixXd log_likelihood_hessian(const ParamVector& theta,
                                       const Dataset& data,
                                       const GameConfig& cfg);

// E over uF ~ p(. | uL, theta_true) of log p(uF | uL, theta_query).
double expected_log_density(const Eigen::VectorXd& uL,
                            const ParamVector& theta_query,
                            const ParamVector& theta_true,
                            const GameConfig& cfg);

// Approximate projection onto Theta intersected with the box
// [-bound, bound]^m: clamp to the box, raise diagonal entries until the
// diagonal part of Q is feasible, then shrink the off-diagonal entries by the
// largest common factor in [0, 1] that keeps every leading minor >= kappa.
ParamVector project_to_feasible(const ParamVector& theta, double kappa,
                                double bound);

// Projected ascent from settings.init_theta. The search direction is the
// Newton direction of the concave objective, falling back to the plain
// gradient when the Newton step cannot be accepted.
MleResult mle(const Dataset& data, const MleSettings& settings,
              const GameConfig& cfg);

}  // namespace activeinv
