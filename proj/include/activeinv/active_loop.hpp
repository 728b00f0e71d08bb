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

// Leader-side decision making: expected leader cost under the quantal
// follower, the Stackelberg equilibrium, and the sequential query loops
// (pure active learning, active inverse game, and the two baselines).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "activeinv/box_search.hpp"
#include "activeinv/estimation.hpp"
#include "activeinv/fisher_design.hpp"
#include "activeinv/game_config.hpp"
#include "activeinv/game_model.hpp"
#include "activeinv/random.hpp"

namespace activeinv {

// C(theta) = QL + 2 R1F' Q^{-1} R2L Q^{-1} R1F - R1F' Q^{-1} R1L - R1L' Q^{-1} R1F
template <typename Scalar>
MatrixX<Scalar> compute_C(const ParamVectorT<Scalar>& theta,
                          const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  const MatrixX<Scalar> QinvR1F = f.Qinv * cfg.R1F;
  const MatrixX<Scalar> cross = cfg.R1F.transpose() * f.Qinv * cfg.R1L;
  MatrixX<Scalar> C = cfg.QL + Scalar(2) * QinvR1F.transpose() * cfg.R2L * QinvR1F -
                      cross - cross.transpose();
  return (C + C.transpose()) / Scalar(2);
}

// Hessian in uL of the expected leader cost:
//   QL + R1F' Q^{-1} R2L Q^{-1} R1F - R1F' Q^{-1} R1L - R1L' Q^{-1} R1F.
// It differs from C(theta) by one copy of R1F' Q^{-1} R2L Q^{-1} R1F, the
// factor 1/2 on the follower-quadratic term of J^L.
template <typename Scalar>
MatrixX<Scalar> expected_cost_hessian(const ParamVectorT<Scalar>& theta,
                                      const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  const MatrixX<Scalar> QinvR1F = f.Qinv * cfg.R1F;
  const MatrixX<Scalar> cross = cfg.R1F.transpose() * f.Qinv * cfg.R1L;
  MatrixX<Scalar> G = cfg.QL + QinvR1F.transpose() * cfg.R2L * QinvR1F - cross -
                      cross.transpose();
  return (G + G.transpose()) / Scalar(2);
}

// E over uF ~ p(. | uL, theta) of J^L(uL, uF)
//   = 1/2 uL' QL uL + mu' R1L uL + 1/2 mu' R2L mu + 1/2 tr(R2L Sigma)
//   = 1/2 uL' expected_cost_hessian(theta) uL + 1/2 tr(R2L Sigma).
template <typename Scalar>
Scalar expected_leader_cost(const VectorX<Scalar>& uL, const ParamVectorT<Scalar>& theta,
                            const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  if (uL.size() != cfg.n()) throw DomainError("action dimension mismatch");
  const detail::PrecisionFactor<Scalar> f(theta);
  const VectorX<Scalar> mu = detail::response_mean(f, uL, cfg);
  const MatrixX<Scalar> sigma = f.Qinv / cfg.lambda;
  return Scalar(0.5) * uL.dot(cfg.QL * uL) + mu.dot(cfg.R1L * uL) +
         Scalar(0.5) * mu.dot(cfg.R2L * mu) + Scalar(0.5) * (cfg.R2L * sigma).trace();
}

// rho_t = (mu0 / t) * sigmoid(alpha (||theta_t - theta_{t-1}|| - eta)).
struct RhoSchedule {
  double mu0 = 4e7;
  double alpha = 1e3;
  double eta = 2.0;
};

void validate(const RhoSchedule& sched);

// `step_norm` may be +infinity, giving rho = mu0 / t.
double rho(int t, double step_norm, const RhoSchedule& sched);
double rho(int t, const ParamVector& theta_t, const ParamVector& theta_prev,
           const RhoSchedule& sched);

// argmin over the box of the expected leader cost at theta_hat.
Eigen::VectorXd exploitation_query(const ParamVector& theta_hat, const GameConfig& cfg,
                                   const BoxSearchOptions& options = {});

// argmin over the box of expected_leader_cost - rho * H. With rho == 0 this
// is exactly exploitation_query.
Eigen::VectorXd query_alg2(const ParamVector& theta_hat, double rho, Criterion c,
                           const GameConfig& cfg, const BoxSearchOptions& options = {});

struct EquilibriumResult {
  Eigen::VectorXd uL_star;
  double cost = 0.0;  // expected leader cost at the true parameter
};

// Minimizes the expected leader cost at theta_true over the leader box.
// Throws NumericalError when C(theta_true) or the expected-cost Hessian is
// not positive definite.
EquilibriumResult stackelberg_equilibrium(const ParamVector& theta_true,
                                          const GameConfig& cfg);

enum class Algorithm { ActiveLearning, ActiveInverseGame, Uniform, NoExploration };

// "alg1", "alg2", "uniform", "no_exploration"
std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct StepRecord {
  int t = 0;
  Eigen::VectorXd uL;
  Eigen::VectorXd uF;
  ParamVector theta_hat;  // estimate after observing uF
  double rho = 0.0;
  // H and expected leader cost of uL under the estimate used to choose it.
  double criterion = 0.0;
  double expected_cost = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct RunTrajectory {
  int path_id = 0;
  Algorithm algorithm = Algorithm::ActiveLearning;
  Criterion criterion = Criterion::D;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;

  friend bool operator==(const RunTrajectory&, const RunTrajectory&) = default;
};

struct LoopSettings {
  MleSettings mle;
  BoxSearchOptions search;
};

// Queries maximize H at the previous estimate.
RunTrajectory run_algorithm1(const GameConfig& cfg, const LoopSettings& settings,
                             Criterion c, int horizon, RandomStream& rng);

// Queries minimize expected cost - rho_t H. rho_1 = mu0 and, for t >= 2,
// rho_t uses the change between the two most recent estimates.
RunTrajectory run_algorithm2(const GameConfig& cfg, const LoopSettings& settings,
                             Criterion c, const RhoSchedule& sched, int horizon,
                             RandomStream& rng);

// Queries uniform on the box. `c` only selects the recorded criterion value.
RunTrajectory run_baseline_uniform(const GameConfig& cfg, const LoopSettings& settings,
                                   int horizon, RandomStream& rng,
                                   Criterion c = Criterion::D);

// Queries minimize the expected cost at the previous estimate.
RunTrajectory run_baseline_no_exploration(const GameConfig& cfg,
                                          const LoopSettings& settings, int horizon,
                                          RandomStream& rng, Criterion c = Criterion::E);

}  // namespace activeinv
