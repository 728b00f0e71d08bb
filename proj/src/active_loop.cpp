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

#include "activeinv/active_loop.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace activeinv {
namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_pd(const Eigen::MatrixXd& A, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw NumericalError(std::string(what) +
                         " is not positive definite; the expected leader cost is "
                         "not strongly convex");
}

// Gradient with components removed where a bound is active and the
// descent direction points out of the box.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& u, const Eigen::VectorXd& g,
                                   const Box& box) {
  Eigen::VectorXd pg = g;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    if (u(k) <= box.lower(k) && g(k) > 0.0) pg(k) = 0.0;
    if (u(k) >= box.upper(k) && g(k) < 0.0) pg(k) = 0.0;
  }
  return pg;
}

// Solves the free coordinates of min 1/2 u'Gu exactly for the active set of
// `u`. Returns false if the result leaves the box or breaks a KKT sign.
bool polish_active_set(const Eigen::MatrixXd& G, const Box& box, Eigen::VectorXd& u) {
  const Eigen::Index n = u.size();
  std::vector<Eigen::Index> free_idx;
  for (Eigen::Index k = 0; k < n; ++k)
    if (u(k) > box.lower(k) && u(k) < box.upper(k)) free_idx.push_back(k);
  Eigen::VectorXd cand = u;
  if (!free_idx.empty()) {
    const auto nf = static_cast<Eigen::Index>(free_idx.size());
    Eigen::MatrixXd Gff(nf, nf);
    Eigen::VectorXd rhs(nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      double r = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const bool is_free = std::find(free_idx.begin(), free_idx.end(), k) != free_idx.end();
        if (!is_free) r -= G(free_idx[a], k) * u(k);
      }
      rhs(a) = r;
      for (Eigen::Index b = 0; b < nf; ++b) Gff(a, b) = G(free_idx[a], free_idx[b]);
    }
    const Eigen::VectorXd sol = Gff.llt().solve(rhs);
    for (Eigen::Index a = 0; a < nf; ++a) cand(free_idx[a]) = sol(a);
  }
  if (!box.contains(cand)) return false;
  const Eigen::VectorXd g = G * cand;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (cand(k) <= box.lower(k) && g(k) < 0.0) return false;
    if (cand(k) >= box.upper(k) && g(k) > 0.0) return false;
  }
  u = cand;
  return true;
}

using QueryPolicy = std::function<Eigen::VectorXd(int t, const ParamVector& current,
                                                  const ParamVector& previous,
                                                  double& rho_out)>;

RunTrajectory run_loop(const GameConfig& cfg, const LoopSettings& settings, Algorithm alg,
                       Criterion c, int horizon, RandomStream& rng,
                       const QueryPolicy& policy) {
  if (horizon < 1) throw DomainError("horizon must be at least 1");
  validate(cfg);
  validate(settings.mle, cfg);
  require_feasible(cfg.theta_true, cfg);

  RunTrajectory traj;
  traj.algorithm = alg;
  traj.criterion = c;
  traj.seed = rng.seed();
  traj.steps.reserve(static_cast<std::size_t>(horizon));

  Dataset data;
  MleSettings mle_settings = settings.mle;
  ParamVector current = settings.mle.init_theta;  // theta_hat(t-1)
  ParamVector previous = current;                 // theta_hat(t-2)

  for (int t = 1; t <= horizon; ++t) {
    StepRecord step;
    step.t = t;
    step.uL = policy(t, current, previous, step.rho);
    step.criterion = information_value(step.uL, current, c, cfg);
    step.expected_cost = expected_leader_cost(step.uL, current, cfg);
    step.uF = sample_follower(follower_response(step.uL, cfg.theta_true, cfg), rng);
    data.append(step.uL, step.uF);

    mle_settings.init_theta = current;
    const MleResult fit = mle(data, mle_settings, cfg);
    previous = current;
    current = fit.theta_hat;
    step.theta_hat = current;
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

}  // namespace

void validate(const RhoSchedule& sched) {
  if (!(sched.mu0 >= 0.0)) throw DomainError("mu0 must be nonnegative");
  if (!(sched.alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!(sched.eta > 0.0)) throw DomainError("eta must be positive");
}

double rho(int t, double step_norm, const RhoSchedule& sched) {
  if (t < 1) throw DomainError("rho is defined for t >= 1");
  const double mu_t = sched.mu0 / static_cast<double>(t);
  if (std::isinf(step_norm) && step_norm > 0.0) return mu_t;
  return mu_t * sigmoid(sched.alpha * (step_norm - sched.eta));
}

double rho(int t, const ParamVector& theta_t, const ParamVector& theta_prev,
           const RhoSchedule& sched) {
  return rho(t, (theta_t.theta - theta_prev.theta).norm(), sched);
}

Eigen::VectorXd exploitation_query(const ParamVector& theta_hat, const GameConfig& cfg,
                                   const BoxSearchOptions& options) {
  return query_alg2(theta_hat, 0.0, Criterion::E, cfg, options);
}

Eigen::VectorXd query_alg2(const ParamVector& theta_hat, double rho_value, Criterion c,
                           const GameConfig& cfg, const BoxSearchOptions& options) {
  require_feasible(theta_hat, cfg);
  if (!(rho_value >= 0.0)) throw DomainError("rho must be nonnegative");
  BoxObjective objective;
  if (rho_value == 0.0) {
    objective = [&](const Eigen::VectorXd& u) {
      return expected_leader_cost(u, theta_hat, cfg);
    };
  } else {
    objective = [&](const Eigen::VectorXd& u) {
      return expected_leader_cost(u, theta_hat, cfg) -
             rho_value * information_value(u, theta_hat, c, cfg);
    };
  }
  return minimize_over_box(objective, cfg.leader_box, options).argmin;
}

EquilibriumResult stackelberg_equilibrium(const ParamVector& theta_true,
                                          const GameConfig& cfg) {
  require_feasible(theta_true, cfg);
  require_pd(compute_C(theta_true, cfg), "C(theta_true)");
  const Eigen::MatrixXd G = expected_cost_hessian(theta_true, cfg);
  require_pd(G, "expected-cost Hessian");

  const Box& box = cfg.leader_box;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
  const double step = 1.0 / eig.eigenvalues().maxCoeff();

  Eigen::VectorXd u = box.clamp(Eigen::VectorXd::Zero(cfg.n()));
  constexpr double kTol = 1e-10;
  for (int it = 0; it < 1'000'000; ++it) {
    const Eigen::VectorXd g = G * u;
    if (projected_gradient(u, g, box).norm() <= kTol) break;
    // Once the iterate has settled on its active set, finish exactly.
    Eigen::VectorXd polished = u;
    if (it % 20 == 19 && polish_active_set(G, box, polished)) {
      u = polished;
      continue;
    }
    u = box.clamp(u - step * g);
  }
  return {u, expected_leader_cost(u, theta_true, cfg)};
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ActiveLearning: return "alg1";
    case Algorithm::ActiveInverseGame: return "alg2";
    case Algorithm::Uniform: return "uniform";
    case Algorithm::NoExploration: return "no_exploration";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "alg1") return Algorithm::ActiveLearning;
  if (name == "alg2") return Algorithm::ActiveInverseGame;
  if (name == "uniform") return Algorithm::Uniform;
  if (name == "no_exploration") return Algorithm::NoExploration;
  throw DomainError("unknown algorithm '" + std::string(name) +
                    "' (expected alg1, alg2, uniform or no_exploration)");
}

RunTrajectory run_algorithm1(const GameConfig& cfg, const LoopSettings& settings,
                             Criterion c, int horizon, RandomStream& rng) {
  return run_loop(cfg, settings, Algorithm::ActiveLearning, c, horizon, rng,
                  [&](int, const ParamVector& current, const ParamVector&, double&) {
                    return maximize_criterion(current, c, cfg, settings.search);
                  });
}

RunTrajectory run_algorithm2(const GameConfig& cfg, const LoopSettings& settings,
                             Criterion c, const RhoSchedule& sched, int horizon,
                             RandomStream& rng) {
  validate(sched);
  return run_loop(cfg, settings, Algorithm::ActiveInverseGame, c, horizon, rng,
                  [&](int t, const ParamVector& current, const ParamVector& previous,
                      double& rho_out) {
                    const double step_norm =
                        t == 1 ? std::numeric_limits<double>::infinity()
                               : (current.theta - previous.theta).norm();
                    rho_out = rho(t, step_norm, sched);
                    return query_alg2(current, rho_out, c, cfg, settings.search);
                  });
}

RunTrajectory run_baseline_uniform(const GameConfig& cfg, const LoopSettings& settings,
                                   int horizon, RandomStream& rng, Criterion c) {
  return run_loop(cfg, settings, Algorithm::Uniform, c, horizon, rng,
                  [&](int, const ParamVector&, const ParamVector&, double&) {
                    Eigen::VectorXd u(cfg.n());
                    for (Eigen::Index k = 0; k < u.size(); ++k)
                      u(k) = rng.uniform(cfg.leader_box.lower(k), cfg.leader_box.upper(k));
                    return u;
                  });
}

RunTrajectory run_baseline_no_exploration(const GameConfig& cfg,
                                          const LoopSettings& settings, int horizon,
                                          RandomStream& rng, Criterion c) {
  return run_loop(cfg, settings, Algorithm::NoExploration, c, horizon, rng,
                  [&](int, const ParamVector& current, const ParamVector&, double&) {
                    return exploitation_query(current, cfg, settings.search);
                  });
}

}  // namespace activeinv
