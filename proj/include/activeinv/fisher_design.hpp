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

// Observation information matrix of the follower response and the design
// criteria built on it.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "activeinv/box_search.hpp"
#include "activeinv/game_config.hpp"
#include "activeinv/game_model.hpp"
#include "activeinv/random.hpp"

namespace activeinv {

// A: trace, D: det^(1/m), E: smallest eigenvalue.
enum class Criterion { A, D, E };

std::string_view to_string(Criterion c);
// Accepts "A", "D", "E" (case-insensitive); throws DomainError otherwise.
Criterion parse_criterion(std::string_view name);

// Gaussian Fisher information of the response in theta:
//   F_ij = dmu_i' Sigma^{-1} dmu_j + 1/2 tr(Sigma^{-1} dSigma_i Sigma^{-1} dSigma_j)
// with dmu_i = Q^{-1} E_i Q^{-1} R1F uL and dSigma_i = -Q^{-1} E_i Q^{-1} / lambda.
template <typename Scalar>
MatrixX<Scalar> oim_closed_form(const VectorX<Scalar>& uL,
                                const ParamVectorT<Scalar>& theta,
                                const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  if (uL.size() != cfg.n()) throw DomainError("action dimension mismatch");
  const detail::PrecisionFactor<Scalar> f(theta);
  const Eigen::Index h = cfg.h();
  const Eigen::Index m = cfg.m();
  const VectorX<Scalar> b = cfg.R1F * uL;
  const MatrixX<Scalar> sigma_inv = cfg.lambda * f.Q;

  std::vector<VectorX<Scalar>> dmu(static_cast<std::size_t>(m));
  std::vector<MatrixX<Scalar>> sigma_inv_dsigma(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const MatrixX<Scalar> QinvEQinv = f.Qinv * param_basis<Scalar>(i, h) * f.Qinv;
    dmu[i] = QinvEQinv * b;
    sigma_inv_dsigma[i] = -sigma_inv * QinvEQinv / cfg.lambda;
  }
  MatrixX<Scalar> F(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const Scalar v = dmu[i].dot(sigma_inv * dmu[j]) +
                       Scalar(0.5) * (sigma_inv_dsigma[i] * sigma_inv_dsigma[j]).trace();
      F(i, j) = v;
      F(j, i) = v;
    }
  }
  return F;
}

// Mean of score outer products over N follower draws at theta.
Eigen::MatrixXd oim_monte_carlo(const Eigen::VectorXd& uL, const ParamVector& theta,
                                const GameConfig& cfg, long long samples,
                                RandomStream& rng);

double criterion_value(const Eigen::MatrixXd& F, Criterion c);

// H(uL | theta) = criterion_value(oim_closed_form(uL, theta), c).
double information_value(const Eigen::VectorXd& uL, const ParamVector& theta,
                         Criterion c, const GameConfig& cfg);

// argmax of H over the leader box.
Eigen::VectorXd maximize_criterion(const ParamVector& theta_hat, Criterion c,
                                   const GameConfig& cfg,
                                   const BoxSearchOptions& options = {});

// H on the full grid, lexicographic order (the fisher-map dump).
std::vector<GridCell> fisher_map(const ParamVector& theta, Criterion c,
                                 const GameConfig& cfg, int resolution);

// Best `k` grid cells of H, highest first; near-ties show up side by side.
std::vector<GridCell> top_information_cells(const ParamVector& theta, Criterion c,
                                            const GameConfig& cfg, int resolution,
                                            int k);

// Running average F_T = (1/T) sum_t F_t.
class RunningOim {
 public:
  RunningOim() = default;

  void add(const Eigen::MatrixXd& F);
  int count() const { return count_; }
  const Eigen::MatrixXd& sum() const { return sum_; }
  // Throws DomainError when empty.
  Eigen::MatrixXd average() const;

 private:
  Eigen::MatrixXd sum_;
  int count_ = 0;
};

}  // namespace activeinv
