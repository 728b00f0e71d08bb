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

// Quantal-response follower for the quadratic game.
//
// With J^F quadratic in uF and the follower choosing uF with density
// proportional to exp(-lambda J^F) over all of R^h, the response is Gaussian:
//
//   mu(theta)    = -Q(theta)^{-1} R1F uL
//   Sigma(theta) = Q(theta)^{-1} / lambda
//
// J^F is linear in theta, so the log-density is concave in theta and its
// Hessian does not depend on the observed uF.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "activeinv/errors.hpp"
#include "activeinv/game_config.hpp"
#include "activeinv/random.hpp"

namespace activeinv {

inline Eigen::Index param_dim(Eigen::Index h) { return h * (h + 1) / 2; }

// Inverse of param_dim; throws if m is not a triangular number.
inline Eigen::Index follower_dim(Eigen::Index m) {
  Eigen::Index h = 0;
  while (param_dim(h) < m) ++h;
  if (param_dim(h) != m || m == 0)
    throw DomainError("parameter vector length " + std::to_string(m) +
                      " is not h(h+1)/2 for any h");
  return h;
}

// Matrix entry (k, l), k <= l, addressed by parameter i.
inline std::pair<Eigen::Index, Eigen::Index> param_entry(Eigen::Index i,
                                                         Eigen::Index h) {
  for (Eigen::Index k = 0; k < h; ++k) {
    const Eigen::Index row_len = h - k;
    if (i < row_len) return {k, k + i};
    i -= row_len;
  }
  throw DomainError("parameter index out of range");
}

template <typename Scalar>
MatrixX<Scalar> precision_matrix(const ParamVectorT<Scalar>& theta) {
  const Eigen::Index h = follower_dim(theta.size());
  MatrixX<Scalar> Q(h, h);
  Eigen::Index i = 0;
  for (Eigen::Index k = 0; k < h; ++k)
    for (Eigen::Index l = k; l < h; ++l, ++i) Q(k, l) = Q(l, k) = theta[i];
  return Q;
}

template <typename Scalar>
ParamVectorT<Scalar> params_from_precision(const MatrixX<Scalar>& Q) {
  const Eigen::Index h = Q.rows();
  VectorX<Scalar> theta(param_dim(h));
  Eigen::Index i = 0;
  for (Eigen::Index k = 0; k < h; ++k)
    for (Eigen::Index l = k; l < h; ++l) theta(i++) = Q(k, l);
  return ParamVectorT<Scalar>(std::move(theta));
}

// dQ/dtheta_i: E_kk on the diagonal, E_kl + E_lk off it.
template <typename Scalar>
MatrixX<Scalar> param_basis(Eigen::Index i, Eigen::Index h) {
  const auto [k, l] = param_entry(i, h);
  MatrixX<Scalar> E = MatrixX<Scalar>::Zero(h, h);
  E(k, l) = Scalar(1);
  E(l, k) = Scalar(1);
  return E;
}

// Leading principal minors of Q(theta) minus kappa. Theta is the set where
// all of these are >= 0; for h = 2 that is theta1 >= kappa and
// theta1 theta3 - theta2^2 >= kappa.
template <typename Scalar>
VectorX<Scalar> feasibility_margins(const ParamVectorT<Scalar>& theta,
                                    Scalar kappa) {
  const MatrixX<Scalar> Q = precision_matrix(theta);
  const Eigen::Index h = Q.rows();
  VectorX<Scalar> margins(h);
  for (Eigen::Index k = 0; k < h; ++k) {
    Scalar minor;
    if (k == 0) {
      minor = Q(0, 0);
    } else if (k == 1) {
      minor = Q(0, 0) * Q(1, 1) - Q(0, 1) * Q(1, 0);
    } else {
      minor = Q.topLeftCorner(k + 1, k + 1).partialPivLu().determinant();
    }
    margins(k) = minor - kappa;
  }
  return margins;
}

template <typename Scalar>
bool is_feasible(const ParamVectorT<Scalar>& theta, Scalar kappa,
                 Scalar slack = Scalar(0)) {
  const VectorX<Scalar> margins = feasibility_margins(theta, kappa);
  return (margins.array() >= slack).all();
}

// Derivatives are only offered with this much slack inside Theta.
template <typename Scalar>
Scalar interior_slack(const GameConfigT<Scalar>& cfg) {
  return Scalar(10) * cfg.kappa;
}

template <typename Scalar>
void require_feasible(const ParamVectorT<Scalar>& theta,
                      const GameConfigT<Scalar>& cfg) {
  if (theta.size() != cfg.m())
    throw DomainError("theta has " + std::to_string(theta.size()) +
                      " entries, expected " + std::to_string(cfg.m()));
  if (!is_feasible(theta, cfg.kappa))
    throw DomainError("theta outside the feasible set (leading minors of Q(theta) < kappa)");
}

template <typename Scalar>
void require_interior(const ParamVectorT<Scalar>& theta,
                      const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  if (!is_feasible(theta, cfg.kappa, interior_slack(cfg)))
    throw DomainError("theta within 10*kappa of the feasible-set boundary");
}

template <typename Scalar>
struct FollowerDistributionT {
  VectorX<Scalar> mu;
  MatrixX<Scalar> sigma;
};
using FollowerDistribution = FollowerDistributionT<double>;

namespace detail {

// Q(theta), its inverse and log-determinant, computed once per theta.
template <typename Scalar>
struct PrecisionFactor {
  MatrixX<Scalar> Q;
  MatrixX<Scalar> Qinv;
  Scalar log_det{};

  explicit PrecisionFactor(const ParamVectorT<Scalar>& theta)
      : Q(precision_matrix(theta)) {
    Eigen::LLT<MatrixX<Scalar>> llt(Q);
    if (llt.info() != Eigen::Success)
      throw NumericalError("Q(theta) is not positive definite");
    Qinv = llt.solve(MatrixX<Scalar>::Identity(Q.rows(), Q.cols()));
    Qinv = (Qinv + Qinv.transpose()).eval() / Scalar(2);
    log_det = Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
  }
};

template <typename Scalar>
VectorX<Scalar> response_mean(const PrecisionFactor<Scalar>& f,
                              const VectorX<Scalar>& uL,
                              const GameConfigT<Scalar>& cfg) {
  return -(f.Qinv * (cfg.R1F * uL));
}

// x' E_i y for the basis element addressing entry (k, l).
template <typename Scalar>
Scalar basis_form(const VectorX<Scalar>& x, const VectorX<Scalar>& y,
                  Eigen::Index k, Eigen::Index l) {
  return k == l ? x(k) * y(k) : x(k) * y(l) + x(l) * y(k);
}

template <typename Scalar>
void require_action_dims(const VectorX<Scalar>& uL, const VectorX<Scalar>& uF,
                         const GameConfigT<Scalar>& cfg) {
  if (uL.size() != cfg.n() || uF.size() != cfg.h())
    throw DomainError("action dimension mismatch");
}

template <typename Scalar>
void require_rational(const GameConfigT<Scalar>& cfg) {
  if (!(cfg.lambda > Scalar(0)))
    throw DomainError("lambda must be positive for a proper response density");
}

template <typename Scalar>
Scalar log_density(const VectorX<Scalar>& uF, const VectorX<Scalar>& mu,
                   const PrecisionFactor<Scalar>& f, Scalar lambda) {
  const Scalar h = static_cast<Scalar>(f.Q.rows());
  const VectorX<Scalar> d = uF - mu;
  return -h / Scalar(2) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
         Scalar(0.5) * (h * std::log(lambda) + f.log_det) -
         lambda / Scalar(2) * d.dot(f.Q * d);
}

// d/dtheta_i log p = 1/2 tr(Q^{-1} E_i) - lambda/2 (uF' E_i uF - mu' E_i mu)
template <typename Scalar>
VectorX<Scalar> score(const VectorX<Scalar>& uF, const VectorX<Scalar>& mu,
                      const PrecisionFactor<Scalar>& f, Scalar lambda) {
  const Eigen::Index h = f.Q.rows();
  VectorX<Scalar> g(param_dim(h));
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto [k, l] = param_entry(i, h);
    const Scalar trace_term = k == l ? f.Qinv(k, k) : Scalar(2) * f.Qinv(k, l);
    g(i) = Scalar(0.5) * trace_term -
           lambda / Scalar(2) * (basis_form(uF, uF, k, l) - basis_form(mu, mu, k, l));
  }
  return g;
}

// d2/dtheta_i dtheta_j log p
//   = -1/2 tr(Q^{-1} E_i Q^{-1} E_j) - lambda mu' E_i Q^{-1} E_j mu
template <typename Scalar>
MatrixX<Scalar> score_jacobian(const VectorX<Scalar>& mu,
                               const PrecisionFactor<Scalar>& f, Scalar lambda) {
  const Eigen::Index h = f.Q.rows();
  const Eigen::Index m = param_dim(h);
  std::vector<MatrixX<Scalar>> QinvE(static_cast<std::size_t>(m));
  std::vector<VectorX<Scalar>> E_mu(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const MatrixX<Scalar> E = param_basis<Scalar>(i, h);
    QinvE[i] = f.Qinv * E;
    E_mu[i] = E * mu;
  }
  MatrixX<Scalar> H(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const Scalar v = -Scalar(0.5) * (QinvE[i] * QinvE[j]).trace() -
                       lambda * E_mu[i].dot(f.Qinv * E_mu[j]);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

}  // namespace detail

// J^F(uF, uL, theta) = 1/2 uF' Q(theta) uF + uF' R1F uL + 1/2 uL' R2F uL
template <typename Scalar>
Scalar follower_cost(const VectorX<Scalar>& uF, const VectorX<Scalar>& uL,
                     const ParamVectorT<Scalar>& theta,
                     const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_action_dims(uL, uF, cfg);
  const MatrixX<Scalar> Q = precision_matrix(theta);
  return Scalar(0.5) * uF.dot(Q * uF) + uF.dot(cfg.R1F * uL) +
         Scalar(0.5) * uL.dot(cfg.R2F * uL);
}

// J^L(uL, uF) = 1/2 uL' QL uL + uF' R1L uL + 1/2 uF' R2L uF
template <typename Scalar>
Scalar leader_cost(const VectorX<Scalar>& uL, const VectorX<Scalar>& uF,
                   const GameConfigT<Scalar>& cfg) {
  detail::require_action_dims(uL, uF, cfg);
  return Scalar(0.5) * uL.dot(cfg.QL * uL) + uF.dot(cfg.R1L * uL) +
         Scalar(0.5) * uF.dot(cfg.R2L * uF);
}

template <typename Scalar>
FollowerDistributionT<Scalar> follower_response(const VectorX<Scalar>& uL,
                                                const ParamVectorT<Scalar>& theta,
                                                const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  if (uL.size() != cfg.n()) throw DomainError("action dimension mismatch");
  const detail::PrecisionFactor<Scalar> f(theta);
  return {detail::response_mean(f, uL, cfg), f.Qinv / cfg.lambda};
}

// log Z(uL, theta) for Z = integral over R^h of exp(-lambda J^F) duF:
//   h/2 log(2 pi / lambda) - 1/2 log det Q + lambda/2 (b' Q^{-1} b - uL' R2F uL),
// with b = R1F uL.
template <typename Scalar>
Scalar log_normalizer(const VectorX<Scalar>& uL, const ParamVectorT<Scalar>& theta,
                      const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  const VectorX<Scalar> b = cfg.R1F * uL;
  const Scalar h = static_cast<Scalar>(cfg.h());
  return h / Scalar(2) * std::log(Scalar(2) * std::numbers::pi_v<Scalar> / cfg.lambda) -
         Scalar(0.5) * f.log_det +
         cfg.lambda / Scalar(2) * (b.dot(f.Qinv * b) - uL.dot(cfg.R2F * uL));
}

template <typename Scalar>
Scalar log_density(const VectorX<Scalar>& uF, const VectorX<Scalar>& uL,
                   const ParamVectorT<Scalar>& theta, const GameConfigT<Scalar>& cfg) {
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  detail::require_action_dims(uL, uF, cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  return detail::log_density(uF, detail::response_mean(f, uL, cfg), f, cfg.lambda);
}

template <typename Scalar>
VectorX<Scalar> log_density_grad_theta(const VectorX<Scalar>& uF,
                                       const VectorX<Scalar>& uL,
                                       const ParamVectorT<Scalar>& theta,
                                       const GameConfigT<Scalar>& cfg) {
  require_interior(theta, cfg);
  detail::require_rational(cfg);
  detail::require_action_dims(uL, uF, cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  return detail::score(uF, detail::response_mean(f, uL, cfg), f, cfg.lambda);
}

// uF is accepted for interface symmetry; the Hessian does not depend on it.
template <typename Scalar>
MatrixX<Scalar> log_density_hessian_theta(const VectorX<Scalar>& uF,
                                          const VectorX<Scalar>& uL,
                                          const ParamVectorT<Scalar>& theta,
                                          const GameConfigT<Scalar>& cfg) {
  require_interior(theta, cfg);
  detail::require_rational(cfg);
  detail::require_action_dims(uL, uF, cfg);
  const detail::PrecisionFactor<Scalar> f(theta);
  return detail::score_jacobian(detail::response_mean(f, uL, cfg), f, cfg.lambda);
}

// One draw mu + L z, with L the lower Cholesky factor of Sigma (Eigen::LLT)
// and z a vector of h standard normals taken in order from the stream.
inline Eigen::VectorXd sample_follower(const FollowerDistribution& dist,
                                       RandomStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(dist.sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("follower covariance is not positive definite");
  return dist.mu + llt.matrixL() * rng.normal_vector(dist.mu.size());
}

}  // namespace activeinv
