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

#include "activeinv/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace activeinv {
namespace {

// The mean log-likelihood depends on the data only through
//   S = mean uF uF',  c = mean uF' b,  B = mean b b',   b = R1F uL,
// because (uF - mu)' Q (uF - mu) = uF' Q uF + 2 uF' b + b' Q^{-1} b.
// The objective value itself is evaluated per record in the centered form:
// the three terms above are large and nearly cancel, which would hide the
// small increases the line search has to detect near the optimum.
struct SufficientStats {
  Eigen::MatrixXd S;
  double c = 0.0;
  Eigen::MatrixXd B;
  double lambda = 1.0;
  Eigen::MatrixXd uF;  // h x T
  Eigen::MatrixXd b;   // h x T

  SufficientStats(const Dataset& data, const GameConfig& cfg)
      : S(Eigen::MatrixXd::Zero(cfg.h(), cfg.h())),
        B(Eigen::MatrixXd::Zero(cfg.h(), cfg.h())),
        lambda(cfg.lambda),
        uF(cfg.h(), static_cast<Eigen::Index>(data.size())),
        b(cfg.h(), static_cast<Eigen::Index>(data.size())) {
    Eigen::Index k = 0;
    for (const auto& rec : data.records()) {
      detail::require_action_dims(rec.uL, rec.uF, cfg);
      uF.col(k) = rec.uF;
      b.col(k) = cfg.R1F * rec.uL;
      ++k;
    }
    S.noalias() = uF * uF.transpose();
    B.noalias() = b * b.transpose();
    c = uF.cwiseProduct(b).sum();
    const double inv_t = 1.0 / static_cast<double>(data.size());
    S *= inv_t;
    B *= inv_t;
    c *= inv_t;
  }

  double value(const detail::PrecisionFactor<double>& f) const {
    const double h = static_cast<double>(f.Q.rows());
    const Eigen::MatrixXd r = uF + f.Qinv * b;  // uF - mu per record
    const double quad = (r.cwiseProduct(f.Q * r)).colwise().sum().mean();
    return -h / 2.0 * std::log(2.0 * std::numbers::pi) +
           0.5 * (h * std::log(lambda) + f.log_det) - lambda / 2.0 * quad;
  }

  Eigen::VectorXd gradient(const detail::PrecisionFactor<double>& f) const {
    const Eigen::Index h = f.Q.rows();
    const Eigen::MatrixXd W = f.Qinv * B * f.Qinv;  // mean mu mu'
    Eigen::VectorXd g(param_dim(h));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const auto [k, l] = param_entry(i, h);
      const double w = k == l ? 1.0 : 2.0;
      g(i) = 0.5 * w * f.Qinv(k, l) - lambda / 2.0 * w * (S(k, l) - W(k, l));
    }
    return g;
  }

  Eigen::MatrixXd hessian(const detail::PrecisionFactor<double>& f) const {
    const Eigen::Index h = f.Q.rows();
    const Eigen::Index m = param_dim(h);
    const Eigen::MatrixXd QinvBQinv = f.Qinv * B * f.Qinv;
    std::vector<Eigen::MatrixXd> QinvE(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) QinvE[i] = f.Qinv * param_basis<double>(i, h);
    Eigen::MatrixXd H(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i; j < m; ++j) {
        // mean mu' E_i Q^{-1} E_j mu = tr(Q^{-1} E_i Q^{-1} E_j Q^{-1} B)
        const Eigen::MatrixXd EiQinvEj = param_basis<double>(i, h) * QinvE[j];
        const double v = -0.5 * (QinvE[i] * QinvE[j]).trace() -
                         lambda * (EiQinvEj * QinvBQinv).trace();
        H(i, j) = v;
        H(j, i) = v;
      }
    }
    return H;
  }
};

void require_data(const Dataset& data) {
  if (data.empty()) throw DomainError("log-likelihood of an empty dataset");
}

bool touches_boundary(const ParamVector& theta, double kappa, double bound) {
  const Eigen::VectorXd margins = feasibility_margins(theta, kappa);
  const double tol = 1e-6 * std::max(kappa, 1.0);
  return margins.minCoeff() <= tol ||
         theta.theta.cwiseAbs().maxCoeff() >= bound * (1.0 - 1e-12);
}

}  // namespace

void validate(const MleSettings& settings, const GameConfig& cfg) {
  if (settings.max_iters < 1) throw DomainError("max_iters must be positive");
  if (!(settings.grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
  const auto& ls = settings.line_search;
  if (!(ls.initial_step > 0.0)) throw DomainError("initial_step must be positive");
  if (!(ls.shrink > 0.0 && ls.shrink < 1.0)) throw DomainError("shrink must lie in (0, 1)");
  if (!(ls.sufficient_increase > 0.0 && ls.sufficient_increase < 1.0))
    throw DomainError("sufficient_increase must lie in (0, 1)");
  if (!(settings.param_bound > 0.0)) throw DomainError("param_bound must be positive");
  require_feasible(settings.init_theta, cfg);
}

double log_likelihood(const ParamVector& theta, const Dataset& data,
                      const GameConfig& cfg) {
  require_data(data);
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  const detail::PrecisionFactor<double> f(theta);
  double sum = 0.0;
  for (const auto& rec : data.records()) {
    detail::require_action_dims(rec.uL, rec.uF, cfg);
    sum += detail::log_density(rec.uF, detail::response_mean(f, rec.uL, cfg), f,
                               cfg.lambda);
  }
  return sum / static_cast<double>(data.size());
}

Eigen::VectorXd log_likelihood_gradient(const ParamVector& theta,
                                        const Dataset& data,
                                        const GameConfig& cfg) {
  require_data(data);
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  return SufficientStats(data, cfg).gradient(detail::PrecisionFactor<double>(theta));
}

Eigen::MatrixXd log_likelihood_hessian(const ParamVector& theta,
                                       const Dataset& data,
                                       const GameConfig& cfg) {
  require_data(data);
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  return SufficientStats(data, cfg).hessian(detail::PrecisionFactor<double>(theta));
}

double expected_log_density(const Eigen::VectorXd& uL,
                            const ParamVector& theta_query,
                            const ParamVector& theta_true,
                            const GameConfig& cfg) {
  require_feasible(theta_query, cfg);
  require_feasible(theta_true, cfg);
  detail::require_rational(cfg);
  const detail::PrecisionFactor<double> fq(theta_query);
  const detail::PrecisionFactor<double> ft(theta_true);
  const Eigen::VectorXd mu_q = detail::response_mean(fq, uL, cfg);
  const Eigen::VectorXd mu_t = detail::response_mean(ft, uL, cfg);
  const Eigen::MatrixXd sigma_t = ft.Qinv / cfg.lambda;
  const double h = static_cast<double>(cfg.h());
  const Eigen::VectorXd d = mu_t - mu_q;
  return -h / 2.0 * std::log(2.0 * std::numbers::pi) +
         0.5 * (h * std::log(cfg.lambda) + fq.log_det) -
         cfg.lambda / 2.0 * ((fq.Q * sigma_t).trace() + d.dot(fq.Q * d));
}

ParamVector project_to_feasible(const ParamVector& theta, double kappa,
                                double bound) {
  ParamVector out(theta.theta.cwiseMax(-bound).cwiseMin(bound));
  if (is_feasible(out, kappa)) return out;

  const Eigen::Index h = follower_dim(out.size());
  const double target = kappa * (1.0 + 1e-9);
  Eigen::MatrixXd Q = precision_matrix(out);

  // Diagonal part first: with zero off-diagonals the leading minors are the
  // running products of the diagonal.
  double running = 1.0;
  for (Eigen::Index k = 0; k < h; ++k) {
    Q(k, k) = std::min(std::max(Q(k, k), target / running), bound);
    running *= Q(k, k);
  }
  const Eigen::MatrixXd diag = Q.diagonal().asDiagonal();
  const Eigen::MatrixXd off = Q - diag;
  auto shrunk = [&](double s) { return params_from_precision<double>(diag + s * off); };
  if (is_feasible(shrunk(1.0), kappa)) return shrunk(1.0);

  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (is_feasible(shrunk(mid), kappa) ? lo : hi) = mid;
  }
  return shrunk(lo);
}

MleResult mle(const Dataset& data, const MleSettings& settings,
              const GameConfig& cfg) {
  validate(settings, cfg);
  require_data(data);
  detail::require_rational(cfg);

  const SufficientStats stats(data, cfg);
  const double kappa = cfg.kappa;
  const double bound = settings.param_bound;
  auto project = [&](const Eigen::VectorXd& v) {
    return project_to_feasible(ParamVector(v), kappa, bound);
  };

  MleResult result;
  ParamVector theta = project(settings.init_theta.theta);
  double value = stats.value(detail::PrecisionFactor<double>(theta));
  result.objective_trace.push_back(value);

  const auto& ls = settings.line_search;
  // Backtracking along the projected path theta -> P(theta + alpha d).
  auto try_direction = [&](const Eigen::VectorXd& d, const Eigen::VectorXd& g) {
    double alpha = ls.initial_step;
    for (int k = 0; k < 80; ++k, alpha *= ls.shrink) {
      const ParamVector cand = project(theta.theta + alpha * d);
      const Eigen::VectorXd step = cand.theta - theta.theta;
      if (step.norm() == 0.0) return false;
      const double cand_value = stats.value(detail::PrecisionFactor<double>(cand));
      const double predicted = std::max(g.dot(step), 0.0);
      if (cand_value >= value && cand_value >= value + ls.sufficient_increase * predicted) {
        theta = cand;
        value = cand_value;
        return true;
      }
    }
    return false;
  };

  bool stalled = false;
  int iter = 0;
  for (; iter < settings.max_iters; ++iter) {
    const detail::PrecisionFactor<double> f(theta);
    const Eigen::VectorXd g = stats.gradient(f);
    const double stationarity = (theta.theta - project(theta.theta + g).theta).norm();
    if (stationarity <= settings.grad_tol) {
      result.converged = true;
      break;
    }
    // Coordinates held at the box bound by an outward gradient stay fixed;
    // the Newton system is solved over the remaining ones.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const bool pinned = std::abs(theta[i]) >= bound * (1.0 - 1e-12) && g(i) * theta[i] > 0.0;
      if (!pinned) free.push_back(i);
    }
    const Eigen::MatrixXd neg_h = -stats.hessian(f);
    Eigen::VectorXd newton = Eigen::VectorXd::Zero(g.size());
    Eigen::VectorXd ascent = Eigen::VectorXd::Zero(g.size());
    bool have_newton = !free.empty();
    if (have_newton) {
      Eigen::LLT<Eigen::MatrixXd> llt(neg_h(free, free));
      have_newton = llt.info() == Eigen::Success;
      if (have_newton) {
        const Eigen::VectorXd step = llt.solve(Eigen::VectorXd(g(free)));
        newton(free) = step;
      }
      ascent(free) = g(free);
    }
    bool accepted = have_newton && try_direction(newton, g);
    if (!accepted && !free.empty()) accepted = try_direction(ascent, g);
    if (!accepted) accepted = try_direction(g, g);
    if (!accepted) {
      stalled = true;
      break;
    }
    result.objective_trace.push_back(value);
  }

  result.theta_hat = theta;
  result.loglik = value;
  result.iterations = iter;
  result.on_boundary = touches_boundary(theta, kappa, bound);
  if (stalled && result.on_boundary) result.converged = true;
  return result;
}

}  // namespace activeinv
