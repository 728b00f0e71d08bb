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

#include "activeinv/fisher_design.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace activeinv {

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::A: return "A";
    case Criterion::D: return "D";
    case Criterion::E: return "E";
  }
  return "?";
}

Criterion parse_criterion(std::string_view name) {
  if (name.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
      case 'A': return Criterion::A;
      case 'D': return Criterion::D;
      case 'E': return Criterion::E;
      default: break;
    }
  }
  throw DomainError("unknown criterion '" + std::string(name) + "' (expected A, D or E)");
}

Eigen::MatrixXd oim_monte_carlo(const Eigen::VectorXd& uL, const ParamVector& theta,
                                const GameConfig& cfg, long long samples,
                                RandomStream& rng) {
  if (samples < 1) throw DomainError("Monte-Carlo sample count must be positive");
  require_feasible(theta, cfg);
  detail::require_rational(cfg);
  const detail::PrecisionFactor<double> f(theta);
  const FollowerDistribution dist{detail::response_mean(f, uL, cfg), f.Qinv / cfg.lambda};
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(dist.sigma).matrixL();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(cfg.m(), cfg.m());
  for (long long s = 0; s < samples; ++s) {
    const Eigen::VectorXd uF = dist.mu + L * rng.normal_vector(cfg.h());
    const Eigen::VectorXd g = detail::score(uF, dist.mu, f, cfg.lambda);
    acc.noalias() += g * g.transpose();
  }
  return acc / static_cast<double>(samples);
}

double criterion_value(const Eigen::MatrixXd& F, Criterion c) {
  if (F.rows() == 0 || F.rows() != F.cols())
    throw DomainError("information matrix must be square and nonempty");
  const double m = static_cast<double>(F.rows());
  switch (c) {
    case Criterion::A:
      return F.trace();
    case Criterion::D: {
      const double det = F.determinant();
      if (det >= 0.0) return std::pow(det, 1.0 / m);
      const double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
      if (det >= -1e-10 * std::pow(scale, m)) return 0.0;
      throw NumericalError("information matrix has negative determinant");
    }
    case Criterion::E: {
      const Eigen::MatrixXd sym = 0.5 * (F + F.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
      if (eig.info() != Eigen::Success) throw NumericalError("eigen-decomposition failed");
      return eig.eigenvalues()(0);
    }
  }
  throw DomainError("unknown criterion");
}

double information_value(const Eigen::VectorXd& uL, const ParamVector& theta,
                         Criterion c, const GameConfig& cfg) {
  return criterion_value(oim_closed_form(uL, theta, cfg), c);
}

Eigen::VectorXd maximize_criterion(const ParamVector& theta_hat, Criterion c,
                                   const GameConfig& cfg,
                                   const BoxSearchOptions& options) {
  require_feasible(theta_hat, cfg);
  const auto negated = [&](const Eigen::VectorXd& u) {
    return -information_value(u, theta_hat, c, cfg);
  };
  return minimize_over_box(negated, cfg.leader_box, options).argmin;
}

std::vector<GridCell> fisher_map(const ParamVector& theta, Criterion c,
                                 const GameConfig& cfg, int resolution) {
  require_feasible(theta, cfg);
  std::vector<GridCell> cells;
  for (auto& u : box_grid(cfg.leader_box, resolution)) {
    const double v = information_value(u, theta, c, cfg);
    cells.push_back({std::move(u), v});
  }
  return cells;
}

std::vector<GridCell> top_information_cells(const ParamVector& theta, Criterion c,
                                            const GameConfig& cfg, int resolution,
                                            int k) {
  auto cells = fisher_map(theta, c, cfg, resolution);
  const auto keep = std::min<std::size_t>(cells.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep),
                    cells.end(), [](const GridCell& a, const GridCell& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return lexicographically_less(a.u, b.u);
                    });
  cells.resize(keep);
  return cells;
}

void RunningOim::add(const Eigen::MatrixXd& F) {
  if (count_ == 0) {
    sum_ = F;
  } else {
    if (F.rows() != sum_.rows() || F.cols() != sum_.cols())
      throw DomainError("information matrix dimension changed");
    sum_ += F;
  }
  ++count_;
}

Eigen::MatrixXd RunningOim::average() const {
  if (count_ == 0) throw DomainError("running information average is empty");
  return sum_ / static_cast<double>(count_);
}

}  // namespace activeinv
