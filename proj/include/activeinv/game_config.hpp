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

// Core data types of the leader/follower quadratic game: parameter vectors,
// leader action box, game configuration and the interaction dataset.
//
// Dense types are templated on the scalar type; the `double` aliases at the
// bottom are what the estimation and simulation layers use.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "activeinv/errors.hpp"

namespace activeinv {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Parameters of the follower's quadratic form Q(theta). The entries are the
// upper triangle of the symmetric h x h matrix in row-major order, so for
// h = 2: Q = [[theta1, theta2], [theta2, theta3]].
template <typename Scalar>
struct ParamVectorT {
  VectorX<Scalar> theta;

  ParamVectorT() = default;
  explicit ParamVectorT(VectorX<Scalar> values) : theta(std::move(values)) {}
  ParamVectorT(std::initializer_list<Scalar> values)
      : theta(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (Scalar v : values) theta(i++) = v;
  }

  Eigen::Index size() const { return theta.size(); }
  Scalar operator[](Eigen::Index i) const { return theta(i); }
  Scalar& operator[](Eigen::Index i) { return theta(i); }

  friend bool operator==(const ParamVectorT& a, const ParamVectorT& b) {
    return a.theta.size() == b.theta.size() &&
           (a.theta.array() == b.theta.array()).all();
  }
};

// Closed coordinate box [lower, upper].
template <typename Scalar>
struct BoxT {
  VectorX<Scalar> lower;
  VectorX<Scalar> upper;

  Eigen::Index dim() const { return lower.size(); }

  bool contains(const VectorX<Scalar>& u, Scalar tol = Scalar(0)) const {
    return u.size() == dim() && (u.array() >= lower.array() - tol).all() &&
           (u.array() <= upper.array() + tol).all();
  }

  VectorX<Scalar> clamp(const VectorX<Scalar>& u) const {
    return u.cwiseMax(lower).cwiseMin(upper);
  }

  VectorX<Scalar> width() const { return upper - lower; }
};

// Leader cost   J^L = 1/2 uL' QL uL + uF' R1L uL + 1/2 uF' R2L uF
// Follower cost J^F = 1/2 uF' Q(theta) uF + uF' R1F uL + 1/2 uL' R2F uL
//
// uL has dimension n, uF dimension h. R1L and R1F are both h x n.
// theta_true is the follower's actual parameter; the leader never reads it,
// only the simulated follower and the evaluation code do.
template <typename Scalar>
struct GameConfigT {
  MatrixX<Scalar> QL;
  MatrixX<Scalar> R1L;
  MatrixX<Scalar> R2L;
  MatrixX<Scalar> R1F;
  MatrixX<Scalar> R2F;
  Scalar lambda{1};
  BoxT<Scalar> leader_box;
  Scalar kappa{Scalar(1e-3)};
  ParamVectorT<Scalar> theta_true;

  Eigen::Index n() const { return QL.rows(); }
  Eigen::Index h() const { return R2L.rows(); }
  Eigen::Index m() const { return h() * (h() + 1) / 2; }

  template <typename Other>
  GameConfigT<Other> cast() const {
    GameConfigT<Other> out;
    out.QL = QL.template cast<Other>();
    out.R1L = R1L.template cast<Other>();
    out.R2L = R2L.template cast<Other>();
    out.R1F = R1F.template cast<Other>();
    out.R2F = R2F.template cast<Other>();
    out.lambda = static_cast<Other>(lambda);
    out.leader_box = {leader_box.lower.template cast<Other>(),
                      leader_box.upper.template cast<Other>()};
    out.kappa = static_cast<Other>(kappa);
    out.theta_true = ParamVectorT<Other>(theta_true.theta.template cast<Other>());
    return out;
  }
};

// One leader query and the follower's reply. Steps are numbered from 1.
struct InteractionRecord {
  int t = 0;
  Eigen::VectorXd uL;
  Eigen::VectorXd uF;
};

// Ordered interaction history D(t).
class Dataset {
 public:
  Dataset() = default;

  void append(Eigen::VectorXd uL, Eigen::VectorXd uF) {
    records_.push_back(
        {static_cast<int>(records_.size()) + 1, std::move(uL), std::move(uF)});
  }

  const std::vector<InteractionRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<InteractionRecord> records_;
};

using ParamVector = ParamVectorT<double>;
using Box = BoxT<double>;
using GameConfig = GameConfigT<double>;

namespace detail {

template <typename Scalar>
bool is_symmetric(const MatrixX<Scalar>& A, Scalar tol) {
  return A.rows() == A.cols() &&
         (A - A.transpose()).cwiseAbs().maxCoeff() <=
             tol * std::max(Scalar(1), A.cwiseAbs().maxCoeff());
}

}  // namespace detail

// Throws ConfigError naming the first violated invariant.
template <typename Scalar>
void validate(const GameConfigT<Scalar>& cfg) {
  const auto n = cfg.QL.rows();
  const auto h = cfg.R2L.rows();
  if (n == 0 || cfg.QL.cols() != n) throw ConfigError("QL must be square and nonempty");
  if (h == 0 || cfg.R2L.cols() != h) throw ConfigError("R2L must be square and nonempty");
  if (cfg.R1L.rows() != h || cfg.R1L.cols() != n)
    throw ConfigError("R1L must be h x n");
  if (cfg.R1F.rows() != h || cfg.R1F.cols() != n)
    throw ConfigError("R1F must be h x n");
  if (cfg.R2F.rows() != n || cfg.R2F.cols() != n)
    throw ConfigError("R2F must be n x n");

  const Scalar sym_tol(1e-12);
  if (!detail::is_symmetric<Scalar>(cfg.QL, sym_tol)) throw ConfigError("QL not symmetric");
  if (!detail::is_symmetric<Scalar>(cfg.R2L, sym_tol)) throw ConfigError("R2L not symmetric");
  if (!detail::is_symmetric<Scalar>(cfg.R2F, sym_tol)) throw ConfigError("R2F not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(cfg.QL, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > Scalar(0)))
    throw ConfigError("QL not positive definite");

  if (!(cfg.lambda >= Scalar(0))) throw ConfigError("lambda must be nonnegative");
  if (!(cfg.kappa > Scalar(0))) throw ConfigError("kappa must be positive");
  if (cfg.leader_box.lower.size() != n || cfg.leader_box.upper.size() != n)
    throw ConfigError("leader box must have dimension n");
  if (!(cfg.leader_box.lower.array() < cfg.leader_box.upper.array()).all())
    throw ConfigError("leader box lower bound must be below upper bound");
  if (cfg.theta_true.size() != h * (h + 1) / 2)
    throw ConfigError("theta_true must have h(h+1)/2 entries");
}

// The two-player quadratic game used throughout the experiments:
// n = h = 2, theta0 = (20, 10, 30), U^L = [10, 100]^2, lambda = 1,
// kappa = 1e-3, R2F = 0.
template <typename Scalar = double>
GameConfigT<Scalar> reference_game() {
  GameConfigT<Scalar> cfg;
  cfg.QL.resize(2, 2);
  cfg.QL << 41, 2, 2, 8;
  cfg.R1L.resize(2, 2);
  cfg.R1L << 12, 42, 13, 1;
  cfg.R2L.resize(2, 2);
  cfg.R2L << 400, 34, 34, 4;
  cfg.R1F.resize(2, 2);
  cfg.R1F << 16, 8, 9, 31;
  cfg.R2F = MatrixX<Scalar>::Zero(2, 2);
  cfg.lambda = Scalar(1);
  cfg.leader_box.lower = VectorX<Scalar>::Constant(2, Scalar(10));
  cfg.leader_box.upper = VectorX<Scalar>::Constant(2, Scalar(100));
  cfg.kappa = Scalar(1e-3);
  cfg.theta_true = ParamVectorT<Scalar>{Scalar(20), Scalar(10), Scalar(30)};
  return cfg;
}

}  // namespace activeinv
