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

#include "activeinv/game_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "test_support.hpp"

namespace activeinv {
namespace {

using Eigen::Vector2d;
using Eigen::VectorXd;
using testing::central_difference;
using testing::max_relative_error;
using testing::random_in_box;
using testing::random_interior_theta;

const GameConfig kGame = reference_game();
const ParamVector kTheta0{20.0, 10.0, 30.0};

VectorXd v2(double a, double b) { return Vector2d(a, b); }

TEST(GameConfigTest, ReferenceGameIsValid) {
  EXPECT_NO_THROW(validate(kGame));
  EXPECT_EQ(kGame.n(), 2);
  EXPECT_EQ(kGame.h(), 2);
  EXPECT_EQ(kGame.m(), 3);
}

TEST(GameConfigTest, RejectsNonPositiveDefiniteQL) {
  GameConfig cfg = kGame;
  cfg.QL << 1, 2, 2, 1;
  try {
    validate(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "QL not positive definite");
  }
}

TEST(GameConfigTest, RejectsBadBoxAndScalars) {
  GameConfig cfg = kGame;
  cfg.leader_box.upper(0) = 5.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = kGame;
  cfg.kappa = 0.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = kGame;
  cfg.lambda = -1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
  cfg = kGame;
  cfg.R2L(0, 1) = 1.0;
  EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(ParameterizationTest, PrecisionMatrixLayout) {
  const Eigen::MatrixXd Q = precision_matrix(kTheta0);
  EXPECT_EQ(Q(0, 0), 20.0);
  EXPECT_EQ(Q(0, 1), 10.0);
  EXPECT_EQ(Q(1, 0), 10.0);
  EXPECT_EQ(Q(1, 1), 30.0);
  EXPECT_EQ(params_from_precision<double>(Q), kTheta0);
  EXPECT_THROW(follower_dim(2), DomainError);
  EXPECT_EQ(follower_dim(6), 3);
}

TEST(ParameterizationTest, FeasibleSetMatchesDefinition) {
  EXPECT_TRUE(is_feasible(kTheta0, 1e-3));
  EXPECT_FALSE(is_feasible(ParamVector{1e-4, 0.0, 10.0}, 1e-3));   // theta1 < kappa
  EXPECT_FALSE(is_feasible(ParamVector{1.0, 1.0, 1.0}, 1e-3));     // det = 0
  EXPECT_TRUE(is_feasible(ParamVector{1.0, 0.0, 1e-3}, 1e-3));     // det == kappa
  EXPECT_FALSE(is_feasible(ParamVector{1.0, 0.0, 1e-3}, 1e-3, 1e-2));
}

TEST(FollowerCostTest, Examples) {
  EXPECT_DOUBLE_EQ(follower_cost(v2(0, 0), v2(10, 10), kTheta0, kGame), 0.0);
  EXPECT_DOUBLE_EQ(follower_cost(v2(1, 0), v2(0, 0), kTheta0, kGame), 10.0);
  EXPECT_DOUBLE_EQ(follower_cost(v2(1, 1), v2(10, 10), kTheta0, kGame), 675.0);
}

TEST(FollowerCostTest, InfeasibleThetaIsDomainError) {
  EXPECT_THROW(follower_cost(v2(1, 1), v2(10, 10), ParamVector{1.0, 2.0, 1.0}, kGame),
               DomainError);
}

TEST(LeaderCostTest, Examples) {
  EXPECT_DOUBLE_EQ(leader_cost(v2(0, 0), v2(0, 0), kGame), 0.0);
  EXPECT_DOUBLE_EQ(leader_cost(v2(1, 0), v2(0, 0), kGame), 20.5);
  // 1/2 (41+2+2+8) + (12+42+13+1) + 1/2 (400+34+34+4) = 26.5 + 68 + 236
  EXPECT_DOUBLE_EQ(leader_cost(v2(1, 1), v2(1, 1), kGame), 330.5);
  EXPECT_THROW(leader_cost(VectorXd(VectorXd::Zero(3)), v2(0, 0), kGame), DomainError);
}

TEST(CostTest, PureQuadraticPartsScaleByFour) {
  GameConfig cfg = kGame;
  cfg.R1L.setZero();
  cfg.R1F.setZero();
  RandomStream rng(7);
  for (int i = 0; i < 20; ++i) {
    const VectorXd uL = rng.normal_vector(2);
    const VectorXd uF = rng.normal_vector(2);
    EXPECT_NEAR(leader_cost<double>(2 * uL, 2 * uF, cfg), 4 * leader_cost(uL, uF, cfg),
                1e-9 * std::abs(leader_cost(uL, uF, cfg)) + 1e-12);
    EXPECT_NEAR(follower_cost<double>(2 * uF, 2 * uL, kTheta0, cfg),
                4 * follower_cost(uF, uL, kTheta0, cfg),
                1e-9 * std::abs(follower_cost(uF, uL, kTheta0, cfg)) + 1e-12);
  }
}

TEST(FollowerResponseTest, MeanVanishesWithoutCrossTerm) {
  GameConfig cfg = kGame;
  cfg.R1F.setZero();
  const auto d = follower_response(v2(37, 81), kTheta0, cfg);
  EXPECT_EQ(d.mu, v2(0, 0));
}

TEST(FollowerResponseTest, ReferenceMeanAndCovariance) {
  const auto d = follower_response(v2(10, 10), kTheta0, kGame);
  EXPECT_NEAR(d.mu(0), -6.4, 1e-12);
  EXPECT_NEAR(d.mu(1), -11.2, 1e-12);
  Eigen::Matrix2d sigma;
  sigma << 0.06, -0.02, -0.02, 0.04;
  EXPECT_LT((d.sigma - sigma).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FollowerResponseTest, ZeroRationalityIsRejected) {
  GameConfig cfg = kGame;
  cfg.lambda = 0.0;
  EXPECT_THROW(follower_response(v2(10, 10), kTheta0, cfg), DomainError);
}

TEST(FollowerResponseTest, CovarianceIsScaledInversePrecisionEverywhere) {
  RandomStream rng(11);
  GameConfig cfg = kGame;
  for (int i = 0; i < 50; ++i) {
    cfg.lambda = rng.uniform(0.1, 5.0);
    const ParamVector theta = random_interior_theta(rng);
    const auto d = follower_response(random_in_box(cfg.leader_box, rng), theta, cfg);
    const Eigen::MatrixXd expected = precision_matrix(theta).inverse() / cfg.lambda;
    EXPECT_LT((d.sigma - expected).cwiseAbs().maxCoeff(), 1e-13 * expected.cwiseAbs().maxCoeff());
    EXPECT_EQ(d.sigma, d.sigma.transpose());
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(d.sigma).info(), Eigen::Success);
  }
}

TEST(SampleFollowerTest, StandardNormalMean) {
  const FollowerDistribution d{VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
  RandomStream rng(1);
  VectorXd sum = VectorXd::Zero(2);
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_follower(d, rng);
  EXPECT_LT((sum / n).cwiseAbs().maxCoeff(), 0.02);
}

TEST(SampleFollowerTest, SameSeedAndIndexGiveIdenticalDraws) {
  const auto d = follower_response(v2(10, 10), kTheta0, kGame);
  for (int index : {0, 1, 17}) {
    RandomStream a(424242), b(424242);
    for (int i = 0; i < index; ++i) {
      sample_follower(d, a);
      sample_follower(d, b);
    }
    const VectorXd x = sample_follower(d, a);
    const VectorXd y = sample_follower(d, b);
    EXPECT_EQ(std::memcmp(x.data(), y.data(), sizeof(double) * 2), 0);
  }
}

TEST(SampleFollowerTest, EmpiricalCovarianceMatchesSigma) {
  const auto d = follower_response(v2(10, 10), kTheta0, kGame);
  RandomStream rng(2);
  const int n = 1000000;
  VectorXd sum = VectorXd::Zero(2);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const VectorXd x = sample_follower(d, rng) - d.mu;
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::MatrixXd cov = outer / n - (sum / n) * (sum / n).transpose();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      // Var of x_i x_j under a Gaussian: s_ii s_jj + s_ij^2
      const double se = std::sqrt((d.sigma(i, i) * d.sigma(j, j) + d.sigma(i, j) * d.sigma(i, j)) / n);
      EXPECT_NEAR(cov(i, j), d.sigma(i, j), 3 * se) << i << "," << j;
    }
  }
}

TEST(SampleFollowerTest, NonPdCovarianceIsRejected) {
  FollowerDistribution d{VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2)};
  d.sigma << 1, 2, 2, 1;
  RandomStream rng(0);
  EXPECT_THROW(sample_follower(d, rng), NumericalError);
}

TEST(LogDensityTest, ValueAtMean) {
  const auto d = follower_response(v2(10, 10), kTheta0, kGame);
  // -log(2 pi) + 1/2 log det Q, det Q = 500
  EXPECT_NEAR(log_density(d.mu, v2(10, 10), kTheta0, kGame), 1.2694269828017504, 1e-12);
}

TEST(LogDensityTest, IntegratesToOneOverWideGrid) {
  // Trapezoid rule on [-50, 50]^2; the integrand is smooth and vanishes at
  // the edges, so the rule converges spectrally.
  const VectorXd uL = v2(10, 10);
  const int nodes = 2001;
  const double step = 100.0 / (nodes - 1);
  double total = 0.0;
  VectorXd uF(2);
  for (int i = 0; i < nodes; ++i) {
    uF(0) = -50.0 + i * step;
    for (int j = 0; j < nodes; ++j) {
      uF(1) = -50.0 + j * step;
      total += std::exp(log_density(uF, uL, kTheta0, kGame));
    }
  }
  EXPECT_NEAR(total * step * step, 1.0, 1e-4);
}

TEST(LogDensityTest, IntegratesToOneOverSixSigmaBox) {
  RandomStream rng(5);
  GameConfig cfg = kGame;
  for (int rep = 0; rep < 5; ++rep) {
    cfg.lambda = rng.uniform(0.2, 3.0);
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(cfg.leader_box, rng);
    const auto d = follower_response(uL, theta, cfg);
    const Eigen::Vector2d half(6 * std::sqrt(d.sigma(0, 0)), 6 * std::sqrt(d.sigma(1, 1)));
    const int nodes = 401;
    double total = 0.0;
    VectorXd uF(2);
    for (int i = 0; i < nodes; ++i) {
      uF(0) = d.mu(0) - half(0) + 2 * half(0) * i / (nodes - 1);
      for (int j = 0; j < nodes; ++j) {
        uF(1) = d.mu(1) - half(1) + 2 * half(1) * j / (nodes - 1);
        total += std::exp(log_density(uF, uL, theta, cfg));
      }
    }
    total *= (2 * half(0) / (nodes - 1)) * (2 * half(1) / (nodes - 1));
    EXPECT_NEAR(total, 1.0, 1e-4);
  }
}

TEST(LogDensityTest, MatchesBoltzmannFormWithClosedFormNormalizer) {
  RandomStream rng(3);
  GameConfig cfg = kGame;
  for (int rep = 0; rep < 50; ++rep) {
    cfg.lambda = rng.uniform(0.5, 2.0);
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(cfg.leader_box, rng);
    const auto d = follower_response(uL, theta, cfg);
    const VectorXd uF = d.mu + 0.5 * rng.normal_vector(2).cwiseProduct(d.sigma.diagonal().cwiseSqrt());
    // Z = (2 pi / lambda)^{h/2} det(Q)^{-1/2} exp(lambda/2 b' Q^{-1} b), b = R1F uL,
    // with the 2x2 inverse written out by hand and evaluated in long double.
    using LD = long double;
    const LD a = theta[0], b = theta[1], c = theta[2];
    const LD det = a * c - b * b;
    Eigen::Matrix<LD, 2, 2> Qinv;
    Qinv << c / det, -b / det, -b / det, a / det;
    const Eigen::Matrix<LD, 2, 1> bvec = cfg.R1F.cast<LD>() * uL.cast<LD>();
    const LD lam = cfg.lambda;
    const LD logZ = std::log(2 * std::numbers::pi_v<LD> / lam) - 0.5L * std::log(det) +
                    lam / 2 * bvec.dot(Qinv * bvec);
    ParamVectorT<LD> theta_ld{a, b, c};
    const LD jf = follower_cost<LD>(uF.cast<LD>(), uL.cast<LD>(), theta_ld, cfg.template cast<LD>());
    const double lhs = log_density(uF, uL, theta, cfg);
    // exp(lhs) / (exp(-lambda J^F) / Z) - 1
    EXPECT_NEAR(std::expm1(static_cast<double>(lhs - (-lam * jf - logZ))), 0.0, 1e-10);
    EXPECT_NEAR(log_normalizer(uL, theta, cfg), static_cast<double>(logZ),
                1e-12 * std::abs(static_cast<double>(logZ)));
  }
}

TEST(LogDensityGradTest, MatchesCentralDifferences) {
  RandomStream rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(kGame.leader_box, rng);
    const auto d = follower_response(uL, theta, kGame);
    const VectorXd uF = d.mu + 3 * rng.normal_vector(2).cwiseProduct(d.sigma.diagonal().cwiseSqrt());
    const VectorXd g = log_density_grad_theta(uF, uL, theta, kGame);
    const VectorXd fd = central_difference(
        [&](const VectorXd& t) { return log_density(uF, uL, ParamVector(t), kGame); },
        theta.theta, 1e-5);
    EXPECT_LT(max_relative_error(g, fd), 1e-5) << "rep " << rep;
  }
}

TEST(LogDensityGradTest, AtTheMeanOnlyTheLogDetTermRemains) {
  // At uF = mu: grad_i = 1/2 tr(Q^{-1} E_i) = (Qinv11/2, Qinv12, Qinv22/2).
  const VectorXd uL = v2(10, 10);
  const auto d = follower_response(uL, kTheta0, kGame);
  const VectorXd g = log_density_grad_theta(d.mu, uL, kTheta0, kGame);
  EXPECT_NEAR(g(0), 0.03, 1e-12);
  EXPECT_NEAR(g(1), -0.02, 1e-12);
  EXPECT_NEAR(g(2), 0.02, 1e-12);
}

TEST(LogDensityGradTest, ScoreHasZeroMean) {
  const VectorXd uL = v2(10, 10);
  const auto d = follower_response(uL, kTheta0, kGame);
  RandomStream rng(17);
  const int n = 1000000;
  VectorXd sum = VectorXd::Zero(3), sumsq = VectorXd::Zero(3);
  for (int i = 0; i < n; ++i) {
    const VectorXd g = log_density_grad_theta(sample_follower(d, rng), uL, kTheta0, kGame);
    sum += g;
    sumsq += g.cwiseProduct(g);
  }
  const VectorXd mean = sum / n;
  const VectorXd se = ((sumsq / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
  for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(mean(i)), 3 * se(i)) << i;
}

TEST(LogDensityGradTest, BoundaryThetaIsDomainError) {
  // det Q = 5e-3: feasible, but within 10 kappa of the boundary.
  const ParamVector near_edge{1.0, 0.0, 5e-3};
  EXPECT_NO_THROW(log_density(v2(0, 0), v2(10, 10), near_edge, kGame));
  EXPECT_THROW(log_density_grad_theta(v2(0, 0), v2(10, 10), near_edge, kGame), DomainError);
  EXPECT_THROW(log_density_hessian_theta(v2(0, 0), v2(10, 10), near_edge, kGame), DomainError);
}

TEST(LogDensityHessianTest, MatchesDifferencesOfGradient) {
  RandomStream rng(19);
  for (int rep = 0; rep < 100; ++rep) {
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(kGame.leader_box, rng);
    const VectorXd uF = rng.normal_vector(2) * 5;
    const Eigen::MatrixXd H = log_density_hessian_theta(uF, uL, theta, kGame);
    for (int i = 0; i < 3; ++i) {
      const VectorXd fd = central_difference(
          [&](const VectorXd& t) {
            return log_density_grad_theta(uF, uL, ParamVector(t), kGame)(i);
          },
          theta.theta, 1e-5);
      EXPECT_LT(max_relative_error(H.row(i).transpose(), fd), 1e-4) << "rep " << rep;
    }
    EXPECT_EQ(H, H.transpose());
  }
}

TEST(LogDensityHessianTest, NegativeDefiniteAtInteriorPoints) {
  RandomStream rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(kGame.leader_box, rng);
    const Eigen::MatrixXd H = log_density_hessian_theta(rng.normal_vector(2), uL, theta, kGame);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    EXPECT_LT(eig.eigenvalues().maxCoeff(), 0.0);
  }
}

TEST(TemplatedScalarTest, LongDoubleAgreesWithDouble) {
  const GameConfigT<long double> cfg = reference_game<long double>();
  const ParamVectorT<long double> theta{20.0L, 10.0L, 30.0L};
  VectorX<long double> uL(2), uF(2);
  uL << 10, 10;
  uF << -6, -11;
  const long double ld = log_density(uF, uL, theta, cfg);
  EXPECT_NEAR(static_cast<double>(ld), log_density(v2(-6, -11), v2(10, 10), kTheta0, kGame), 1e-12);
}

TEST(RandomStreamTest, SplitSeedsAreDistinctAndStable) {
  EXPECT_NE(split_seed(2024, 0), split_seed(2024, 1));
  EXPECT_NE(split_seed(2024, 0), split_seed(2025, 0));
  EXPECT_EQ(split_seed(2024, 3), split_seed(2024, 3));
  RandomStream a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
  RandomStream u(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

}  // namespace
}  // namespace activeinv
