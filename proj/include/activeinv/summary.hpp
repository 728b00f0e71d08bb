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

// Summary statistics over batches of trajectories.

#pragma once

#include <Eigen/Core>

#include <vector>

#include "activeinv/active_loop.hpp"

namespace activeinv {

struct ComponentBias {
  std::vector<double> samples;  // sqrt(T) (theta_hat_i(T) - theta0_i), one per path
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single sample
  // Gaussian kernel density with Silverman's bandwidth on 256 points spanning
  // [min - 3 bw, max + 3 bw]. When every sample is equal the bandwidth is 0
  // and the curve is the single point (value, 1): a unit point mass.
  double bandwidth = 0.0;
  std::vector<double> density_x;
  std::vector<double> density_y;
};

struct BiasSummary {
  int horizon = 0;
  std::vector<ComponentBias> components;
};

// Throws DomainError for an empty batch or runs of unequal length.
BiasSummary summarize_bias(const std::vector<RunTrajectory>& runs,
                           const ParamVector& theta_true);

struct ErrorRow {
  int t = 0;
  double min = 0.0;
  double p25 = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

struct ErrorSeries {
  std::vector<ErrorRow> rows;  // rows[t - 1]
};

// Order statistics across paths of ||uL(t) - uL*|| / ||uL*||. Percentiles
// interpolate linearly between order statistics.
ErrorSeries relative_error_series(const std::vector<RunTrajectory>& runs,
                                  const Eigen::VectorXd& uL_star);

struct NormalityReport {
  double qq_correlation = 0.0;  // against normal quantiles at (i - 3/8) / (n + 1/4)
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

// One report per parameter component; needs at least 20 samples.
std::vector<NormalityReport> normality_diagnostics(const BiasSummary& bias);

// Linear-interpolation quantile of unsorted data, q in [0, 1].
double quantile(std::vector<double> values, double q);

// Helpers shared with the tests.
double sample_mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);
NormalityReport normality_report(const std::vector<double>& x);

}  // namespace activeinv
