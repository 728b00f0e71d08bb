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

#include "activeinv/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace activeinv {
namespace {

constexpr int kDensityPoints = 256;

void kernel_density(ComponentBias& c) {
  const auto& x = c.samples;
  const double n = static_cast<double>(x.size());
  const double sd = std::sqrt(c.variance);
  const double iqr = quantile(x, 0.75) - quantile(x, 0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  c.bandwidth = 0.9 * spread * std::pow(n, -0.2);

  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  if (!(c.bandwidth > 0.0)) {
    c.bandwidth = 0.0;
    c.density_x = {*lo_it};
    c.density_y = {1.0};
    return;
  }
  const double lo = *lo_it - 3.0 * c.bandwidth;
  const double hi = *hi_it + 3.0 * c.bandwidth;
  const double norm = 1.0 / (n * c.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  c.density_x.resize(kDensityPoints);
  c.density_y.resize(kDensityPoints);
  for (int i = 0; i < kDensityPoints; ++i) {
    const double xi = lo + (hi - lo) * i / (kDensityPoints - 1);
    double acc = 0.0;
    for (double s : x) {
      const double z = (xi - s) / c.bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    c.density_x[i] = xi;
    c.density_y[i] = acc * norm;
  }
}

std::size_t common_length(const std::vector<RunTrajectory>& runs) {
  if (runs.empty()) throw DomainError("no trajectories to summarize");
  const std::size_t len = runs.front().steps.size();
  if (len == 0) throw DomainError("trajectory has no steps");
  for (const auto& r : runs)
    if (r.steps.size() != len) throw DomainError("trajectories have different horizons");
  return len;
}

}  // namespace

double sample_mean(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("mean of no samples");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of no samples");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BiasSummary summarize_bias(const std::vector<RunTrajectory>& runs,
                           const ParamVector& theta_true) {
  const std::size_t horizon = common_length(runs);
  const double scale = std::sqrt(static_cast<double>(horizon));
  BiasSummary out;
  out.horizon = static_cast<int>(horizon);
  out.components.resize(static_cast<std::size_t>(theta_true.size()));
  for (Eigen::Index i = 0; i < theta_true.size(); ++i) {
    auto& c = out.components[static_cast<std::size_t>(i)];
    for (const auto& r : runs) {
      const ParamVector& est = r.steps.back().theta_hat;
      if (est.size() != theta_true.size()) throw DomainError("parameter dimension mismatch");
      c.samples.push_back(scale * (est[i] - theta_true[i]));
    }
    c.mean = sample_mean(c.samples);
    c.variance = sample_variance(c.samples);
    kernel_density(c);
  }
  return out;
}

ErrorSeries relative_error_series(const std::vector<RunTrajectory>& runs,
                                  const Eigen::VectorXd& uL_star) {
  const double ref = uL_star.norm();
  if (!(ref > 0.0)) throw DomainError("equilibrium action must be nonzero");
  const std::size_t len = common_length(runs);
  ErrorSeries out;
  out.rows.reserve(len);
  std::vector<double> err(runs.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t p = 0; p < runs.size(); ++p)
      err[p] = (runs[p].steps[t].uL - uL_star).norm() / ref;
    ErrorRow row;
    row.t = runs.front().steps[t].t;
    row.min = *std::min_element(err.begin(), err.end());
    row.max = *std::max_element(err.begin(), err.end());
    row.p25 = quantile(err, 0.25);
    row.median = quantile(err, 0.5);
    row.p75 = quantile(err, 0.75);
    out.rows.push_back(row);
  }
  return out;
}

NormalityReport normality_report(const std::vector<double>& x) {
  if (x.size() < 20) throw DomainError("normality diagnostics need at least 20 samples");
  const double n = static_cast<double>(x.size());
  const double m = sample_mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  NormalityReport r;
  if (!(m2 > 0.0)) return r;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal_distribution<double> standard;
  std::vector<double> q(sorted.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = boost::math::quantile(standard, (static_cast<double>(i + 1) - 0.375) / (n + 0.25));
  const double mq = sample_mean(q);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sxy += (sorted[i] - m) * (q[i] - mq);
    sxx += (sorted[i] - m) * (sorted[i] - m);
    syy += (q[i] - mq) * (q[i] - mq);
  }
  r.qq_correlation = sxy / std::sqrt(sxx * syy);
  return r;
}

std::vector<NormalityReport> normality_diagnostics(const BiasSummary& bias) {
  std::vector<NormalityReport> out;
  for (const auto& c : bias.components) out.push_back(normality_report(c.samples));
  return out;
}

}  // namespace activeinv
