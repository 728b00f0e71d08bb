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

// File formats.
//
// Trajectory CSV, one row per step:
//   path_id,t,uL_1..uL_n,uF_1..uF_h,theta1..theta_m,rho,criterion,expected_cost
// which for the 2/2/3-dimensional game is
//   path_id,t,uL_1,uL_2,uF_1,uF_2,theta1,theta2,theta3,rho,criterion,expected_cost
//
// Error-series CSV: t,min,p25,median,p75
// Bias CSV:         component,sample
// Density CSV:      component,x,density
// Normality CSV:    component,qq_correlation,skewness,excess_kurtosis
// Fisher map CSV:   uL_1..uL_n,H
//
// Numbers are written with 17 significant digits, which round-trips doubles.
// The JSON bundle holds {"metadata": {...}, "trajectories": [...]}.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "activeinv/active_loop.hpp"
#include "activeinv/box_search.hpp"
#include "activeinv/experiment.hpp"
#include "activeinv/summary.hpp"

namespace activeinv {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

std::string format_double(double v);

std::vector<std::string> trajectory_csv_header(Eigen::Index n, Eigen::Index h,
                                               Eigen::Index m);

void write_trajectories_csv(const std::vector<RunTrajectory>& runs,
                            const std::filesystem::path& path);
// Run metadata (algorithm, criterion, seed) is not part of the CSV and comes
// back defaulted.
std::vector<RunTrajectory> read_trajectories_csv(const std::filesystem::path& path);

struct TrajectoryBundle {
  nlohmann::json metadata;
  std::vector<RunTrajectory> runs;
};

// metadata = {"artifact", "version", "master_seed", "config"}
nlohmann::json bundle_metadata(const ExperimentConfig& ec);
nlohmann::json to_json(const RunTrajectory& run);
RunTrajectory trajectory_from_json(const nlohmann::json& j);

void write_bundle_json(const TrajectoryBundle& bundle, const std::filesystem::path& path);
TrajectoryBundle read_bundle_json(const std::filesystem::path& path);

void write_error_series_csv(const ErrorSeries& series, const std::filesystem::path& path);
void write_bias_csv(const BiasSummary& bias, const std::filesystem::path& path);
void write_density_csv(const BiasSummary& bias, const std::filesystem::path& path);
void write_normality_csv(const std::vector<NormalityReport>& reports,
                         const std::filesystem::path& path);
void write_fisher_map_csv(const std::vector<GridCell>& cells,
                          const std::filesystem::path& path);

}  // namespace activeinv
