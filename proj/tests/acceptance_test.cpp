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

// Acceptance checks. Each criterion prints one line
//   PASS ACn <details>   or   FAIL ACn <details>
// Usage: acceptance_test [n ...]   (no arguments runs all eight)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "activeinv/active_loop.hpp"
#include "activeinv/estimation.hpp"
#include "activeinv/experiment.hpp"
#include "activeinv/fisher_design.hpp"
#include "activeinv/io.hpp"
#include "activeinv/summary.hpp"
#include "test_support.hpp"

namespace {

using namespace activeinv;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::central_difference;
using testing::max_relative_error;
using testing::random_in_box;
using testing::random_interior_theta;

const GameConfig kGame = reference_game();
const ParamVector kTheta0{20.0, 10.0, 30.0};
constexpr std::uint64_t kSeed = 2024;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Mean and standard error of a scalar sample accumulated online.
struct Moments {
  double sum = 0.0, sumsq = 0.0;
  long long n = 0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const {
    const double m = mean();
    return std::sqrt(std::max(sumsq / static_cast<double>(n) - m * m, 0.0) / static_cast<double>(n));
  }
};

Outcome ac1() {
  const VectorXd ev =
      Eigen::SelfAdjointEigenSolver<MatrixXd>(compute_C(kTheta0, kGame)).eigenvalues().reverse();
  const double want_hi = 261.46728326, want_lo = 5.66471674;
  const double err = std::max(std::abs(ev(0) - want_hi), std::abs(ev(1) - want_lo));
  return {err <= 1e-6,
          fmt("eig C(theta0) = [%.8f, %.8f], expected [%.8f, %.8f], max error %.3g (tol 1e-6); "
              "ratio to expected = [%.6f, %.6f]",
              ev(0), ev(1), want_hi, want_lo, err, ev(0) / want_hi, ev(1) / want_lo)};
}

Outcome ac2() {
  RandomStream pick(split_seed(kSeed, 2));
  const long long n = 1000000;
  int checks = 0, misses = 0;
  double worst = 0.0;  // largest |closed - mc| / se
  for (int rep = 0; rep < 20; ++rep) {
    const ParamVector theta = random_interior_theta(pick);
    const ParamVector query = random_interior_theta(pick);
    const VectorXd uL = random_in_box(kGame.leader_box, pick);
    const auto d = follower_response(uL, theta, kGame);
    RandomStream rng(split_seed(kSeed, 100 + static_cast<std::uint64_t>(rep)));

    MatrixXd sum = MatrixXd::Zero(3, 3), sumsq = MatrixXd::Zero(3, 3);
    Moments cost, logd;
    for (long long i = 0; i < n; ++i) {
      const VectorXd uF = sample_follower(d, rng);
      const VectorXd g = log_density_grad_theta(uF, uL, theta, kGame);
      const MatrixXd outer = g * g.transpose();
      sum += outer;
      sumsq += outer.cwiseProduct(outer);
      cost.add(leader_cost(uL, uF, kGame));
      logd.add(log_density(uF, uL, query, kGame));
    }
    const MatrixXd mean = sum / static_cast<double>(n);
    const MatrixXd se =
        ((sumsq / static_cast<double>(n) - mean.cwiseProduct(mean)) / static_cast<double>(n))
            .cwiseSqrt();
    const MatrixXd F = oim_closed_form(uL, theta, kGame);
    auto check = [&](double closed, double mc, double s) {
      ++checks;
      const double z = std::abs(closed - mc) / s;
      worst = std::max(worst, z);
      if (z > 3.0) ++misses;
    };
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) check(F(i, j), mean(i, j), se(i, j));
    check(expected_leader_cost(uL, theta, kGame), cost.mean(), cost.se());
    check(expected_log_density(uL, query, theta, kGame), logd.mean(), logd.se());
  }
  return {misses == 0, fmt("%d closed-form vs Monte-Carlo checks (N=1e6, 20 random points), "
                           "%d beyond 3 SE, largest deviation %.2f SE",
                           checks, misses, worst)};
}

Outcome ac3() {
  RandomStream rng(split_seed(kSeed, 3));
  double worst_grad = 0.0, worst_hess = 0.0, max_eig = -std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 100; ++rep) {
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(kGame.leader_box, rng);
    const auto d = follower_response(uL, theta, kGame);
    const VectorXd uF =
        d.mu + 3.0 * rng.normal_vector(2).cwiseProduct(d.sigma.diagonal().cwiseSqrt());
    const VectorXd fd = central_difference(
        [&](const VectorXd& t) { return log_density(uF, uL, ParamVector(t), kGame); },
        theta.theta, 1e-5);
    worst_grad = std::max(worst_grad, max_relative_error(log_density_grad_theta(uF, uL, theta, kGame), fd));
    const MatrixXd H = log_density_hessian_theta(uF, uL, theta, kGame);
    for (int i = 0; i < 3; ++i) {
      const VectorXd row = central_difference(
          [&](const VectorXd& t) {
            return log_density_grad_theta(uF, uL, ParamVector(t), kGame)(i);
          },
          theta.theta, 1e-5);
      worst_hess = std::max(worst_hess, max_relative_error(H.row(i).transpose(), row));
    }
  }
  for (int rep = 0; rep < 50; ++rep) {
    const ParamVector theta = random_interior_theta(rng);
    const VectorXd uL = random_in_box(kGame.leader_box, rng);
    const MatrixXd H = log_density_hessian_theta(rng.normal_vector(2), uL, theta, kGame);
    max_eig = std::max(max_eig, Eigen::SelfAdjointEigenSolver<MatrixXd>(H).eigenvalues().maxCoeff());
  }
  const bool pass = worst_grad <= 1e-5 && worst_hess <= 1e-4 && max_eig < 0.0;
  return {pass, fmt("gradient rel err %.3g (tol 1e-5), Hessian rel err %.3g (tol 1e-4) on 100 "
                    "inputs; largest Hessian eigenvalue over 50 interior points %.3g (< 0)",
                    worst_grad, worst_hess, max_eig)};
}

// Objective tolerance: 1e-9 relative to the grid optimum, floored at 1e-9.
double tol(double v) { return 1e-9 * std::max(1.0, std::abs(v)); }

Outcome ac4() {
  RandomStream rng(split_seed(kSeed, 4));
  std::vector<std::string> failures;

  // MLE against a 21^3 grid on [5, 50]^3.
  double mle_gap = -std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 20; ++rep) {
    Dataset data;
    const int t = 3 + rep % 8;
    for (int i = 0; i < t; ++i) {
      const VectorXd uL = random_in_box(kGame.leader_box, rng);
      data.append(uL, sample_follower(follower_response(uL, kTheta0, kGame), rng));
    }
    const MleResult r = mle(data, MleSettings{}, kGame);
    double grid_best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 20; ++i)
      for (int j = 0; j <= 20; ++j)
        for (int k = 0; k <= 20; ++k) {
          const ParamVector theta{5 + 2.25 * i, 5 + 2.25 * j, 5 + 2.25 * k};
          if (is_feasible(theta, kGame.kappa))
            grid_best = std::max(grid_best, log_likelihood(theta, data, kGame));
        }
    mle_gap = std::max(mle_gap, grid_best - r.loglik);
    if (r.loglik < grid_best - tol(grid_best) || !r.converged)
      failures.push_back(fmt("mle rep %d", rep));
  }

  const auto grid101 = box_grid(kGame.leader_box, 101);
  std::vector<ParamVector> thetas{kTheta0};
  for (int i = 0; i < 4; ++i) thetas.push_back(random_interior_theta(rng));

  // maximize_criterion and query_alg2 against the 101 x 101 grid.
  double crit_gap = -std::numeric_limits<double>::infinity();
  double query_gap = -std::numeric_limits<double>::infinity();
  for (const auto& theta : thetas) {
    for (Criterion c : {Criterion::A, Criterion::D, Criterion::E}) {
      const double v = information_value(maximize_criterion(theta, c, kGame), theta, c, kGame);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& g : grid101) best = std::max(best, information_value(g, theta, c, kGame));
      crit_gap = std::max(crit_gap, (best - v) / std::max(1.0, std::abs(best)));
      if (v < best - tol(best)) failures.push_back(fmt("maximize_criterion %s", to_string(c).data()));

      for (double r : {0.0, 1.0, 1e3, 1e6, 4e7}) {
        auto objective = [&](const VectorXd& u) {
          return expected_leader_cost(u, theta, kGame) - r * information_value(u, theta, c, kGame);
        };
        const double q = objective(query_alg2(theta, r, c, kGame));
        double qbest = std::numeric_limits<double>::infinity();
        for (const auto& g : grid101) qbest = std::min(qbest, objective(g));
        query_gap = std::max(query_gap, (q - qbest) / std::max(1.0, std::abs(qbest)));
        if (q > qbest + tol(qbest))
          failures.push_back(fmt("query_alg2 %s rho=%g", to_string(c).data(), r));
      }
    }
  }

  // Equilibrium against the 1001 x 1001 grid.
  const EquilibriumResult eq = stackelberg_equilibrium(kTheta0, kGame);
  double eq_best = std::numeric_limits<double>::infinity();
  for (const auto& g : box_grid(kGame.leader_box, 1001))
    eq_best = std::min(eq_best, expected_leader_cost(g, kTheta0, kGame));
  if (eq.cost > eq_best + tol(eq_best)) failures.push_back("equilibrium");

  std::string detail = fmt(
      "mle worst (grid - mle) %.3g over 20 datasets; criterion worst relative shortfall %.3g, "
      "query worst relative excess %.3g over %zu (theta, criterion, rho) cases; equilibrium "
      "cost %.10f vs 1001^2 grid %.10f",
      mle_gap, crit_gap, query_gap, thetas.size() * 3 * 5, eq.cost, eq_best);
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

VectorXd final_bias_variances(const std::vector<RunTrajectory>& runs) {
  const BiasSummary b = summarize_bias(runs, kTheta0);
  VectorXd v(3);
  for (int c = 0; c < 3; ++c) v(c) = b.components[static_cast<std::size_t>(c)].variance;
  return v;
}

Outcome ac5() {
  ExperimentConfig base = table1_experiment(Algorithm::Uniform);
  base.master_seed = kSeed;
  const VectorXd uniform = final_bias_variances(run_experiment(base));
  std::string detail = fmt("uniform variances [%.4g, %.4g, %.4g]", uniform(0), uniform(1), uniform(2));
  bool pass = true;
  for (Criterion c : {Criterion::D, Criterion::A, Criterion::E}) {
    ExperimentConfig ec = table1_experiment(Algorithm::ActiveLearning);
    ec.criterion = c;
    ec.master_seed = kSeed;
    const VectorXd v = final_bias_variances(run_experiment(ec));
    const int wins = static_cast<int>((v.array() <= uniform.array()).count());
    pass = pass && wins >= 2;
    detail += fmt("; %s [%.4g, %.4g, %.4g] (%d/3 <= uniform)", to_string(c).data(), v(0), v(1),
                  v(2), wins);
  }
  return {pass, detail};
}

Outcome ac6() {
  ExperimentConfig ec = table1_experiment(Algorithm::ActiveLearning);
  ec.master_seed = kSeed;
  const auto runs = run_experiment(ec);
  std::vector<double> at5, at20;
  for (const auto& r : runs) {
    at5.push_back((r.steps[4].theta_hat.theta - kTheta0.theta).norm());
    at20.push_back((r.steps[19].theta_hat.theta - kTheta0.theta).norm());
  }
  const double m5 = quantile(at5, 0.5), m20 = quantile(at20, 0.5);

  ExperimentConfig longer = ec;
  longer.horizon = 200;
  longer.num_paths = 200;
  const auto reports = normality_diagnostics(summarize_bias(run_experiment(longer), kTheta0));
  double min_qq = 1.0;
  for (const auto& r : reports) min_qq = std::min(min_qq, r.qq_correlation);
  return {m20 < m5 && min_qq >= 0.95,
          fmt("median ||theta_hat - theta0||: T=5 %.4g, T=20 %.4g (50 paths); QQ correlation at "
              "T=200, 200 paths: [%.4f, %.4f, %.4f] (min >= 0.95)",
              m5, m20, reports[0].qq_correlation, reports[1].qq_correlation,
              reports[2].qq_correlation)};
}

Outcome ac7() {
  ExperimentConfig alg2 = table1_experiment(Algorithm::ActiveInverseGame);
  alg2.master_seed = kSeed;
  ExperimentConfig base = table1_experiment(Algorithm::NoExploration);
  base.master_seed = kSeed;
  const VectorXd star = stackelberg_equilibrium(kTheta0, kGame).uL_star;
  const ErrorSeries a = relative_error_series(run_experiment(alg2), star);
  const ErrorSeries b = relative_error_series(run_experiment(base), star);
  const double a20 = a.rows[19].median, b20 = b.rows[19].median;
  const double a100 = a.rows[99].median, b100 = b.rows[99].median;
  const double rel100 = std::abs(a100 - b100) / b100;
  return {a20 < b20 && rel100 < 0.2,
          fmt("median relative error at t=20: alg2 %.5g vs no-exploration %.5g; at t=100: %.5g "
              "vs %.5g (difference %.1f%% of baseline, < 20%%)",
              a20, b20, a100, b100, 100.0 * rel100)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome ac8() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "activeinv_acceptance_ac8";
  fs::remove_all(dir);
  std::vector<std::string> failures;
  for (Algorithm alg : {Algorithm::ActiveLearning, Algorithm::ActiveInverseGame,
                        Algorithm::Uniform, Algorithm::NoExploration}) {
    ExperimentConfig ec = table1_experiment(alg);
    ec.num_paths = 5;
    ec.horizon = 10;
    ec.master_seed = kSeed;
    const std::string name(to_string(alg));
    const auto first = run_experiment(ec);
    const auto second = run_experiment(ec);
    write_trajectories_csv(first, dir / (name + "_1.csv"));
    write_trajectories_csv(second, dir / (name + "_2.csv"));
    write_bundle_json({bundle_metadata(ec), first}, dir / (name + "_1.json"));
    write_bundle_json({bundle_metadata(ec), second}, dir / (name + "_2.json"));
    if (slurp(dir / (name + "_1.csv")) != slurp(dir / (name + "_2.csv")))
      failures.push_back(name + " csv bytes differ");
    if (slurp(dir / (name + "_1.json")) != slurp(dir / (name + "_2.json")))
      failures.push_back(name + " json bytes differ");
    if (read_bundle_json(dir / (name + "_1.json")).runs != first)
      failures.push_back(name + " json round trip");
    const auto csv = read_trajectories_csv(dir / (name + "_1.csv"));
    bool csv_ok = csv.size() == first.size();
    for (std::size_t i = 0; csv_ok && i < csv.size(); ++i)
      csv_ok = csv[i].steps == first[i].steps && csv[i].path_id == first[i].path_id;
    if (!csv_ok) failures.push_back(name + " csv round trip");
    save_config(ec, dir / (name + ".cfg"));
    if (to_json(load_config(dir / (name + ".cfg"))) != to_json(ec))
      failures.push_back(name + " config round trip");
  }
  fs::remove_all(dir);
  std::string detail =
      "4 algorithms x 5 paths x 10 steps: reruns byte-identical (CSV, JSON); CSV, JSON and "
      "config round trips exact";
  for (const auto& f : failures) detail += "; failed: " + f;
  return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria{
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6}, {7, ac7}, {8, ac8}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [id, fn] : criteria) selected.push_back(id);

  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("FAIL AC%d unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s AC%d %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
