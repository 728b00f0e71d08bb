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

#include "activeinv/box_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace activeinv {
namespace {

bool better(const GridCell& a, const GridCell& b, double tie_tolerance) {
  const double tol = tie_tolerance * std::max({1.0, std::abs(a.value), std::abs(b.value)});
  if (a.value < b.value - tol) return true;
  if (b.value < a.value - tol) return false;
  return lexicographically_less(a.u, b.u);
}

Eigen::VectorXd numeric_gradient(const BoxObjective& f, const Box& box,
                                 const Eigen::VectorXd& u) {
  Eigen::VectorXd g(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double step = 1e-6 * (box.upper(k) - box.lower(k));
    const double hi = std::min(u(k) + step, box.upper(k));
    const double lo = std::max(u(k) - step, box.lower(k));
    Eigen::VectorXd up = u;
    Eigen::VectorXd down = u;
    up(k) = hi;
    down(k) = lo;
    g(k) = (f(up) - f(down)) / (hi - lo);
  }
  return g;
}

// Nelder-Mead on the box, every trial point projected onto it. The simplex
// adapts to narrow curved ridges and kinks where the gradient phase stalls.
GridCell simplex_polish(const BoxObjective& f, const Box& box, GridCell start,
                        double initial_size, int max_evals) {
  const Eigen::Index n = box.dim();
  std::vector<GridCell> simplex;
  simplex.push_back(start);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd u = start.u;
    u(k) += u(k) + initial_size <= box.upper(k) ? initial_size : -initial_size;
    u = box.clamp(u);
    simplex.push_back({u, f(u)});
  }
  int evals = static_cast<int>(n);
  const auto by_value = [](const GridCell& a, const GridCell& b) {
    if (a.value != b.value) return a.value < b.value;
    return lexicographically_less(a.u, b.u);
  };
  const double width = box.width().maxCoeff();
  auto trial = [&](const Eigen::VectorXd& u) {
    ++evals;
    const Eigen::VectorXd c = box.clamp(u);
    return GridCell{c, f(c)};
  };

  while (evals < max_evals) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    double size = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
      size = std::max(size, (simplex[i].u - simplex[0].u).cwiseAbs().maxCoeff());
    if (size <= 1e-12 * width) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i].u;
    centroid /= static_cast<double>(n);
    GridCell& worst = simplex.back();
    const GridCell& second = simplex[simplex.size() - 2];

    const GridCell reflected = trial(centroid + (centroid - worst.u));
    if (reflected.value < simplex[0].value) {
      const GridCell expanded = trial(centroid + 2.0 * (centroid - worst.u));
      worst = expanded.value < reflected.value ? expanded : reflected;
      continue;
    }
    if (reflected.value < second.value) {
      worst = reflected;
      continue;
    }
    const bool outside = reflected.value < worst.value;
    const GridCell contracted =
        trial(outside ? centroid + 0.5 * (reflected.u - centroid)
                      : centroid + 0.5 * (worst.u - centroid));
    if (contracted.value < std::min(worst.value, reflected.value)) {
      worst = contracted;
      continue;
    }
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      simplex[i] = trial(simplex[0].u + 0.5 * (simplex[i].u - simplex[0].u));
    }
  }
  return *std::min_element(simplex.begin(), simplex.end(), by_value);
}

}  // namespace

bool lexicographically_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

std::vector<Eigen::VectorXd> box_grid(const Box& box, int resolution) {
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  const Eigen::Index n = box.dim();
  std::size_t total = 1;
  for (Eigen::Index k = 0; k < n; ++k) total *= static_cast<std::size_t>(resolution);

  std::vector<Eigen::VectorXd> nodes;
  nodes.reserve(total);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Eigen::VectorXd u(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double frac = static_cast<double>(idx[k]) / (resolution - 1);
      u(k) = idx[k] == resolution - 1 ? box.upper(k)
                                      : box.lower(k) + frac * (box.upper(k) - box.lower(k));
    }
    nodes.push_back(std::move(u));
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      if (++idx[k] < resolution) break;
      idx[k] = 0;
    }
  }
  return nodes;
}

GridCell refine_in_box(const BoxObjective& f, const Box& box,
                       const Eigen::VectorXd& start, int max_iters) {
  GridCell cur{box.clamp(start), 0.0};
  cur.value = f(cur.u);
  const double width = box.width().maxCoeff();
  double alpha_scale = 0.1 * width;

  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd g = numeric_gradient(f, box, cur.u);
    const double gnorm = g.norm();
    if (!(gnorm > 0.0) || !std::isfinite(gnorm)) break;
    double alpha = alpha_scale / gnorm;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      const Eigen::VectorXd cand = box.clamp(cur.u - alpha * g);
      const Eigen::VectorXd step = cand - cur.u;
      if (step.norm() <= 1e-14 * width) break;
      const double v = f(cand);
      if (v < cur.value && v <= cur.value + 1e-4 * g.dot(step)) {
        cur = {cand, v};
        accepted = true;
        alpha_scale = std::min(2.0 * alpha * gnorm, width);
        break;
      }
    }
    if (!accepted) break;
  }

  // Restart the simplex from the incumbent until it stops improving.
  double size = 0.01 * width;
  for (int round = 0; round < 8; ++round) {
    const GridCell next = simplex_polish(f, box, cur, size, 400);
    if (!(next.value < cur.value - 1e-12 * std::max(1.0, std::abs(cur.value)))) break;
    cur = next;
    size = std::max(0.1 * size, 1e-6 * width);
  }
  return cur;
}

BoxSearchResult minimize_over_box(const BoxObjective& f, const Box& box,
                                  const BoxSearchOptions& options) {
  std::vector<GridCell> cells;
  for (auto& u : box_grid(box, options.grid_resolution)) {
    const double v = f(u);
    cells.push_back({std::move(u), v});
  }
  const double tie = options.tie_tolerance;
  // Exact (value, lexicographic) order for the sort; the tolerance-aware
  // comparison is not a strict weak ordering and is only used in the scan.
  const auto keep = std::min<std::size_t>(
      cells.size(), static_cast<std::size_t>(std::max(options.local_starts, 1)));
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(keep),
                    cells.end(),
                    [](const GridCell& a, const GridCell& b) {
                      if (a.value != b.value) return a.value < b.value;
                      return lexicographically_less(a.u, b.u);
                    });
  cells.resize(keep);

  GridCell best = cells.front();
  for (const auto& cell : cells) {
    const GridCell refined = refine_in_box(f, box, cell.u, options.max_local_iters);
    if (better(refined, best, tie)) best = refined;
  }
  return {best.u, best.value, std::move(cells)};
}

}  // namespace activeinv
