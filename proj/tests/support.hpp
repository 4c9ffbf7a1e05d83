#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.
// Nothing here calls into the library's numerics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "softprior/env.hpp"

namespace oracle {

using softprior::GridWorld;
using softprior::Position;

// Value iteration on a deterministic world (noise 0, no random termination).
// Walls and the border block movement; terminal cells absorb.
struct ViResult {
  std::vector<std::array<double, 4>> q;  // per cell index
  int sweeps = 0;
};

inline ViResult value_iteration(const GridWorld& world, double gamma, double tol = 1e-12, int max_sweeps = 100000) {
  const int n = world.rows() * world.cols();
  std::vector<double> v(static_cast<std::size_t>(n), 0.0);
  ViResult out;
  out.q.assign(static_cast<std::size_t>(n), {0, 0, 0, 0});
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const Position p{i / world.cols(), i % world.cols()};
      const auto& cell = world.at(p);
      if (cell.kind == softprior::CellKind::Wall || cell.terminal) continue;
      double best = -1e300;
      for (int a = 0; a < 4; ++a) {
        Position t{p.row + dr[a], p.col + dc[a]};
        double r = 0.0;
        double cont = 0.0;
        if (!world.in_bounds(t) || world.at(t).kind == softprior::CellKind::Wall) {
          t = p;
          cont = v[static_cast<std::size_t>(i)];
        } else {
          const auto& tc = world.at(t);
          r = tc.reward;
          cont = tc.terminal ? 0.0 : v[world.index(t)];
        }
        const double qa = r + gamma * cont;
        out.q[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] = qa;
        best = std::max(best, qa);
      }
      delta = std::max(delta, std::abs(best - v[static_cast<std::size_t>(i)]));
      v[static_cast<std::size_t>(i)] = best;
    }
    out.sweeps = sweep + 1;
    if (delta < tol) break;
  }
  return out;
}

// Actions within `tol` of the best value.
inline std::vector<int> optimal_actions(const std::array<double, 4>& q, double tol) {
  const double best = *std::max_element(q.begin(), q.end());
  std::vector<int> out;
  for (int a = 0; a < 4; ++a)
    if (q[static_cast<std::size_t>(a)] >= best - tol) out.push_back(a);
  return out;
}

// Random single-goal world, at most 6x6, start in a corner region, +10 goal.
// Reject worlds where the goal is unreachable.
inline GridWorld random_single_goal_world(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> size(4, 6);
  while (true) {
    const int rows = size(gen), cols = size(gen);
    std::vector<std::string> grid(static_cast<std::size_t>(rows), std::string(static_cast<std::size_t>(cols), '.'));
    std::bernoulli_distribution wall(0.2);
    for (auto& row : grid)
      for (auto& c : row)
        if (wall(gen)) c = '#';
    std::uniform_int_distribution<int> rr(0, rows - 1), cc(0, cols - 1);
    const Position s{rr(gen), cc(gen)};
    Position g{rr(gen), cc(gen)};
    if (g == s) continue;
    grid[static_cast<std::size_t>(s.row)][static_cast<std::size_t>(s.col)] = 'S';
    grid[static_cast<std::size_t>(g.row)][static_cast<std::size_t>(g.col)] = 'F';
    GridWorld world = GridWorld::from_rows(grid, 0.0, 0.0);
    // reachability by flood fill
    std::vector<int> seen(static_cast<std::size_t>(rows * cols), 0);
    std::vector<Position> stack{s};
    seen[world.index(s)] = 1;
    bool found = false;
    while (!stack.empty()) {
      const Position p = stack.back();
      stack.pop_back();
      if (p == g) found = true;
      for (auto a : {softprior::Action::Up, softprior::Action::Right, softprior::Action::Down, softprior::Action::Left}) {
        const Position t = softprior::moved(p, a);
        if (!world.in_bounds(t) || world.at(t).kind == softprior::CellKind::Wall || seen[world.index(t)]) continue;
        seen[world.index(t)] = 1;
        stack.push_back(t);
      }
    }
    if (found) return world;
  }
}

// Central difference of f along coordinate x[i].
inline double central_difference(const std::function<double()>& f, double& x, double h = 1e-6) {
  const double x0 = x;
  x = x0 + h;
  const double up = f();
  x = x0 - h;
  const double down = f();
  x = x0;
  return (up - down) / (2.0 * h);
}

// |a - b| <= rel * max(|a|, |b|), with an absolute floor for near-zero pairs.
inline bool close_relative(double a, double b, double rel, double abs_floor = 1e-8) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// Interquartile mean by explicit expansion: each value repeated 4 times,
// drop the first and last n copies, average the middle 2n.
inline double iqm_by_expansion(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<double> expanded;
  expanded.reserve(4 * n);
  for (double v : values)
    for (int k = 0; k < 4; ++k) expanded.push_back(v);
  long double sum = 0.0L;
  for (std::size_t i = n; i < 3 * n; ++i) sum += expanded[i];
  return static_cast<double>(sum / static_cast<long double>(2 * n));
}

}  // namespace oracle
