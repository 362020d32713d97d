/*
 Copyright 2026 The gjump Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "gjump/controls.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gjump {

ActionGrid ActionGrid::scalar(const std::vector<double>& values) {
  ActionGrid g;
  for (double v : values) g.actions.push_back(Vector::Constant(1, v));
  g.validate();
  return g;
}

void ActionGrid::validate() const {
  if (actions.empty()) throw InvalidArgument("ActionGrid: empty action set");
  const auto k = actions.front().size();
  if (k < 1) throw InvalidArgument("ActionGrid: actions must have dimension >= 1");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].size() != k) throw InvalidArgument("ActionGrid: mixed action dimensions");
    if (!actions[i].allFinite()) throw InvalidArgument("ActionGrid: non-finite action");
    for (std::size_t j = 0; j < i; ++j) {
      if (actions[i] == actions[j]) {
        throw InvalidArgument("ActionGrid: duplicate action at index " + std::to_string(i));
      }
    }
  }
}

bool ActionGrid::operator==(const ActionGrid& other) const {
  if (actions.size() != other.actions.size()) return false;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i].size() != other.actions[i].size() || actions[i] != other.actions[i]) return false;
  }
  return true;
}

int block_of_step(int step, int n_steps, int blocks) {
  return static_cast<int>((static_cast<long long>(step) * blocks) / n_steps);
}

StrictControl StrictControl::constant(const ActionGrid& actions, const TimeGrid& grid, int idx) {
  StrictControl u{actions, grid, std::vector<int>(grid.n_steps(), idx)};
  u.validate();
  return u;
}

StrictControl StrictControl::from_blocks(const ActionGrid& actions, const TimeGrid& grid,
                                         const std::vector<int>& block_index) {
  if (block_index.empty()) throw InvalidArgument("StrictControl::from_blocks: no blocks");
  const int blocks = static_cast<int>(block_index.size());
  if (blocks > grid.n_steps()) {
    throw InvalidArgument("StrictControl::from_blocks: more blocks than grid steps");
  }
  StrictControl u{actions, grid, {}};
  u.index.reserve(grid.n_steps());
  for (int k = 0; k < grid.n_steps(); ++k) {
    u.index.push_back(block_index[block_of_step(k, grid.n_steps(), blocks)]);
  }
  u.validate();
  return u;
}

void StrictControl::validate() const {
  actions.validate();
  if (static_cast<int>(index.size()) != grid.n_steps()) {
    throw GridMismatch("StrictControl: index count does not match the grid");
  }
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] < 0 || index[k] >= static_cast<int>(actions.size())) {
      throw InvalidArgument("StrictControl: invalid action index " + std::to_string(index[k]) +
                            " at step " + std::to_string(k));
    }
  }
}

RelaxedControl RelaxedControl::constant(const ActionGrid& actions, const TimeGrid& grid,
                                        const std::vector<double>& w) {
  RelaxedControl mu{actions, grid, std::vector<std::vector<double>>(grid.n_steps(), w)};
  mu.validate();
  return mu;
}

void RelaxedControl::validate() const {
  actions.validate();
  if (static_cast<int>(weights.size()) != grid.n_steps()) {
    throw GridMismatch("RelaxedControl: weight rows do not match the grid");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto& w = weights[k];
    if (w.size() != actions.size()) {
      throw InvalidArgument("RelaxedControl: weight vector length differs from the action count");
    }
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0 && x <= 1.0)) {
        throw InvalidArgument("RelaxedControl: weight outside [0, 1] at step " + std::to_string(k));
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InvalidArgument("RelaxedControl: weights at step " + std::to_string(k) +
                            " sum to " + std::to_string(sum));
    }
  }
}

bool RelaxedControl::is_dirac() const {
  return std::all_of(weights.begin(), weights.end(), [](const std::vector<double>& w) {
    return std::count(w.begin(), w.end(), 1.0) == 1;
  });
}

RelaxedControl embed_strict(const StrictControl& u) {
  u.validate();
  RelaxedControl mu{u.actions, u.grid, {}};
  mu.weights.assign(u.grid.n_steps(), std::vector<double>(u.actions.size(), 0.0));
  for (int k = 0; k < u.grid.n_steps(); ++k) mu.weights[k][u.index[k]] = 1.0;
  return mu;
}

RelaxedControl mix(const RelaxedControl& a, const RelaxedControl& b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("mix: lambda outside [0, 1]");
  require_same_grid(a.grid, b.grid, "mix");
  if (!(a.actions == b.actions)) throw InvalidArgument("mix: action grids differ");
  RelaxedControl out = a;
  for (std::size_t k = 0; k < out.weights.size(); ++k) {
    for (std::size_t i = 0; i < out.weights[k].size(); ++i) {
      out.weights[k][i] = (1.0 - lambda) * a.weights[k][i] + lambda * b.weights[k][i];
    }
  }
  return out;
}

StrictControl chattering(const RelaxedControl& mu, int n) {
  mu.validate();
  const int n_steps = mu.grid.n_steps();
  if (n < 1 || n_steps % n != 0) {
    throw InvalidArgument("chattering: block count " + std::to_string(n) +
                          " does not divide n_steps = " + std::to_string(n_steps));
  }
  const int m = n_steps / n;
  const std::size_t n_actions = mu.actions.size();
  StrictControl u{mu.actions, mu.grid, {}};
  u.index.reserve(n_steps);

  for (int b = 0; b < n; ++b) {
    std::vector<double> avg(n_actions, 0.0);
    for (int k = b * m; k < (b + 1) * m; ++k) {
      for (std::size_t i = 0; i < n_actions; ++i) avg[i] += mu.weights[k][i];
    }
    std::vector<int> count(n_actions);
    std::vector<double> rem(n_actions);
    int assigned = 0;
    for (std::size_t i = 0; i < n_actions; ++i) {
      const double target = avg[i];  // already in units of grid steps
      count[i] = static_cast<int>(std::floor(target + 1e-9));
      rem[i] = target - count[i];
      assigned += count[i];
    }
    std::vector<std::size_t> order(n_actions);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return rem[x] > rem[y]; });
    for (std::size_t j = 0; assigned < m; j = (j + 1) % n_actions) {
      count[order[j]] += 1;
      ++assigned;
    }
    // Floating drift can over-assign by one step; trim from the last action with spare steps.
    for (std::size_t i = n_actions; assigned > m && i-- > 0;) {
      while (assigned > m && count[i] > 0) {
        --count[i];
        --assigned;
      }
    }
    for (std::size_t i = 0; i < n_actions; ++i) {
      for (int c = 0; c < count[i]; ++c) u.index.push_back(static_cast<int>(i));
    }
  }
  return u;
}

double stable_convergence_gap(const RelaxedControl& mu, const StrictControl& u,
                              const std::vector<TestFunction>& test_functions) {
  require_same_grid(mu.grid, u.grid, "stable_convergence_gap");
  if (!(mu.actions == u.actions)) throw InvalidArgument("stable_convergence_gap: action grids differ");
  const double dt = mu.grid.dt();
  double worst = 0.0;
  for (const auto& phi : test_functions) {
    double strict = 0.0;
    double relaxed = 0.0;
    for (int k = 0; k < mu.grid.n_steps(); ++k) {
      const double t = mu.grid.time(k);
      strict += phi(t, u.action(k)) * dt;
      for (std::size_t i = 0; i < mu.actions.size(); ++i) {
        if (mu.weights[k][i] > 0.0) relaxed += mu.weights[k][i] * phi(t, mu.actions[i]) * dt;
      }
    }
    const double gap = std::abs(strict - relaxed);
    if (!std::isfinite(gap)) throw NumericalError("stable_convergence_gap: test function is not finite");
    worst = std::max(worst, gap);
  }
  return worst;
}

namespace {

int aligned_steps(double value, double dt, const char* what) {
  const double r = value / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r))) {
    throw InvalidArgument(std::string("SpikeSpec: ") + what + " is not a multiple of dt");
  }
  return static_cast<int>(n);
}

}  // namespace

int SpikeSpec::first_step() const { return aligned_steps(t0, base.grid.dt(), "t0"); }

int SpikeSpec::n_window_steps() const { return aligned_steps(h, base.grid.dt(), "h"); }

void SpikeSpec::validate() const {
  base.validate();
  if (action < 0 || action >= static_cast<int>(base.actions.size())) {
    throw InvalidArgument("SpikeSpec: replacement action index out of range");
  }
  if (!(h > 0.0)) throw InvalidArgument("SpikeSpec: width h must be positive");
  if (t0 < 0.0) throw InvalidArgument("SpikeSpec: t0 must be >= 0");
  const int k0 = first_step();
  const int m = n_window_steps();
  if (m < 1 || k0 + m > base.grid.n_steps()) {
    throw InvalidArgument("SpikeSpec: window [t0, t0 + h] leaves [0, T]");
  }
}

StrictControl spike(const SpikeSpec& spec) {
  spec.validate();
  StrictControl u = spec.base;
  const int k0 = spec.first_step();
  const int m = spec.n_window_steps();
  for (int k = k0; k < k0 + m; ++k) u.index[k] = spec.action;
  return u;
}

double ekeland_distance(const StrictControl& u, const StrictControl& v) {
  require_same_grid(u.grid, v.grid, "ekeland_distance");
  int differ = 0;
  for (int k = 0; k < u.grid.n_steps(); ++k) {
    if (u.action(k) != v.action(k)) ++differ;
  }
  return differ * u.grid.dt();
}

std::vector<StrictControl> enumerate_block_controls(const ActionGrid& actions,
                                                    const TimeGrid& grid, int blocks) {
  actions.validate();
  if (blocks < 1) throw InvalidArgument("enumerate_block_controls: blocks must be >= 1");
  const std::size_t a = actions.size();
  double total = std::pow(static_cast<double>(a), blocks);
  if (total > 1e6) throw InvalidArgument("enumerate_block_controls: candidate set too large");
  std::vector<StrictControl> out;
  std::vector<int> digits(blocks, 0);
  for (long long code = 0; code < static_cast<long long>(total); ++code) {
    long long c = code;
    for (int b = blocks - 1; b >= 0; --b) {
      digits[b] = static_cast<int>(c % static_cast<long long>(a));
      c /= static_cast<long long>(a);
    }
    out.push_back(StrictControl::from_blocks(actions, grid, digits));
  }
  return out;
}

}  // namespace gjump
