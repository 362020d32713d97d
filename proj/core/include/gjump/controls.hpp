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

#pragma once

// Strict and relaxed open-loop controls on a time grid, the Dirac embedding,
// chattering, spike perturbations and the disagreement metric.

#include <functional>
#include <vector>

#include "gjump/common.hpp"

namespace gjump {

/// Finite discretization of the compact action set A in R^k.
struct ActionGrid {
  std::vector<Vector> actions;

  static ActionGrid scalar(const std::vector<double>& values);

  std::size_t size() const { return actions.size(); }
  int dim() const { return actions.empty() ? 0 : static_cast<int>(actions.front().size()); }
  const Vector& operator[](std::size_t i) const { return actions[i]; }

  void validate() const;
  bool operator==(const ActionGrid& other) const;
};

/// Piecewise-constant strict control: one action index per grid step.
struct StrictControl {
  ActionGrid actions;
  TimeGrid grid{1.0, 1};
  std::vector<int> index;

  static StrictControl constant(const ActionGrid& actions, const TimeGrid& grid, int idx);

  /// Equal-length blocks (block b covers steps k with floor(k * B / n) == b).
  static StrictControl from_blocks(const ActionGrid& actions, const TimeGrid& grid,
                                   const std::vector<int>& block_index);

  const Vector& action(int step) const { return actions[static_cast<std::size_t>(index[step])]; }
  void validate() const;
};

/// mu_t(da) on a finite action grid: one probability vector per grid step.
struct RelaxedControl {
  ActionGrid actions;
  TimeGrid grid{1.0, 1};
  std::vector<std::vector<double>> weights;  // [step][action]

  static RelaxedControl constant(const ActionGrid& actions, const TimeGrid& grid,
                                 const std::vector<double>& w);

  void validate() const;
  bool is_dirac() const;
};

/// Block index of grid step k for an equal partition into `blocks` pieces.
int block_of_step(int step, int n_steps, int blocks);

RelaxedControl embed_strict(const StrictControl& u);

/// Convex combination (1 - lambda) * a + lambda * b, stepwise.
RelaxedControl mix(const RelaxedControl& a, const RelaxedControl& b, double lambda);

/// Chattering approximation with n equal blocks. In each block the averaged
/// weights are turned into step counts by largest-remainder rounding and laid
/// out as consecutive runs in action order.
StrictControl chattering(const RelaxedControl& mu, int n);

using TestFunction = std::function<double(double t, const Vector& a)>;

/// max over phi of |sum_k dt phi(t_k, u_k) - sum_k dt sum_a w_k(a) phi(t_k, a)|.
double stable_convergence_gap(const RelaxedControl& mu, const StrictControl& u,
                              const std::vector<TestFunction>& test_functions);

struct SpikeSpec {
  StrictControl base;
  int action = 0;  // index of nu in the action grid
  double t0 = 0.0;
  double h = 0.0;

  int first_step() const;
  int n_window_steps() const;
  /// Throws InvalidArgument unless [t0, t0 + h) is a nonempty union of grid steps.
  void validate() const;
};

/// u^h: nu on [t0, t0 + h), the base control elsewhere.
StrictControl spike(const SpikeSpec& spec);

/// Lebesgue measure of {t : u(t) != v(t)}.
double ekeland_distance(const StrictControl& u, const StrictControl& v);

/// Every block-constant strict control with `blocks` blocks, block 0 most
/// significant in the enumeration order.
std::vector<StrictControl> enumerate_block_controls(const ActionGrid& actions,
                                                    const TimeGrid& grid, int blocks);

}  // namespace gjump
