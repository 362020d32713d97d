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

// Worst-case cost functionals, brute-force value search over finite candidate
// sets, and the chattering convergence table.

#include <cstdint>
#include <vector>

#include "gjump/controls.hpp"
#include "gjump/forward.hpp"
#include "gjump/jumps.hpp"
#include "gjump/model.hpp"
#include "gjump/scenario.hpp"

namespace gjump {

/// Brownian draws and untagged jumps generated once from one seed and shared
/// by every control evaluated against them.
struct RandomInputs {
  NoiseBundle noise;
  JumpSample jumps;
};

RandomInputs make_inputs(const ScenarioFamily& family, const MarkSpace& marks, int n_paths,
                         std::uint64_t seed);

struct CostReport {
  std::vector<MeanSe> per_scenario;
  double value = 0.0;  // max over scenarios
  int argmax = 0;
  double se = 0.0;     // of the argmax scenario
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> samples;  // [scenario][path] g(x_T) + sum h dt
};

/// Per-path cost g(x_N) + sum_k h(t_k, x_k) dt (h averaged over the control measure).
std::vector<std::vector<double>> path_costs(const ModelSpec& model, const ControlSchedule& control,
                                            const StateEnsemble& states);

CostReport cost_report(std::vector<std::vector<double>> samples, std::uint64_t seed);

CostReport evaluate_cost(const ModelSpec& model, const StrictControl& u, const ScenarioFamily& family,
                         const RandomInputs& inputs, const Vector& x0);
CostReport evaluate_cost(const ModelSpec& model, const RelaxedControl& mu,
                         const ScenarioFamily& family, const RandomInputs& inputs, const Vector& x0);

/// Convenience overloads that draw their own inputs from (n_paths, seed).
CostReport evaluate_cost(const ModelSpec& model, const StrictControl& u, const ScenarioFamily& family,
                         const MarkSpace& marks, int n_paths, std::uint64_t seed, const Vector& x0);
CostReport evaluate_cost(const ModelSpec& model, const RelaxedControl& mu,
                         const ScenarioFamily& family, const MarkSpace& marks, int n_paths,
                         std::uint64_t seed, const Vector& x0);

struct ValueSearchResult {
  double value = 0.0;
  int argmin = 0;              // first minimizer in enumeration order
  std::vector<double> table;   // J per candidate, in the given order
  std::vector<CostReport> reports;
};

ValueSearchResult value_bruteforce(const ModelSpec& model, const std::vector<StrictControl>& candidates,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0);
ValueSearchResult value_bruteforce(const ModelSpec& model,
                                   const std::vector<RelaxedControl>& candidates,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0);

/// Constant relaxed controls with weights on the simplex grid {i / m}.
std::vector<RelaxedControl> simplex_grid_controls(const ActionGrid& actions, const TimeGrid& grid,
                                                  int resolution);

struct ChatteringRow {
  int n = 0;
  double path_gap = 0.0;  // upper expectation of sup_t |x^n - x^mu|^2
  double path_gap_se = 0.0;
  double j_strict = 0.0;
  double j_relaxed = 0.0;
  double cost_gap = 0.0;  // |J(u^n) - J(mu)|
  double cost_gap_se = 0.0;         // combined (independent) standard error
  double cost_gap_paired_se = 0.0;  // standard error of the coupled per-path difference
};

struct ChatteringReport {
  std::vector<ChatteringRow> rows;
  bool path_gap_non_increasing = false;  // within 3 combined s.e.
  bool cost_gap_non_increasing = false;
  double fitted_c = 0.0;  // least squares fit of cost_gap ~ C / n
};

ChatteringReport chattering_report(const ModelSpec& model, const RelaxedControl& mu,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0, const std::vector<int>& n_list);

}  // namespace gjump
