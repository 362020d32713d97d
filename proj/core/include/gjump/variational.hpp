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

// First-order spike-variation calculus along a simulated optimal path: the
// variational process z, difference-quotient and derivative checks, and the
// fundamental solutions phi, psi, eta.

#include <vector>

#include "gjump/controls.hpp"
#include "gjump/cost.hpp"
#include "gjump/forward.hpp"

namespace gjump {

/// Throws InvalidArgument unless `states` was simulated from `inputs`.
void require_crn(const StateEnsemble& states, const RandomInputs& inputs, const char* what);

struct VariationalPath {
  PathField z;          // n x 1 per (scenario, path, time)
  int first_step = 0;   // z is zero before this index
  int window_end = 0;   // first index after the spike window
};

/// Linearized Euler scheme started at t0 from z = b(t0, x*, nu) - b(t0, x*, u*(t0)).
VariationalPath solve_variational(const ModelSpec& model, const StrictControl& u_star,
                                  const SpikeSpec& spike, const ScenarioFamily& family,
                                  const RandomInputs& inputs, const StateEnsemble& x_star);

struct QuotientRow {
  double h = 0.0;
  double gap = 0.0;  // Ê of sup over [t0 + h, T] of |(x^h - x*) / h - z|^2
  double se = 0.0;
  int argmax = 0;
};

struct QuotientReport {
  std::vector<QuotientRow> rows;
  bool non_increasing = false;  // within 3 combined s.e.
  double min_ratio = 0.0;       // min over consecutive h of gap(h) / gap(h / 2)
};

QuotientReport difference_quotient_gap(const ModelSpec& model, const StrictControl& u_star,
                                       double t0, int action, const std::vector<double>& h_list,
                                       const ScenarioFamily& family, const RandomInputs& inputs,
                                       const Vector& x0);

struct DerivativeRow {
  double h = 0.0;
  double fd = 0.0;           // (J(u^h) - J(u*)) / h
  double fd_se = 0.0;        // paired s.e. of the coupled difference
  double fd_se_combined = 0.0;
};

struct DerivativeReport {
  std::vector<DerivativeRow> rows;
  double formula = 0.0;      // Ê[g_x(x*_T) z_T + sum h_x z dt]
  double formula_se = 0.0;
  int formula_argmax = 0;
  double formula_at_cost_argmax = 0.0;  // same quantity in the scenario attaining J(u*)
  double formula_at_cost_argmax_se = 0.0;
  int cost_argmax = 0;
  bool agrees = false;       // at the smallest h
  double tolerance = 0.0;
};

DerivativeReport gateaux_derivative(const ModelSpec& model, const StrictControl& u_star, double t0,
                                    int action, const std::vector<double>& h_list,
                                    const ScenarioFamily& family, const RandomInputs& inputs,
                                    const Vector& x0);

/// Spike direction feeding eta: action nu applied on steps
/// [first_step, first_step + n_steps) with density 1 / (n_steps dt).
struct EtaWindow {
  int first_step = 0;
  int n_steps = 0;
  int action = 0;
  /// Use b_u, gamma_u, f_u times (nu - u*) instead of coefficient differences
  /// (strict schedules only).
  bool derivative_mode = false;
};

struct FundamentalPair {
  PathField phi;  // n x n
  PathField psi;  // n x n
  PathField eta;  // n x 1, zero without a window
  bool has_eta = false;
};

/// Euler schemes for phi and psi (psi carries the Ito correction and the
/// multiplicative (I + f_x)^{-1} at jumps), and eta for the optional window.
/// Jumps must be tagged for relaxed schedules.
FundamentalPair solve_fundamental(const ModelSpec& model, const ControlSchedule& control,
                                  const ScenarioFamily& family, const NoiseBundle& noise,
                                  const JumpSample& jumps, const StateEnsemble& states,
                                  const EtaWindow* window = nullptr);

/// Only eta, reusing phi and psi from `pair`.
PathField solve_eta(const ModelSpec& model, const ControlSchedule& control,
                    const ScenarioFamily& family, const JumpSample& jumps,
                    const StateEnsemble& states, const FundamentalPair& pair,
                    const EtaWindow& window);

/// max over (scenario, path, time) of the Frobenius norm of phi psi - I.
double inverse_identity_error(const FundamentalPair& pair);

}  // namespace gjump
