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

// Adjoint triple (p, q, r) by per-scenario least-squares Monte Carlo, the
// Hamiltonian and F term, the three maximum-principle checks, the BSDE
// residual and the stability table.

#include <string>
#include <vector>

#include "gjump/controls.hpp"
#include "gjump/cost.hpp"
#include "gjump/forward.hpp"
#include "gjump/variational.hpp"

namespace gjump {

struct AdjointOptions {
  int degree = 2;            // polynomial degree of the regression basis
  int min_jump_events = 20;  // per step and mark; below this R is fitted on a pooled window of steps
  double slack_sigmas = 3.0;
  int blocks = 2;            // spike blocks of the maximum-principle check
};

/// p as 1 x n, q as d x n (row j pairs with dB_j), r as n_marks x n (row i is r(theta_i)).
/// k is identically zero and not stored.
struct AdjointTriple {
  PathField p;
  PathField q;
  PathField r;
};

struct BSDERepresentation {
  PathField X;  // one time slot: sum h_x phi dt + g_x(x_T) phi_T
  PathField y;  // p phi
  PathField Q;  // d x n
  PathField R;  // n_marks x n
  PathField S;  // 1 x n, d = 1 only (zero otherwise)
  std::vector<std::vector<double>> condition;     // [scenario][step] of the increment regression
  std::vector<std::vector<double>> residual_ms;   // [scenario][step]
  double max_condition = 0.0;
  int pooled_jump_fits = 0;  // (step, mark) pairs fitted on a pooled window
  int empty_jump_fits = 0;   // (step, mark) pairs with no events anywhere, R set to 0
};

struct AdjointSolution {
  ControlSchedule control;
  FundamentalPair fundamental;
  AdjointTriple triple;
  BSDERepresentation representation;
};

/// Jumps must be tagged for relaxed schedules. `states` must come from the
/// same noise and jumps.
AdjointSolution solve_adjoint(const ModelSpec& model, const ControlSchedule& control,
                              const ScenarioFamily& family, const NoiseBundle& noise,
                              const JumpSample& jumps, const StateEnsemble& states,
                              const AdjointOptions& options = {});

/// H = h + p b + q : sigma + sum_i r_i f_i nu_i.
double hamiltonian(const ModelSpec& model, const MarkSpace& marks, double t, const Vector& x,
                   const Vector& a, const RowVector& p, const Matrix& q, const Matrix& r);

/// Driver of the backward equation, averaged over the control measure at step k:
/// h_x + p (b_x + gamma_x a) + sum_jl a_jl q_j sigma_x^l + sum_i r_i f_x(theta_i) nu_i.
RowVector bsde_driver(const MixedCoefficients& mc, int k, double t, const Vector& x, const Matrix& cov,
                      const RowVector& p, const Matrix& q, const Matrix& r);

struct FTerms {
  double gamma = 0.0;    // (1 / L) int_block p (gamma(nu) - gamma(u*)) d<B>
  double q_sigma = 0.0;  // int q sigma_x phi eta d<B>
  double s_term = 0.0;   // int (C eta) d<B> - 2 G(C eta) dt, reported only
};

struct BsdeResidual {
  std::vector<double> per_scenario;  // mean over paths and steps of |residual_k|^2
  double max = 0.0;
};

BsdeResidual bsde_residual(const ModelSpec& model, const AdjointSolution& solution,
                           const ScenarioFamily& family, const NoiseBundle& noise,
                           const JumpSample& jumps, const StateEnsemble& states);

/// Same, evaluated for an explicitly supplied triple.
BsdeResidual bsde_residual(const ModelSpec& model, const ControlSchedule& control,
                           const AdjointTriple& triple, const ScenarioFamily& family,
                           const NoiseBundle& noise, const JumpSample& jumps,
                           const StateEnsemble& states);

struct MPEntry {
  int block = 0;
  int action = 0;
  double estimate = 0.0;
  double se = 0.0;
  double slack = 0.0;
  bool pass = true;
  int argmax = 0;
  double hamiltonian_gap = 0.0;  // argmax scenario mean of (1 / L) int (H(nu) - H(u*)) dt
  FTerms f;                      // argmax scenario means
};

struct MPCheckReport {
  std::vector<MPEntry> entries;
  bool verdict = true;
  double worst_entry = 0.0;
  int worst_block = -1;
  int worst_action = -1;
  bool within_hypothesis = true;  // b = 0 and h = 0 on probes
  std::string label;              // "" or "outside theorem hypothesis"
  double slack_sigmas = 3.0;
  double extra_slack = 0.0;
  double max_condition = 0.0;
};

/// Core estimator shared by the three checks.
MPCheckReport mp_check(const ModelSpec& model, const ControlSchedule& control,
                       const ScenarioFamily& family, const NoiseBundle& noise,
                       const JumpSample& jumps, const Vector& x0, const AdjointOptions& options,
                       double extra_slack = 0.0);

MPCheckReport mp_check_strict(const ModelSpec& model, const StrictControl& u_star,
                              const ScenarioFamily& family, const RandomInputs& inputs,
                              const Vector& x0, const AdjointOptions& options = {});

struct EkelandRow {
  double j_candidate = 0.0;
  double distance = 0.0;
  double margin = 0.0;  // J(v) + eps d(u_n, v) - J(u_n)
  double se = 0.0;      // paired s.e. of J(v) - J(u_n)
  bool holds = true;    // margin >= -slack_sigmas * se
};

struct NearReport {
  MPCheckReport mp;
  double epsilon = 0.0;
  double c = 0.0;
  double minimal_c = 0.0;  // smallest C >= 0 for which the check passes
  double j_un = 0.0;
  std::vector<EkelandRow> ekeland;
  bool ekeland_holds = true;
};

NearReport mp_check_near(const ModelSpec& model, const StrictControl& u_n, double epsilon_n, double c,
                         const ScenarioFamily& family, const RandomInputs& inputs, const Vector& x0,
                         const std::vector<StrictControl>& candidates,
                         const AdjointOptions& options = {});

/// Entries are H(nu) - sum_a w(a) H(a) + F along the relaxed dynamics.
MPCheckReport mp_check_relaxed(const ModelSpec& model, const RelaxedControl& mu_star,
                               const ScenarioFamily& family, const RandomInputs& inputs,
                               const Vector& x0, const AdjointOptions& options = {});

struct LipschitzAudit {
  int n_probes = 0;
  int passed = 0;
  double c0 = 0.0;
  double worst_ratio = 0.0;  // max |dF| / (|dp| + |dq| + sum |dr| nu)
  bool pass() const { return passed == n_probes; }
};

/// Samples random (t, x, a, covariance, p, q, r) pairs and checks
/// |F(p1, q1, r1) - F(p2, q2, r2)| <= C0 (|dp| + |dq| + sum_i |dr_i| nu_i), with C0
/// from the declared bounds.
LipschitzAudit driver_lipschitz_audit(const ModelSpec& model, const ActionGrid& actions,
                                      const MarkSpace& marks, const VolatilityBounds& bounds,
                                      double horizon, int n_probes, std::uint64_t seed);

struct StabilityRow {
  int n = 0;
  double p_gap = 0.0, p_gap_se = 0.0;  // max_t Ê|p^n - p*|^2
  double q_gap = 0.0, q_gap_se = 0.0;  // Ê int |q^n - q*|^2 d<B>
  double r_gap = 0.0, r_gap_se = 0.0;  // Ê int sum_i |r^n_i - r*_i|^2 nu_i dt
  double k_gap = 0.0;                  // identically zero
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  bool p_non_increasing = false;
  bool q_non_increasing = false;
  bool r_non_increasing = false;
  bool k_zero = true;
  LipschitzAudit audit;
};

StabilityReport bsde_stability_report(const ModelSpec& model, const RelaxedControl& mu_star,
                                      const std::vector<int>& n_list, const ScenarioFamily& family,
                                      const RandomInputs& inputs, const Vector& x0,
                                      const AdjointOptions& options = {}, int audit_probes = 1000);

}  // namespace gjump
