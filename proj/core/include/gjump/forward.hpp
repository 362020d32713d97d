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

// Euler-Maruyama simulation of the strict and relaxed controlled G-SDE per
// volatility scenario, with common random numbers across scenarios and controls.

#include <utility>
#include <vector>

#include "gjump/common.hpp"
#include "gjump/controls.hpp"
#include "gjump/jumps.hpp"
#include "gjump/model.hpp"
#include "gjump/scenario.hpp"

namespace gjump {

/// Per-step support of the control measure (positive weights only, in action
/// order). A strict control is the special case of one entry with weight 1,
/// and it also fixes the action used by jumps.
struct ControlSchedule {
  ActionGrid actions;
  TimeGrid grid{1.0, 1};
  std::vector<std::vector<std::pair<int, double>>> support;
  std::vector<int> strict_index;  // empty for relaxed schedules

  static ControlSchedule from(const StrictControl& u);
  static ControlSchedule from(const RelaxedControl& mu);

  bool is_strict() const { return !strict_index.empty(); }
};

/// Coefficients averaged over the control measure at one (step, t, x).
/// With a single support point of weight 1 every average is that point's
/// value bit for bit.
class MixedCoefficients {
 public:
  MixedCoefficients(const ModelSpec& model, const MarkSpace& marks, const ControlSchedule& control);

  const ModelSpec& model() const { return model_; }
  const MarkSpace& marks() const { return marks_; }
  const ControlSchedule& control() const { return control_; }

  Vector b(int k, double t, const Vector& x) const;
  /// gamma contracted with the covariance a_k.
  Vector gamma_cov(int k, double t, const Vector& x, const Matrix& cov) const;
  /// sum_a w(a) sum_i f(t, x, theta_i, a) nu_i.
  Vector compensator(int k, double t, const Vector& x) const;
  double h(int k, double t, const Vector& x) const;

  Matrix b_x(int k, double t, const Vector& x) const;
  Matrix gamma_x_cov(int k, double t, const Vector& x, const Matrix& cov) const;
  Matrix compensator_x(int k, double t, const Vector& x) const;
  Vector h_x(int k, double t, const Vector& x) const;

  /// Action index used by a jump at step k: u_k for strict schedules, the
  /// event's tag otherwise.
  int jump_action(int k, const JumpEvent& e) const;

 private:
  const ModelSpec& model_;
  const MarkSpace& marks_;
  const ControlSchedule& control_;
};

/// State paths for every (scenario, path) on the grid, row-major by
/// (scenario, path, step, coordinate).
class StateEnsemble {
 public:
  StateEnsemble() = default;
  StateEnsemble(const TimeGrid& grid, int dim, int n_scenarios, int n_paths,
                std::uint64_t noise_seed, std::uint64_t jump_seed);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  int n_scenarios() const { return n_scenarios_; }
  int n_paths() const { return n_paths_; }
  int n_steps() const { return grid_.n_steps(); }
  std::uint64_t noise_seed() const { return noise_seed_; }
  std::uint64_t jump_seed() const { return jump_seed_; }

  Eigen::Map<const Vector> x(int s, int p, int k) const {
    return Eigen::Map<const Vector>(&data_[offset(s, p, k)], dim_);
  }
  Eigen::Map<Vector> x(int s, int p, int k) { return Eigen::Map<Vector>(&data_[offset(s, p, k)], dim_); }

  const std::vector<double>& raw() const { return data_; }

 private:
  std::size_t offset(int s, int p, int k) const {
    return ((static_cast<std::size_t>(s) * n_paths_ + p) * (grid_.n_steps() + 1) + k) * dim_;
  }
  TimeGrid grid_{1.0, 1};
  int dim_ = 1;
  int n_scenarios_ = 0;
  int n_paths_ = 0;
  std::uint64_t noise_seed_ = 0;
  std::uint64_t jump_seed_ = 0;
  std::vector<double> data_;
};

/// Checks that the family, noise, jumps and control share one grid and that
/// the noise and jumps carry the same number of paths.
void check_inputs(const ScenarioFamily& family, const NoiseBundle& noise, const JumpSample& jumps,
                  const TimeGrid& control_grid);

StateEnsemble simulate(const ModelSpec& model, const ControlSchedule& control,
                       const ScenarioFamily& family, const NoiseBundle& noise,
                       const JumpSample& jumps, const Vector& x0);

StateEnsemble simulate_strict(const ModelSpec& model, const StrictControl& u,
                              const ScenarioFamily& family, const NoiseBundle& noise,
                              const JumpSample& jumps, const Vector& x0);

/// Jumps must be tagged (sample_relaxed_poisson, tag_jumps or force_tags).
StateEnsemble simulate_relaxed(const ModelSpec& model, const RelaxedControl& mu,
                               const ScenarioFamily& family, const NoiseBundle& noise,
                               const JumpSample& tagged_jumps, const Vector& x0);

struct SupDistance {
  std::vector<std::vector<double>> per_path;  // [scenario][path] sup_k |x1 - x2|
  std::vector<MeanSe> mean_square;            // per scenario, of the squared sup
  UpperExpectation upper;                     // max over scenarios of mean_square
};

SupDistance sup_distance(const StateEnsemble& e1, const StateEnsemble& e2);

}  // namespace gjump
