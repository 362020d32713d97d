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

// Finite stand-in for the family of volatility models behind the sublinear
// expectation: deterministic piecewise-constant covariance paths a_t, shared
// Brownian draws, quadratic variation and the generator G.

#include <cstdint>
#include <optional>
#include <vector>

#include "gjump/common.hpp"

namespace gjump {

struct VolatilityBounds {
  int dim = 1;
  Matrix sigma_low;   // symmetric PSD
  Matrix sigma_high;  // symmetric PD, sigma_high - sigma_low PSD
  double ellipticity_beta = 0.0;

  /// Builds and validates bounds; beta = lambda_min(sigma_low) / 2.
  static VolatilityBounds make(const Matrix& sigma_low, const Matrix& sigma_high);
  static VolatilityBounds scalar(double low, double high);

  void validate() const;
};

struct VolatilityScenario {
  int id = 0;
  std::vector<Matrix> values;  // a_k per grid step, d x d
};

struct ScenarioFamily {
  VolatilityBounds bounds;
  TimeGrid grid{1.0, 1};
  std::vector<VolatilityScenario> scenarios;

  std::size_t size() const { return scenarios.size(); }
  const VolatilityScenario& operator[](std::size_t s) const { return scenarios[s]; }

  /// Checks non-emptiness, dense ids, step counts and a_k within bounds.
  void validate() const;
};

struct ScenarioStrategy {
  enum class Kind { corners, random };
  Kind kind = Kind::corners;
  int blocks = 2;           // coarse partition of [0, T] for both kinds
  int count = 0;            // random only
  std::uint64_t seed = 0;   // random only

  static ScenarioStrategy corners(int blocks = 2) { return {Kind::corners, blocks, 0, 0}; }
  static ScenarioStrategy random(int count, std::uint64_t seed, int blocks = 2) {
    return {Kind::random, blocks, count, seed};
  }
};

/// `corners` enumerates every block-constant path in {sigma_low, sigma_high}
/// (duplicates removed, so degenerate bounds give one scenario); `random`
/// draws block values as convex combinations of the two corners.
ScenarioFamily build_scenario_family(const VolatilityBounds& bounds, const TimeGrid& grid,
                                     const ScenarioStrategy& strategy);

/// One scenario with a_t == a on every step.
ScenarioFamily constant_family(const VolatilityBounds& bounds, const TimeGrid& grid,
                               const Matrix& a);

/// Standard normal draws xi(p, k) shared across scenarios, and the per-scenario
/// increments Delta B(s, p, k) = sqrt(a_k^s) xi(p, k) sqrt(dt).
class NoiseBundle {
 public:
  NoiseBundle(const ScenarioFamily& family, int n_paths, std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  int n_paths() const { return n_paths_; }
  int n_steps() const { return grid_.n_steps(); }
  int dim() const { return dim_; }
  std::size_t n_scenarios() const { return sqrt_a_.size(); }
  const TimeGrid& grid() const { return grid_; }

  /// Raw standard normal draw (component j).
  double xi(int path, int step, int j) const {
    return xi_[(static_cast<std::size_t>(path) * grid_.n_steps() + step) * dim_ + j];
  }
  Vector increment(std::size_t scenario, int path, int step) const;
  double increment1(std::size_t scenario, int path, int step) const;  // d == 1 fast path

  const std::vector<double>& raw() const { return xi_; }

 private:
  std::uint64_t seed_;
  int n_paths_;
  int dim_;
  TimeGrid grid_;
  std::vector<double> xi_;
  std::vector<std::vector<Matrix>> sqrt_a_;  // [scenario][step], already scaled by sqrt(dt)
};

NoiseBundle sample_brownian(const ScenarioFamily& family, int n_paths, std::uint64_t seed);

struct QVPath {
  std::vector<Matrix> increments;  // a_k dt, one per step
  std::vector<Matrix> cumulative;  // <B>_{t_k}, n_steps + 1 entries
};

QVPath quadratic_variation(const VolatilityScenario& scenario, const TimeGrid& grid);

struct UpperExpectation {
  double value = 0.0;
  int argmax = 0;
  double se = 0.0;  // standard error of the argmax scenario's mean
  std::vector<MeanSe> per_scenario;
};

/// max over scenarios of the per-scenario sample mean; ties go to the lowest id.
UpperExpectation upper_expectation(const std::vector<std::vector<double>>& per_scenario_samples);

/// Default probe matrices for G: the two corners plus every distinct scenario value.
std::vector<Matrix> default_probe_set(const ScenarioFamily& family);
std::vector<Matrix> corner_probe_set(const VolatilityBounds& bounds);

/// G(S) = 1/2 max_{a in probes} tr[a S].
double generator_G(const Matrix& s, const std::vector<Matrix>& probes);

}  // namespace gjump
