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

#include "gjump/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gjump/rng.hpp"

namespace gjump {

namespace {

constexpr double kOrderTol = 1e-10;

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

bool within_bounds(const Matrix& a, const VolatilityBounds& bounds) {
  return min_eigenvalue(a - bounds.sigma_low) >= -kOrderTol &&
         min_eigenvalue(bounds.sigma_high - a) >= -kOrderTol;
}

}  // namespace

VolatilityBounds VolatilityBounds::make(const Matrix& sigma_low, const Matrix& sigma_high) {
  VolatilityBounds b;
  b.dim = static_cast<int>(sigma_high.rows());
  b.sigma_low = sigma_low;
  b.sigma_high = sigma_high;
  b.validate();
  b.ellipticity_beta = std::max(0.0, min_eigenvalue(sigma_low)) / 2.0;
  return b;
}

VolatilityBounds VolatilityBounds::scalar(double low, double high) {
  return make(Matrix::Constant(1, 1, low), Matrix::Constant(1, 1, high));
}

void VolatilityBounds::validate() const {
  if (dim < 1) throw InvalidArgument("VolatilityBounds: dim must be >= 1");
  if (sigma_low.rows() != dim || sigma_low.cols() != dim || sigma_high.rows() != dim ||
      sigma_high.cols() != dim) {
    throw InvalidArgument("VolatilityBounds: matrices must be dim x dim");
  }
  if (!is_symmetric(sigma_high, 1e-12) || !is_symmetric(sigma_low, 1e-12)) {
    throw InvalidArgument("VolatilityBounds: sigma_low and sigma_high must be symmetric");
  }
  if (min_eigenvalue(sigma_low) < -kOrderTol) {
    throw InvalidArgument("VolatilityBounds: sigma_low must be positive semidefinite");
  }
  if (!(min_eigenvalue(sigma_high) > 0.0)) {
    throw InvalidArgument("VolatilityBounds: sigma_high must be positive definite");
  }
  if (min_eigenvalue(sigma_high - sigma_low) < -kOrderTol) {
    throw InvalidArgument("VolatilityBounds: sigma_high - sigma_low must be positive semidefinite");
  }
}

void ScenarioFamily::validate() const {
  bounds.validate();
  if (scenarios.empty()) throw InvalidArgument("ScenarioFamily: empty family");
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    if (sc.id != static_cast<int>(s)) {
      throw InvalidArgument("ScenarioFamily: scenario ids must be dense 0..m-1 in order");
    }
    if (static_cast<int>(sc.values.size()) != grid.n_steps()) {
      throw GridMismatch("ScenarioFamily: scenario " + std::to_string(s) +
                         " does not have one value per grid step");
    }
    for (std::size_t k = 0; k < sc.values.size(); ++k) {
      if (!within_bounds(sc.values[k], bounds)) {
        throw InvalidArgument("ScenarioFamily: scenario " + std::to_string(s) + " step " +
                              std::to_string(k) + " violates the volatility bounds");
      }
    }
  }
}

ScenarioFamily build_scenario_family(const VolatilityBounds& bounds, const TimeGrid& grid,
                                     const ScenarioStrategy& strategy) {
  bounds.validate();
  if (strategy.blocks < 1) throw InvalidArgument("build_scenario_family: blocks must be >= 1");
  const int n = grid.n_steps();
  const int blocks = strategy.blocks;
  auto block_of = [&](int k) { return static_cast<int>((static_cast<long long>(k) * blocks) / n); };

  ScenarioFamily family{bounds, grid, {}};

  if (strategy.kind == ScenarioStrategy::Kind::corners) {
    if (blocks > 20) throw InvalidArgument("build_scenario_family: too many corner blocks");
    const bool degenerate = same_matrix(bounds.sigma_low, bounds.sigma_high);
    const long long count = degenerate ? 1 : (1LL << blocks);
    for (long long code = 0; code < count; ++code) {
      VolatilityScenario sc;
      sc.id = static_cast<int>(code);
      sc.values.reserve(n);
      for (int k = 0; k < n; ++k) {
        // Block 0 is the most significant bit.
        const int bit = blocks - 1 - block_of(k);
        const bool high = degenerate ? false : ((code >> bit) & 1LL);
        sc.values.push_back(high ? bounds.sigma_high : bounds.sigma_low);
      }
      family.scenarios.push_back(std::move(sc));
    }
  } else {
    if (strategy.count < 1) throw InvalidArgument("build_scenario_family: empty family requested");
    const Philox rng(strategy.seed, kStreamScenarios);
    for (int s = 0; s < strategy.count; ++s) {
      VolatilityScenario sc;
      sc.id = s;
      std::vector<Matrix> block_values;
      for (int b = 0; b < blocks; ++b) {
        const double lambda = rng.uniform(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(b), 0);
        Matrix a = (1.0 - lambda) * bounds.sigma_low + lambda * bounds.sigma_high;
        a = 0.5 * (a + a.transpose());
        block_values.push_back(std::move(a));
      }
      for (int k = 0; k < n; ++k) sc.values.push_back(block_values[block_of(k)]);
      family.scenarios.push_back(std::move(sc));
    }
  }

  for (const auto& sc : family.scenarios) {
    for (const auto& a : sc.values) {
      if (!within_bounds(a, bounds)) {
        throw Error("build_scenario_family: generated scenario violates bounds (internal error)");
      }
    }
  }
  return family;
}

ScenarioFamily constant_family(const VolatilityBounds& bounds, const TimeGrid& grid,
                               const Matrix& a) {
  ScenarioFamily family{bounds, grid, {}};
  VolatilityScenario sc;
  sc.id = 0;
  sc.values.assign(grid.n_steps(), a);
  family.scenarios.push_back(std::move(sc));
  family.validate();
  return family;
}

NoiseBundle::NoiseBundle(const ScenarioFamily& family, int n_paths, std::uint64_t seed)
    : seed_(seed), n_paths_(n_paths), dim_(family.bounds.dim), grid_(family.grid) {
  if (n_paths < 1) throw InvalidArgument("sample_brownian: n_paths must be >= 1");
  const int n = grid_.n_steps();
  xi_.resize(static_cast<std::size_t>(n_paths) * n * dim_);
  const Philox rng(seed, kStreamBrownian);
  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < dim_; ++j) {
        xi_[(p * n + k) * dim_ + j] = rng.normal(static_cast<std::uint32_t>(p),
                                                 static_cast<std::uint32_t>(k),
                                                 static_cast<std::uint32_t>(j));
      }
    }
  });
  const double sqrt_dt = std::sqrt(grid_.dt());
  sqrt_a_.resize(family.size());
  for (std::size_t s = 0; s < family.size(); ++s) {
    sqrt_a_[s].reserve(n);
    const Matrix* prev = nullptr;
    for (int k = 0; k < n; ++k) {
      const Matrix& a = family[s].values[k];
      if (prev != nullptr && same_matrix(*prev, a)) {
        sqrt_a_[s].push_back(sqrt_a_[s].back());
      } else {
        sqrt_a_[s].push_back(symmetric_sqrt(a) * sqrt_dt);
      }
      prev = &a;
    }
  }
}

Vector NoiseBundle::increment(std::size_t scenario, int path, int step) const {
  const double* x = &xi_[(static_cast<std::size_t>(path) * grid_.n_steps() + step) * dim_];
  return sqrt_a_[scenario][step] * Eigen::Map<const Vector>(x, dim_);
}

double NoiseBundle::increment1(std::size_t scenario, int path, int step) const {
  return sqrt_a_[scenario][step](0, 0) * xi_[static_cast<std::size_t>(path) * grid_.n_steps() + step];
}

NoiseBundle sample_brownian(const ScenarioFamily& family, int n_paths, std::uint64_t seed) {
  return NoiseBundle(family, n_paths, seed);
}

QVPath quadratic_variation(const VolatilityScenario& scenario, const TimeGrid& grid) {
  if (static_cast<int>(scenario.values.size()) != grid.n_steps()) {
    throw GridMismatch("quadratic_variation: scenario is not defined on this grid");
  }
  QVPath qv;
  const int d = scenario.values.empty() ? 1 : static_cast<int>(scenario.values.front().rows());
  qv.cumulative.push_back(Matrix::Zero(d, d));
  for (const auto& a : scenario.values) {
    qv.increments.push_back(a * grid.dt());
    qv.cumulative.push_back(qv.cumulative.back() + qv.increments.back());
  }
  return qv;
}

UpperExpectation upper_expectation(const std::vector<std::vector<double>>& per_scenario_samples) {
  if (per_scenario_samples.empty()) throw InvalidArgument("upper_expectation: empty input");
  UpperExpectation out;
  for (std::size_t s = 0; s < per_scenario_samples.size(); ++s) {
    if (per_scenario_samples[s].size() < 2) {
      throw InvalidArgument("upper_expectation: each scenario needs at least 2 samples");
    }
    out.per_scenario.push_back(mean_se(per_scenario_samples[s]));
  }
  out.argmax = 0;
  for (std::size_t s = 1; s < out.per_scenario.size(); ++s) {
    if (out.per_scenario[s].mean > out.per_scenario[out.argmax].mean) out.argmax = static_cast<int>(s);
  }
  out.value = out.per_scenario[out.argmax].mean;
  out.se = out.per_scenario[out.argmax].se;
  return out;
}

std::vector<Matrix> corner_probe_set(const VolatilityBounds& bounds) {
  std::vector<Matrix> probes{bounds.sigma_low};
  if (!same_matrix(bounds.sigma_low, bounds.sigma_high)) probes.push_back(bounds.sigma_high);
  return probes;
}

std::vector<Matrix> default_probe_set(const ScenarioFamily& family) {
  std::vector<Matrix> probes = corner_probe_set(family.bounds);
  for (const auto& sc : family.scenarios) {
    for (const auto& a : sc.values) {
      const bool seen = std::any_of(probes.begin(), probes.end(),
                                    [&](const Matrix& p) { return same_matrix(p, a); });
      if (!seen) probes.push_back(a);
    }
  }
  return probes;
}

double generator_G(const Matrix& s, const std::vector<Matrix>& probes) {
  if (!is_symmetric(s, 1e-10)) throw InvalidArgument("generator_G: S must be symmetric");
  if (probes.empty()) throw InvalidArgument("generator_G: empty probe set");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& a : probes) best = std::max(best, (a * s).trace());
  return 0.5 * best;
}

}  // namespace gjump
