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

#include "gjump/cost.hpp"

#include <cmath>
#include <string>

namespace gjump {

RandomInputs make_inputs(const ScenarioFamily& family, const MarkSpace& marks, int n_paths,
                         std::uint64_t seed) {
  family.validate();
  return {sample_brownian(family, n_paths, seed), sample_poisson(marks, family.grid, n_paths, seed)};
}

std::vector<std::vector<double>> path_costs(const ModelSpec& model, const ControlSchedule& control,
                                            const StateEnsemble& states) {
  static const MarkSpace kNoMarks = MarkSpace::none();
  const MixedCoefficients mc(model, kNoMarks, control);
  const int S = states.n_scenarios(), P = states.n_paths(), N = states.n_steps();
  const double dt = states.grid().dt();
  std::vector<std::vector<double>> out(S, std::vector<double>(P, 0.0));
  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
    double run = 0.0;
    for (int k = 0; k < N; ++k) {
      run += mc.h(k, states.grid().time(k), states.x(s, p, k)) * dt;
    }
    const double c = model.g(states.x(s, p, N)) + run;
    if (!std::isfinite(c)) {
      throw NumericalError("path_costs: non-finite cost on scenario " + std::to_string(s) + ", path " +
                           std::to_string(p));
    }
    out[s][p] = c;
  });
  return out;
}

CostReport cost_report(std::vector<std::vector<double>> samples, std::uint64_t seed) {
  CostReport r;
  if (samples.empty() || samples.front().empty()) throw InvalidArgument("cost_report: no samples");
  UpperExpectation ue;
  if (samples.front().size() >= 2) {
    ue = upper_expectation(samples);
  } else {
    // A single path per scenario (deterministic runs): no standard error.
    for (std::size_t s = 0; s < samples.size(); ++s) {
      ue.per_scenario.push_back({samples[s][0], 0.0});
      if (samples[s][0] > ue.per_scenario[ue.argmax].mean) ue.argmax = static_cast<int>(s);
    }
    ue.value = ue.per_scenario[ue.argmax].mean;
  }
  r.per_scenario = ue.per_scenario;
  r.value = ue.value;
  r.argmax = ue.argmax;
  r.se = ue.se;
  r.n_paths = static_cast<int>(samples.front().size());
  r.seed = seed;
  r.samples = std::move(samples);
  return r;
}

CostReport evaluate_cost(const ModelSpec& model, const StrictControl& u, const ScenarioFamily& family,
                         const RandomInputs& inputs, const Vector& x0) {
  const ControlSchedule c = ControlSchedule::from(u);
  const StateEnsemble ens = simulate(model, c, family, inputs.noise, inputs.jumps, x0);
  return cost_report(path_costs(model, c, ens), inputs.noise.seed());
}

CostReport evaluate_cost(const ModelSpec& model, const RelaxedControl& mu,
                         const ScenarioFamily& family, const RandomInputs& inputs, const Vector& x0) {
  const ControlSchedule c = ControlSchedule::from(mu);
  const JumpSample tagged = tag_jumps(inputs.jumps, mu);
  const StateEnsemble ens = simulate(model, c, family, inputs.noise, tagged, x0);
  return cost_report(path_costs(model, c, ens), inputs.noise.seed());
}

CostReport evaluate_cost(const ModelSpec& model, const StrictControl& u, const ScenarioFamily& family,
                         const MarkSpace& marks, int n_paths, std::uint64_t seed, const Vector& x0) {
  return evaluate_cost(model, u, family, make_inputs(family, marks, n_paths, seed), x0);
}

CostReport evaluate_cost(const ModelSpec& model, const RelaxedControl& mu,
                         const ScenarioFamily& family, const MarkSpace& marks, int n_paths,
                         std::uint64_t seed, const Vector& x0) {
  return evaluate_cost(model, mu, family, make_inputs(family, marks, n_paths, seed), x0);
}

namespace {

template <typename Control>
ValueSearchResult search(const ModelSpec& model, const std::vector<Control>& candidates,
                         const ScenarioFamily& family, const RandomInputs& inputs, const Vector& x0) {
  if (candidates.empty()) throw InvalidArgument("value_bruteforce: empty candidate list");
  ValueSearchResult r;
  for (const auto& c : candidates) {
    r.reports.push_back(evaluate_cost(model, c, family, inputs, x0));
    r.table.push_back(r.reports.back().value);
  }
  r.argmin = 0;
  for (std::size_t i = 1; i < r.table.size(); ++i) {
    if (r.table[i] < r.table[r.argmin]) r.argmin = static_cast<int>(i);
  }
  r.value = r.table[r.argmin];
  return r;
}

}  // namespace

ValueSearchResult value_bruteforce(const ModelSpec& model, const std::vector<StrictControl>& candidates,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0) {
  return search(model, candidates, family, inputs, x0);
}

ValueSearchResult value_bruteforce(const ModelSpec& model,
                                   const std::vector<RelaxedControl>& candidates,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0) {
  return search(model, candidates, family, inputs, x0);
}

std::vector<RelaxedControl> simplex_grid_controls(const ActionGrid& actions, const TimeGrid& grid,
                                                  int resolution) {
  actions.validate();
  if (resolution < 1) throw InvalidArgument("simplex_grid_controls: resolution must be >= 1");
  const std::size_t m = actions.size();
  std::vector<RelaxedControl> out;
  std::vector<int> counts(m, 0);
  // Compositions of `resolution` into m parts, first coordinate descending.
  auto rec = [&](auto&& self, std::size_t i, int left) -> void {
    if (i + 1 == m) {
      counts[i] = left;
      std::vector<double> w(m);
      for (std::size_t j = 0; j < m; ++j) w[j] = static_cast<double>(counts[j]) / resolution;
      out.push_back(RelaxedControl::constant(actions, grid, w));
      return;
    }
    for (int c = left; c >= 0; --c) {
      counts[i] = c;
      self(self, i + 1, left - c);
    }
  };
  rec(rec, 0, resolution);
  return out;
}

namespace {

double paired_se(const CostReport& a, const CostReport& b) {
  if (a.argmax != b.argmax) return combined_se(a.se, b.se);
  const auto& x = a.samples[a.argmax];
  const auto& y = b.samples[b.argmax];
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
  return mean_se(diff).se;
}

}  // namespace

ChatteringReport chattering_report(const ModelSpec& model, const RelaxedControl& mu,
                                   const ScenarioFamily& family, const RandomInputs& inputs,
                                   const Vector& x0, const std::vector<int>& n_list) {
  if (n_list.empty()) throw InvalidArgument("chattering_report: empty n list");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || mu.grid.n_steps() % n_list[i] != 0) {
      throw InvalidArgument("chattering_report: n = " + std::to_string(n_list[i]) +
                            " does not divide n_steps = " + std::to_string(mu.grid.n_steps()));
    }
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw InvalidArgument("chattering_report: n list must ascend");
  }
  const ControlSchedule cmu = ControlSchedule::from(mu);
  const JumpSample tagged = tag_jumps(inputs.jumps, mu);
  const StateEnsemble xmu = simulate(model, cmu, family, inputs.noise, tagged, x0);
  const CostReport jmu = cost_report(path_costs(model, cmu, xmu), inputs.noise.seed());

  ChatteringReport rep;
  for (int n : n_list) {
    const StrictControl un = chattering(mu, n);
    const ControlSchedule cu = ControlSchedule::from(un);
    const StateEnsemble xn = simulate(model, cu, family, inputs.noise, inputs.jumps, x0);
    const CostReport jn = cost_report(path_costs(model, cu, xn), inputs.noise.seed());
    const SupDistance sd = sup_distance(xn, xmu);
    ChatteringRow row;
    row.n = n;
    row.path_gap = sd.upper.value;
    row.path_gap_se = sd.upper.se;
    row.j_strict = jn.value;
    row.j_relaxed = jmu.value;
    row.cost_gap = std::abs(jn.value - jmu.value);
    row.cost_gap_se = combined_se(jn.se, jmu.se);
    row.cost_gap_paired_se = paired_se(jn, jmu);
    rep.rows.push_back(row);
  }
  rep.path_gap_non_increasing = true;
  rep.cost_gap_non_increasing = true;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    const double inv = 1.0 / r.n;
    num += r.cost_gap * inv;
    den += inv * inv;
    if (i == 0) continue;
    const auto& q = rep.rows[i - 1];
    if (r.path_gap > q.path_gap + 3.0 * combined_se(r.path_gap_se, q.path_gap_se)) {
      rep.path_gap_non_increasing = false;
    }
    if (r.cost_gap > q.cost_gap + 3.0 * combined_se(r.cost_gap_se, q.cost_gap_se)) {
      rep.cost_gap_non_increasing = false;
    }
  }
  rep.fitted_c = num / den;
  return rep;
}

}  // namespace gjump
