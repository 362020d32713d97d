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

#include <benchmark/benchmark.h>

#include <gjump/adjoint.hpp>
#include <gjump/models.hpp>
#include <gjump/regression.hpp>

namespace {

using namespace gjump;

void BM_SolveAdjoint(benchmark::State& state) {
  set_default_threads(1);
  const TimeGrid g(1.0, 64);
  const auto fam = build_scenario_family(VolatilityBounds::scalar(0.5, 1.0), g, ScenarioStrategy::corners(2));
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), static_cast<int>(state.range(0)), 4);
  const auto model = make_model("linear_jump_lq");
  const auto c = ControlSchedule::from(StrictControl::constant(ActionGrid::scalar({-1.0, 1.0}), g, 1));
  const auto xs = simulate(model, c, fam, inputs.noise, inputs.jumps, Vector::Constant(1, 1.0));
  AdjointOptions opt;
  opt.degree = static_cast<int>(state.range(1));
  for (auto _ : state) {
    auto sol = solve_adjoint(model, c, fam, inputs.noise, inputs.jumps, xs, opt);
    benchmark::DoNotOptimize(sol.triple.p.raw().data());
  }
}
BENCHMARK(BM_SolveAdjoint)->Args({1000, 1})->Args({1000, 2})->Args({4000, 2})->Unit(benchmark::kMillisecond);

void BM_LeastSquares(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  Matrix x = Matrix::Random(rows, 1);
  const auto basis = PolynomialBasis::fit(x, 3);
  const Matrix d = basis.design(x);
  const Matrix y = Matrix::Random(rows, 2);
  for (auto _ : state) benchmark::DoNotOptimize(least_squares(d, y).coef.data());
}
BENCHMARK(BM_LeastSquares)->Arg(2000)->Arg(20000);

void BM_MpCheckStrict(benchmark::State& state) {
  set_default_threads(1);
  const TimeGrid g(1.0, 32);
  const auto fam = build_scenario_family(VolatilityBounds::scalar(0.5, 1.0), g, ScenarioStrategy::corners(2));
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {2.0}), 1000, 5);
  const auto model = make_model("linear_jump_lq", {{"gamma_u", 0.3}, {"f_u", 0.2}});
  const auto u = StrictControl::from_blocks(ActionGrid::scalar({-1.0, 1.0}), g, {0, 1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(mp_check_strict(model, u, fam, inputs, Vector::Constant(1, 1.0)).verdict);
  }
}
BENCHMARK(BM_MpCheckStrict)->Unit(benchmark::kMillisecond);

}  // namespace
