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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <gjump/controls.hpp>
#include <gjump/rng.hpp>

namespace gjump {
namespace {

const ActionGrid kTwo = ActionGrid::scalar({-1.0, 1.0});
const ActionGrid kThree = ActionGrid::scalar({-1.0, 0.0, 2.0});
const TimeGrid kGrid(1.0, 64);

RelaxedControl half_half() { return RelaxedControl::constant(kTwo, kGrid, {0.5, 0.5}); }

TEST(ActionGrid, Validation) {
  EXPECT_THROW(ActionGrid::scalar({}).validate(), InvalidArgument);
  EXPECT_THROW(ActionGrid::scalar({1.0, 1.0}).validate(), InvalidArgument);
  EXPECT_NO_THROW(kThree.validate());
  EXPECT_EQ(kThree.dim(), 1);
}

TEST(StrictControl, FromBlocksSplitsEqually) {
  const auto u = StrictControl::from_blocks(kThree, TimeGrid(1.0, 6), {0, 2, 1});
  EXPECT_EQ(u.index, (std::vector<int>{0, 0, 2, 2, 1, 1}));
  EXPECT_THROW(StrictControl::from_blocks(kThree, TimeGrid(1.0, 2), {0, 1, 2}), InvalidArgument);
  EXPECT_THROW(StrictControl::from_blocks(kThree, TimeGrid(1.0, 3), {0, 1, 3}), InvalidArgument);
}

TEST(StrictControl, BlockOfStepMatchesFromBlocks) {
  const TimeGrid g(1.0, 10);
  const auto u = StrictControl::from_blocks(kThree, g, {0, 1, 2});
  for (int k = 0; k < 10; ++k) EXPECT_EQ(u.index[k], block_of_step(k, 10, 3));
}

TEST(RelaxedControl, Validation) {
  EXPECT_NO_THROW(half_half().validate());
  EXPECT_THROW(RelaxedControl::constant(kTwo, kGrid, {0.6, 0.6}).validate(), InvalidArgument);
  EXPECT_THROW(RelaxedControl::constant(kTwo, kGrid, {1.5, -0.5}).validate(), InvalidArgument);
  EXPECT_THROW(RelaxedControl::constant(kTwo, kGrid, {1.0}).validate(), InvalidArgument);
  EXPECT_FALSE(half_half().is_dirac());
  EXPECT_TRUE(RelaxedControl::constant(kTwo, kGrid, {0.0, 1.0}).is_dirac());
}

TEST(EmbedStrict, ConstantControlIsAFirstActionDirac) {
  const auto mu = embed_strict(StrictControl::constant(kThree, kGrid, 0));
  for (const auto& w : mu.weights) EXPECT_EQ(w, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(EmbedStrict, WeightsSumToOne) {
  const auto mu = embed_strict(StrictControl::from_blocks(kThree, kGrid, {2, 0, 1, 1}));
  for (const auto& w : mu.weights) EXPECT_EQ(w[0] + w[1] + w[2], 1.0);
  EXPECT_TRUE(mu.is_dirac());
}

TEST(Chattering, DiracIsAFixedPoint) {
  const auto mu = RelaxedControl::constant(kThree, kGrid, {0.0, 1.0, 0.0});
  for (int n : {1, 2, 4, 16, 64}) {
    const auto u = chattering(mu, n);
    for (int k = 0; k < 64; ++k) EXPECT_EQ(u.index[k], 1);
  }
}

TEST(Chattering, EmbedThenChatterReturnsTheControl) {
  const auto c = StrictControl::constant(kThree, kGrid, 2);
  for (int n : {1, 2, 8, 32, 64}) EXPECT_EQ(chattering(embed_strict(c), n).index, c.index) << n;
  // A piecewise control comes back whenever the blocks refine its pieces.
  const auto u = StrictControl::from_blocks(kThree, kGrid, {2, 0, 1, 1, 0, 2, 2, 1});
  for (int n : {8, 16, 64}) EXPECT_EQ(chattering(embed_strict(u), n).index, u.index) << n;
}

TEST(Chattering, HalfHalfSplitsTimeExactly) {
  const auto u = chattering(half_half(), 4);
  int first = 0;
  for (int k = 0; k < 64; ++k) first += u.index[k] == 0;
  EXPECT_EQ(first, 32);
  // Consecutive runs in action order inside each block of 16 steps.
  for (int b = 0; b < 4; ++b) {
    for (int k = 0; k < 8; ++k) EXPECT_EQ(u.index[16 * b + k], 0);
    for (int k = 8; k < 16; ++k) EXPECT_EQ(u.index[16 * b + k], 1);
  }
}

TEST(Chattering, RejectsNonDividingBlockCount) {
  EXPECT_THROW(chattering(half_half(), 5), InvalidArgument);
  EXPECT_THROW(chattering(half_half(), 0), InvalidArgument);
}

TEST(Chattering, OccupationErrorIsAtMostOneStep) {
  const Philox g(77);
  for (std::uint32_t trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> w(kGrid.n_steps(), std::vector<double>(3));
    for (int k = 0; k < kGrid.n_steps(); ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += w[k][i] = g.uniform(trial, k, i);
      for (int i = 0; i < 3; ++i) w[k][i] /= s;
    }
    const RelaxedControl mu{kThree, kGrid, w};
    for (int n : {1, 4, 8, 16}) {
      const auto u = chattering(mu, n);
      ASSERT_NO_THROW(u.validate());
      const int m = 64 / n;
      for (int b = 0; b < n; ++b) {
        for (int i = 0; i < 3; ++i) {
          double target = 0.0;
          int got = 0;
          for (int k = b * m; k < (b + 1) * m; ++k) {
            target += w[k][i];
            got += u.index[k] == i;
          }
          EXPECT_LE(std::abs(got - target), 1.0 + 1e-9);
        }
      }
    }
  }
}

TEST(StableConvergence, ChatteredDiracHasZeroGap) {
  const auto mu = RelaxedControl::constant(kThree, kGrid, {0.0, 0.0, 1.0});
  const std::vector<TestFunction> phis{[](double t, const Vector& a) { return std::sin(3 * t) * a[0]; },
                                       [](double t, const Vector& a) { return t * t + a[0] * a[0]; }};
  EXPECT_EQ(stable_convergence_gap(mu, chattering(mu, 8), phis), 0.0);
}

TEST(StableConvergence, ConstantTestFunctionHasZeroGap) {
  const std::vector<TestFunction> one{[](double, const Vector&) { return 1.0; }};
  for (int n : {1, 4, 16}) EXPECT_NEAR(stable_convergence_gap(half_half(), chattering(half_half(), n), one), 0.0, 1e-14);
}

// An even number of steps per chattering block splits 1/2-1/2 exactly.
RelaxedControl fine_half_half() { return RelaxedControl::constant(kTwo, TimeGrid(1.0, 256), {0.5, 0.5}); }

TEST(StableConvergence, GapOfTimeTimesActionDecreases) {
  const std::vector<TestFunction> phi{[](double t, const Vector& a) { return t * a[0]; }};
  double prev = INFINITY;
  for (int n : {4, 16, 64}) {
    const double gap = stable_convergence_gap(fine_half_half(), chattering(fine_half_half(), n), phi);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(StableConvergence, ActionIntegralRespectsRoundingBound) {
  const std::vector<TestFunction> phi{[](double, const Vector& a) { return a[0]; }};
  EXPECT_LE(stable_convergence_gap(fine_half_half(), chattering(fine_half_half(), 64), phi), 1.0 * 1.0 * (2.0 / 64.0));
  // one step per block cannot split the weights, and rounding favors the first action
  EXPECT_EQ(stable_convergence_gap(half_half(), chattering(half_half(), 64), phi), 1.0);
}

TEST(StableConvergence, LipschitzBoundHolds) {
  // |phi(t, a) - phi(s, a)| <= |t - s| and |phi| <= 2 on the grid actions.
  const std::vector<TestFunction> phi{[](double t, const Vector& a) { return std::cos(t) * a[0]; }};
  const auto mu = RelaxedControl::constant(kThree, kGrid, {0.2, 0.5, 0.3});
  for (int n : {2, 8, 32}) {
    const double gap = stable_convergence_gap(mu, chattering(mu, n), phi);
    EXPECT_LE(gap, 2.0 * (1.0 / n) * 3.0 + 3.0 * 2.0 * kGrid.dt() * n) << n;
  }
}

TEST(Spike, SameActionLeavesTheControlUnchanged) {
  const auto base = StrictControl::from_blocks(kThree, kGrid, {0, 2});
  SpikeSpec s{base, 0, 5 * kGrid.dt(), kGrid.dt()};
  EXPECT_EQ(spike(s).index, base.index);
}

TEST(Spike, ReplacesOnlyTheWindow) {
  const auto base = StrictControl::from_blocks(kThree, kGrid, {0, 2});
  SpikeSpec s{base, 1, 8 * kGrid.dt(), 4 * kGrid.dt()};
  const auto u = spike(s);
  for (int k = 0; k < 64; ++k) EXPECT_EQ(u.index[k], (k >= 8 && k < 12) ? 1 : base.index[k]);
  EXPECT_DOUBLE_EQ(ekeland_distance(u, base), 4 * kGrid.dt());
}

TEST(Spike, RejectsMisalignedOrOutOfRangeWindows) {
  const auto base = StrictControl::constant(kThree, kGrid, 0);
  EXPECT_THROW(spike({base, 1, 0.0, 1.5 * kGrid.dt()}), InvalidArgument);
  EXPECT_THROW(spike({base, 1, 0.5 * kGrid.dt(), kGrid.dt()}), InvalidArgument);
  EXPECT_THROW(spike({base, 1, 0.99, 2 * kGrid.dt()}), InvalidArgument);
  EXPECT_THROW(spike({base, 7, 0.0, kGrid.dt()}), InvalidArgument);
  EXPECT_THROW(spike({base, 1, 0.0, 0.0}), InvalidArgument);
}

TEST(Ekeland, IdentityAndSingleStep) {
  const auto u = StrictControl::from_blocks(kThree, kGrid, {0, 1});
  EXPECT_EQ(ekeland_distance(u, u), 0.0);
  auto v = u;
  v.index[10] = 2;
  EXPECT_DOUBLE_EQ(ekeland_distance(u, v), kGrid.dt());
  EXPECT_THROW(ekeland_distance(u, StrictControl::constant(kThree, TimeGrid(1.0, 32), 0)), GridMismatch);
}

TEST(Ekeland, MetricAxiomsOnRandomTriples) {
  const Philox g(5);
  auto random_control = [&](std::uint32_t id) {
    StrictControl u = StrictControl::constant(kThree, kGrid, 0);
    for (int k = 0; k < 64; ++k) u.index[k] = static_cast<int>(3.0 * g.uniform(id, k, 0));
    return u;
  };
  for (std::uint32_t t = 0; t < 100; ++t) {
    const auto u = random_control(3 * t), v = random_control(3 * t + 1), w = random_control(3 * t + 2);
    EXPECT_EQ(ekeland_distance(u, v), ekeland_distance(v, u));
    EXPECT_GE(ekeland_distance(u, v), 0.0);
    EXPECT_LE(ekeland_distance(u, v), 1.0 + 1e-12);
    EXPECT_LE(ekeland_distance(u, w), ekeland_distance(u, v) + ekeland_distance(v, w) + 1e-12);
  }
}

TEST(Mix, ConvexCombinationStaysValid) {
  const auto a = embed_strict(StrictControl::from_blocks(kThree, kGrid, {0, 1, 2, 0}));
  const auto b = RelaxedControl::constant(kThree, kGrid, {0.2, 0.3, 0.5});
  for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0}) EXPECT_NO_THROW(mix(a, b, lambda).validate());
  EXPECT_EQ(mix(a, b, 0.0).weights, a.weights);
  EXPECT_THROW(mix(a, b, 1.5), InvalidArgument);
}

TEST(EnumerateBlockControls, CountAndOrder) {
  const auto all = enumerate_block_controls(kThree, TimeGrid(1.0, 6), 2);
  ASSERT_EQ(all.size(), 9u);
  EXPECT_EQ(all[0].index, (std::vector<int>{0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(all[1].index, (std::vector<int>{0, 0, 0, 1, 1, 1}));  // last block varies fastest
  EXPECT_EQ(all[3].index, (std::vector<int>{1, 1, 1, 0, 0, 0}));
}

}  // namespace
}  // namespace gjump
