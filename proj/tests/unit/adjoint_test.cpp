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

#include <gjump/adjoint.hpp>
#include <gjump/models.hpp>

namespace gjump {
namespace {

Vector v1(double v) { return Vector::Constant(1, v); }
RowVector r1(double v) { return RowVector::Constant(1, v); }
Matrix m1(double v) { return Matrix::Constant(1, 1, v); }
const ActionGrid kActions = ActionGrid::scalar({-1.0, 1.0});

ScenarioFamily corners(const TimeGrid& g, double lo = 0.5, double hi = 1.0) {
  return build_scenario_family(VolatilityBounds::scalar(lo, hi), g, ScenarioStrategy::corners(2));
}

ScenarioFamily singleton(const TimeGrid& g) {
  return constant_family(VolatilityBounds::scalar(1.0, 1.0), g, m1(1.0));
}

// b = h = 0 with the control in gamma and the jump size.
const ModelParams kStrictParams{{"alpha", 0.0}, {"beta", 0.0},   {"b0", 0.0},  {"sigma0", 0.2}, {"sigma1", 0.0},
                                {"gamma0", 0.0}, {"gamma1", 0.0}, {"gamma_u", 0.3}, {"f0", 0.5},  {"f1", 0.0},
                                {"f_u", 0.2},   {"q_h", 0.0},    {"r_h", 0.0}, {"q_g", 1.0},    {"target", 0.0}};

TEST(Hamiltonian, HandComputedValues) {
  const auto marks = MarkSpace::scalar({1.0}, {1.0});
  EXPECT_EQ(hamiltonian(make_model("zero"), marks, 0.0, v1(1.0), v1(1.0), r1(2.0), m1(1.0), m1(1.0)), 0.0);
  EXPECT_EQ(hamiltonian(make_model("zero", {{"h_const", 3.0}}), marks, 0.0, v1(1.0), v1(1.0), r1(2.0), m1(1.0), m1(1.0)),
            3.0);
  // h = 0.55, p b = 2 * 0.5, q sigma = 0.3, r f nu = 0.2
  EXPECT_NEAR(hamiltonian(make_model("linear_jump_lq"), marks, 0.0, v1(1.0), v1(1.0), r1(2.0), m1(1.0), m1(1.0)), 2.05,
              1e-15);
  const auto two = MarkSpace::scalar({1.0, -2.0}, {1.0, 0.5});
  Matrix r(2, 1);
  r << 1.0, 3.0;
  // f = 0.2 theta: 1 * 0.2 * 1 + 3 * (-0.4) * 0.5
  EXPECT_NEAR(hamiltonian(make_model("linear_jump_lq"), two, 0.0, v1(1.0), v1(1.0), r1(2.0), m1(1.0), r), 2.05 - 0.6,
              1e-15);
}

struct Fixture {
  TimeGrid grid;
  ScenarioFamily family;
  RandomInputs inputs;
  Fixture(int n_steps, ScenarioFamily fam, const MarkSpace& marks, int n_paths, std::uint64_t seed)
      : grid(1.0, n_steps), family(std::move(fam)), inputs(make_inputs(family, marks, n_paths, seed)) {}

  AdjointSolution solve(const ModelSpec& model, const StrictControl& u, const Vector& x0, StateEnsemble* out = nullptr,
                        const AdjointOptions& opt = {}) const {
    const auto c = ControlSchedule::from(u);
    StateEnsemble xs = simulate(model, c, family, inputs.noise, inputs.jumps, x0);
    auto sol = solve_adjoint(model, c, family, inputs.noise, inputs.jumps, xs, opt);
    if (out != nullptr) *out = std::move(xs);
    return sol;
  }
};

TEST(Adjoint, AdditiveDriftHasUnitP) {
  const TimeGrid g(1.0, 20);
  Fixture f(20, corners(g), MarkSpace::scalar({1.0}, {1.0}), 200, 1);
  for (double sigma0 : {0.0, 0.3}) {
    const auto model = make_model("constant_drift", {{"sigma0", sigma0}});
    const auto sol = f.solve(model, StrictControl::constant(kActions, f.grid, 0), v1(0.0));
    for (double v : sol.triple.p.raw()) EXPECT_NEAR(v, 1.0, 1e-12);
    for (double v : sol.triple.q.raw()) EXPECT_NEAR(v, 0.0, 1e-10);
    for (double v : sol.triple.r.raw()) EXPECT_NEAR(v, 0.0, 1e-10);
  }
}

TEST(Adjoint, TerminalValueIsTheCostGradient) {
  const TimeGrid g(1.0, 20);
  Fixture f(20, corners(g), MarkSpace::scalar({1.0}, {1.0}), 100, 2);
  const auto model = make_model("linear_jump_lq", {{"target", 0.4}, {"q_g", 2.0}});
  StateEnsemble xs;
  const auto sol = f.solve(model, StrictControl::constant(kActions, f.grid, 1), v1(1.0), &xs);
  for (int s = 0; s < 2; ++s)
    for (int p = 0; p < 100; ++p) {
      EXPECT_EQ(sol.triple.p.at(s, p, 20)(0, 0), model.g_x(xs.x(s, p, 20))[0]);
    }
}

TEST(Adjoint, BilinearPIsTheDiscountedTerminalState) {
  const TimeGrid g(1.0, 400);
  Fixture f(400, corners(g), MarkSpace::none(), 50, 3);
  const auto model = make_model("bilinear");
  const ActionGrid acts = ActionGrid::scalar({0.0, 1.0});
  StateEnsemble xs;
  const auto sol = f.solve(model, StrictControl::constant(acts, f.grid, 0), v1(1.0), &xs);
  const double xT = xs.x(0, 0, 400)[0];
  for (int k : {0, 100, 200, 399}) {
    const double t = g.time(k);
    const double expect = xT * std::exp(0.5 * (1.0 - t));
    EXPECT_NEAR(sol.triple.p.at(0, 0, k)(0, 0), expect, 0.02 * expect) << k;
  }
}

TEST(Adjoint, RejectsBadOptions) {
  const TimeGrid g(1.0, 10);
  Fixture f(10, corners(g), MarkSpace::none(), 20, 4);
  AdjointOptions opt;
  opt.degree = -1;
  EXPECT_THROW(f.solve(make_model("zero"), StrictControl::constant(kActions, f.grid, 0), v1(0.0), nullptr, opt),
               InvalidArgument);
}

TEST(Residual, ExactTripleHasNoResidual) {
  const TimeGrid g(1.0, 30);
  Fixture f(30, corners(g), MarkSpace::scalar({1.0}, {1.0}), 100, 5);
  const auto model = make_model("constant_drift");
  StateEnsemble xs;
  const auto sol = f.solve(model, StrictControl::constant(kActions, f.grid, 0), v1(0.0), &xs);
  const auto res = bsde_residual(model, sol, f.family, f.inputs.noise, f.inputs.jumps, xs);
  EXPECT_LE(res.max, 1e-12);
}

TEST(Residual, PerturbedTripleIsDetected) {
  const TimeGrid g(1.0, 30);
  Fixture f(30, corners(g), MarkSpace::scalar({1.0}, {1.0}), 100, 6);
  const auto model = make_model("constant_drift");
  StateEnsemble xs;
  const auto sol = f.solve(model, StrictControl::constant(kActions, f.grid, 0), v1(0.0), &xs);
  AdjointTriple bad = sol.triple;
  for (int s = 0; s < static_cast<int>(f.family.size()); ++s)
    for (int p = 0; p < 100; ++p)
      for (int k = 0; k <= 30; ++k) bad.q.at(s, p, k)(0, 0) += 0.5;
  const auto res = bsde_residual(model, sol.control, bad, f.family, f.inputs.noise, f.inputs.jumps, xs);
  // 0.25 E[dB^2] = 0.25 a_k dt on each step, averaged over the steps
  for (int s = 0; s < static_cast<int>(f.family.size()); ++s) {
    double a = 0.0;
    for (const auto& c : f.family[s].values) a += c(0, 0) / 30.0;
    EXPECT_NEAR(res.per_scenario[s], 0.25 * a / 30.0, 0.1 * 0.25 * a / 30.0) << s;
  }
}

TEST(Residual, AffineAdjointIsNotImprovedByAQuadraticBasis) {
  // p is affine in x on linear_jump_lq, so degree 1 is already exact and the
  // extra monomial only adds estimation noise to p_k and to the increments.
  const TimeGrid g(1.0, 50);
  Fixture f(50, corners(g), MarkSpace::scalar({0.5}, {1.0}), 2000, 7);
  const auto model = make_model("linear_jump_lq", {{"sigma1", 0.2}});
  const auto u = StrictControl::constant(kActions, f.grid, 1);
  AdjointOptions o1, o2;
  o1.degree = 1;
  o2.degree = 2;
  StateEnsemble xs;
  const auto s1 = f.solve(model, u, v1(1.0), &xs, o1);
  const auto s2 = f.solve(model, u, v1(1.0), nullptr, o2);
  const auto res1 = bsde_residual(model, s1, f.family, f.inputs.noise, f.inputs.jumps, xs);
  const auto res2 = bsde_residual(model, s2, f.family, f.inputs.noise, f.inputs.jumps, xs);
  EXPECT_LE(res1.max, res2.max) << res1.max << " " << res2.max;
  EXPECT_LT(res1.max, 1e-3);
}

TEST(MpStrict, SingleActionIsVacuous) {
  const TimeGrid g(1.0, 16);
  Fixture f(16, corners(g), MarkSpace::scalar({1.0}, {2.0}), 200, 8);
  const auto u = StrictControl::constant(ActionGrid::scalar({0.5}), f.grid, 0);
  const auto rep = mp_check_strict(make_model("linear_jump_lq", kStrictParams), u, f.family, f.inputs, v1(1.0));
  ASSERT_EQ(rep.entries.size(), 2u);
  for (const auto& e : rep.entries) EXPECT_EQ(e.estimate, 0.0);
  EXPECT_TRUE(rep.verdict);
}

TEST(MpStrict, AdditiveDriftEntriesAreExact) {
  // p == 1 and eta only feeds q sigma_x == 0, so the entry is beta (nu - u).
  const TimeGrid g(1.0, 20);
  Fixture f(20, corners(g), MarkSpace::scalar({1.0}, {1.0}), 100, 9);
  const auto rep = mp_check_strict(make_model("constant_drift", {{"beta", 1.0}, {"sigma0", 0.3}}),
                                   StrictControl::constant(kActions, f.grid, 0), f.family,
                                   f.inputs, v1(0.0));
  for (const auto& e : rep.entries) {
    EXPECT_NEAR(e.estimate, e.action == 1 ? 2.0 : 0.0, 1e-10);
    EXPECT_NEAR(e.f.gamma, 0.0, 1e-12);
    EXPECT_NEAR(e.f.q_sigma, 0.0, 1e-10);
  }
  EXPECT_TRUE(rep.verdict);
  EXPECT_FALSE(rep.within_hypothesis);
  EXPECT_EQ(rep.label, "outside theorem hypothesis");
}

class StrictInstance : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    grid_ = new TimeGrid(1.0, 32);
    family_ = new ScenarioFamily(corners(*grid_));
    inputs_ = new RandomInputs(make_inputs(*family_, MarkSpace::scalar({1.0}, {2.0}), 2000, 20261015));
    cands_ = new std::vector<StrictControl>(enumerate_block_controls(kActions, *grid_, 2));
    best_ = value_bruteforce(make_model("linear_jump_lq", kStrictParams), *cands_, *family_, *inputs_, v1(1.0)).argmin;
  }
  static void TearDownTestSuite() {
    delete grid_;
    delete family_;
    delete inputs_;
    delete cands_;
  }
  static TimeGrid* grid_;
  static ScenarioFamily* family_;
  static RandomInputs* inputs_;
  static std::vector<StrictControl>* cands_;
  static int best_;
};
TimeGrid* StrictInstance::grid_ = nullptr;
ScenarioFamily* StrictInstance::family_ = nullptr;
RandomInputs* StrictInstance::inputs_ = nullptr;
std::vector<StrictControl>* StrictInstance::cands_ = nullptr;
int StrictInstance::best_ = 0;

TEST_F(StrictInstance, OptimalControlPasses) {
  const auto rep = mp_check_strict(make_model("linear_jump_lq", kStrictParams), (*cands_)[best_], *family_, *inputs_, v1(1.0));
  EXPECT_TRUE(rep.verdict) << rep.worst_entry;
  EXPECT_TRUE(rep.within_hypothesis);
  EXPECT_EQ(rep.label, "");
}

TEST_F(StrictInstance, SwappedBlockFailsWithWitness) {
  const auto& opt = (*cands_)[best_];
  const int b0 = opt.index.front();
  const int b1 = opt.index.back();
  // flip the block whose flip costs the most
  const auto model = make_model("linear_jump_lq", kStrictParams);
  const auto flip0 = StrictControl::from_blocks(kActions, *grid_, {1 - b0, b1});
  const auto flip1 = StrictControl::from_blocks(kActions, *grid_, {b0, 1 - b1});
  const double j0 = evaluate_cost(model, flip0, *family_, *inputs_, v1(1.0)).value;
  const double j1 = evaluate_cost(model, flip1, *family_, *inputs_, v1(1.0)).value;
  const bool first = j0 >= j1;
  const auto rep = mp_check_strict(model, first ? flip0 : flip1, *family_, *inputs_, v1(1.0));
  EXPECT_FALSE(rep.verdict);
  EXPECT_EQ(rep.worst_block, first ? 0 : 1);
  EXPECT_EQ(rep.worst_action, first ? b0 : b1);
}

TEST_F(StrictInstance, ZeroEpsilonNearCheckIsTheStrictCheck) {
  const auto model = make_model("linear_jump_lq", kStrictParams);
  const auto& u = (*cands_)[best_];
  const auto strict = mp_check_strict(model, u, *family_, *inputs_, v1(1.0));
  const auto near = mp_check_near(model, u, 0.0, 10.0, *family_, *inputs_, v1(1.0), {});
  ASSERT_EQ(near.mp.entries.size(), strict.entries.size());
  for (std::size_t i = 0; i < strict.entries.size(); ++i) {
    EXPECT_EQ(near.mp.entries[i].estimate, strict.entries[i].estimate);
    EXPECT_EQ(near.mp.entries[i].pass, strict.entries[i].pass);
  }
  EXPECT_EQ(near.mp.verdict, strict.verdict);
  EXPECT_EQ(near.minimal_c, 0.0);
}

TEST_F(StrictInstance, EkelandHoldsAtTheMinimizer) {
  const auto model = make_model("linear_jump_lq", kStrictParams);
  const auto rep = mp_check_near(model, (*cands_)[best_], 0.0, 0.0, *family_, *inputs_, v1(1.0), *cands_);
  ASSERT_EQ(rep.ekeland.size(), cands_->size());
  EXPECT_TRUE(rep.ekeland_holds);
  EXPECT_EQ(rep.ekeland[best_].distance, 0.0);
}

TEST_F(StrictInstance, RelaxedCheckOfTheEmbeddingMatches) {
  const auto model = make_model("linear_jump_lq", kStrictParams);
  const auto& u = (*cands_)[best_];
  const auto strict = mp_check_strict(model, u, *family_, *inputs_, v1(1.0));
  const auto relaxed = mp_check_relaxed(model, embed_strict(u), *family_, *inputs_, v1(1.0));
  ASSERT_EQ(relaxed.entries.size(), strict.entries.size());
  for (std::size_t i = 0; i < strict.entries.size(); ++i) {
    EXPECT_NEAR(relaxed.entries[i].estimate, strict.entries[i].estimate, 1e-10);
  }
  EXPECT_EQ(relaxed.verdict, strict.verdict);
}

TEST(MpNear, RejectsNegativeInputs) {
  const TimeGrid g(1.0, 8);
  Fixture f(8, corners(g), MarkSpace::none(), 10, 10);
  const auto u = StrictControl::constant(kActions, f.grid, 0);
  EXPECT_THROW(mp_check_near(make_model("zero"), u, -1.0, 1.0, f.family, f.inputs, v1(0.0), {}), InvalidArgument);
  EXPECT_THROW(mp_check_near(make_model("zero"), u, 0.1, -1.0, f.family, f.inputs, v1(0.0), {}), InvalidArgument);
}

TEST(FTerms, SingletonFamilyHasNoSTerm) {
  const TimeGrid g(1.0, 32);
  Fixture f(32, singleton(g), MarkSpace::scalar({1.0}, {1.0}), 500, 11);
  const auto rep = mp_check_strict(make_model("linear_jump_lq", {{"sigma1", 0.3}, {"gamma_u", 0.2}}),
                                   StrictControl::constant(kActions, f.grid, 0), f.family, f.inputs, v1(1.0));
  for (const auto& e : rep.entries) EXPECT_NEAR(e.f.s_term, 0.0, 1e-12);
}

TEST(FTerms, ZeroModelHasZeroEntries) {
  const TimeGrid g(1.0, 16);
  Fixture f(16, corners(g), MarkSpace::scalar({1.0}, {1.0}), 100, 12);
  const auto rep = mp_check_strict(make_model("zero"), StrictControl::constant(kActions, f.grid, 0), f.family, f.inputs,
                                   v1(0.0));
  for (const auto& e : rep.entries) {
    EXPECT_EQ(e.estimate, 0.0);
    EXPECT_EQ(e.f.gamma, 0.0);
    EXPECT_EQ(e.f.q_sigma, 0.0);
  }
  EXPECT_TRUE(rep.verdict);
}

TEST(MpRelaxed, SimplexOptimumPasses) {
  // J(mu) = Var(x_T) + (drift)^2 with a control-free variance, minimized by 1/2-1/2.
  const ModelParams concave{{"alpha", 0.0}, {"beta", 0.0},   {"b0", 0.0},    {"sigma0", 0.3}, {"sigma1", 0.0},
                            {"gamma0", 0.0}, {"gamma1", 0.0}, {"gamma_u", 0.5}, {"f0", 0.3},     {"f1", 0.0},
                            {"f_u", 0.0},   {"q_h", 0.0},    {"r_h", 0.0},    {"q_g", 1.0},    {"target", 1.0}};
  const TimeGrid g(1.0, 32);
  Fixture f(32, corners(g), MarkSpace::scalar({1.0}, {1.0}), 1000, 13);
  const auto model = make_model("linear_jump_lq", concave);
  const auto mu = RelaxedControl::constant(kActions, f.grid, {0.5, 0.5});
  EXPECT_TRUE(mp_check_relaxed(model, mu, f.family, f.inputs, v1(1.0)).verdict);
  const auto dirac = RelaxedControl::constant(kActions, f.grid, {0.0, 1.0});
  EXPECT_FALSE(mp_check_relaxed(model, dirac, f.family, f.inputs, v1(1.0)).verdict);
}

TEST(Stability, DiracControlHasZeroGaps) {
  const TimeGrid g(1.0, 32);
  Fixture f(32, corners(g), MarkSpace::scalar({1.0}, {1.0}), 200, 14);
  const auto mu = RelaxedControl::constant(kActions, f.grid, {1.0, 0.0});
  const auto rep = bsde_stability_report(make_model("linear_jump_lq"), mu, {4, 16}, f.family, f.inputs, v1(1.0), {}, 50);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.p_gap, 0.0);
    EXPECT_EQ(r.q_gap, 0.0);
    EXPECT_EQ(r.r_gap, 0.0);
    EXPECT_EQ(r.k_gap, 0.0);
  }
  EXPECT_TRUE(rep.k_zero);
  EXPECT_TRUE(rep.audit.pass());
  EXPECT_THROW(bsde_stability_report(make_model("zero"), mu, {16, 4}, f.family, f.inputs, v1(0.0)), InvalidArgument);
}

TEST(Stability, GapsShrinkUnderChattering) {
  const TimeGrid g(1.0, 64);
  Fixture f(64, corners(g), MarkSpace::scalar({1.0}, {1.0}), 500, 15);
  const auto mu = RelaxedControl::constant(kActions, f.grid, {0.5, 0.5});
  const auto rep = bsde_stability_report(make_model("linear_jump_lq"), mu, {4, 16, 32}, f.family, f.inputs, v1(1.0), {}, 200);
  EXPECT_TRUE(rep.p_non_increasing);
  EXPECT_TRUE(rep.q_non_increasing);
  EXPECT_TRUE(rep.r_non_increasing);
  EXPECT_GT(rep.rows.front().p_gap, rep.rows.back().p_gap);
}

TEST(LipschitzAudit, RegistryModelsPass) {
  const auto marks = MarkSpace::scalar({1.0, -0.5}, {1.0, 2.0});
  for (const auto& info : list_models()) {
    const auto audit =
        driver_lipschitz_audit(make_model(info.name), kActions, marks, VolatilityBounds::scalar(0.5, 1.0), 1.0, 300, 16);
    EXPECT_TRUE(audit.pass()) << info.name << " worst " << audit.worst_ratio;
    EXPECT_EQ(audit.n_probes, 300);
  }
}

TEST(LipschitzAudit, UnderstatedBoundsFail) {
  auto model = make_model("linear_jump_lq", {{"alpha", -3.0}, {"sigma1", 0.5}, {"f1", 1.0}});
  model.bounds = {0.01, 0.01, 0.0, 0.01};
  const auto audit = driver_lipschitz_audit(model, kActions, MarkSpace::scalar({1.0}, {1.0}),
                                            VolatilityBounds::scalar(0.5, 1.0), 1.0, 300, 17);
  EXPECT_FALSE(audit.pass());
  EXPECT_GT(audit.worst_ratio, audit.c0);
}

}  // namespace
}  // namespace gjump
