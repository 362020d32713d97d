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

// Desk-scale acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <gjump/adjoint.hpp>
#include <gjump/models.hpp>

#include "oracles.hpp"
#include "runner.hpp"

namespace gjump {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Vector v1(double v) { return Vector::Constant(1, v); }
const ActionGrid kPm = ActionGrid::scalar({-1.0, 1.0});

ScenarioFamily singleton(const TimeGrid& g, double a) {
  return constant_family(VolatilityBounds::scalar(a, a), g, Matrix::Constant(1, 1, a));
}
ScenarioFamily corners(const TimeGrid& g, double lo, double hi, int blocks) {
  return build_scenario_family(VolatilityBounds::scalar(lo, hi), g, ScenarioStrategy::corners(blocks));
}

// b = h = 0, control in gamma and the jump size
const ModelParams kStrict{{"alpha", 0.0}, {"beta", 0.0},   {"b0", 0.0},  {"sigma0", 0.2}, {"sigma1", 0.0},
                          {"gamma0", 0.0}, {"gamma1", 0.0}, {"gamma_u", 0.3}, {"f0", 0.5},  {"f1", 0.0},
                          {"f_u", 0.2},   {"q_h", 0.0},    {"r_h", 0.0}, {"q_g", 1.0},    {"target", 0.0}};
// b = h = 0, control in gamma only, terminal cost centred at x0
const ModelParams kConcave{{"alpha", 0.0}, {"beta", 0.0},   {"b0", 0.0},    {"sigma0", 0.3}, {"sigma1", 0.0},
                           {"gamma0", 0.0}, {"gamma1", 0.0}, {"gamma_u", 0.5}, {"f0", 0.3},     {"f1", 0.0},
                           {"f_u", 0.0},   {"q_h", 0.0},    {"r_h", 0.0},    {"q_g", 1.0},    {"target", 1.0}};

Outcome classical_reduction() {
  const TimeGrid g(1.0, 100);
  const auto marks = MarkSpace::scalar({0.5, -0.5}, {1.0, 0.5});
  const ActionGrid acts = ActionGrid::scalar({-1.0, 0.0, 1.0});
  const auto u = StrictControl::from_blocks(acts, g, {0, 1});
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = evaluate_cost(make_model("linear_jump_lq"), u, singleton(g, 1.0), marks, 10000, 11, v1(1.0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<double> um, u2;
  for (int k = 0; k < 100; ++k) {
    um.push_back(u.action(k)[0]);
    u2.push_back(um.back() * um.back());
  }
  const auto params = resolve_params("linear_jump_lq", {});
  const auto ref = oracle::lq_moments(params, marks, 1.0, std::vector<double>(100, 1.0), um, u2, 1.0);
  const auto lib = linear_jump_lq_reference(params, marks, g, std::vector<double>(100, 1.0), um, u2, 1.0);
  const double dev = std::abs(r.value - ref.cost);
  return {dev <= 3.0 * r.se && secs < 60.0,
          "J=" + fmt(r.value) + " closed form=" + fmt(ref.cost) + " (library " + fmt(lib.cost) + ") |diff|=" +
              fmt(dev) + " 3se=" + fmt(3.0 * r.se) + " runtime=" + fmt(secs) + "s"};
}

Outcome chattering_convergence() {
  const TimeGrid g(1.0, 128);
  const auto fam = corners(g, 0.5, 1.0, 2);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), 2000, 12);
  const auto model = make_model("linear_jump_lq", {{"alpha", -0.5}, {"beta", 1.0}, {"f1", 0.2}, {"f_u", 0.0}});
  const auto mu = RelaxedControl::constant(kPm, g, {0.5, 0.5});
  const auto rep = chattering_report(model, mu, fam, inputs, v1(1.0), {4, 16, 64});
  const auto& last = rep.rows.back();
  std::string d = "path gaps";
  for (const auto& r : rep.rows) d += " " + fmt(r.path_gap);
  d += "; cost gaps";
  for (const auto& r : rep.rows) d += " " + fmt(r.cost_gap);
  d += "; n=64 gap " + fmt(last.cost_gap) + " vs 3se " + fmt(3.0 * last.cost_gap_se);
  return {rep.path_gap_non_increasing && rep.cost_gap_non_increasing && last.cost_gap <= 3.0 * last.cost_gap_se, d};
}

Outcome variational_estimate() {
  const std::vector<double> hs{0.1, 0.05, 0.025};
  const TimeGrid g1(1.0, 1000);
  const auto fam1 = singleton(g1, 1.0);
  const auto in1 = make_inputs(fam1, MarkSpace::none(), 2, 13);
  const auto q1 = difference_quotient_gap(make_model("bilinear", {{"alpha", 0.5}, {"beta", 1.0}}),
                                          StrictControl::constant(kPm, g1, 0), 0.3, 1, hs, fam1, in1, v1(1.0));
  const TimeGrid g2(1.0, 400);
  const auto fam2 = corners(g2, 0.5, 1.0, 2);
  const auto in2 = make_inputs(fam2, MarkSpace::scalar({1.0}, {1.0}), 1000, 23);
  const auto q2 = difference_quotient_gap(make_model("linear_jump_lq"), StrictControl::constant(kPm, g2, 1), 0.3, 0,
                                          hs, fam2, in2, v1(1.0));
  std::string d = "drift-only min ratio " + fmt(q1.min_ratio) + "; LQ gaps";
  for (const auto& r : q2.rows) d += " " + fmt(r.gap);
  return {q1.min_ratio >= 1.5 && q2.non_increasing, d};
}

double inverse_error(int n_steps) {
  const TimeGrid g(1.0, n_steps);
  const auto fam = corners(g, 0.5, 1.0, 2);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), 200, 24);
  const auto model = make_model("linear_jump_lq");
  const auto u = StrictControl::constant(kPm, g, 1);
  const auto xs = simulate_strict(model, u, fam, inputs.noise, inputs.jumps, v1(1.0));
  return inverse_identity_error(solve_fundamental(model, ControlSchedule::from(u), fam, inputs.noise, inputs.jumps, xs));
}

Outcome inverse_identity() {
  const double e1 = inverse_error(1000);
  const double e2 = inverse_error(2000);
  const double ratio = e1 / e2;
  return {e1 <= 5e-2 && ratio >= 1.6 && ratio <= 2.4,
          "error(dt=1e-3)=" + fmt(e1) + " error(dt=5e-4)=" + fmt(e2) + " ratio=" + fmt(ratio)};
}

Outcome derivative_agreement() {
  const TimeGrid g(1.0, 400);
  const auto fam = singleton(g, 1.0);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({0.5}, {1.0}), 4000, 25);
  const auto rep = gateaux_derivative(make_model("linear_jump_lq", {{"r_h", 0.0}}), StrictControl::constant(kPm, g, 1),
                                      0.3, 0, {0.1, 0.05, 0.025}, fam, inputs, v1(1.0));
  const auto& fd = rep.rows.back();
  return {rep.agrees, "FD(h=" + fmt(fd.h) + ")=" + fmt(fd.fd) + " formula=" + fmt(rep.formula) +
                          " |diff|=" + fmt(std::abs(fd.fd - rep.formula)) + " tol=" + fmt(rep.tolerance)};
}

Outcome strict_principle() {
  const TimeGrid g(1.0, 32);
  const auto fam = corners(g, 0.5, 1.0, 2);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {2.0}), 2000, 20261015);
  const auto model = make_model("linear_jump_lq", kStrict);
  const auto cands = enumerate_block_controls(kPm, g, 2);
  const auto v = value_bruteforce(model, cands, fam, inputs, v1(1.0));
  const auto& best = cands[v.argmin];
  const auto good = mp_check_strict(model, best, fam, inputs, v1(1.0));

  // u* with block 0 flipped; its best single-block improvement comes from the table.
  const int b0 = best.index.front(), b1 = best.index.back();
  const auto bad_u = StrictControl::from_blocks(kPm, g, {1 - b0, b1});
  int witness_block = -1, witness_action = -1;
  double j_best = INFINITY;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const int c0 = cands[i].index.front(), c1 = cands[i].index.back();
    const int diff = (c0 != 1 - b0) + (c1 != b1);
    if (diff == 1 && v.table[i] < j_best) {
      j_best = v.table[i];
      witness_block = c0 != 1 - b0 ? 0 : 1;
      witness_action = witness_block == 0 ? c0 : c1;
    }
  }
  const auto bad = mp_check_strict(model, bad_u, fam, inputs, v1(1.0));
  bool matched = false;
  for (const auto& e : bad.entries) {
    if (e.estimate < -3.0 * e.se && e.block == witness_block && e.action == witness_action) matched = true;
  }
  return {good.verdict && good.within_hypothesis && !bad.verdict && matched,
          "u* worst entry " + fmt(good.worst_entry) + "; suboptimal worst entry " + fmt(bad.worst_entry) +
              " at (block " + std::to_string(bad.worst_block) + ", action " + std::to_string(bad.worst_action) +
              "), brute-force improvement (block " + std::to_string(witness_block) + ", action " +
              std::to_string(witness_action) + ")"};
}

Outcome near_principle() {
  const TimeGrid g(1.0, 90);
  const auto fam = build_scenario_family(VolatilityBounds::scalar(0.5, 1.0), g, ScenarioStrategy::random(1, 3, 2));
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), 2000, 15);
  const auto model = make_model("linear_jump_lq", kConcave);
  const auto mu = RelaxedControl::constant(kPm, g, {0.5, 0.5});
  const auto cands = enumerate_block_controls(kPm, g, 2);
  const double jmu = evaluate_cost(model, mu, fam, inputs, v1(1.0)).value;
  bool ok = true;
  double prev_c = INFINITY;
  std::string d;
  for (int n : {3, 9, 45}) {
    const auto un = chattering(mu, n);
    const double eps = std::abs(evaluate_cost(model, un, fam, inputs, v1(1.0)).value - jmu);
    const auto rep = mp_check_near(model, un, eps, 30.0, fam, inputs, v1(1.0), cands);
    const bool row_ok = rep.mp.verdict && rep.ekeland_holds && std::isfinite(rep.minimal_c) && rep.minimal_c <= prev_c;
    ok = ok && row_ok;
    prev_c = rep.minimal_c;
    d += (d.empty() ? "" : "; ") + std::string("n=") + std::to_string(n) + " eps=" + fmt(eps) +
         " minimal C=" + fmt(rep.minimal_c) + (rep.ekeland_holds ? "" : " ekeland violated") +
         (rep.mp.verdict ? "" : " check failed");
  }
  return {ok, d};
}

Outcome relaxed_principle() {
  const TimeGrid g(1.0, 32);
  const auto fam = corners(g, 0.5, 1.0, 2);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), 2000, 14);
  const auto model = make_model("linear_jump_lq", kConcave);
  const auto mu = RelaxedControl::constant(kPm, g, {0.5, 0.5});
  const auto jmu = evaluate_cost(model, mu, fam, inputs, v1(1.0));
  bool ok = mp_check_relaxed(model, mu, fam, inputs, v1(1.0)).verdict;
  std::string d = std::string("mu* check ") + (ok ? "passes" : "fails") + " J=" + fmt(jmu.value);
  for (int a = 0; a < 2; ++a) {
    std::vector<double> w(2, 0.0);
    w[a] = 1.0;
    const auto dirac = RelaxedControl::constant(kPm, g, w);
    const auto jd = evaluate_cost(model, dirac, fam, inputs, v1(1.0));
    const double se = combined_se(jd.se, jmu.se);
    const bool beaten = jd.value - jmu.value >= 3.0 * se;
    const bool fails = !mp_check_relaxed(model, dirac, fam, inputs, v1(1.0)).verdict;
    ok = ok && beaten && fails;
    d += "; Dirac " + fmt(kPm[a][0]) + ": J=" + fmt(jd.value) + " gap/se=" + fmt((jd.value - jmu.value) / se) +
         (fails ? " check fails" : " check passes");
  }
  return {ok, d};
}

Outcome bsde_stability() {
  const TimeGrid g(1.0, 128);
  const auto fam = singleton(g, 1.0);
  const auto inputs = make_inputs(fam, MarkSpace::scalar({1.0}, {1.0}), 2000, 16);
  const auto mu = RelaxedControl::constant(kPm, g, {0.5, 0.5});
  const auto rep = bsde_stability_report(make_model("linear_jump_lq"), mu, {4, 16, 64}, fam, inputs, v1(1.0), {}, 1000);
  std::string d = "p gaps";
  for (const auto& r : rep.rows) d += " " + fmt(r.p_gap);
  d += "; q gaps";
  for (const auto& r : rep.rows) d += " " + fmt(r.q_gap);
  d += "; r gaps";
  for (const auto& r : rep.rows) d += " " + fmt(r.r_gap);
  d += "; audit " + std::to_string(rep.audit.passed) + "/" + std::to_string(rep.audit.n_probes);
  return {rep.p_non_increasing && rep.q_non_increasing && rep.r_non_increasing && rep.k_zero &&
              rep.audit.pass() && rep.audit.n_probes == 1000,
          d};
}

Outcome determinism() {
  const fs::path configs = fs::path(GJUMP_SOURCE_DIR) / "configs";
  const fs::path base = fs::temp_directory_path() / "gjump_acceptance_determinism";
  int n_configs = 0, n_files = 0;
  std::string mismatch;
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(configs))
    if (e.path().extension() == ".json") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    const json doc = cli::load_json(p);
    const auto name = p.stem().string();
    fs::remove_all(base / name);
    const auto a = cli::run_experiment(doc, {base / name / "a", 0, std::nullopt});
    const auto b = cli::run_experiment(doc, {base / name / "b", 0, std::nullopt});
    ++n_configs;
    for (const auto& f : a.files) {
      if (f.extension() != ".csv") continue;
      ++n_files;
      if (cli::sha256_file(a.output_dir / f) != cli::sha256_file(b.output_dir / f)) mismatch += " " + name + "/" + f.string();
    }
    if (a.files != b.files) mismatch += " " + name + "(file list)";
  }
  fs::remove_all(base);
  return {mismatch.empty() && n_configs > 0,
          std::to_string(n_configs) + " configs, " + std::to_string(n_files) + " CSV files compared" +
              (mismatch.empty() ? "" : "; differing:" + mismatch)};
}

}  // namespace
}  // namespace gjump

int main(int argc, char** argv) {
  CLI::App app{"gjump acceptance suite"};
  int threads = 1;
  std::vector<int> only;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  gjump::set_default_threads(threads);

  using gjump::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"classical reduction", gjump::classical_reduction},
      {"chattering convergence", gjump::chattering_convergence},
      {"variational estimate", gjump::variational_estimate},
      {"inverse identity", gjump::inverse_identity},
      {"derivative agreement", gjump::derivative_agreement},
      {"strict maximum principle", gjump::strict_principle},
      {"near-optimal principle", gjump::near_principle},
      {"relaxed maximum principle", gjump::relaxed_principle},
      {"BSDE stability", gjump::bsde_stability},
      {"determinism", gjump::determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
