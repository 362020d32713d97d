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

#include "gjump/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "gjump/regression.hpp"
#include "gjump/rng.hpp"

namespace gjump {

namespace {

constexpr double kDetFloor = 1e-6;

Matrix jump_inverse(const Matrix& fx, const char* what) {
  const Matrix m = Matrix::Identity(fx.rows(), fx.cols()) + fx;
  const double det = m.determinant();
  if (!(std::abs(det) >= kDetFloor)) {
    throw NumericalError(std::string(what) + ": f_x + I is near-singular (det = " + std::to_string(det) + ")");
  }
  return m.inverse();
}

// f_x(theta) averaged over the control measure at step k.
Matrix mixed_fx(const MixedCoefficients& mc, int k, double t, const Vector& x, const Vector& theta) {
  const auto& sup = mc.control().support[k];
  const auto& acts = mc.control().actions;
  Matrix acc = sup.front().second * mc.model().f_x(t, x, theta, acts[sup.front().first]);
  for (std::size_t j = 1; j < sup.size(); ++j) acc += sup[j].second * mc.model().f_x(t, x, theta, acts[sup[j].first]);
  return acc;
}

Matrix sigma_term(const std::vector<Matrix>& sx, const Vector& db) {
  Matrix out = sx[0] * db[0];
  for (std::size_t j = 1; j < sx.size(); ++j) out += sx[j] * db[static_cast<Eigen::Index>(j)];
  return out;
}

// sum_jl a_jl q_j sigma_x^l, a row vector.
RowVector q_sigma_x(const Matrix& q, const std::vector<Matrix>& sx, const Matrix& cov) {
  RowVector out = RowVector::Zero(sx[0].cols());
  for (Eigen::Index j = 0; j < q.rows(); ++j)
    for (std::size_t l = 0; l < sx.size(); ++l) {
      const double a = cov(j, static_cast<Eigen::Index>(l));
      if (a != 0.0) out += a * q.row(j) * sx[l];
    }
  return out;
}

struct Window {
  int first = 0;
  int count = 0;
};

std::vector<Window> block_windows(int n_steps, int blocks) {
  if (blocks < 1 || blocks > n_steps) throw InvalidArgument("mp_check: blocks must lie in [1, n_steps]");
  std::vector<Window> out(blocks, Window{n_steps, 0});
  for (int k = 0; k < n_steps; ++k) {
    Window& w = out[block_of_step(k, n_steps, blocks)];
    w.first = std::min(w.first, k);
    ++w.count;
  }
  return out;
}

void check_options(const AdjointOptions& o) {
  if (o.degree < 0) throw InvalidArgument("AdjointOptions: degree must be >= 0");
  if (o.min_jump_events < 1) throw InvalidArgument("AdjointOptions: min_jump_events must be >= 1");
  if (!(o.slack_sigmas >= 0.0)) throw InvalidArgument("AdjointOptions: slack_sigmas must be >= 0");
  if (o.blocks < 1) throw InvalidArgument("AdjointOptions: blocks must be >= 1");
}

Matrix state_matrix(const StateEnsemble& states, int s, int k) {
  Matrix out(states.n_paths(), states.dim());
  for (int p = 0; p < states.n_paths(); ++p) out.row(p) = states.x(s, p, k).transpose();
  return out;
}

// Rows of `design` scaled by the per-row multiplier.
Matrix scaled(const Matrix& design, const Vector& mult) { return mult.asDiagonal() * design; }

}  // namespace

RowVector bsde_driver(const MixedCoefficients& mc, int k, double t, const Vector& x, const Matrix& cov,
                      const RowVector& p, const Matrix& q, const Matrix& r) {
  const ModelSpec& model = mc.model();
  const MarkSpace& marks = mc.marks();
  RowVector out = mc.h_x(k, t, x).transpose();
  out += p * (mc.b_x(k, t, x) + mc.gamma_x_cov(k, t, x, cov));
  out += q_sigma_x(q, model.sigma_x(t, x), cov);
  for (std::size_t i = 0; i < marks.size(); ++i) {
    out += r.row(static_cast<Eigen::Index>(i)) * mixed_fx(mc, k, t, x, marks.marks[i]) * marks.intensities[i];
  }
  return out;
}

double hamiltonian(const ModelSpec& model, const MarkSpace& marks, double t, const Vector& x,
                   const Vector& a, const RowVector& p, const Matrix& q, const Matrix& r) {
  const Matrix sig = model.sigma(t, x);
  double H = model.h(t, x, a) + p.dot(model.b(t, x, a).transpose());
  for (Eigen::Index j = 0; j < sig.cols(); ++j) H += q.row(j).dot(sig.col(j).transpose());
  for (std::size_t i = 0; i < marks.size(); ++i) {
    H += r.row(static_cast<Eigen::Index>(i)).dot(model.f(t, x, marks.marks[i], a).transpose()) * marks.intensities[i];
  }
  if (!std::isfinite(H)) throw NumericalError("hamiltonian: non-finite value");
  return H;
}

AdjointSolution solve_adjoint(const ModelSpec& model, const ControlSchedule& control,
                              const ScenarioFamily& family, const NoiseBundle& noise,
                              const JumpSample& jumps, const StateEnsemble& states,
                              const AdjointOptions& options) {
  check_options(options);
  check_inputs(family, noise, jumps, control.grid);
  if (states.noise_seed() != noise.seed() || states.jump_seed() != jumps.seed ||
      states.n_paths() != noise.n_paths()) {
    throw InvalidArgument("solve_adjoint: states were simulated from different random inputs");
  }
  const MarkSpace& marks = jumps.marks;
  const MixedCoefficients mc(model, marks, control);
  const TimeGrid& grid = control.grid;
  const int N = grid.n_steps(), S = states.n_scenarios(), P = states.n_paths();
  const int n = model.dims.n, d = model.dims.d, I = static_cast<int>(marks.size());
  const double dt = grid.dt();

  AdjointSolution sol{control, solve_fundamental(model, control, family, noise, jumps, states), {}, {}};
  AdjointTriple& tr = sol.triple;
  BSDERepresentation& rep = sol.representation;
  tr.p = PathField(S, P, N + 1, 1, n);
  tr.q = PathField(S, P, N + 1, d, n);
  tr.r = PathField(S, P, N + 1, std::max(I, 1), n);
  rep.X = PathField(S, P, 1, 1, n);
  rep.y = PathField(S, P, N + 1, 1, n);
  rep.Q = PathField(S, P, N + 1, d, n);
  rep.R = PathField(S, P, N + 1, std::max(I, 1), n);
  rep.S = PathField(S, P, N + 1, 1, n);
  rep.condition.assign(S, std::vector<double>(N, 0.0));
  rep.residual_ms.assign(S, std::vector<double>(N, 0.0));

  // Compensated counts and per-step event counts are shared by all scenarios.
  std::vector<Matrix> dN(P);
  for (int p = 0; p < P; ++p) dN[p] = compensated_counts(jumps.paths[p], marks, grid);
  std::vector<std::vector<int>> events(N, std::vector<int>(I, 0));
  for (const auto& path : jumps.paths)
    for (const auto& ev : path.events) ++events[ev.step][ev.mark];

  for (int s = 0; s < S; ++s) {
    const auto& cov = family[s].values;
    // One-step Jacobians, h_x, and the pathwise adjoint P_k = h_x dt + P_{k+1} A_k.
    PathField A(1, P, N, n, n), hx(1, P, N, 1, n), Pw(1, P, N + 1, 1, n);
    parallel_for(static_cast<std::size_t>(P), [&](std::size_t job) {
      const int p = static_cast<int>(job);
      const auto& evs = jumps.paths[p].events;
      std::size_t e = 0;
      for (int k = 0; k < N; ++k) {
        const double t = grid.time(k);
        const Vector x = states.x(s, p, k);
        Matrix a = Matrix::Identity(n, n) +
                   (mc.b_x(k, t, x) + mc.gamma_x_cov(k, t, x, cov[k]) - mc.compensator_x(k, t, x)) * dt;
        a += sigma_term(model.sigma_x(t, x), noise.increment(s, p, k));
        for (; e < evs.size() && evs[e].step == k; ++e) {
          a += model.f_x(t, x, marks.marks[evs[e].mark], control.actions[mc.jump_action(k, evs[e])]);
        }
        A.at(0, p, k) = a;
        hx.at(0, p, k) = mc.h_x(k, t, x).transpose();
      }
      RowVector P_ = model.g_x(states.x(s, p, N)).transpose();
      Pw.at(0, p, N) = P_;
      RowVector X = P_ * sol.fundamental.phi.at(s, p, N);
      for (int k = N - 1; k >= 0; --k) {
        P_ = hx.at(0, p, k) * dt + P_ * A.at(0, p, k);
        Pw.at(0, p, k) = P_;
        X += hx.at(0, p, k) * sol.fundamental.phi.at(s, p, k) * dt;
      }
      if (!X.allFinite()) throw NumericalError("solve_adjoint: non-finite pathwise adjoint");
      rep.X.at(s, p, 0) = X;
    });

    // p_k = E[P_k | x_k] on the polynomial basis; p_N = g_x exactly.
    std::vector<PolynomialBasis> basis(N + 1);
    std::vector<Matrix> design(N + 1);
    for (int p = 0; p < P; ++p) tr.p.at(s, p, N) = Pw.at(0, p, N);
    for (int k = 0; k < N; ++k) {
      const Matrix xk = state_matrix(states, s, k);
      basis[k] = PolynomialBasis::fit(xk, options.degree);
      design[k] = basis[k].design(xk);
      Matrix resp(P, n);
      for (int p = 0; p < P; ++p) resp.row(p) = Pw.at(0, p, k);
      LeastSquaresFit fit;
      try {
        fit = least_squares(design[k], resp);
      } catch (const NumericalError& err) {
        throw NumericalError("solve_adjoint: p regression at step " + std::to_string(k) + ", scenario " +
                             std::to_string(s) + ": " + err.what());
      }
      const Matrix fitted = design[k] * fit.coef;
      for (int p = 0; p < P; ++p) tr.p.at(s, p, k) = fitted.row(p);
    }

    // Martingale increments of the discounted adjoint, expressed at time k:
    // dN_k = h_x dt + p_{k+1} A_k - p_k.
    PathField inc(1, P, N, 1, n);
    for (int p = 0; p < P; ++p)
      for (int k = 0; k < N; ++k)
        inc.at(0, p, k) = hx.at(0, p, k) * dt + tr.p.at(s, p, k + 1) * A.at(0, p, k) - tr.p.at(s, p, k);

    PathField QN(1, P, N, d, n), RN(1, P, N, std::max(I, 1), n), SN(1, P, N, 1, n);
    std::vector<std::vector<bool>> r_done(N, std::vector<bool>(I, false));
    for (int k = 0; k < N; ++k) {
      const Matrix& D = design[k];
      const int m = static_cast<int>(D.cols());
      std::vector<Matrix> blocks;
      std::vector<int> bm_cols, jump_cols;
      for (int j = 0; j < d; ++j) {
        if (cov[k](j, j) <= 1e-14) continue;
        Vector mult(P);
        for (int p = 0; p < P; ++p) mult[p] = noise.increment(static_cast<std::size_t>(s), p, k)[j];
        bm_cols.push_back(j);
        blocks.push_back(scaled(D, mult));
      }
      for (int i = 0; i < I; ++i) {
        if (events[k][i] < options.min_jump_events) continue;
        Vector mult(P);
        for (int p = 0; p < P; ++p) mult[p] = dN[p](k, i);
        jump_cols.push_back(i);
        blocks.push_back(scaled(D, mult));
      }
      // Drift block: a dt for d = 1 (its coefficient is S), plain dt otherwise.
      const double drift_scale = d == 1 ? cov[k](0, 0) * dt : dt;
      const bool has_drift = drift_scale > 0.0;
      if (has_drift) blocks.push_back(D * drift_scale);
      if (blocks.empty()) continue;

      Matrix full(P, m * static_cast<Eigen::Index>(blocks.size()));
      for (std::size_t b = 0; b < blocks.size(); ++b) full.middleCols(static_cast<Eigen::Index>(b) * m, m) = blocks[b];
      Matrix resp(P, n);
      for (int p = 0; p < P; ++p) resp.row(p) = inc.at(0, p, k);
      LeastSquaresFit fit;
      try {
        fit = least_squares(full, resp);
      } catch (const NumericalError& err) {
        throw NumericalError("solve_adjoint: increment regression at step " + std::to_string(k) +
                             ", scenario " + std::to_string(s) + ": " + err.what());
      }
      rep.condition[s][k] = fit.condition;
      rep.residual_ms[s][k] = fit.residual_ms;
      rep.max_condition = std::max(rep.max_condition, fit.condition);
      int b = 0;
      for (int j : bm_cols) {
        const Matrix v = D * fit.coef.middleRows(static_cast<Eigen::Index>(b++) * m, m);
        for (int p = 0; p < P; ++p) QN.at(0, p, k).row(j) = v.row(p);
      }
      for (int i : jump_cols) {
        const Matrix v = D * fit.coef.middleRows(static_cast<Eigen::Index>(b++) * m, m);
        for (int p = 0; p < P; ++p) RN.at(0, p, k).row(i) = v.row(p);
        r_done[k][i] = true;
      }
      if (has_drift && d == 1) {
        const Matrix v = D * fit.coef.middleRows(static_cast<Eigen::Index>(b) * m, m);
        for (int p = 0; p < P; ++p) SN.at(0, p, k) = v.row(p);
      }
    }

    // Marks too rare at a step: pool the nearest steps until enough events.
    for (int i = 0; i < I; ++i) {
      int total = 0;
      for (int k = 0; k < N; ++k) total += events[k][i];
      for (int k = 0; k < N; ++k) {
        if (r_done[k][i]) continue;
        if (total == 0) {
          ++rep.empty_jump_fits;
          continue;
        }
        int lo = k, hi = k, count = events[k][i];
        while (count < options.min_jump_events && (lo > 0 || hi < N - 1)) {
          if (lo > 0) count += events[--lo][i];
          if (hi < N - 1) count += events[++hi][i];
        }
        const int rows = P * (hi - lo + 1);
        Matrix xs(rows, n);
        for (int kk = lo; kk <= hi; ++kk)
          for (int p = 0; p < P; ++p) xs.row((kk - lo) * P + p) = states.x(s, p, kk).transpose();
        // A deterministic state takes only hi - lo + 1 distinct values over the
        // window, which can be too few for the requested degree; lower it then.
        PolynomialBasis pb;
        LeastSquaresFit fit;
        for (int degree = options.degree;; --degree) {
          pb = PolynomialBasis::fit(xs, degree);
          const Matrix D = pb.design(xs);
          const int m = static_cast<int>(D.cols());
          Matrix full(rows, 2 * m);
          Matrix resp(rows, n);
          for (int kk = lo; kk <= hi; ++kk)
            for (int p = 0; p < P; ++p) {
              const int row = (kk - lo) * P + p;
              full.row(row).head(m) = D.row(row) * dN[p](kk, i);
              full.row(row).tail(m) = D.row(row) * dt;
              resp.row(row) = inc.at(0, p, kk);
            }
          try {
            fit = least_squares(full, resp);
            break;
          } catch (const NumericalError& err) {
            if (degree > 0) continue;
            throw NumericalError("solve_adjoint: pooled jump regression at step " + std::to_string(k) +
                                 ", mark " + std::to_string(i) + ": " + err.what());
          }
        }
        const int m = pb.size();
        rep.max_condition = std::max(rep.max_condition, fit.condition);
        const Matrix coef = fit.coef.topRows(m);
        for (int p = 0; p < P; ++p) RN.at(0, p, k).row(i) = pb.eval(states.x(s, p, k)) * coef;
        ++rep.pooled_jump_fits;
      }
    }

    // Undo the phi discounting: Q = Q^N phi etc., then q, r.
    parallel_for(static_cast<std::size_t>(P), [&](std::size_t job) {
      const int p = static_cast<int>(job);
      for (int k = 0; k <= N; ++k) {
        const Matrix phi = sol.fundamental.phi.at(s, p, k);
        const RowVector pk = tr.p.at(s, p, k);
        rep.y.at(s, p, k) = pk * phi;
        if (k == N) break;
        const double t = grid.time(k);
        const Vector x = states.x(s, p, k);
        const Matrix psi = sol.fundamental.psi.at(s, p, k);
        rep.Q.at(s, p, k) = QN.at(0, p, k) * phi;
        rep.S.at(s, p, k) = SN.at(0, p, k) * phi;
        const auto sx = model.sigma_x(t, x);
        for (int j = 0; j < d; ++j) {
          tr.q.at(s, p, k).row(j) = rep.Q.at(s, p, k).row(j) * psi - pk * sx[j];
        }
        for (int i = 0; i < I; ++i) {
          rep.R.at(s, p, k).row(i) = RN.at(0, p, k).row(i) * phi;
          const Matrix inv = jump_inverse(mixed_fx(mc, k, t, x, marks.marks[i]), "solve_adjoint");
          tr.r.at(s, p, k).row(i) = rep.R.at(s, p, k).row(i) * psi * inv +
                                    pk * (inv - Matrix::Identity(n, n));
        }
      }
    });
  }
  return sol;
}

BsdeResidual bsde_residual(const ModelSpec& model, const ControlSchedule& control,
                           const AdjointTriple& triple, const ScenarioFamily& family,
                           const NoiseBundle& noise, const JumpSample& jumps,
                           const StateEnsemble& states) {
  check_inputs(family, noise, jumps, control.grid);
  require_same_grid(states.grid(), control.grid, "bsde_residual");
  const int N = control.grid.n_steps(), S = states.n_scenarios(), P = states.n_paths();
  if (triple.p.n_times() != N + 1 || triple.p.n_scenarios() != S || triple.p.n_paths() != P) {
    throw GridMismatch("bsde_residual: triple does not match the state ensemble");
  }
  const MarkSpace& marks = jumps.marks;
  const MixedCoefficients mc(model, marks, control);
  const double dt = control.grid.dt();
  const int I = static_cast<int>(marks.size());
  BsdeResidual out;
  out.per_scenario.assign(S, 0.0);
  std::vector<double> per_path(static_cast<std::size_t>(S) * P, 0.0);
  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
    const Matrix counts = compensated_counts(jumps.paths[p], marks, control.grid);
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
      const double t = control.grid.time(k);
      const Vector x = states.x(s, p, k);
      const RowVector pk = triple.p.at(s, p, k);
      const Matrix q = triple.q.at(s, p, k);
      const Matrix r = triple.r.at(s, p, k);
      RowVector res = RowVector(triple.p.at(s, p, k + 1)) - pk +
                      bsde_driver(mc, k, t, x, family[s].values[k], pk, q, r) * dt;
      const Vector db = noise.increment(static_cast<std::size_t>(s), p, k);
      for (Eigen::Index j = 0; j < q.rows(); ++j) res -= q.row(j) * db[j];
      for (int i = 0; i < I; ++i) res -= r.row(i) * counts(k, i);
      acc += res.squaredNorm();
    }
    per_path[job] = acc / N;
  });
  for (int s = 0; s < S; ++s) {
    out.per_scenario[s] =
        pairwise_sum(std::span<const double>(per_path.data() + static_cast<std::size_t>(s) * P, P)) / P;
    out.max = std::max(out.max, out.per_scenario[s]);
  }
  return out;
}

BsdeResidual bsde_residual(const ModelSpec& model, const AdjointSolution& solution,
                           const ScenarioFamily& family, const NoiseBundle& noise,
                           const JumpSample& jumps, const StateEnsemble& states) {
  return bsde_residual(model, solution.control, solution.triple, family, noise, jumps, states);
}

MPCheckReport mp_check(const ModelSpec& model, const ControlSchedule& control,
                       const ScenarioFamily& family, const NoiseBundle& noise,
                       const JumpSample& jumps, const Vector& x0, const AdjointOptions& options,
                       double extra_slack) {
  check_options(options);
  if (!(extra_slack >= 0.0)) throw InvalidArgument("mp_check: extra slack must be >= 0");
  const TimeGrid& grid = control.grid;
  const int N = grid.n_steps();
  const auto windows = block_windows(N, options.blocks);
  const StateEnsemble states = simulate(model, control, family, noise, jumps, x0);
  const AdjointSolution sol = solve_adjoint(model, control, family, noise, jumps, states, options);
  const MarkSpace& marks = jumps.marks;
  const MixedCoefficients mc(model, marks, control);
  const auto probes = default_probe_set(family);
  const int S = states.n_scenarios(), P = states.n_paths(), d = model.dims.d;
  const double dt = grid.dt();
  const int n_actions = static_cast<int>(control.actions.size());

  MPCheckReport rep;
  rep.slack_sigmas = options.slack_sigmas;
  rep.extra_slack = extra_slack;
  rep.max_condition = sol.representation.max_condition;
  rep.within_hypothesis = drift_and_running_cost_vanish(model, control.actions);
  if (!rep.within_hypothesis) rep.label = "outside theorem hypothesis";

  for (int b = 0; b < static_cast<int>(windows.size()); ++b) {
    const Window w = windows[b];
    const double L = w.count * dt;
    for (int nu = 0; nu < n_actions; ++nu) {
      MPEntry entry;
      entry.block = b;
      entry.action = nu;
      bool trivial = control.is_strict();
      for (int k = w.first; trivial && k < w.first + w.count; ++k) trivial = control.strict_index[k] == nu;
      if (!trivial) {
        const EtaWindow ew{w.first, w.count, nu, false};
        const PathField eta = solve_eta(model, control, family, jumps, states, sol.fundamental, ew);
        const std::size_t SP = static_cast<std::size_t>(S) * P;
        std::vector<double> total(SP), hgap(SP), fg(SP), fq(SP), fs(SP);
        parallel_for(SP, [&](std::size_t job) {
          const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
          const Vector& a_nu = control.actions[nu];
          double h_acc = 0.0, g_acc = 0.0, q_acc = 0.0, s_acc = 0.0;
          for (int k = w.first; k < w.first + w.count; ++k) {
            const double t = grid.time(k);
            const Vector x = states.x(s, p, k);
            const RowVector pk = sol.triple.p.at(s, p, k);
            const Matrix q = sol.triple.q.at(s, p, k);
            const Matrix r = sol.triple.r.at(s, p, k);
            const Matrix& cov = family[s].values[k];
            double hbar = 0.0;
            const auto& sup = control.support[k];
            for (const auto& [idx, wt] : sup) hbar += wt * hamiltonian(model, marks, t, x, control.actions[idx], pk, q, r);
            h_acc += (hamiltonian(model, marks, t, x, a_nu, pk, q, r) - hbar) * dt;
            g_acc += pk.dot((contract_gamma(model.gamma(t, x, a_nu), cov) - mc.gamma_cov(k, t, x, cov)).transpose()) * dt;
          }
          for (int k = w.first + 1; k < N; ++k) {
            const double t = grid.time(k);
            const Vector x = states.x(s, p, k);
            const Matrix& cov = family[s].values[k];
            const Vector zeta = sol.fundamental.phi.at(s, p, k) * eta.at(s, p, k);
            q_acc += q_sigma_x(sol.triple.q.at(s, p, k), model.sigma_x(t, x), cov).dot(zeta.transpose()) * dt;
            if (d == 1) {
              const double c = (sol.representation.S.at(s, p, k) * eta.at(s, p, k))(0, 0);
              Matrix cm(1, 1);
              cm(0, 0) = c;
              s_acc += (cov(0, 0) * c - 2.0 * generator_G(cm, probes)) * dt;
            }
          }
          hgap[job] = h_acc / L;
          fg[job] = g_acc / L;
          fq[job] = q_acc;
          fs[job] = s_acc;
          total[job] = hgap[job] + fg[job] + fq[job];
        });
        double best = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < S; ++s) {
          const std::span<const double> sl(total.data() + static_cast<std::size_t>(s) * P, P);
          const MeanSe ms = P >= 2 ? mean_se(sl) : MeanSe{sl[0], 0.0};
          if (ms.mean > best) {
            best = ms.mean;
            entry.estimate = ms.mean;
            entry.se = ms.se;
            entry.argmax = s;
          }
        }
        auto mean_of = [&](const std::vector<double>& v) {
          return pairwise_sum(std::span<const double>(v.data() + static_cast<std::size_t>(entry.argmax) * P, P)) / P;
        };
        entry.hamiltonian_gap = mean_of(hgap);
        entry.f.gamma = mean_of(fg);
        entry.f.q_sigma = mean_of(fq);
        entry.f.s_term = mean_of(fs);
      }
      entry.slack = options.slack_sigmas * entry.se + extra_slack;
      entry.pass = entry.estimate >= -entry.slack;
      rep.verdict = rep.verdict && entry.pass;
      if (rep.worst_block < 0 || entry.estimate < rep.worst_entry) {
        rep.worst_entry = entry.estimate;
        rep.worst_block = b;
        rep.worst_action = nu;
      }
      rep.entries.push_back(entry);
    }
  }
  return rep;
}

MPCheckReport mp_check_strict(const ModelSpec& model, const StrictControl& u_star,
                              const ScenarioFamily& family, const RandomInputs& inputs,
                              const Vector& x0, const AdjointOptions& options) {
  return mp_check(model, ControlSchedule::from(u_star), family, inputs.noise, inputs.jumps, x0, options);
}

NearReport mp_check_near(const ModelSpec& model, const StrictControl& u_n, double epsilon_n, double c,
                         const ScenarioFamily& family, const RandomInputs& inputs, const Vector& x0,
                         const std::vector<StrictControl>& candidates, const AdjointOptions& options) {
  if (!(epsilon_n >= 0.0) || !std::isfinite(epsilon_n)) throw InvalidArgument("mp_check_near: epsilon_n must be >= 0");
  if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidArgument("mp_check_near: C must be >= 0");
  NearReport rep;
  rep.epsilon = epsilon_n;
  rep.c = c;
  rep.mp = mp_check(model, ControlSchedule::from(u_n), family, inputs.noise, inputs.jumps, x0, options,
                    c * epsilon_n);
  double need = 0.0;
  for (const auto& e : rep.mp.entries) {
    const double deficit = -e.estimate - options.slack_sigmas * e.se;
    if (deficit > 0.0) need = std::max(need, epsilon_n > 0.0 ? deficit / epsilon_n : INFINITY);
  }
  rep.minimal_c = need;

  const CostReport jn = evaluate_cost(model, u_n, family, inputs, x0);
  rep.j_un = jn.value;
  for (const auto& v : candidates) {
    const CostReport jv = evaluate_cost(model, v, family, inputs, x0);
    EkelandRow row;
    row.j_candidate = jv.value;
    row.distance = ekeland_distance(u_n, v);
    row.margin = jv.value + epsilon_n * row.distance - jn.value;
    const int P = jn.n_paths;
    if (jv.argmax == jn.argmax && P >= 2) {
      std::vector<double> diff(P);
      for (int p = 0; p < P; ++p) diff[p] = jv.samples[jv.argmax][p] - jn.samples[jn.argmax][p];
      row.se = mean_se(diff).se;
    } else {
      row.se = combined_se(jv.se, jn.se);
    }
    // Candidates that coincide with u_n pathwise give a margin of pure rounding
    // noise with a near-zero s.e., so the comparison gets a roundoff floor.
    const double roundoff = 1e-12 * (1.0 + std::abs(jn.value));
    row.holds = row.margin >= -options.slack_sigmas * row.se - roundoff;
    rep.ekeland_holds = rep.ekeland_holds && row.holds;
    rep.ekeland.push_back(row);
  }
  return rep;
}

MPCheckReport mp_check_relaxed(const ModelSpec& model, const RelaxedControl& mu_star,
                               const ScenarioFamily& family, const RandomInputs& inputs,
                               const Vector& x0, const AdjointOptions& options) {
  const JumpSample tagged = tag_jumps(inputs.jumps, mu_star);
  return mp_check(model, ControlSchedule::from(mu_star), family, inputs.noise, tagged, x0, options);
}

LipschitzAudit driver_lipschitz_audit(const ModelSpec& model, const ActionGrid& actions,
                                      const MarkSpace& marks, const VolatilityBounds& bounds,
                                      double horizon, int n_probes, std::uint64_t seed) {
  if (n_probes < 1) throw InvalidArgument("driver_lipschitz_audit: n_probes must be >= 1");
  actions.validate();
  const int n = model.dims.n, d = model.dims.d, I = static_cast<int>(marks.size());
  // Entry-wise l1 size of the upper covariance bounds sum_jl |a_jl|, and the
  // row-sum norm used for the q sigma_x term.
  const double a_l1 = bounds.sigma_high.cwiseAbs().sum();
  const double a_row = bounds.sigma_high.cwiseAbs().rowwise().sum().maxCoeff();
  const ModelBounds& mb = model.bounds;
  LipschitzAudit out;
  out.n_probes = n_probes;
  out.c0 = std::max({mb.lip_b + mb.lip_gamma * a_l1, a_row * std::sqrt(static_cast<double>(d)) * mb.lip_sigma,
                     mb.lip_f * marks.max_abs_mark()});

  const Philox rng(seed, kStreamProbes);
  const TimeGrid grid(horizon, 1);
  for (int i = 0; i < n_probes; ++i) {
    std::uint32_t c = 0;
    auto u = [&]() { return rng.uniform(static_cast<std::uint32_t>(i), c++, 0); };
    auto z = [&]() { return rng.normal(static_cast<std::uint32_t>(i), c++, 1); };
    const double t = horizon * u();
    Vector x(n);
    for (int j = 0; j < n; ++j) x[j] = 4.0 * u() - 2.0;
    const int ai = std::min(static_cast<int>(u() * actions.size()), static_cast<int>(actions.size()) - 1);
    const double lam = u();
    const Matrix cov = bounds.sigma_low + lam * (bounds.sigma_high - bounds.sigma_low);
    const StrictControl ctl = StrictControl::constant(actions, grid, ai);
    const ControlSchedule sched = ControlSchedule::from(ctl);
    const MixedCoefficients mc(model, marks, sched);
    RowVector p1(n), p2(n);
    Matrix q1(d, n), q2(d, n), r1(std::max(I, 1), n), r2(std::max(I, 1), n);
    for (auto* m : {&p1, &p2}) for (int j = 0; j < n; ++j) (*m)[j] = z();
    for (auto* m : {&q1, &q2, &r1, &r2}) for (Eigen::Index e = 0; e < m->size(); ++e) m->data()[e] = z();
    const RowVector dF = bsde_driver(mc, 0, t, x, cov, p1, q1, r1) - bsde_driver(mc, 0, t, x, cov, p2, q2, r2);
    double dr = 0.0;
    for (int m = 0; m < I; ++m) dr += (r1.row(m) - r2.row(m)).norm() * marks.intensities[m];
    const double scale = (p1 - p2).norm() + (q1 - q2).norm() + dr;
    const double lhs = dF.norm();
    if (scale > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / scale);
    if (lhs <= out.c0 * scale * (1.0 + 1e-9) + 1e-12) ++out.passed;
  }
  return out;
}

StabilityReport bsde_stability_report(const ModelSpec& model, const RelaxedControl& mu_star,
                                      const std::vector<int>& n_list, const ScenarioFamily& family,
                                      const RandomInputs& inputs, const Vector& x0,
                                      const AdjointOptions& options, int audit_probes) {
  if (n_list.empty()) throw InvalidArgument("bsde_stability_report: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (!(n_list[i] > n_list[i - 1])) throw InvalidArgument("bsde_stability_report: n list must ascend");
  }
  const JumpSample tagged = tag_jumps(inputs.jumps, mu_star);
  const ControlSchedule cmu = ControlSchedule::from(mu_star);
  const StateEnsemble xmu = simulate(model, cmu, family, inputs.noise, tagged, x0);
  const AdjointSolution star = solve_adjoint(model, cmu, family, inputs.noise, tagged, xmu, options);
  const MarkSpace& marks = inputs.jumps.marks;
  const TimeGrid& grid = mu_star.grid;
  const int N = grid.n_steps(), S = xmu.n_scenarios(), P = xmu.n_paths(), I = static_cast<int>(marks.size());
  const double dt = grid.dt();

  StabilityReport rep;
  for (int n : n_list) {
    const ControlSchedule cn = ControlSchedule::from(chattering(mu_star, n));
    const StateEnsemble xn = simulate(model, cn, family, inputs.noise, inputs.jumps, x0);
    const AdjointSolution sn = solve_adjoint(model, cn, family, inputs.noise, inputs.jumps, xn, options);
    StabilityRow row;
    row.n = n;
    std::vector<std::vector<double>> qs(S, std::vector<double>(P)), rs(S, std::vector<double>(P));
    double p_best = -1.0;
    for (int s = 0; s < S; ++s) {
      for (int k = 0; k <= N; ++k) {
        std::vector<double> v(P);
        for (int p = 0; p < P; ++p) v[p] = (sn.triple.p.at(s, p, k) - star.triple.p.at(s, p, k)).squaredNorm();
        const MeanSe ms = P >= 2 ? mean_se(v) : MeanSe{v[0], 0.0};
        if (ms.mean > p_best) {
          p_best = ms.mean;
          row.p_gap = ms.mean;
          row.p_gap_se = ms.se;
        }
      }
      for (int p = 0; p < P; ++p) {
        double qa = 0.0, ra = 0.0;
        for (int k = 0; k < N; ++k) {
          const Matrix dq = sn.triple.q.at(s, p, k) - star.triple.q.at(s, p, k);
          qa += (dq * dq.transpose() * family[s].values[k]).trace() * dt;
          for (int i = 0; i < I; ++i) {
            ra += (sn.triple.r.at(s, p, k).row(i) - star.triple.r.at(s, p, k).row(i)).squaredNorm() *
                  marks.intensities[i] * dt;
          }
        }
        qs[s][p] = qa;
        rs[s][p] = ra;
      }
    }
    const CostReport qr = cost_report(std::move(qs), inputs.noise.seed());
    const CostReport rr = cost_report(std::move(rs), inputs.noise.seed());
    row.q_gap = qr.value;
    row.q_gap_se = qr.se;
    row.r_gap = rr.value;
    row.r_gap_se = rr.se;
    rep.rows.push_back(row);
  }
  auto non_increasing = [&](auto gap, auto se) {
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      const auto& a = rep.rows[i - 1];
      const auto& b = rep.rows[i];
      if (b.*gap > a.*gap + 3.0 * combined_se(a.*se, b.*se)) return false;
    }
    return true;
  };
  rep.p_non_increasing = non_increasing(&StabilityRow::p_gap, &StabilityRow::p_gap_se);
  rep.q_non_increasing = non_increasing(&StabilityRow::q_gap, &StabilityRow::q_gap_se);
  rep.r_non_increasing = non_increasing(&StabilityRow::r_gap, &StabilityRow::r_gap_se);
  rep.k_zero = true;
  rep.audit = driver_lipschitz_audit(model, mu_star.actions, marks, family.bounds, grid.horizon(), audit_probes,
                                     inputs.noise.seed() ^ 0x5eedau);
  return rep;
}

}  // namespace gjump
