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

#include "gjump/variational.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gjump {

void require_crn(const StateEnsemble& states, const RandomInputs& inputs, const char* what) {
  if (states.noise_seed() != inputs.noise.seed() || states.jump_seed() != inputs.jumps.seed ||
      states.n_paths() != inputs.noise.n_paths()) {
    throw InvalidArgument(std::string(what) +
                          ": the state ensemble was not simulated from these random inputs "
                          "(common random numbers are required)");
  }
}

namespace {

Matrix drift_jacobian(const MixedCoefficients& mc, int k, double t, const Vector& x, const Matrix& cov) {
  return mc.b_x(k, t, x) + mc.gamma_x_cov(k, t, x, cov) - mc.compensator_x(k, t, x);
}

Matrix sigma_term(const std::vector<Matrix>& sx, const Vector& db) {
  Matrix out = sx[0] * db[0];
  for (std::size_t j = 1; j < sx.size(); ++j) out += sx[j] * db[static_cast<Eigen::Index>(j)];
  return out;
}

Matrix ito_term(const std::vector<Matrix>& sx, const Matrix& cov) {
  Matrix out = Matrix::Zero(sx[0].rows(), sx[0].cols());
  for (std::size_t j = 0; j < sx.size(); ++j)
    for (std::size_t l = 0; l < sx.size(); ++l)
      out += cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) * sx[j] * sx[l];
  return out;
}

Matrix jump_inverse(const Matrix& fx) {
  const Matrix m = Matrix::Identity(fx.rows(), fx.cols()) + fx;
  const double det = m.determinant();
  if (!(std::abs(det) >= 1e-6)) {
    throw NumericalError("solve_fundamental: f_x + I is near-singular (det = " + std::to_string(det) + ")");
  }
  return m.inverse();
}

// Rate terms of the spike direction (drift, d<B>, compensator) at step k.
Vector direction_rate(const ModelSpec& model, const MixedCoefficients& mc, const MarkSpace& marks,
                      const EtaWindow& w, int k, double t, const Vector& x, const Matrix& cov) {
  const Vector& nu = mc.control().actions[w.action];
  if (w.derivative_mode) {
    const Vector& us = mc.control().actions[mc.control().strict_index[k]];
    const Vector du = nu - us;
    Vector out = model.b_u(t, x, us) * du + contract_list(model.gamma_u(t, x, us), cov) * du;
    for (std::size_t i = 0; i < marks.size(); ++i) {
      out -= model.f_u(t, x, marks.marks[i], us) * du * marks.intensities[i];
    }
    return out;
  }
  Vector out = model.b(t, x, nu) - mc.b(k, t, x);
  out += contract_gamma(model.gamma(t, x, nu), cov) - mc.gamma_cov(k, t, x, cov);
  if (marks.size() > 0) {
    Vector comp_nu = Vector::Zero(x.size());
    for (std::size_t i = 0; i < marks.size(); ++i) {
      comp_nu += model.f(t, x, marks.marks[i], nu) * marks.intensities[i];
    }
    out -= comp_nu - mc.compensator(k, t, x);
  }
  return out;
}

Vector direction_jump(const ModelSpec& model, const MixedCoefficients& mc, const MarkSpace& marks,
                      const EtaWindow& w, int k, double t, const Vector& x, const JumpEvent& e) {
  const Vector& nu = mc.control().actions[w.action];
  const Vector& th = marks.marks[e.mark];
  const Vector& acted = mc.control().actions[mc.jump_action(k, e)];
  if (w.derivative_mode) return model.f_u(t, x, th, acted) * (nu - acted);
  return model.f(t, x, th, nu) - model.f(t, x, th, acted);
}

void check_window(const EtaWindow& w, const ControlSchedule& c) {
  if (w.n_steps < 1 || w.first_step < 0 || w.first_step + w.n_steps > c.grid.n_steps()) {
    throw InvalidArgument("EtaWindow: window outside the grid");
  }
  if (w.action < 0 || w.action >= static_cast<int>(c.actions.size())) {
    throw InvalidArgument("EtaWindow: action index out of range");
  }
  if (w.derivative_mode && !c.is_strict()) {
    throw InvalidArgument("EtaWindow: derivative mode needs a strict control");
  }
}

}  // namespace

VariationalPath solve_variational(const ModelSpec& model, const StrictControl& u_star,
                                  const SpikeSpec& spike, const ScenarioFamily& family,
                                  const RandomInputs& inputs, const StateEnsemble& x_star) {
  require_crn(x_star, inputs, "solve_variational");
  spike.validate();
  require_same_grid(spike.base.grid, u_star.grid, "solve_variational");
  const ControlSchedule c = ControlSchedule::from(u_star);
  check_inputs(family, inputs.noise, inputs.jumps, c.grid);
  const MarkSpace& marks = inputs.jumps.marks;
  const MixedCoefficients mc(model, marks, c);
  const TimeGrid& grid = c.grid;
  const int N = grid.n_steps(), S = x_star.n_scenarios(), P = x_star.n_paths();
  const int n = model.dims.n;
  const double dt = grid.dt();
  const int k0 = spike.first_step();

  VariationalPath out{PathField(S, P, N + 1, n, 1), k0, k0 + spike.n_window_steps()};
  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
    const auto& events = inputs.jumps.paths[p].events;
    std::size_t e = 0;
    while (e < events.size() && events[e].step < k0) ++e;
    const double tk0 = grid.time(k0);
    const Vector x0 = x_star.x(s, p, k0);
    Vector z = model.b(tk0, x0, u_star.actions[spike.action]) - model.b(tk0, x0, u_star.action(k0));
    out.z.at(s, p, k0) = z;
    for (int k = k0; k < N; ++k) {
      const double t = grid.time(k);
      const Vector x = x_star.x(s, p, k);
      const Matrix& cov = family[s].values[k];
      Vector next = z + drift_jacobian(mc, k, t, x, cov) * z * dt;
      next += sigma_term(model.sigma_x(t, x), inputs.noise.increment(s, p, k)) * z;
      for (; e < events.size() && events[e].step == k; ++e) {
        next += model.f_x(t, x, marks.marks[events[e].mark], u_star.action(k)) * z;
      }
      if (!next.allFinite()) throw NumericalError("solve_variational: non-finite z at step " + std::to_string(k));
      z = std::move(next);
      out.z.at(s, p, k + 1) = z;
    }
  });
  return out;
}

QuotientReport difference_quotient_gap(const ModelSpec& model, const StrictControl& u_star,
                                       double t0, int action, const std::vector<double>& h_list,
                                       const ScenarioFamily& family, const RandomInputs& inputs,
                                       const Vector& x0) {
  if (h_list.empty()) throw InvalidArgument("difference_quotient_gap: empty h list");
  for (std::size_t i = 1; i < h_list.size(); ++i) {
    if (!(h_list[i] < h_list[i - 1])) throw InvalidArgument("difference_quotient_gap: h list must descend");
  }
  const StateEnsemble xs = simulate_strict(model, u_star, family, inputs.noise, inputs.jumps, x0);
  const VariationalPath z =
      solve_variational(model, u_star, {u_star, action, t0, h_list.back()}, family, inputs, xs);
  QuotientReport rep;
  for (double h : h_list) {
    const SpikeSpec spec{u_star, action, t0, h};
    const StrictControl uh = spike(spec);
    const StateEnsemble xh = simulate_strict(model, uh, family, inputs.noise, inputs.jumps, x0);
    const int from = spec.first_step() + spec.n_window_steps();
    std::vector<std::vector<double>> sq(xs.n_scenarios(), std::vector<double>(xs.n_paths()));
    for (int s = 0; s < xs.n_scenarios(); ++s) {
      for (int p = 0; p < xs.n_paths(); ++p) {
        double m = 0.0;
        for (int k = from; k <= xs.n_steps(); ++k) {
          const Vector y = (xh.x(s, p, k) - xs.x(s, p, k)) / h - z.z.at(s, p, k);
          m = std::max(m, y.squaredNorm());
        }
        sq[s][p] = m;
      }
    }
    const CostReport r = cost_report(std::move(sq), inputs.noise.seed());
    rep.rows.push_back({h, r.value, r.se, r.argmax});
  }
  rep.non_increasing = true;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    if (b.gap > a.gap + 3.0 * combined_se(a.se, b.se)) rep.non_increasing = false;
    if (b.gap > 0.0) rep.min_ratio = std::min(rep.min_ratio, a.gap / b.gap);
  }
  return rep;
}

DerivativeReport gateaux_derivative(const ModelSpec& model, const StrictControl& u_star, double t0,
                                    int action, const std::vector<double>& h_list,
                                    const ScenarioFamily& family, const RandomInputs& inputs,
                                    const Vector& x0) {
  if (h_list.empty()) throw InvalidArgument("gateaux_derivative: empty h list");
  const ControlSchedule c = ControlSchedule::from(u_star);
  const StateEnsemble xs = simulate(model, c, family, inputs.noise, inputs.jumps, x0);
  const CostReport js = cost_report(path_costs(model, c, xs), inputs.noise.seed());
  double h_min = h_list.front();
  for (double h : h_list) h_min = std::min(h_min, h);
  const VariationalPath z = solve_variational(model, u_star, {u_star, action, t0, h_min}, family, inputs, xs);

  DerivativeReport rep;
  rep.cost_argmax = js.argmax;
  const int S = xs.n_scenarios(), P = xs.n_paths(), N = xs.n_steps();
  const double dt = xs.grid().dt();
  std::vector<std::vector<double>> fsamples(S, std::vector<double>(P));
  for (int s = 0; s < S; ++s) {
    for (int p = 0; p < P; ++p) {
      double v = model.g_x(xs.x(s, p, N)).dot(z.z.at(s, p, N).col(0));
      for (int k = 0; k < N; ++k) {
        v += model.h_x(xs.grid().time(k), xs.x(s, p, k), u_star.action(k)).dot(z.z.at(s, p, k).col(0)) * dt;
      }
      fsamples[s][p] = v;
    }
  }
  const CostReport fr = cost_report(std::move(fsamples), inputs.noise.seed());
  rep.formula = fr.value;
  rep.formula_se = fr.se;
  rep.formula_argmax = fr.argmax;
  rep.formula_at_cost_argmax = fr.per_scenario[js.argmax].mean;
  rep.formula_at_cost_argmax_se = fr.per_scenario[js.argmax].se;

  for (double h : h_list) {
    const StrictControl uh = spike({u_star, action, t0, h});
    const CostReport jh = evaluate_cost(model, uh, family, inputs, x0);
    DerivativeRow row;
    row.h = h;
    row.fd = (jh.value - js.value) / h;
    row.fd_se_combined = combined_se(jh.se, js.se) / h;
    if (jh.argmax == js.argmax && P >= 2) {
      std::vector<double> d(P);
      for (int p = 0; p < P; ++p) d[p] = (jh.samples[jh.argmax][p] - js.samples[js.argmax][p]) / h;
      row.fd_se = mean_se(d).se;
    } else {
      row.fd_se = row.fd_se_combined;
    }
    rep.rows.push_back(row);
  }
  const DerivativeRow* best = &rep.rows.front();
  for (const auto& r : rep.rows) {
    if (r.h < best->h) best = &r;
  }
  rep.tolerance = std::max(0.1 * std::abs(rep.formula), 3.0 * combined_se(best->fd_se, rep.formula_se));
  rep.agrees = std::abs(best->fd - rep.formula) <= rep.tolerance;
  return rep;
}

FundamentalPair solve_fundamental(const ModelSpec& model, const ControlSchedule& control,
                                  const ScenarioFamily& family, const NoiseBundle& noise,
                                  const JumpSample& jumps, const StateEnsemble& states,
                                  const EtaWindow* window) {
  check_inputs(family, noise, jumps, control.grid);
  if (states.noise_seed() != noise.seed() || states.jump_seed() != jumps.seed) {
    throw InvalidArgument("solve_fundamental: states were simulated from different random inputs");
  }
  const MarkSpace& marks = jumps.marks;
  const MixedCoefficients mc(model, marks, control);
  const TimeGrid& grid = control.grid;
  const int N = grid.n_steps(), S = states.n_scenarios(), P = states.n_paths();
  const int n = model.dims.n;
  const double dt = grid.dt();
  const Matrix I = Matrix::Identity(n, n);

  FundamentalPair out{PathField(S, P, N + 1, n, n), PathField(S, P, N + 1, n, n), PathField(), false};
  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
    const auto& events = jumps.paths[p].events;
    std::size_t e = 0;
    Matrix phi = I, psi = I;
    out.phi.at(s, p, 0) = phi;
    out.psi.at(s, p, 0) = psi;
    for (int k = 0; k < N; ++k) {
      const double t = grid.time(k);
      const Vector x = states.x(s, p, k);
      const Matrix& cov = family[s].values[k];
      const Matrix M = drift_jacobian(mc, k, t, x, cov);
      const auto sx = model.sigma_x(t, x);
      const Matrix sig = sigma_term(sx, noise.increment(s, p, k));
      Matrix phi_next = phi + M * phi * dt + sig * phi;
      Matrix psi_next = psi * (I - M * dt + ito_term(sx, cov) * dt - sig);
      // Jumps sharing a step act additively on the Euler state, so psi inverts
      // their summed Jacobian once rather than each factor in turn.
      Matrix fx_sum = Matrix::Zero(n, n);
      for (; e < events.size() && events[e].step == k; ++e) {
        fx_sum += model.f_x(t, x, marks.marks[events[e].mark], control.actions[mc.jump_action(k, events[e])]);
      }
      if (!fx_sum.isZero(0.0)) {
        phi_next += fx_sum * phi;
        psi_next = psi_next * jump_inverse(fx_sum);
      }
      if (!phi_next.allFinite() || !psi_next.allFinite()) {
        throw NumericalError("solve_fundamental: non-finite value at step " + std::to_string(k));
      }
      phi = std::move(phi_next);
      psi = std::move(psi_next);
      out.phi.at(s, p, k + 1) = phi;
      out.psi.at(s, p, k + 1) = psi;
    }
  });
  if (window != nullptr) {
    out.eta = solve_eta(model, control, family, jumps, states, out, *window);
    out.has_eta = true;
  }
  return out;
}

PathField solve_eta(const ModelSpec& model, const ControlSchedule& control,
                    const ScenarioFamily& family, const JumpSample& jumps,
                    const StateEnsemble& states, const FundamentalPair& pair,
                    const EtaWindow& window) {
  check_window(window, control);
  const MarkSpace& marks = jumps.marks;
  const MixedCoefficients mc(model, marks, control);
  const TimeGrid& grid = control.grid;
  const int N = grid.n_steps(), S = states.n_scenarios(), P = states.n_paths();
  const int n = model.dims.n;
  const double dt = grid.dt();
  const double inv_h = 1.0 / (window.n_steps * dt);
  const int k_end = window.first_step + window.n_steps;

  PathField eta(S, P, N + 1, n, 1);
  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P), p = static_cast<int>(job % P);
    const auto& events = jumps.paths[p].events;
    std::size_t e = 0;
    while (e < events.size() && events[e].step < window.first_step) ++e;
    Vector v = Vector::Zero(n);
    for (int k = window.first_step; k < k_end; ++k) {
      const double t = grid.time(k);
      const Vector x = states.x(s, p, k);
      const Matrix psi = pair.psi.at(s, p, k);
      Vector next = v + psi * direction_rate(model, mc, marks, window, k, t, x, family[s].values[k]) * (dt * inv_h);
      const std::size_t first_event = e;
      Matrix fx_sum = Matrix::Zero(n, n);
      for (; e < events.size() && events[e].step == k; ++e) {
        fx_sum += model.f_x(t, x, marks.marks[events[e].mark], control.actions[mc.jump_action(k, events[e])]);
      }
      if (e > first_event) {
        const Matrix w = psi * jump_inverse(fx_sum);
        for (std::size_t j = first_event; j < e; ++j) {
          next += w * direction_jump(model, mc, marks, window, k, t, x, events[j]) * inv_h;
        }
      }
      v = std::move(next);
      eta.at(s, p, k + 1) = v;
    }
    for (int k = k_end + 1; k <= N; ++k) eta.at(s, p, k) = v;
  });
  return eta;
}

double inverse_identity_error(const FundamentalPair& pair) {
  double worst = 0.0;
  const int n = pair.phi.rows();
  const Matrix I = Matrix::Identity(n, n);
  for (int s = 0; s < pair.phi.n_scenarios(); ++s)
    for (int p = 0; p < pair.phi.n_paths(); ++p)
      for (int k = 0; k < pair.phi.n_times(); ++k)
        worst = std::max(worst, (pair.phi.at(s, p, k) * pair.psi.at(s, p, k) - I).norm());
  return worst;
}

}  // namespace gjump
