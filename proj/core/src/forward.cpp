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

#include "gjump/forward.hpp"

#include <sstream>

namespace gjump {

ControlSchedule ControlSchedule::from(const StrictControl& u) {
  u.validate();
  ControlSchedule c{u.actions, u.grid, {}, u.index};
  c.support.reserve(u.index.size());
  for (int idx : u.index) c.support.push_back({{idx, 1.0}});
  return c;
}

ControlSchedule ControlSchedule::from(const RelaxedControl& mu) {
  mu.validate();
  ControlSchedule c{mu.actions, mu.grid, {}, {}};
  c.support.resize(mu.weights.size());
  for (std::size_t k = 0; k < mu.weights.size(); ++k) {
    for (std::size_t i = 0; i < mu.weights[k].size(); ++i) {
      if (mu.weights[k][i] > 0.0) c.support[k].push_back({static_cast<int>(i), mu.weights[k][i]});
    }
  }
  return c;
}

MixedCoefficients::MixedCoefficients(const ModelSpec& model, const MarkSpace& marks,
                                     const ControlSchedule& control)
    : model_(model), marks_(marks), control_(control) {}

namespace {

// sum_j w_j F(a_j), where the first term is taken as w_0 * F(a_0) so that a
// single weight-one entry reproduces F(a_0) exactly.
template <typename T, typename Fn>
T weighted(const std::vector<std::pair<int, double>>& support, const ActionGrid& actions, Fn&& fn) {
  T acc = support.front().second * fn(actions[support.front().first]);
  for (std::size_t j = 1; j < support.size(); ++j) {
    acc += support[j].second * fn(actions[support[j].first]);
  }
  return acc;
}

}  // namespace

Vector MixedCoefficients::b(int k, double t, const Vector& x) const {
  return weighted<Vector>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return model_.b(t, x, a); });
}

Vector MixedCoefficients::gamma_cov(int k, double t, const Vector& x, const Matrix& cov) const {
  return weighted<Vector>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return contract_gamma(model_.gamma(t, x, a), cov); });
}

Vector MixedCoefficients::compensator(int k, double t, const Vector& x) const {
  if (marks_.size() == 0) return Vector::Zero(model_.dims.n);
  return weighted<Vector>(control_.support[k], control_.actions, [&](const Vector& a) {
    Vector s = model_.f(t, x, marks_.marks[0], a) * marks_.intensities[0];
    for (std::size_t i = 1; i < marks_.size(); ++i) s += model_.f(t, x, marks_.marks[i], a) * marks_.intensities[i];
    return s;
  });
}

double MixedCoefficients::h(int k, double t, const Vector& x) const {
  return weighted<double>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return model_.h(t, x, a); });
}

Matrix MixedCoefficients::b_x(int k, double t, const Vector& x) const {
  return weighted<Matrix>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return model_.b_x(t, x, a); });
}

Matrix MixedCoefficients::gamma_x_cov(int k, double t, const Vector& x, const Matrix& cov) const {
  return weighted<Matrix>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return contract_list(model_.gamma_x(t, x, a), cov); });
}

Matrix MixedCoefficients::compensator_x(int k, double t, const Vector& x) const {
  const int n = model_.dims.n;
  if (marks_.size() == 0) return Matrix::Zero(n, n);
  return weighted<Matrix>(control_.support[k], control_.actions, [&](const Vector& a) {
    Matrix s = model_.f_x(t, x, marks_.marks[0], a) * marks_.intensities[0];
    for (std::size_t i = 1; i < marks_.size(); ++i) s += model_.f_x(t, x, marks_.marks[i], a) * marks_.intensities[i];
    return s;
  });
}

Vector MixedCoefficients::h_x(int k, double t, const Vector& x) const {
  return weighted<Vector>(control_.support[k], control_.actions,
                          [&](const Vector& a) { return model_.h_x(t, x, a); });
}

int MixedCoefficients::jump_action(int k, const JumpEvent& e) const {
  if (control_.is_strict()) return control_.strict_index[k];
  if (e.tag < 0) throw InvalidArgument("relaxed simulation needs action-tagged jumps");
  return e.tag;
}

StateEnsemble::StateEnsemble(const TimeGrid& grid, int dim, int n_scenarios, int n_paths,
                             std::uint64_t noise_seed, std::uint64_t jump_seed)
    : grid_(grid),
      dim_(dim),
      n_scenarios_(n_scenarios),
      n_paths_(n_paths),
      noise_seed_(noise_seed),
      jump_seed_(jump_seed),
      data_(static_cast<std::size_t>(n_scenarios) * n_paths * (grid.n_steps() + 1) * dim, 0.0) {}

void check_inputs(const ScenarioFamily& family, const NoiseBundle& noise, const JumpSample& jumps,
                  const TimeGrid& control_grid) {
  require_same_grid(family.grid, control_grid, "simulate (scenario family vs control)");
  require_same_grid(noise.grid(), control_grid, "simulate (noise vs control)");
  require_same_grid(jumps.grid, control_grid, "simulate (jumps vs control)");
  if (static_cast<int>(jumps.n_paths()) != noise.n_paths()) {
    throw GridMismatch("simulate: noise and jump samples have different path counts");
  }
  if (noise.n_scenarios() != family.size()) {
    throw GridMismatch("simulate: noise bundle was built for a different scenario family");
  }
}

StateEnsemble simulate(const ModelSpec& model, const ControlSchedule& control,
                       const ScenarioFamily& family, const NoiseBundle& noise,
                       const JumpSample& jumps, const Vector& x0) {
  check_inputs(family, noise, jumps, control.grid);
  const int n = model.dims.n;
  if (x0.size() != n) throw InvalidArgument("simulate: x0 has the wrong dimension");
  if (noise.dim() != model.dims.d) throw InvalidArgument("simulate: noise dimension differs from model d");
  if (!control.is_strict() && !jumps.tagged) {
    bool any = false;
    for (const auto& p : jumps.paths) any = any || !p.events.empty();
    if (any) throw InvalidArgument("simulate_relaxed: jumps must carry action tags");
  }
  const MixedCoefficients mc(model, jumps.marks, control);
  const TimeGrid& grid = control.grid;
  const int N = grid.n_steps();
  const double dt = grid.dt();
  const int S = static_cast<int>(family.size());
  const int P = noise.n_paths();
  StateEnsemble ens(grid, n, S, P, noise.seed(), jumps.seed);

  parallel_for(static_cast<std::size_t>(S) * P, [&](std::size_t job) {
    const int s = static_cast<int>(job / P);
    const int p = static_cast<int>(job % P);
    const auto& events = jumps.paths[p].events;
    std::size_t e = 0;
    ens.x(s, p, 0) = x0;
    Vector x = x0;
    for (int k = 0; k < N; ++k) {
      const double t = grid.time(k);
      const Matrix& cov = family[s].values[k];
      Vector next = x + mc.b(k, t, x) * dt;
      next += model.sigma(t, x) * noise.increment(s, p, k);
      next += mc.gamma_cov(k, t, x, cov) * dt;
      for (; e < events.size() && events[e].step == k; ++e) {
        next += model.f(t, x, jumps.marks.marks[events[e].mark], control.actions[mc.jump_action(k, events[e])]);
      }
      next -= mc.compensator(k, t, x) * dt;
      if (!next.allFinite()) {
        std::ostringstream os;
        os << "simulate: non-finite state at scenario " << s << ", path " << p << ", step " << k
           << " (t = " << t << ", x_k = " << x.transpose() << ")";
        throw NumericalError(os.str());
      }
      x = std::move(next);
      ens.x(s, p, k + 1) = x;
    }
  });
  return ens;
}

StateEnsemble simulate_strict(const ModelSpec& model, const StrictControl& u,
                              const ScenarioFamily& family, const NoiseBundle& noise,
                              const JumpSample& jumps, const Vector& x0) {
  return simulate(model, ControlSchedule::from(u), family, noise, jumps, x0);
}

StateEnsemble simulate_relaxed(const ModelSpec& model, const RelaxedControl& mu,
                               const ScenarioFamily& family, const NoiseBundle& noise,
                               const JumpSample& tagged_jumps, const Vector& x0) {
  return simulate(model, ControlSchedule::from(mu), family, noise, tagged_jumps, x0);
}

SupDistance sup_distance(const StateEnsemble& e1, const StateEnsemble& e2) {
  if (!(e1.grid() == e2.grid()) || e1.dim() != e2.dim() || e1.n_scenarios() != e2.n_scenarios() ||
      e1.n_paths() != e2.n_paths()) {
    throw GridMismatch("sup_distance: ensembles are not indexed alike");
  }
  SupDistance out;
  std::vector<std::vector<double>> squares(e1.n_scenarios());
  out.per_path.assign(e1.n_scenarios(), std::vector<double>(e1.n_paths(), 0.0));
  for (int s = 0; s < e1.n_scenarios(); ++s) {
    squares[s].resize(e1.n_paths());
    for (int p = 0; p < e1.n_paths(); ++p) {
      double m = 0.0;
      for (int k = 0; k <= e1.n_steps(); ++k) m = std::max(m, (e1.x(s, p, k) - e2.x(s, p, k)).norm());
      out.per_path[s][p] = m;
      squares[s][p] = m * m;
    }
    out.mean_square.push_back(mean_se(squares[s]));
  }
  out.upper = e1.n_paths() >= 2 ? upper_expectation(squares) : UpperExpectation{};
  return out;
}

}  // namespace gjump
