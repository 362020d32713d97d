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

#include "gjump/jumps.hpp"

#include <cmath>
#include <string>

#include "gjump/rng.hpp"

namespace gjump {

MarkSpace MarkSpace::scalar(const std::vector<double>& marks, const std::vector<double>& intensities) {
  MarkSpace m;
  for (double x : marks) m.marks.push_back(Vector::Constant(1, x));
  m.intensities = intensities;
  m.validate();
  return m;
}

MarkSpace MarkSpace::none() { return {}; }

double MarkSpace::total_intensity() const {
  double s = 0.0;
  for (double v : intensities) s += v;
  return s;
}

double MarkSpace::max_abs_mark() const {
  double m = 0.0;
  for (const auto& x : marks) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

void MarkSpace::validate() const {
  if (marks.size() != intensities.size()) {
    throw InvalidArgument("MarkSpace: marks and intensities differ in length");
  }
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (!(intensities[i] > 0.0) || !std::isfinite(intensities[i])) {
      throw InvalidArgument("MarkSpace: intensity " + std::to_string(i) + " must be positive and finite");
    }
    if (marks[i].size() != marks.front().size() || marks[i].size() < 1 || !marks[i].allFinite()) {
      throw InvalidArgument("MarkSpace: malformed mark " + std::to_string(i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (marks[i] == marks[j]) throw InvalidArgument("MarkSpace: duplicate mark " + std::to_string(i));
    }
  }
}

JumpSample sample_poisson(const MarkSpace& marks, const TimeGrid& grid, int n_paths,
                          std::uint64_t seed) {
  marks.validate();
  if (n_paths < 1) throw InvalidArgument("sample_poisson: n_paths must be >= 1");
  JumpSample out{seed, grid, marks, false, std::vector<JumpPath>(n_paths)};
  const double lambda = marks.total_intensity();
  if (lambda <= 0.0) return out;

  std::vector<double> cdf;
  double acc = 0.0;
  for (double v : marks.intensities) cdf.push_back(acc += v / lambda);

  const Philox rng(seed, kStreamJumps);
  const double horizon = grid.horizon();
  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
    auto& events = out.paths[p].events;
    double t = 0.0;
    for (std::uint32_t j = 0;; ++j) {
      const auto u = rng.uniform_pair(static_cast<std::uint32_t>(p), j, 0);
      t += -std::log(u[0]) / lambda;
      if (t > horizon) break;
      int mark = 0;
      while (mark + 1 < static_cast<int>(cdf.size()) && u[1] >= cdf[mark]) ++mark;
      events.push_back({t, grid.step_of(t), mark, -1});
    }
  });
  return out;
}

namespace {

int draw_action(const std::vector<double>& w, double u) {
  double acc = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    acc += w[i];
    if (u < acc) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace

JumpSample tag_jumps(const JumpSample& base, const RelaxedControl& mu) {
  mu.validate();
  require_same_grid(base.grid, mu.grid, "tag_jumps");
  JumpSample out = base;
  out.tagged = true;
  const Philox rng(base.seed, kStreamTags);
  for (std::size_t p = 0; p < out.paths.size(); ++p) {
    auto& events = out.paths[p].events;
    for (std::size_t j = 0; j < events.size(); ++j) {
      const double u = rng.uniform(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(j), 0);
      events[j].tag = draw_action(mu.weights[events[j].step], u);
    }
  }
  return out;
}

JumpSample sample_relaxed_poisson(const RelaxedControl& mu, const MarkSpace& marks,
                                  const TimeGrid& grid, int n_paths, std::uint64_t seed) {
  return tag_jumps(sample_poisson(marks, grid, n_paths, seed), mu);
}

JumpSample force_tags(const JumpSample& base, const StrictControl& u) {
  u.validate();
  require_same_grid(base.grid, u.grid, "force_tags");
  JumpSample out = base;
  out.tagged = true;
  for (auto& path : out.paths) {
    for (auto& e : path.events) e.tag = u.index[e.step];
  }
  return out;
}

std::vector<double> integrate_compensated(const MarkFunction& phi, const JumpPath& path,
                                          const MarkSpace& marks, const TimeGrid& grid) {
  const int n = grid.n_steps();
  const double dt = grid.dt();
  std::vector<double> cum(n + 1, 0.0);
  std::size_t e = 0;
  for (int k = 0; k < n; ++k) {
    double inc = 0.0;
    const double t = grid.time(k);
    for (std::size_t i = 0; i < marks.size(); ++i) {
      inc -= phi(t, static_cast<int>(i)) * marks.intensities[i] * dt;
    }
    for (; e < path.events.size() && path.events[e].step == k; ++e) {
      inc += phi(path.events[e].time, path.events[e].mark);
    }
    if (!std::isfinite(inc)) {
      throw NumericalError("integrate_compensated: integrand is not finite at step " + std::to_string(k));
    }
    cum[k + 1] = cum[k] + inc;
  }
  return cum;
}

Matrix compensated_counts(const JumpPath& path, const MarkSpace& marks, const TimeGrid& grid) {
  Matrix out(grid.n_steps(), static_cast<Eigen::Index>(marks.size()));
  for (std::size_t i = 0; i < marks.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)).setConstant(-marks.intensities[i] * grid.dt());
  }
  for (const auto& ev : path.events) out(ev.step, ev.mark) += 1.0;
  return out;
}

}  // namespace gjump
