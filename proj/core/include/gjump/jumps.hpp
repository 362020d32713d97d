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

#pragma once

// Poisson random measure on a finite mark set, compensated integrals and the
// action-tagged (relaxed) Poisson measure.

#include <cstdint>
#include <functional>
#include <vector>

#include "gjump/common.hpp"
#include "gjump/controls.hpp"

namespace gjump {

struct MarkSpace {
  std::vector<Vector> marks;
  std::vector<double> intensities;

  static MarkSpace scalar(const std::vector<double>& marks, const std::vector<double>& intensities);
  /// No marks at all: the jump part of every model vanishes.
  static MarkSpace none();

  std::size_t size() const { return marks.size(); }
  double total_intensity() const;
  /// max_i |theta_i| (infinity norm), 0 for an empty mark space.
  double max_abs_mark() const;

  /// An empty mark set is accepted and means "no jumps".
  void validate() const;
};

struct JumpEvent {
  double time = 0.0;  // in (0, T]
  int step = 0;       // grid step k with time in (t_k, t_{k+1}]
  int mark = 0;
  int tag = -1;       // action index drawn from mu, -1 when untagged
};

struct JumpPath {
  std::vector<JumpEvent> events;
};

/// Jump paths plus the seed that produced them, so coupled computations can
/// verify they ride the same randomness.
struct JumpSample {
  std::uint64_t seed = 0;
  TimeGrid grid{1.0, 1};
  MarkSpace marks;
  bool tagged = false;
  std::vector<JumpPath> paths;

  std::size_t n_paths() const { return paths.size(); }
};

/// Exponential inter-arrival construction on a counter-based stream: draw j of
/// path p uses counter (p, j), so paths can be regenerated independently.
JumpSample sample_poisson(const MarkSpace& marks, const TimeGrid& grid, int n_paths,
                          std::uint64_t seed);

/// Tags every jump of `base` with an action drawn from mu at the jump's step.
/// Tags use their own stream, so the untagged events are shared with `base`.
JumpSample tag_jumps(const JumpSample& base, const RelaxedControl& mu);

JumpSample sample_relaxed_poisson(const RelaxedControl& mu, const MarkSpace& marks,
                                  const TimeGrid& grid, int n_paths, std::uint64_t seed);

/// Sets each tag to u's action at the jump's step.
JumpSample force_tags(const JumpSample& base, const StrictControl& u);

/// phi(t, mark index).
using MarkFunction = std::function<double(double t, int mark)>;

/// Cumulative value of the compensated integral at every grid time (n_steps + 1
/// entries): jump sum minus the left-endpoint compensator.
std::vector<double> integrate_compensated(const MarkFunction& phi, const JumpPath& path,
                                          const MarkSpace& marks, const TimeGrid& grid);

/// Count of events per (step, mark) minus nu_i dt, for one path.
Matrix compensated_counts(const JumpPath& path, const MarkSpace& marks, const TimeGrid& grid);

}  // namespace gjump
