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

#include <array>
#include <cstdint>

namespace gjump {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A draw is a
/// pure function of (key, counter), so any (path, step) stream can be
/// regenerated independently of evaluation order.
class Philox {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox(std::uint64_t seed, std::uint32_t stream = 0);

  /// Raw-key construction, used for known-answer checks.
  static Philox with_key(const Key& key);

  Counter block(const Counter& counter) const;

  /// Uniform in the open interval (0, 1) from counter (a, b, c, d), lane 0..3.
  double uniform(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d = 0,
                 int lane = 0) const;

  /// Two uniforms in (0, 1) built from 64 bits each, lanes {0,1} and {2,3}.
  std::array<double, 2> uniform_pair(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                     std::uint32_t d = 0) const;

  /// Standard normal by Box-Muller on uniform_pair; portable and bitwise
  /// reproducible across standard libraries.
  double normal(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d = 0) const;

 private:
  Philox() = default;
  Key key_{};
};

// Stream identifiers, mixed into the key so Brownian, jump and tag draws never
// share counters.
inline constexpr std::uint32_t kStreamBrownian = 0x42524f57u;
inline constexpr std::uint32_t kStreamJumps = 0x4a554d50u;
inline constexpr std::uint32_t kStreamTags = 0x54414753u;
inline constexpr std::uint32_t kStreamScenarios = 0x5343454eu;
inline constexpr std::uint32_t kStreamProbes = 0x50524f42u;

}  // namespace gjump
