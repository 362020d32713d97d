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

#include "gjump/rng.hpp"

#include <cmath>
#include <numbers>

namespace gjump {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox::Philox(std::uint64_t seed, std::uint32_t stream) {
  // SplitMix64 finalizer so nearby seeds give unrelated keys.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(stream) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  key_ = {static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32)};
}

Philox Philox::with_key(const Key& key) {
  Philox p;
  p.key_ = key;
  return p;
}

Philox::Counter Philox::block(const Counter& counter) const {
  Counter c = counter;
  Key k = key_;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double Philox::uniform(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d,
                       int lane) const {
  const Counter out = block({a, b, c, d});
  const int l = lane & 3;
  return to_unit(out[l], out[(l + 1) & 3]);
}

std::array<double, 2> Philox::uniform_pair(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                           std::uint32_t d) const {
  const Counter out = block({a, b, c, d});
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

double Philox::normal(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const {
  const auto u = uniform_pair(a, b, c, d);
  return std::sqrt(-2.0 * std::log(u[0])) * std::cos(2.0 * std::numbers::pi * u[1]);
}

}  // namespace gjump
