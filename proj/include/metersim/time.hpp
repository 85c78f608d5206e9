/*
 * Copyright 2026 metersim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <compare>
#include <cstdint>

namespace metersim {

inline constexpr std::int64_t kNsPerUs = 1'000;
inline constexpr std::int64_t kNsPerMs = 1'000'000;
inline constexpr std::int64_t kNsPerSecond = 1'000'000'000;

/// MCU timekeeping granularity: 0.1 ms.
inline constexpr std::int64_t kMcuTickNs = 100'000;

/// Integer nanoseconds since the simulation epoch. All time arithmetic in the
/// simulator is exact integer arithmetic on this type.
struct SimInstant {
  std::int64_t ns{0};

  friend constexpr auto operator<=>(SimInstant, SimInstant) = default;
};

constexpr SimInstant operator+(SimInstant t, std::int64_t delta_ns) {
  return SimInstant{t.ns + delta_ns};
}

constexpr std::int64_t operator-(SimInstant a, SimInstant b) { return a.ns - b.ns; }

/// Floor division (rounds toward negative infinity).
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
}

/// Truncates t down onto a grid of the given spacing.
constexpr std::int64_t floor_to_grid(std::int64_t t, std::int64_t grid) {
  return floor_div(t, grid) * grid;
}

}  // namespace metersim
