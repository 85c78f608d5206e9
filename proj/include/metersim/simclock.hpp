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

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "metersim/time.hpp"

namespace metersim {

/// One 1PPS interval expressed in MCU ticks: 1000.0 ms of 0.1 ms units.
inline constexpr std::int64_t kPulseIntervalTicks = 10'000;

/// A simulated clock described relative to true time. States are immutable
/// snapshots; corrections and pulse events return new states, so a single
/// driver can advance any number of clocks deterministically.
struct ClockState {
  std::int64_t offset_ns{0};  ///< offset from true time at the epoch
  double drift_ppm{0.0};      ///< constant rate error, parts per million
  std::int64_t resolution_ns{kMcuTickNs};
  /// MCU time of the last 1PPS pulse, in 0.1 ms ticks. Unset until the first
  /// synchronization establishes it.
  std::optional<std::int64_t> pulse_time_ticks{};
};

inline std::int64_t drift_shift_ns(double drift_ppm, std::int64_t elapsed_ns) {
  return std::llround(static_cast<double>(elapsed_ns) * drift_ppm * 1e-6);
}

/// Clock reading at a true instant: offset plus accumulated drift, truncated
/// down onto the resolution grid the way a tick counter would.
inline SimInstant read(const ClockState& clock, SimInstant true_now) {
  if (clock.resolution_ns <= 0)
    throw std::invalid_argument("clock resolution_ns must be > 0");
  std::int64_t raw =
      true_now.ns + clock.offset_ns + drift_shift_ns(clock.drift_ppm, true_now.ns);
  return SimInstant{floor_to_grid(raw, clock.resolution_ns)};
}

/// Subtracts a measured offset from the clock's time.
inline ClockState apply_correction(ClockState clock, std::int64_t offset_meas_ns) {
  clock.offset_ns -= offset_meas_ns;
  return clock;
}

/// Adjusts the clock so that it reads target_ns at the given true instant
/// (before grid truncation).
inline ClockState set_time(ClockState clock, SimInstant true_now, std::int64_t target_ns) {
  std::int64_t raw =
      true_now.ns + clock.offset_ns + drift_shift_ns(clock.drift_ppm, true_now.ns);
  clock.offset_ns -= raw - target_ns;
  return clock;
}

constexpr std::int64_t pulse_time_ns(std::int64_t ticks) { return ticks * kMcuTickNs; }

/// 1PPS handler: advances pulse_time by exactly 1000.0 ms (integer tick
/// arithmetic) and snaps the MCU clock to it.
inline ClockState pulse_tick(ClockState clock, SimInstant true_now) {
  if (!clock.pulse_time_ticks)
    throw std::logic_error("pulse received before first synchronization");
  *clock.pulse_time_ticks += kPulseIntervalTicks;
  return set_time(clock, true_now, pulse_time_ns(*clock.pulse_time_ticks));
}

}  // namespace metersim
