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
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metersim {

enum class WaveformKind { sine, triangle };

/// Analytic description of the test signal fed into the meter front-end.
/// Waveforms are pure functions of time, so any instant can be sampled
/// independently and the whole simulation stays deterministic.
struct WaveformSpec {
  WaveformKind kind{WaveformKind::sine};
  double frequency_hz{50.0};
  double amplitude_pp{20.0};  // volts peak-to-peak
  double phase_rad{0.0};      // [0, 2*pi); 0 starts a triangle at 0 V rising
};

inline void validate(const WaveformSpec& spec) {
  if (!(std::isfinite(spec.frequency_hz) && spec.frequency_hz > 0.0))
    throw std::invalid_argument("frequency_hz must be finite and > 0");
  if (!(std::isfinite(spec.amplitude_pp) && spec.amplitude_pp >= 0.0))
    throw std::invalid_argument("amplitude_pp must be finite and >= 0");
  if (!(std::isfinite(spec.phase_rad) && spec.phase_rad >= 0.0 &&
        spec.phase_rad < 2.0 * std::numbers::pi))
    throw std::invalid_argument("phase_rad must lie in [0, 2*pi)");
}

namespace detail {

/// Position within the current period, in [0, 1). Reducing before the
/// trigonometric call keeps long captures as accurate as short ones.
inline double phase_fraction(const WaveformSpec& spec, double t_seconds) {
  double cycles = spec.frequency_hz * t_seconds + spec.phase_rad / (2.0 * std::numbers::pi);
  double u = cycles - std::floor(cycles);
  return u < 1.0 ? u : 0.0;
}

}  // namespace detail

/// Instantaneous signal value at time t, in volts.
inline double sample(const WaveformSpec& spec, double t_seconds) {
  if (!(std::isfinite(t_seconds) && t_seconds >= 0.0))
    throw std::invalid_argument("sample time must be finite and >= 0");
  double amplitude = spec.amplitude_pp / 2.0;
  double u = detail::phase_fraction(spec, t_seconds);
  switch (spec.kind) {
    case WaveformKind::sine:
      return amplitude * std::sin(2.0 * std::numbers::pi * u);
    case WaveformKind::triangle:
      // 0 V rising at u = 0, +peak at u = 1/4, -peak at u = 3/4.
      if (u < 0.25) return amplitude * (4.0 * u);
      if (u < 0.75) return amplitude * (2.0 - 4.0 * u);
      return amplitude * (4.0 * u - 4.0);
  }
  throw std::logic_error("unknown waveform kind");
}

/// Closed-form RMS of the waveform: A/sqrt(2) for sine, A/sqrt(3) for
/// triangle, with A the peak amplitude.
inline double analytic_rms(const WaveformSpec& spec) {
  double amplitude = spec.amplitude_pp / 2.0;
  switch (spec.kind) {
    case WaveformKind::sine:
      return amplitude / std::numbers::sqrt2;
    case WaveformKind::triangle:
      return amplitude / std::sqrt(3.0);
  }
  throw std::logic_error("unknown waveform kind");
}

inline std::string to_string(WaveformKind kind) {
  return kind == WaveformKind::sine ? "sine" : "triangle";
}

inline WaveformKind waveform_kind_from(std::string_view name) {
  if (name == "sine") return WaveformKind::sine;
  if (name == "triangle") return WaveformKind::triangle;
  throw std::invalid_argument("waveform must be 'sine' or 'triangle'");
}

}  // namespace metersim
