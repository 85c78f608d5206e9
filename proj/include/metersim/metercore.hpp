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
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "metersim/simclock.hpp"
#include "metersim/time.hpp"
#include "metersim/waveform.hpp"

namespace metersim {

/// Signal conditioning in front of the metering IC: a resistive divider that
/// scales the input into the IC's differential range, and the full-scale
/// voltage that maps to normalized 1.0.
struct FrontEndConfig {
  double divider_ratio{0.02120};
  double full_scale_v{0.25};
};

struct MeterConfig {
  int sample_rate{4000};  ///< instantaneous measurements per second
  int rms_cycle{80};      ///< samples per RMS computation
};

inline constexpr std::int32_t kSampleCodeMin = -(1 << 23);
inline constexpr std::int32_t kSampleCodeMax = (1 << 23) - 1;
inline constexpr std::uint32_t kRmsCodeMax = (1u << 24) - 1;
inline constexpr double kSampleScale = 8388608.0;   // 2^23
inline constexpr double kRmsScale = 16777216.0;     // 2^24

/// Instantaneous sample in normalized 2's complement: codes [-2^23, 2^23)
/// map to [-1, 1).
struct SampleCode {
  std::int32_t code{0};
  friend constexpr auto operator<=>(SampleCode, SampleCode) = default;
};

/// RMS value in unsigned binary: codes [0, 2^24) map to [0, 1).
struct RmsCode {
  std::uint32_t code{0};
  friend constexpr auto operator<=>(RmsCode, RmsCode) = default;
};

inline void validate(const FrontEndConfig& cfg) {
  if (!(cfg.divider_ratio > 0.0 && cfg.divider_ratio < 1.0))
    throw std::invalid_argument("divider_ratio must lie in (0, 1)");
  if (!(cfg.full_scale_v > 0.0))
    throw std::invalid_argument("full_scale_v must be > 0");
}

inline void validate(const MeterConfig& cfg) {
  if (cfg.sample_rate <= 0)
    throw std::invalid_argument("sample_rate must be > 0");
  if (kNsPerSecond % cfg.sample_rate != 0)
    throw std::invalid_argument("sample_rate must divide 1e9 ns evenly");
  if (cfg.rms_cycle <= 0)
    throw std::invalid_argument("rms_cycle must be > 0");
}

/// Divider attenuation: volts at the input terminals to volts at the IC.
inline double front_end(double v_in, const FrontEndConfig& cfg) {
  if (!std::isfinite(v_in)) throw std::invalid_argument("front_end input must be finite");
  return v_in * cfg.divider_ratio;
}

/// 24-bit conversion of an IC input voltage, round-half-even with clamping
/// at the rails.
inline SampleCode quantize(double v_ic, const FrontEndConfig& cfg) {
  if (!std::isfinite(v_ic)) throw std::invalid_argument("quantize input must be finite");
  double scaled = std::nearbyint(v_ic / cfg.full_scale_v * kSampleScale);
  if (scaled <= static_cast<double>(kSampleCodeMin)) return SampleCode{kSampleCodeMin};
  if (scaled >= static_cast<double>(kSampleCodeMax)) return SampleCode{kSampleCodeMax};
  return SampleCode{static_cast<std::int32_t>(scaled)};
}

constexpr double normalized(SampleCode s) { return static_cast<double>(s.code) / kSampleScale; }

/// RMS over one complete computation cycle of quantized samples. The square
/// sum is exact integer arithmetic; the result code floors onto the 2^-24
/// output grid.
inline RmsCode rms_window(std::span<const SampleCode> samples, const MeterConfig& cfg) {
  if (samples.size() != static_cast<std::size_t>(cfg.rms_cycle))
    throw std::invalid_argument("rms window must contain exactly rms_cycle samples");
  std::int64_t sum_sq = 0;
  for (SampleCode s : samples)
    sum_sq += static_cast<std::int64_t>(s.code) * static_cast<std::int64_t>(s.code);
  double fraction =
      std::sqrt(static_cast<double>(sum_sq) / static_cast<double>(samples.size())) / kSampleScale;
  double code = std::floor(fraction * kRmsScale);
  if (code >= static_cast<double>(kRmsCodeMax)) return RmsCode{kRmsCodeMax};
  return RmsCode{static_cast<std::uint32_t>(code)};
}

/// Inverse of the front-end and normalization chain: RMS code to volts at
/// the input terminals.
inline double decode_voltage(RmsCode rms, const FrontEndConfig& cfg) {
  return static_cast<double>(rms.code) / kRmsScale * cfg.full_scale_v / cfg.divider_ratio;
}

inline double decode_sample_voltage(SampleCode inst, const FrontEndConfig& cfg) {
  return normalized(inst) * cfg.full_scale_v / cfg.divider_ratio;
}

/// One emitted measurement: the instantaneous code, the latest completed RMS
/// code (zero until the first cycle completes), and the MCU reading taken at
/// emission.
struct MeterSample {
  std::int64_t index{0};
  SimInstant true_time{};
  SimInstant mcu_time{};
  SampleCode inst{};
  RmsCode latest_rms{};
  bool rms_updated{false};
};

/// Virtual metering IC: samples the waveform through the front-end on a
/// uniform grid and produces an RMS code every rms_cycle samples. The driver
/// supplies time; the sampler holds only the current window.
class MeterSampler {
 public:
  MeterSampler(WaveformSpec spec, FrontEndConfig fe, MeterConfig meter)
      : spec_(spec), fe_(fe), meter_(meter) {
    validate(spec_);
    validate(fe_);
    validate(meter_);
    window_.reserve(static_cast<std::size_t>(meter_.rms_cycle));
  }

  std::int64_t sample_period_ns() const { return kNsPerSecond / meter_.sample_rate; }
  const MeterConfig& meter() const { return meter_; }
  RmsCode latest_rms() const { return latest_; }

  MeterSample sample_at(SimInstant true_time, SimInstant mcu_time) {
    double t_seconds = static_cast<double>(true_time.ns) * 1e-9;
    SampleCode code = quantize(front_end(sample(spec_, t_seconds), fe_), fe_);
    window_.push_back(code);
    MeterSample out{next_index_++, true_time, mcu_time, code, latest_, false};
    if (window_.size() == static_cast<std::size_t>(meter_.rms_cycle)) {
      latest_ = rms_window(window_, meter_);
      window_.clear();
      out.latest_rms = latest_;
      out.rms_updated = true;
    }
    return out;
  }

 private:
  WaveformSpec spec_;
  FrontEndConfig fe_;
  MeterConfig meter_;
  std::vector<SampleCode> window_{};
  RmsCode latest_{};
  std::int64_t next_index_{0};
};

/// Free-running capture: emits duration * sample_rate samples on the uniform
/// grid starting at `start`, each stamped with the given clock's reading.
template <typename Sink>
void run_capture(const WaveformSpec& spec, const FrontEndConfig& fe, const MeterConfig& meter,
                 const ClockState& clock, double duration_s, Sink&& sink,
                 SimInstant start = SimInstant{0}) {
  if (!(std::isfinite(duration_s) && duration_s > 0.0))
    throw std::invalid_argument("capture duration must be > 0");
  MeterSampler sampler(spec, fe, meter);
  const std::int64_t period = sampler.sample_period_ns();
  const std::int64_t total = std::llround(duration_s * meter.sample_rate);
  for (std::int64_t k = 0; k < total; ++k) {
    SimInstant t = start + k * period;
    sink(sampler.sample_at(t, read(clock, t)));
  }
}

}  // namespace metersim
