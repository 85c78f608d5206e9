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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "metersim/framecodec.hpp"
#include "metersim/keyvalue.hpp"
#include "metersim/metercore.hpp"
#include "metersim/ptpsync.hpp"
#include "metersim/simclock.hpp"
#include "metersim/waveform.hpp"

namespace metersim {

enum class EmissionPolicy { per_cycle, per_sample };

/// Complete description of one simulation run. Defaults match the reference
/// platform setup: 4000 Sa/s, 80-sample RMS cycles, divider ratio 0.02120,
/// 0.1 ms MCU ticks and a timestamp base constant of 16e12.
struct RunConfig {
  WaveformSpec waveform{};
  FrontEndConfig front_end{};
  MeterConfig meter{};
  ClockState mcu{.offset_ns = 5 * kNsPerMs, .drift_ppm = 20.0, .resolution_ns = kMcuTickNs};
  ClockState master{.offset_ns = 0, .drift_ppm = 0.0, .resolution_ns = 1};
  LinkModel link{};
  double duration_s{10.0};
  EmissionPolicy emission{EmissionPolicy::per_cycle};
  std::uint64_t epoch_unix_us{1'600'000'000'000'000ull};
  std::uint64_t timestamp_constant{kTimestampConstantDefault};
  std::uint64_t seed{1};
  double ref_bias{0.0};
  std::vector<std::size_t> report_sizes{10, 20, 30};
  std::size_t queue_capacity{4096};
};

inline void validate(const RunConfig& cfg) {
  validate(cfg.waveform);
  validate(cfg.front_end);
  validate(cfg.meter);
  validate(cfg.link);
  if (cfg.mcu.resolution_ns <= 0)
    throw std::invalid_argument("mcu_resolution_ns must be > 0");
  if (cfg.master.resolution_ns <= 0)
    throw std::invalid_argument("master_resolution_ns must be > 0");
  if (!(cfg.duration_s >= 0.0))
    throw std::invalid_argument("duration_s must be >= 0");
  // The initial exchange has to complete inside the first pulse interval.
  std::int64_t worst_exchange = 2 * cfg.link.delay_m2s_ns + cfg.link.delay_s2m_ns +
                                3 * cfg.link.jitter_ns;
  if (worst_exchange >= kNsPerSecond)
    throw std::invalid_argument("link delays too large: sync cannot finish within 1 s");
  if (cfg.report_sizes.empty())
    throw std::invalid_argument("report_sizes must not be empty");
  for (std::size_t n : cfg.report_sizes)
    if (n < 2) throw std::invalid_argument("report_sizes entries must be >= 2");
  if (cfg.queue_capacity == 0)
    throw std::invalid_argument("queue_capacity must be > 0");
}

inline std::vector<std::size_t> parse_sizes(std::string_view text, std::string_view field) {
  std::vector<std::size_t> sizes;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view item =
        text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                           : comma - start);
    if (!item.empty())
      sizes.push_back(static_cast<std::size_t>(parse_uint64(item, field)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (sizes.empty()) throw std::invalid_argument(std::string(field) + ": no sizes given");
  return sizes;
}

/// Builds a RunConfig from key=value pairs; unknown keys are rejected so
/// typos surface immediately.
inline RunConfig run_config_from_pairs(const KeyValueList& pairs) {
  RunConfig cfg;
  for (const auto& [key, value] : pairs) {
    if (key == "waveform") cfg.waveform.kind = waveform_kind_from(value);
    else if (key == "frequency_hz") cfg.waveform.frequency_hz = parse_double(value, key);
    else if (key == "amplitude_pp") cfg.waveform.amplitude_pp = parse_double(value, key);
    else if (key == "phase_rad") cfg.waveform.phase_rad = parse_double(value, key);
    else if (key == "divider_ratio") cfg.front_end.divider_ratio = parse_double(value, key);
    else if (key == "full_scale_v") cfg.front_end.full_scale_v = parse_double(value, key);
    else if (key == "sample_rate") cfg.meter.sample_rate = static_cast<int>(parse_int64(value, key));
    else if (key == "rms_cycle") cfg.meter.rms_cycle = static_cast<int>(parse_int64(value, key));
    else if (key == "mcu_offset_ns") cfg.mcu.offset_ns = parse_int64(value, key);
    else if (key == "mcu_drift_ppm") cfg.mcu.drift_ppm = parse_double(value, key);
    else if (key == "mcu_resolution_ns") cfg.mcu.resolution_ns = parse_int64(value, key);
    else if (key == "master_offset_ns") cfg.master.offset_ns = parse_int64(value, key);
    else if (key == "master_drift_ppm") cfg.master.drift_ppm = parse_double(value, key);
    else if (key == "master_resolution_ns") cfg.master.resolution_ns = parse_int64(value, key);
    else if (key == "link_delay_m2s_ns") cfg.link.delay_m2s_ns = parse_int64(value, key);
    else if (key == "link_delay_s2m_ns") cfg.link.delay_s2m_ns = parse_int64(value, key);
    else if (key == "link_jitter_ns") cfg.link.jitter_ns = parse_int64(value, key);
    else if (key == "link_drop_rate") cfg.link.drop_rate = parse_double(value, key);
    else if (key == "duration_s") cfg.duration_s = parse_double(value, key);
    else if (key == "emission") {
      if (value == "per_cycle") cfg.emission = EmissionPolicy::per_cycle;
      else if (value == "per_sample") cfg.emission = EmissionPolicy::per_sample;
      else throw std::invalid_argument("emission must be 'per_cycle' or 'per_sample'");
    }
    else if (key == "epoch_unix_us") cfg.epoch_unix_us = parse_uint64(value, key);
    else if (key == "timestamp_constant") cfg.timestamp_constant = parse_uint64(value, key);
    else if (key == "seed") cfg.seed = parse_uint64(value, key);
    else if (key == "ref_bias") cfg.ref_bias = parse_double(value, key);
    else if (key == "report_sizes") cfg.report_sizes = parse_sizes(value, key);
    else if (key == "queue_capacity") cfg.queue_capacity = parse_uint64(value, key);
    else throw std::invalid_argument("unknown config key: " + key);
  }
  cfg.link.seed = cfg.seed;
  validate(cfg);
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_pairs(read_key_value_file(path));
}

}  // namespace metersim
