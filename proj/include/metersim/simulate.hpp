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
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "metersim/capture.hpp"
#include "metersim/config.hpp"
#include "metersim/framecodec.hpp"
#include "metersim/keyvalue.hpp"
#include "metersim/metercore.hpp"
#include "metersim/ptpsync.hpp"
#include "metersim/simclock.hpp"
#include "metersim/time.hpp"

namespace metersim {

struct SimulationSummary {
  PtpExchange sync_exchange{};
  std::int64_t sync_residual_ns{0};
  std::uint64_t data_frames{0};
  std::uint64_t samples{0};
  std::uint64_t rms_values{0};
  std::uint64_t pulses{0};
  std::uint64_t rebases{0};
  CaptureStats capture{};
};

namespace detail {

inline std::uint64_t mcu_unix_us(std::uint64_t epoch_unix_us, SimInstant mcu_time) {
  std::int64_t us = floor_div(mcu_time.ns, kNsPerUs);
  std::int64_t unix_us = static_cast<std::int64_t>(epoch_unix_us) + us;
  if (unix_us < 0) throw CaptureError("MCU time precedes the unix epoch");
  return static_cast<std::uint64_t>(unix_us);
}

}  // namespace detail

/// Drives one full capture: initial PTP sync at the first pulse, sampling on
/// the uniform grid from t = 1 s with a 1PPS pulse at every whole second,
/// frame emission through the two-stage capture server, and the stop
/// sequence (one final measurement, then the stop marker) at duration end.
inline SimulationSummary run_simulation(const RunConfig& cfg,
                                        const std::filesystem::path& raw_path,
                                        const std::filesystem::path& meta_path) {
  validate(cfg);

  SimulationSummary summary;
  LinkSampler link(cfg.link);

  // Initial synchronization, started by the pulse at t = 0.
  SyncResult sync = run_sync(cfg.master, cfg.mcu, link, SimInstant{0});
  ClockState slave = sync.slave;
  summary.sync_exchange = sync.exchange;
  summary.sync_residual_ns = sync.residual_ns;

  CaptureServer server(raw_path, cfg.queue_capacity);
  MeterSampler meter(cfg.waveform, cfg.front_end, cfg.meter);
  TimestampBase base{cfg.timestamp_constant};
  std::vector<RebaseEvent> rebases;

  auto emit = [&](const MeterSample& s) {
    std::uint64_t unix_us = detail::mcu_unix_us(cfg.epoch_unix_us, s.mcu_time);
    if (needs_rebase(unix_us, base)) {
      base = rebase(base, unix_us);
      rebases.push_back(RebaseEvent{summary.data_frames, base.constant});
    }
    DataFrame frame;
    frame.indicator = kIndicatorData;
    frame.inst = s.inst.code;
    frame.rms = s.latest_rms.code;
    frame.tstamp = encode_timestamp(unix_us, base);
    if (server.receive(encode_frame(frame)) != ReceiveStatus::accepted)
      throw CaptureError("capture server refused a data frame");
    ++summary.data_frames;
  };

  const std::int64_t period = meter.sample_period_ns();
  const std::int64_t start = kNsPerSecond;
  const std::int64_t total = std::llround(cfg.duration_s * cfg.meter.sample_rate);
  std::int64_t next_pulse_s = 1;

  auto run_pulses_until = [&](std::int64_t true_ns) {
    while (next_pulse_s * kNsPerSecond <= true_ns) {
      slave = pulse_tick(slave, SimInstant{next_pulse_s * kNsPerSecond});
      ++next_pulse_s;
      ++summary.pulses;
    }
  };

  for (std::int64_t k = 0; k < total; ++k) {
    SimInstant t{start + k * period};
    run_pulses_until(t.ns);
    MeterSample s = meter.sample_at(t, read(slave, t));
    ++summary.samples;
    if (s.rms_updated) ++summary.rms_values;
    if (cfg.emission == EmissionPolicy::per_sample ||
        (cfg.emission == EmissionPolicy::per_cycle && s.rms_updated))
      emit(s);
  }

  // Stop sequence: one final measurement, then the stop marker.
  SimInstant t_end{start + total * period};
  run_pulses_until(t_end.ns);
  MeterSample final_sample = meter.sample_at(t_end, read(slave, t_end));
  ++summary.samples;
  if (final_sample.rms_updated) ++summary.rms_values;
  emit(final_sample);
  server.receive(stop_frame());
  server.finish();

  CaptureMetadata meta;
  meta.constant = cfg.timestamp_constant;
  meta.divider_ratio = cfg.front_end.divider_ratio;
  meta.full_scale_v = cfg.front_end.full_scale_v;
  meta.sample_rate = cfg.meter.sample_rate;
  meta.rms_cycle = cfg.meter.rms_cycle;
  meta.rebases = rebases;
  write_metadata(meta_path, meta);

  summary.rebases = rebases.size();
  summary.capture = server.stats();
  return summary;
}

struct SyncDemoRow {
  int repetition{0};
  PtpExchange exchange{};
  std::int64_t residual_ns{0};
};

/// Repeated synchronization exchanges, one per pulse second, starting from
/// the configured (uncorrected) MCU clock. The first row shows the initial
/// offset being taken out; later rows show the steady-state residual.
inline std::vector<SyncDemoRow> run_sync_demo(const RunConfig& cfg, int repetitions) {
  validate(cfg);
  if (repetitions <= 0) throw std::invalid_argument("repetitions must be > 0");
  LinkSampler link(cfg.link);
  ClockState slave = cfg.mcu;
  std::vector<SyncDemoRow> rows;
  rows.reserve(static_cast<std::size_t>(repetitions));
  for (int rep = 0; rep < repetitions; ++rep) {
    SyncResult r = run_sync(cfg.master, slave, link, SimInstant{rep * kNsPerSecond});
    slave = r.slave;
    rows.push_back(SyncDemoRow{rep, r.exchange, r.residual_ns});
  }
  return rows;
}

inline void write_sync_demo_csv(const std::filesystem::path& path,
                                std::span<const SyncDemoRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << "rep,t1_ns,t2_ns,t3_ns,t4_ns,offset_ns,residual_ns\n";
  for (const SyncDemoRow& row : rows) {
    out << row.repetition << ',' << row.exchange.t1 << ',' << row.exchange.t2 << ','
        << row.exchange.t3 << ',' << row.exchange.t4 << ',' << row.exchange.offset_ns << ','
        << row.residual_ns << '\n';
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace metersim
