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
#include <stdexcept>

#include "metersim/rng.hpp"
#include "metersim/simclock.hpp"
#include "metersim/time.hpp"

namespace metersim {

/// The four timestamps of one delay-request exchange and the offset derived
/// from them. All values are nanoseconds as read from each party's own clock.
struct PtpExchange {
  std::int64_t t1{0};  ///< master send time (Sync)
  std::int64_t t2{0};  ///< slave receive time
  std::int64_t t3{0};  ///< slave send time (Delay-Req)
  std::int64_t t4{0};  ///< master receive time
  std::int64_t offset_ns{0};
};

/// Simulated message path between master and slave. Sampled delays stay
/// within [delay - jitter, delay + jitter], clamped at zero.
struct LinkModel {
  std::int64_t delay_m2s_ns{2 * kNsPerMs};
  std::int64_t delay_s2m_ns{2 * kNsPerMs};
  std::int64_t jitter_ns{0};
  double drop_rate{0.0};  ///< probability that a message is lost
  std::uint64_t seed{1};
};

inline void validate(const LinkModel& link) {
  if (link.delay_m2s_ns < 0) throw std::invalid_argument("link_delay_m2s_ns must be >= 0");
  if (link.delay_s2m_ns < 0) throw std::invalid_argument("link_delay_s2m_ns must be >= 0");
  if (link.jitter_ns < 0) throw std::invalid_argument("link_jitter_ns must be >= 0");
  if (!(link.drop_rate >= 0.0 && link.drop_rate < 1.0))
    throw std::invalid_argument("link_drop_rate must lie in [0, 1)");
}

struct SyncTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Draws per-message delays and drops. One sampler per link keeps repeated
/// exchanges on a single seeded stream.
class LinkSampler {
 public:
  explicit LinkSampler(const LinkModel& model) : model_(model), rng_(model.seed) {
    validate(model);
  }

  std::int64_t next_m2s() { return sample_delay(model_.delay_m2s_ns); }
  std::int64_t next_s2m() { return sample_delay(model_.delay_s2m_ns); }
  bool next_drop() { return model_.drop_rate > 0.0 && rng_.unit() < model_.drop_rate; }

  const LinkModel& model() const { return model_; }

 private:
  std::int64_t sample_delay(std::int64_t base) {
    std::int64_t d = base;
    if (model_.jitter_ns > 0) d += rng_.range(-model_.jitter_ns, model_.jitter_ns);
    return d < 0 ? 0 : d;
  }

  LinkModel model_;
  SplitMix64 rng_;
};

/// offset = ((t2 - t1) - (t4 - t3)) / 2, truncated toward zero on odd sums.
constexpr std::int64_t compute_offset(std::int64_t t1, std::int64_t t2, std::int64_t t3,
                                      std::int64_t t4) {
  return ((t2 - t1) - (t4 - t3)) / 2;
}

struct SyncResult {
  PtpExchange exchange{};
  ClockState slave{};  ///< corrected slave clock with pulse_time initialized
  SimInstant true_end{};
  std::int64_t mcu_sync_start{0};
  std::int64_t mcu_sync_end{0};
  std::int64_t residual_ns{0};  ///< slave minus master reading at true_end
};

/// One Sync / Delay-Req / Delay-Resp exchange starting at the pulse instant
/// true_now. Timestamps come from each party's own quantized clock; the
/// computed offset is subtracted from the slave, and the pulse reception MCU
/// time is derived retroactively to seed the 1PPS timekeeping.
inline SyncResult run_sync(const ClockState& master, const ClockState& slave,
                           LinkSampler& link, SimInstant true_now) {
  SyncResult result;
  result.mcu_sync_start = read(slave, true_now).ns;

  std::int64_t t1 = read(master, true_now).ns;
  if (link.next_drop()) throw SyncTimeout("timeout: Sync message dropped");
  SimInstant at_slave = true_now + link.next_m2s();
  std::int64_t t2 = read(slave, at_slave).ns;

  // Delay-Req is sent back immediately on reception.
  std::int64_t t3 = read(slave, at_slave).ns;
  if (link.next_drop()) throw SyncTimeout("timeout: Delay-Req message dropped");
  SimInstant at_master = at_slave + link.next_s2m();
  std::int64_t t4 = read(master, at_master).ns;

  if (link.next_drop()) throw SyncTimeout("timeout: Delay-Resp message dropped");
  SimInstant end = at_master + link.next_m2s();

  std::int64_t offset = compute_offset(t1, t2, t3, t4);
  result.exchange = PtpExchange{t1, t2, t3, t4, offset};
  result.slave = apply_correction(slave, offset);
  // Corrected pulse reception time, kept on the MCU tick grid.
  result.slave.pulse_time_ticks = floor_div(result.mcu_sync_start - offset, kMcuTickNs);
  result.true_end = end;
  result.mcu_sync_end = read(result.slave, end).ns;
  result.residual_ns = result.mcu_sync_end - read(master, end).ns;
  return result;
}

inline SyncResult run_sync(const ClockState& master, const ClockState& slave,
                           const LinkModel& model, SimInstant true_now) {
  LinkSampler sampler(model);
  return run_sync(master, slave, sampler, true_now);
}

}  // namespace metersim
