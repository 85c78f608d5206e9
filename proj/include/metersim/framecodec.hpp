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

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace metersim {

/// Wire layout, 12 bytes total, all multi-byte fields big-endian:
///   [0]     indicator
///   [1..3]  instantaneous voltage, 24-bit 2's complement
///   [4..6]  RMS voltage, 24-bit unsigned
///   [7..11] timestamp code, 40-bit unsigned (unix microseconds / 100,
///           reduced by the session's base constant)
inline constexpr std::size_t kFrameSize = 12;
inline constexpr std::uint8_t kIndicatorData = 0xD1;
inline constexpr std::uint8_t kIndicatorStop = 0x57;
inline constexpr std::uint64_t kTimestampCodeMax = (std::uint64_t{1} << 40) - 1;
inline constexpr std::uint64_t kTimestampConstantDefault = 16'000'000'000'000ull;

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

struct DataFrame {
  std::uint8_t indicator{kIndicatorData};
  std::int32_t inst{0};       ///< 24-bit signed instantaneous code
  std::uint32_t rms{0};       ///< 24-bit unsigned RMS code
  std::uint64_t tstamp{0};    ///< 40-bit timestamp code
  friend constexpr bool operator==(const DataFrame&, const DataFrame&) = default;
};

/// Subtractive timestamp base, in units of 100 microseconds.
struct TimestampBase {
  std::uint64_t constant{kTimestampConstantDefault};
  friend constexpr bool operator==(TimestampBase, TimestampBase) = default;
};

struct TimestampUnderflow : std::range_error {
  using std::range_error::range_error;
};

struct TimestampOverflow : std::range_error {
  using std::range_error::range_error;
};

struct UnknownIndicator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// unix microseconds -> 40-bit code on the 100 us grid.
inline std::uint64_t encode_timestamp(std::uint64_t unix_us, TimestampBase base) {
  std::uint64_t units = unix_us / 100;
  if (units < base.constant)
    throw TimestampUnderflow("timestamp predates the base constant");
  std::uint64_t code = units - base.constant;
  if (code > kTimestampCodeMax)
    throw TimestampOverflow("timestamp code exceeds 40 bits; rebase required");
  return code;
}

/// Exact inverse of encode_timestamp on the 100 us grid.
constexpr std::uint64_t decode_timestamp(std::uint64_t code, TimestampBase base) {
  return (code + base.constant) * 100;
}

/// Overflow check only; a timestamp before the base is an encode error, not
/// a reason to move the base backwards.
constexpr bool needs_rebase(std::uint64_t unix_us, TimestampBase base) {
  std::uint64_t units = unix_us / 100;
  return units >= base.constant && units - base.constant > kTimestampCodeMax;
}

/// New base anchored at the given instant. The caller records the event so a
/// parser can reconstruct absolute time across the boundary.
constexpr TimestampBase rebase(TimestampBase, std::uint64_t unix_us) {
  return TimestampBase{unix_us / 100};
}

namespace detail {

inline void put_u24(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 16);
  out[1] = static_cast<std::uint8_t>(v >> 8);
  out[2] = static_cast<std::uint8_t>(v);
}

inline std::uint32_t get_u24(const std::uint8_t* in) {
  return (std::uint32_t{in[0]} << 16) | (std::uint32_t{in[1]} << 8) | std::uint32_t{in[2]};
}

inline void put_u40(std::uint8_t* out, std::uint64_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 32);
  out[1] = static_cast<std::uint8_t>(v >> 24);
  out[2] = static_cast<std::uint8_t>(v >> 16);
  out[3] = static_cast<std::uint8_t>(v >> 8);
  out[4] = static_cast<std::uint8_t>(v);
}

inline std::uint64_t get_u40(const std::uint8_t* in) {
  return (std::uint64_t{in[0]} << 32) | (std::uint64_t{in[1]} << 24) |
         (std::uint64_t{in[2]} << 16) | (std::uint64_t{in[3]} << 8) | std::uint64_t{in[4]};
}

}  // namespace detail

inline FrameBytes encode_frame(const DataFrame& frame) {
  if (frame.indicator != kIndicatorData && frame.indicator != kIndicatorStop)
    throw std::invalid_argument("frame indicator must be a defined value");
  if (frame.inst < -(1 << 23) || frame.inst > (1 << 23) - 1)
    throw std::invalid_argument("instantaneous code out of 24-bit signed range");
  if (frame.rms > (1u << 24) - 1)
    throw std::invalid_argument("rms code out of 24-bit unsigned range");
  if (frame.tstamp > kTimestampCodeMax)
    throw std::invalid_argument("timestamp code out of 40-bit range");
  FrameBytes bytes{};
  bytes[0] = frame.indicator;
  detail::put_u24(&bytes[1], static_cast<std::uint32_t>(frame.inst) & 0xFFFFFFu);
  detail::put_u24(&bytes[4], frame.rms);
  detail::put_u40(&bytes[7], frame.tstamp);
  return bytes;
}

inline DataFrame decode_frame(std::span<const std::uint8_t, kFrameSize> bytes) {
  std::uint8_t indicator = bytes[0];
  if (indicator != kIndicatorData && indicator != kIndicatorStop)
    throw UnknownIndicator("unknown frame indicator byte");
  std::uint32_t raw_inst = detail::get_u24(&bytes[1]);
  std::int32_t inst = static_cast<std::int32_t>(
      (raw_inst & 0x800000u) ? (raw_inst | 0xFF000000u) : raw_inst);
  DataFrame frame;
  frame.indicator = indicator;
  frame.inst = inst;
  frame.rms = detail::get_u24(&bytes[4]);
  frame.tstamp = detail::get_u40(&bytes[7]);
  return frame;
}

inline DataFrame decode_frame(const FrameBytes& bytes) {
  return decode_frame(std::span<const std::uint8_t, kFrameSize>{bytes});
}

/// A stop request on the wire: the stop indicator with zero padding, so the
/// receiver's fixed 12-byte framing never changes.
inline FrameBytes stop_frame() {
  FrameBytes bytes{};
  bytes[0] = kIndicatorStop;
  return bytes;
}

}  // namespace metersim
