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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "metersim/bounded_queue.hpp"
#include "metersim/framecodec.hpp"
#include "metersim/keyvalue.hpp"
#include "metersim/metercore.hpp"

namespace metersim {

struct CaptureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Base constant change effective from the given frame index onward.
struct RebaseEvent {
  std::uint64_t frame_index{0};
  std::uint64_t constant{0};
  friend constexpr bool operator==(RebaseEvent, RebaseEvent) = default;
};

/// Everything a parser needs to decode a raw capture without external
/// knowledge. Stored as a key=value sidecar next to the .bin file; the raw
/// file itself stays a headerless frame concatenation.
struct CaptureMetadata {
  int version{1};
  std::uint64_t constant{kTimestampConstantDefault};
  double divider_ratio{0.02120};
  double full_scale_v{0.25};
  int sample_rate{4000};
  int rms_cycle{80};
  std::vector<RebaseEvent> rebases{};
};

inline void write_metadata(const std::filesystem::path& path, const CaptureMetadata& meta) {
  KeyValueList pairs;
  pairs.emplace_back("version", std::to_string(meta.version));
  pairs.emplace_back("constant", std::to_string(meta.constant));
  pairs.emplace_back("divider_ratio", format_double(meta.divider_ratio));
  pairs.emplace_back("full_scale_v", format_double(meta.full_scale_v));
  pairs.emplace_back("sample_rate", std::to_string(meta.sample_rate));
  pairs.emplace_back("rms_cycle", std::to_string(meta.rms_cycle));
  for (const RebaseEvent& ev : meta.rebases)
    pairs.emplace_back("rebase", std::to_string(ev.frame_index) + ":" +
                                     std::to_string(ev.constant));
  write_key_value_file(path, pairs);
}

inline CaptureMetadata read_metadata(const std::filesystem::path& path) {
  KeyValueList pairs = read_key_value_file(path);
  auto require = [&](std::string_view key) -> std::string_view {
    auto v = find_value(pairs, key);
    if (!v) throw CaptureError("metadata missing key: " + std::string(key));
    return *v;
  };
  CaptureMetadata meta;
  meta.version = static_cast<int>(parse_int64(require("version"), "version"));
  meta.constant = parse_uint64(require("constant"), "constant");
  meta.divider_ratio = parse_double(require("divider_ratio"), "divider_ratio");
  meta.full_scale_v = parse_double(require("full_scale_v"), "full_scale_v");
  meta.sample_rate = static_cast<int>(parse_int64(require("sample_rate"), "sample_rate"));
  meta.rms_cycle = static_cast<int>(parse_int64(require("rms_cycle"), "rms_cycle"));
  for (const auto& [key, value] : pairs) {
    if (key != "rebase") continue;
    std::size_t colon = value.find(':');
    if (colon == std::string::npos)
      throw CaptureError("malformed rebase record: " + value);
    meta.rebases.push_back(RebaseEvent{
        parse_uint64(std::string_view(value).substr(0, colon), "rebase.frame_index"),
        parse_uint64(std::string_view(value).substr(colon + 1), "rebase.constant")});
  }
  return meta;
}

/// One parsed measurement in readable units.
struct CaptureRecord {
  std::uint64_t unix_us{0};
  double inst_v{0.0};
  double rms_v{0.0};
};

struct ParseResult {
  std::vector<CaptureRecord> records;
  std::size_t nonmonotone{0};  ///< timestamp regressions seen (warning, not error)
};

/// Decodes a raw capture frame by frame. The file length must be a whole
/// number of frames; rebase events from the metadata are applied at their
/// recorded frame indices.
inline ParseResult parse_capture(const std::filesystem::path& raw_path,
                                 const CaptureMetadata& meta) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) throw CaptureError("cannot open capture file: " + raw_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::size_t trailing = bytes.size() % kFrameSize;
  if (trailing != 0)
    throw CaptureError("capture file length is not a multiple of 12: " +
                       std::to_string(trailing) + " trailing byte" +
                       (trailing == 1 ? "" : "s"));

  FrontEndConfig fe{meta.divider_ratio, meta.full_scale_v};
  TimestampBase base{meta.constant};
  std::size_t next_rebase = 0;

  ParseResult result;
  result.records.reserve(bytes.size() / kFrameSize);
  for (std::size_t i = 0; i * kFrameSize < bytes.size(); ++i) {
    while (next_rebase < meta.rebases.size() &&
           meta.rebases[next_rebase].frame_index == i) {
      base.constant = meta.rebases[next_rebase].constant;
      ++next_rebase;
    }
    const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + i * kFrameSize);
    DataFrame frame = decode_frame(std::span<const std::uint8_t, kFrameSize>{p, kFrameSize});
    if (frame.indicator != kIndicatorData)
      throw CaptureError("frame " + std::to_string(i) + " is not a data frame");
    CaptureRecord record;
    record.unix_us = decode_timestamp(frame.tstamp, base);
    record.inst_v = decode_sample_voltage(SampleCode{frame.inst}, fe);
    record.rms_v = decode_voltage(RmsCode{frame.rms}, fe);
    if (!result.records.empty() && record.unix_us < result.records.back().unix_us)
      ++result.nonmonotone;
    result.records.push_back(record);
  }
  return result;
}

/// Readable output format: one line per frame, volts fixed to 6 decimals.
inline void write_records_csv(const std::filesystem::path& path,
                              std::span<const CaptureRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CaptureError("cannot write file: " + path.string());
  out << "unix_us,inst_v,rms_v\n";
  char line[96];
  for (const CaptureRecord& r : records) {
    std::snprintf(line, sizeof(line), "%llu,%.6f,%.6f\n",
                  static_cast<unsigned long long>(r.unix_us), r.inst_v, r.rms_v);
    out << line;
  }
  if (!out) throw CaptureError("write failure on " + path.string());
}

inline std::vector<CaptureRecord> read_records_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CaptureError("cannot open records file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "unix_us,inst_v,rms_v")
    throw CaptureError("records file missing expected header: " + path.string());
  std::vector<CaptureRecord> records;
  while (std::getline(in, line)) {
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    std::size_t c1 = view.find(',');
    std::size_t c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw CaptureError("malformed record line: " + line);
    records.push_back(CaptureRecord{
        parse_uint64(view.substr(0, c1), "unix_us"),
        parse_double(view.substr(c1 + 1, c2 - c1 - 1), "inst_v"),
        parse_double(view.substr(c2 + 1), "rms_v")});
  }
  return records;
}

enum class ReceiveStatus { accepted, rejected, stopped, ignored };

struct CaptureStats {
  std::uint64_t accepted{0};
  std::uint64_t rejected{0};
  bool stop_received{false};
};

/// The server side of the transport: a receiver stage fed by the caller and
/// a writer stage on its own thread, decoupled by a bounded blocking queue.
/// A stop marker ends the capture in-band; nothing after it is accepted.
class CaptureServer {
 public:
  explicit CaptureServer(std::filesystem::path raw_path, std::size_t queue_capacity = 4096)
      : path_(std::move(raw_path)), queue_(queue_capacity) {
    out_.open(path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw CaptureError("cannot open capture file: " + path_.string());
    writer_ = std::thread([this] { write_loop(); });
  }

  CaptureServer(const CaptureServer&) = delete;
  CaptureServer& operator=(const CaptureServer&) = delete;

  ~CaptureServer() {
    try {
      finish();
    } catch (...) {
      // destructor must not throw; finish() reports errors when called directly
    }
  }

  /// Receiver stage. Valid data frames are enqueued in arrival order; a stop
  /// marker ends the capture; unknown indicators are rejected and counted.
  ReceiveStatus receive(const FrameBytes& frame) {
    if (stats_.stop_received) return ReceiveStatus::ignored;
    const std::uint8_t indicator = frame[0];
    if (indicator == kIndicatorData) {
      if (!queue_.push(frame)) return ReceiveStatus::ignored;
      ++stats_.accepted;
      return ReceiveStatus::accepted;
    }
    if (indicator == kIndicatorStop) {
      stats_.stop_received = true;
      queue_.close();
      return ReceiveStatus::stopped;
    }
    ++stats_.rejected;
    return ReceiveStatus::rejected;
  }

  /// Drains the pipeline, joins the writer and closes the file. Throws if the
  /// writer hit a storage failure; the file is then truncated to a whole-frame
  /// boundary.
  void finish() {
    if (finished_) {
      if (!error_.empty()) throw CaptureError(error_);
      return;
    }
    queue_.close();
    if (writer_.joinable()) writer_.join();
    finished_ = true;
    if (!error_.empty()) throw CaptureError(error_);
  }

  const CaptureStats& stats() const { return stats_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_loop() {
    while (auto frame = queue_.pop()) {
      if (!error_.empty()) continue;  // keep draining so the producer never blocks
      out_.write(reinterpret_cast<const char*>(frame->data()),
                 static_cast<std::streamsize>(frame->size()));
      if (!out_) {
        error_ = "storage failure while writing " + path_.string();
        continue;
      }
      ++frames_written_;
    }
    out_.flush();
    if (!out_ && error_.empty()) error_ = "storage failure while flushing " + path_.string();
    out_.close();
    if (!error_.empty()) {
      std::error_code ec;
      std::filesystem::resize_file(path_, frames_written_ * kFrameSize, ec);
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
  BoundedQueue<FrameBytes> queue_;
  std::thread writer_;
  CaptureStats stats_{};
  std::uint64_t frames_written_{0};
  std::string error_{};
  bool finished_{false};
};

}  // namespace metersim
