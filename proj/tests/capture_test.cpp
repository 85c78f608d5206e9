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
#include "metersim/capture.hpp"

#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "metersim/framecodec.hpp"
#include "metersim/rng.hpp"

namespace fs = std::filesystem;

namespace metersim {
namespace {

class CaptureTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("metersim_capture_" + std::to_string(::testing::UnitTest::GetInstance()
                                                     ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  fs::path file(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<FrameBytes> make_frames(std::size_t count, std::uint64_t seed = 61) {
  SplitMix64 rng(seed);
  std::vector<FrameBytes> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    DataFrame frame;
    frame.inst = static_cast<std::int32_t>(rng.range(-(1 << 23), (1 << 23) - 1));
    frame.rms = static_cast<std::uint32_t>(rng.below(1u << 24));
    frame.tstamp = i * 200;  // strictly increasing, 20 ms apart
    frames.push_back(encode_frame(frame));
  }
  return frames;
}

TEST_F(CaptureTest, PipelineDeliversAllFramesInOrder) {
  auto frames = make_frames(1000);
  fs::path raw = file("capture.bin");
  {
    CaptureServer server(raw);
    for (const FrameBytes& f : frames)
      ASSERT_EQ(server.receive(f), ReceiveStatus::accepted);
    EXPECT_EQ(server.receive(stop_frame()), ReceiveStatus::stopped);
    server.finish();
    EXPECT_EQ(server.stats().accepted, 1000u);
    EXPECT_TRUE(server.stats().stop_received);
  }
  std::vector<std::uint8_t> bytes = slurp(raw);
  ASSERT_EQ(bytes.size(), 1000u * kFrameSize);
  // Byte-identical to the sender's emission.
  for (std::size_t i = 0; i < frames.size(); ++i)
    for (std::size_t b = 0; b < kFrameSize; ++b)
      ASSERT_EQ(bytes[i * kFrameSize + b], frames[i][b]) << "frame " << i;
}

TEST_F(CaptureTest, PipelineHoldsOrderWithTinyQueue) {
  auto frames = make_frames(500);
  fs::path raw = file("tiny_queue.bin");
  {
    CaptureServer server(raw, 1);
    for (const FrameBytes& f : frames) server.receive(f);
    server.receive(stop_frame());
    server.finish();
  }
  std::vector<std::uint8_t> bytes = slurp(raw);
  ASSERT_EQ(bytes.size(), 500u * kFrameSize);
  for (std::size_t i = 0; i < frames.size(); ++i)
    ASSERT_EQ(bytes[i * kFrameSize], frames[i][0]);
}

TEST_F(CaptureTest, ImmediateStopLeavesEmptyCapture) {
  fs::path raw = file("empty.bin");
  {
    CaptureServer server(raw);
    EXPECT_EQ(server.receive(stop_frame()), ReceiveStatus::stopped);
    server.finish();
    EXPECT_EQ(server.stats().accepted, 0u);
  }
  EXPECT_EQ(fs::file_size(raw), 0u);
  write_metadata(file("empty.bin.meta"), CaptureMetadata{});
  CaptureMetadata meta = read_metadata(file("empty.bin.meta"));
  EXPECT_EQ(parse_capture(raw, meta).records.size(), 0u);
}

TEST_F(CaptureTest, UnknownIndicatorRejectedWithoutDisturbingOthers) {
  auto frames = make_frames(10);
  fs::path raw = file("reject.bin");
  {
    CaptureServer server(raw);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (i == 5) {
        FrameBytes bogus{};
        bogus[0] = 0x00;
        EXPECT_EQ(server.receive(bogus), ReceiveStatus::rejected);
      }
      EXPECT_EQ(server.receive(frames[i]), ReceiveStatus::accepted);
    }
    server.receive(stop_frame());
    server.finish();
    EXPECT_EQ(server.stats().accepted, 10u);
    EXPECT_EQ(server.stats().rejected, 1u);
  }
  EXPECT_EQ(fs::file_size(raw), 10u * kFrameSize);
}

TEST_F(CaptureTest, FramesAfterStopAreIgnored) {
  auto frames = make_frames(3);
  fs::path raw = file("after_stop.bin");
  CaptureServer server(raw);
  server.receive(frames[0]);
  EXPECT_EQ(server.receive(stop_frame()), ReceiveStatus::stopped);
  EXPECT_EQ(server.receive(frames[1]), ReceiveStatus::ignored);
  EXPECT_EQ(server.receive(stop_frame()), ReceiveStatus::ignored);
  server.finish();
  EXPECT_EQ(server.stats().accepted, 1u);
  EXPECT_EQ(fs::file_size(raw), kFrameSize);
}

TEST_F(CaptureTest, UnwritablePathFailsFast) {
  EXPECT_THROW(CaptureServer(dir_ / "missing_dir" / "capture.bin"), CaptureError);
}

TEST_F(CaptureTest, ParseRoundtripsDecodedValues) {
  auto frames = make_frames(50);
  fs::path raw = file("roundtrip.bin");
  {
    CaptureServer server(raw);
    for (const FrameBytes& f : frames) server.receive(f);
    server.receive(stop_frame());
    server.finish();
  }
  CaptureMetadata meta;
  ParseResult parsed = parse_capture(raw, meta);
  ASSERT_EQ(parsed.records.size(), 50u);
  FrontEndConfig fe{meta.divider_ratio, meta.full_scale_v};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    DataFrame frame = decode_frame(frames[i]);
    EXPECT_EQ(parsed.records[i].unix_us,
              decode_timestamp(frame.tstamp, TimestampBase{meta.constant}));
    EXPECT_DOUBLE_EQ(parsed.records[i].inst_v,
                     decode_sample_voltage(SampleCode{frame.inst}, fe));
    EXPECT_DOUBLE_EQ(parsed.records[i].rms_v, decode_voltage(RmsCode{frame.rms}, fe));
  }
}

TEST_F(CaptureTest, TrailingBytesAreAnError) {
  fs::path raw = file("trailing.bin");
  std::ofstream out(raw, std::ios::binary);
  std::vector<char> bytes(13, 0);
  bytes[0] = static_cast<char>(kIndicatorData);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  try {
    parse_capture(raw, CaptureMetadata{});
    FAIL() << "expected CaptureError";
  } catch (const CaptureError& e) {
    EXPECT_NE(std::string(e.what()).find("1 trailing byte"), std::string::npos);
  }
}

TEST_F(CaptureTest, NonMonotoneTimestampsAreAWarning) {
  fs::path raw = file("nonmono.bin");
  {
    CaptureServer server(raw);
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 500}));
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 100}));
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 900}));
    server.receive(stop_frame());
    server.finish();
  }
  ParseResult parsed = parse_capture(raw, CaptureMetadata{});
  EXPECT_EQ(parsed.records.size(), 3u);
  EXPECT_EQ(parsed.nonmonotone, 1u);
}

TEST_F(CaptureTest, ParseAppliesRebaseEvents) {
  CaptureMetadata meta;
  meta.constant = 1000;
  meta.rebases = {RebaseEvent{2, 2000}};
  fs::path raw = file("rebase.bin");
  {
    CaptureServer server(raw);
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 10}));
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 20}));
    server.receive(encode_frame(DataFrame{kIndicatorData, 0, 0, 0}));  // rebased
    server.receive(stop_frame());
    server.finish();
  }
  ParseResult parsed = parse_capture(raw, meta);
  ASSERT_EQ(parsed.records.size(), 3u);
  EXPECT_EQ(parsed.records[0].unix_us, (1000u + 10u) * 100u);
  EXPECT_EQ(parsed.records[1].unix_us, (1000u + 20u) * 100u);
  EXPECT_EQ(parsed.records[2].unix_us, 2000u * 100u);
  EXPECT_EQ(parsed.nonmonotone, 0u);
}

TEST_F(CaptureTest, MetadataRoundtrips) {
  CaptureMetadata meta;
  meta.version = 1;
  meta.constant = 16'000'000'000'000ull;
  meta.divider_ratio = 0.02120;
  meta.full_scale_v = 0.25;
  meta.sample_rate = 4000;
  meta.rms_cycle = 80;
  meta.rebases = {RebaseEvent{12, 123456789}, RebaseEvent{99, 987654321}};
  fs::path path = file("meta.txt");
  write_metadata(path, meta);
  CaptureMetadata back = read_metadata(path);
  EXPECT_EQ(back.version, meta.version);
  EXPECT_EQ(back.constant, meta.constant);
  EXPECT_DOUBLE_EQ(back.divider_ratio, meta.divider_ratio);
  EXPECT_DOUBLE_EQ(back.full_scale_v, meta.full_scale_v);
  EXPECT_EQ(back.sample_rate, meta.sample_rate);
  EXPECT_EQ(back.rms_cycle, meta.rms_cycle);
  ASSERT_EQ(back.rebases.size(), 2u);
  EXPECT_EQ(back.rebases[0], meta.rebases[0]);
  EXPECT_EQ(back.rebases[1], meta.rebases[1]);
}

TEST_F(CaptureTest, RecordsCsvRoundtrips) {
  std::vector<CaptureRecord> records{{1'600'000'000'000'000ull, 1.5, 7.071068},
                                     {1'600'000'000'020'000ull, -2.25, 7.071068}};
  fs::path path = file("records.csv");
  write_records_csv(path, records);
  std::vector<CaptureRecord> back = read_records_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].unix_us, records[0].unix_us);
  EXPECT_NEAR(back[0].inst_v, records[0].inst_v, 1e-6);
  EXPECT_NEAR(back[1].rms_v, records[1].rms_v, 1e-6);
}

TEST_F(CaptureTest, StopFrameInsideFileIsAnError) {
  fs::path raw = file("stop_inside.bin");
  std::ofstream out(raw, std::ios::binary);
  FrameBytes stop = stop_frame();
  out.write(reinterpret_cast<const char*>(stop.data()), kFrameSize);
  out.close();
  EXPECT_THROW(parse_capture(raw, CaptureMetadata{}), CaptureError);
}

}  // namespace
}  // namespace metersim
