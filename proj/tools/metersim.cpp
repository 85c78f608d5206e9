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
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "metersim/metersim.hpp"

namespace fs = std::filesystem;

namespace {

fs::path default_meta_path(const fs::path& raw) {
  fs::path meta = raw;
  meta += ".meta";
  return meta;
}

metersim::RunConfig load_config(const std::string& config_path, std::uint64_t* seed_override) {
  metersim::RunConfig cfg;
  if (!config_path.empty()) cfg = metersim::load_run_config(config_path);
  if (seed_override != nullptr) {
    cfg.seed = *seed_override;
    cfg.link.seed = *seed_override;
  }
  metersim::validate(cfg);
  return cfg;
}

int cmd_simulate(const std::string& config_path, const std::string& out,
                 const std::string& meta, std::uint64_t* seed, double* duration) {
  metersim::RunConfig cfg = load_config(config_path, seed);
  if (duration != nullptr) cfg.duration_s = *duration;
  metersim::validate(cfg);
  fs::path raw_path(out);
  fs::path meta_path = meta.empty() ? default_meta_path(raw_path) : fs::path(meta);
  auto summary = metersim::run_simulation(cfg, raw_path, meta_path);
  std::cout << "capture: " << raw_path.string() << " (" << summary.data_frames
            << " data frames, " << summary.rms_values << " rms values, " << summary.pulses
            << " pulses, sync residual " << summary.sync_residual_ns << " ns)\n"
            << "metadata: " << meta_path.string() << "\n";
  return 0;
}

int cmd_parse(const std::string& raw, const std::string& meta, const std::string& out) {
  fs::path raw_path(raw);
  fs::path meta_path = meta.empty() ? default_meta_path(raw_path) : fs::path(meta);
  metersim::CaptureMetadata metadata = metersim::read_metadata(meta_path);
  metersim::ParseResult parsed = metersim::parse_capture(raw_path, metadata);
  if (parsed.nonmonotone > 0)
    std::cerr << "warning: " << parsed.nonmonotone << " non-monotone timestamp(s)\n";
  metersim::write_records_csv(out, parsed.records);
  std::cout << "parsed " << parsed.records.size() << " records to " << out << "\n";
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& config_path,
               const std::string& out, std::uint64_t* seed, const std::string& sizes,
               double* ref_bias) {
  metersim::RunConfig cfg = load_config(config_path, seed);
  if (ref_bias != nullptr) cfg.ref_bias = *ref_bias;
  if (!sizes.empty()) cfg.report_sizes = metersim::parse_sizes(sizes, "--sizes");

  std::vector<metersim::CaptureRecord> records = metersim::read_records_csv(records_path);
  std::vector<metersim::TimedValue> platform = metersim::rms_series(records);
  std::vector<std::uint64_t> times;
  times.reserve(platform.size());
  for (const auto& p : platform) times.push_back(p.unix_us);
  std::vector<metersim::TimedValue> reference =
      metersim::reference_meter(cfg.waveform, times, cfg.ref_bias);

  metersim::ReportParams params;
  params.sizes = cfg.report_sizes;
  params.seed = cfg.seed;
  params.waveform_label = metersim::to_string(cfg.waveform.kind);
  params.pair_tolerance_us = static_cast<std::uint64_t>(
      cfg.meter.rms_cycle * 1'000'000ll / cfg.meter.sample_rate / 2);

  metersim::ComparisonReport report =
      metersim::build_report(platform, reference, params);
  metersim::write_report_csv(out, report);
  std::cout << "report with " << report.rows.size() << " rows written to " << out << "\n";
  return 0;
}

int cmd_syncdemo(const std::string& config_path, const std::string& out, int reps,
                 std::uint64_t* seed) {
  metersim::RunConfig cfg = load_config(config_path, seed);
  auto rows = metersim::run_sync_demo(cfg, reps);
  metersim::write_sync_demo_csv(out, rows);
  std::cout << rows.size() << " exchanges written to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metersim: deterministic digital energy meter platform simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string meta;
  std::string raw;
  std::string records_path;
  std::string sizes;
  std::uint64_t seed = 0;
  double duration = 0.0;
  double ref_bias = 0.0;
  int reps = 10;

  auto* simulate = app.add_subcommand("simulate", "run a capture end to end");
  simulate->add_option("--config", config_path, "key=value run config");
  simulate->add_option("--out", out, "raw capture output (.bin)")->required();
  simulate->add_option("--meta", meta, "metadata sidecar path (default: <out>.meta)");
  auto* sim_seed = simulate->add_option("--seed", seed, "override config seed");
  auto* sim_duration = simulate->add_option("--duration", duration, "override duration (s)");

  auto* parse = app.add_subcommand("parse", "convert a raw capture to CSV");
  parse->add_option("--raw", raw, "raw capture file")->required();
  parse->add_option("--meta", meta, "metadata sidecar path (default: <raw>.meta)");
  parse->add_option("--out", out, "records CSV output")->required();

  auto* report = app.add_subcommand("report", "compare parsed records to the reference");
  report->add_option("--records", records_path, "parsed records CSV")->required();
  report->add_option("--config", config_path, "key=value run config");
  report->add_option("--out", out, "report CSV output")->required();
  auto* rep_seed = report->add_option("--seed", seed, "override config seed");
  report->add_option("--sizes", sizes, "comparison set sizes, e.g. 10,20,30");
  auto* rep_bias = report->add_option("--ref-bias", ref_bias, "relative reference bias");

  auto* syncdemo = app.add_subcommand("syncdemo", "run repeated PTP exchanges");
  syncdemo->add_option("--config", config_path, "key=value run config");
  syncdemo->add_option("--out", out, "exchange CSV output")->required();
  syncdemo->add_option("--reps", reps, "number of exchanges");
  auto* demo_seed = syncdemo->add_option("--seed", seed, "override config seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, out, meta, sim_seed->count() ? &seed : nullptr,
                          sim_duration->count() ? &duration : nullptr);
    if (parse->parsed()) return cmd_parse(raw, meta, out);
    if (report->parsed())
      return cmd_report(records_path, config_path, out, rep_seed->count() ? &seed : nullptr,
                        sizes, rep_bias->count() ? &ref_bias : nullptr);
    if (syncdemo->parsed())
      return cmd_syncdemo(config_path, out, reps, demo_seed->count() ? &seed : nullptr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
