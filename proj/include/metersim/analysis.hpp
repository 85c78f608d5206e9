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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "metersim/capture.hpp"
#include "metersim/keyvalue.hpp"
#include "metersim/rng.hpp"
#include "metersim/waveform.hpp"

namespace metersim {

inline double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty series");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

/// s = sqrt( sum (V_i - mean)^2 / (n - 1) ).
inline double std_error(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("standard error needs n >= 2");
  double m = mean(values);
  double sum_sq = 0.0;
  for (double v : values) {
    double d = v - m;
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(values.size() - 1));
}

/// |ref - platform| / |ref|, in percent.
inline double mean_pct_diff(double ref_mean, double platform_mean) {
  if (ref_mean == 0.0) throw std::invalid_argument("reference mean must be nonzero");
  return std::abs(ref_mean - platform_mean) / std::abs(ref_mean) * 100.0;
}

struct TimedValue {
  std::uint64_t unix_us{0};
  double value{0.0};
};

/// The reference-meter stand-in: the analytic RMS evaluated at the requested
/// timestamps. Stationary inputs give a constant series; an optional bias
/// knob perturbs it to exercise nonzero differences.
inline std::vector<TimedValue> reference_meter(const WaveformSpec& spec,
                                               std::span<const std::uint64_t> unix_us,
                                               double bias = 0.0) {
  validate(spec);
  double value = analytic_rms(spec) * (1.0 + bias);
  std::vector<TimedValue> out;
  out.reserve(unix_us.size());
  for (std::uint64_t t : unix_us) out.push_back(TimedValue{t, value});
  return out;
}

inline std::vector<TimedValue> rms_series(std::span<const CaptureRecord> records) {
  std::vector<TimedValue> out;
  out.reserve(records.size());
  for (const CaptureRecord& r : records) out.push_back(TimedValue{r.unix_us, r.rms_v});
  return out;
}

struct ComparisonRow {
  std::string waveform;
  std::size_t n{0};
  double ref_mean{0.0};
  double platform_mean{0.0};
  double ref_s{0.0};
  double platform_s{0.0};
  double pct_diff{0.0};
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
};

struct ReportParams {
  std::vector<std::size_t> sizes{10, 20, 30};
  std::uint64_t seed{1};
  /// Pairing window: half an RMS cycle at the default rates.
  std::uint64_t pair_tolerance_us{10'000};
  std::string waveform_label{"sine"};
};

namespace detail {

inline double nearest_reference(std::span<const TimedValue> sorted_ref, std::uint64_t t,
                                std::uint64_t tolerance_us) {
  auto it = std::lower_bound(sorted_ref.begin(), sorted_ref.end(), t,
                             [](const TimedValue& a, std::uint64_t b) { return a.unix_us < b; });
  const TimedValue* best = nullptr;
  std::uint64_t best_gap = 0;
  auto consider = [&](const TimedValue& candidate) {
    std::uint64_t gap = candidate.unix_us > t ? candidate.unix_us - t : t - candidate.unix_us;
    if (best == nullptr || gap < best_gap) {
      best = &candidate;
      best_gap = gap;
    }
  };
  if (it != sorted_ref.end()) consider(*it);
  if (it != sorted_ref.begin()) consider(*(it - 1));
  if (best == nullptr || best_gap > tolerance_us)
    throw std::invalid_argument("no reference measurement within pairing tolerance of t=" +
                                std::to_string(t));
  return best->value;
}

}  // namespace detail

/// Seeded comparison of platform RMS records against a reference series:
/// for each requested set size, n records are drawn uniformly without
/// replacement, paired to the nearest reference timestamp, and summarized.
inline ComparisonReport build_report(std::span<const TimedValue> platform,
                                     std::span<const TimedValue> reference,
                                     const ReportParams& params) {
  if (reference.empty()) throw std::invalid_argument("reference series is empty");
  std::vector<TimedValue> sorted_ref(reference.begin(), reference.end());
  std::sort(sorted_ref.begin(), sorted_ref.end(),
            [](const TimedValue& a, const TimedValue& b) { return a.unix_us < b.unix_us; });

  SplitMix64 rng(params.seed);
  ComparisonReport report;
  for (std::size_t n : params.sizes) {
    if (n < 2) throw std::invalid_argument("comparison set size must be >= 2");
    if (n > platform.size())
      throw std::invalid_argument("insufficient records: need " + std::to_string(n) +
                                  ", have " + std::to_string(platform.size()));
    std::vector<std::size_t> indices(platform.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(indices.size() - i));
      std::swap(indices[i], indices[j]);
    }
    std::vector<double> plat_values;
    std::vector<double> ref_values;
    plat_values.reserve(n);
    ref_values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const TimedValue& p = platform[indices[i]];
      plat_values.push_back(p.value);
      ref_values.push_back(
          detail::nearest_reference(sorted_ref, p.unix_us, params.pair_tolerance_us));
    }
    ComparisonRow row;
    row.waveform = params.waveform_label;
    row.n = n;
    row.ref_mean = mean(ref_values);
    row.platform_mean = mean(plat_values);
    row.ref_s = std_error(ref_values);
    row.platform_s = std_error(plat_values);
    row.pct_diff = mean_pct_diff(row.ref_mean, row.platform_mean);
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline void write_report_csv(const std::filesystem::path& path, const ComparisonReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << "waveform,n,ref_mean,platform_mean,ref_s,platform_s,pct_diff\n";
  for (const ComparisonRow& row : report.rows) {
    out << row.waveform << ',' << row.n << ',' << format_double(row.ref_mean) << ','
        << format_double(row.platform_mean) << ',' << format_double(row.ref_s) << ','
        << format_double(row.platform_s) << ',' << format_double(row.pct_diff) << '\n';
  }
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

}  // namespace metersim
