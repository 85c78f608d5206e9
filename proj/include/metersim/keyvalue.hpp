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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metersim {

// key=value text, one pair per line. Order and duplicates are preserved;
// blank lines and '#' comments are skipped. Used both for the capture
// metadata sidecar and for run configs.
using KeyValue = std::pair<std::string, std::string>;
using KeyValueList = std::vector<KeyValue>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

inline KeyValueList parse_key_values(std::istream& in) {
  KeyValueList out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::size_t eq = view.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("malformed line (expected key=value): " + line);
    out.emplace_back(std::string(detail::trim(view.substr(0, eq))),
                     std::string(detail::trim(view.substr(eq + 1))));
  }
  return out;
}

inline KeyValueList read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  return parse_key_values(in);
}

inline void write_key_value_file(const std::filesystem::path& path, const KeyValueList& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  for (const auto& [key, value] : pairs) out << key << '=' << value << '\n';
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

inline std::optional<std::string_view> find_value(const KeyValueList& pairs,
                                                  std::string_view key) {
  for (const auto& [k, v] : pairs)
    if (k == key) return std::string_view{v};
  return std::nullopt;
}

inline double parse_double(std::string_view text, std::string_view field) {
  double value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument(std::string(field) + ": not a valid number: " +
                                std::string(text));
  return value;
}

inline std::int64_t parse_int64(std::string_view text, std::string_view field) {
  std::int64_t value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument(std::string(field) + ": not a valid integer: " +
                                std::string(text));
  return value;
}

inline std::uint64_t parse_uint64(std::string_view text, std::string_view field) {
  std::uint64_t value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument(std::string(field) + ": not a valid unsigned integer: " +
                                std::string(text));
  return value;
}

/// Shortest decimal string that round-trips the value exactly.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

}  // namespace metersim
