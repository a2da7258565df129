/*
 * Copyright 2026 The randalloc Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Flat key-value configuration with [sections], read with the INI rules of
// Boost.PropertyTree. Keys are addressed as "section.key". Lists are comma
// separated. Every typed getter throws ConfigError naming the key and the
// source on malformed values, and marks the key as read so leftovers
// (usually typos) can be reported.

#ifndef RANDALLOC_IO_CONFIG_HPP_
#define RANDALLOC_IO_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace randalloc::io {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text, std::string source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  // Where the text came from, for diagnostics.
  const std::string& source() const { return source_; }
  // Directory relative paths in the file are resolved against.
  const std::filesystem::path& base_dir() const { return base_dir_; }
  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }

  bool has(std::string_view key) const;
  void set(std::string_view key, std::string value);

  std::optional<std::string> find(std::string_view key) const;
  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<std::string> get_list(std::string_view key,
                                    const std::vector<std::string>& fallback) const;
  std::vector<double> get_doubles(std::string_view key,
                                  const std::vector<double>& fallback) const;
  // Relative values are resolved against base_dir().
  std::optional<std::filesystem::path> get_path(std::string_view key) const;

  // Keys present in the file that no getter has asked for.
  std::vector<std::string> unread() const;
  // Throws ConfigError listing unread keys, if any.
  void reject_unread() const;

 private:
  std::string source_ = "<string>";
  std::filesystem::path base_dir_;
  std::map<std::string, std::string, std::less<>> values_;
  mutable std::set<std::string, std::less<>> read_;
};

// Number parsing shared with the command line: the whole text must be
// consumed.
double parse_config_double(std::string_view text, std::string_view what);
std::uint64_t parse_config_uint(std::string_view text, std::string_view what);
std::vector<std::string> split_list(std::string_view text);

// Writes sections in order; values are emitted verbatim.
class IniWriter {
 public:
  IniWriter& section(std::string_view name);
  IniWriter& comment(std::string_view text);
  IniWriter& value(std::string_view key, std::string_view text);
  IniWriter& value(std::string_view key, double number);
  IniWriter& value(std::string_view key, std::uint64_t number);
  IniWriter& flag(std::string_view key, bool on);
  IniWriter& value(std::string_view key, const std::vector<double>& numbers);
  IniWriter& value(std::string_view key, const std::vector<std::string>& items);

  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

}  // namespace randalloc::io

#endif  // RANDALLOC_IO_CONFIG_HPP_
