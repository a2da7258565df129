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

#include "randalloc/io/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/io/csv.hpp"

namespace randalloc::io {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

double parse_config_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

std::uint64_t parse_config_uint(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", what, text));
  }
  return value;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto stop = comma == std::string_view::npos ? text.size() : comma;
    auto item = boost::algorithm::trim_copy(std::string(text.substr(start, stop - start)));
    if (!item.empty()) items.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }
  KeyValueConfig config;
  config.source_ = std::move(source);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      config.values_[section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) {
      config.values_[section + "." + key] = value.data();
    }
  }
  return config;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  auto config = parse(text.str(), path.string());
  config.base_dir_ = path.parent_path();
  return config;
}

bool KeyValueConfig::has(std::string_view key) const {
  return values_.find(key) != values_.end();
}

void KeyValueConfig::set(std::string_view key, std::string value) {
  values_[std::string(key)] = std::move(value);
}

std::optional<std::string> KeyValueConfig::find(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  read_.insert(it->first);
  return it->second;
}

std::string KeyValueConfig::get_string(std::string_view key,
                                       std::string_view fallback) const {
  auto value = find(key);
  return value ? *value : std::string(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  return parse_config_double(*value, fmt::format("{}: {}", source_, key));
}

std::uint64_t KeyValueConfig::get_uint(std::string_view key, std::uint64_t fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  return parse_config_uint(*value, fmt::format("{}: {}", source_, key));
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  const auto v = lower(*value);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(fmt::format("{}: {}: '{}' is not a boolean", source_, key, *value));
}

std::vector<std::string> KeyValueConfig::get_list(
    std::string_view key, const std::vector<std::string>& fallback) const {
  const auto value = find(key);
  return value ? split_list(*value) : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(std::string_view key,
                                                const std::vector<double>& fallback) const {
  const auto value = find(key);
  if (!value) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*value)) {
    out.push_back(parse_config_double(item, fmt::format("{}: {}", source_, key)));
  }
  return out;
}

std::optional<std::filesystem::path> KeyValueConfig::get_path(std::string_view key) const {
  const auto value = find(key);
  if (!value || value->empty()) return std::nullopt;
  std::filesystem::path path(*value);
  if (path.is_relative() && !base_dir_.empty()) path = base_dir_ / path;
  return path;
}

std::vector<std::string> KeyValueConfig::unread() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!read_.contains(key)) out.push_back(key);
  }
  return out;
}

void KeyValueConfig::reject_unread() const {
  const auto keys = unread();
  if (keys.empty()) return;
  throw ConfigError(fmt::format("{}: unknown key(s): {}", source_, fmt::join(keys, ", ")));
}

IniWriter& IniWriter::section(std::string_view name) {
  if (!text_.empty()) text_ += '\n';
  text_ += fmt::format("[{}]\n", name);
  return *this;
}

IniWriter& IniWriter::comment(std::string_view text) {
  text_ += fmt::format("; {}\n", text);
  return *this;
}

IniWriter& IniWriter::value(std::string_view key, std::string_view text) {
  text_ += fmt::format("{} = {}\n", key, text);
  return *this;
}

IniWriter& IniWriter::value(std::string_view key, double number) {
  return value(key, std::string_view(format_double(number)));
}

IniWriter& IniWriter::value(std::string_view key, std::uint64_t number) {
  return value(key, std::string_view(fmt::format("{}", number)));
}

IniWriter& IniWriter::flag(std::string_view key, bool on) {
  return value(key, std::string_view(on ? "true" : "false"));
}

IniWriter& IniWriter::value(std::string_view key, const std::vector<double>& numbers) {
  std::vector<std::string> items;
  for (double v : numbers) items.push_back(format_double(v));
  return value(key, items);
}

IniWriter& IniWriter::value(std::string_view key, const std::vector<std::string>& items) {
  return value(key, std::string_view(fmt::format("{}", fmt::join(items, ", "))));
}

}  // namespace randalloc::io
