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

#include "randalloc/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <boost/tokenizer.hpp>
#include <fmt/format.h>

#include "randalloc/core/errors.hpp"

namespace randalloc::io {
namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_line(const std::string& line, std::size_t row) {
  try {
    Tokenizer tokens(line);
    return {tokens.begin(), tokens.end()};
  } catch (const boost::escaped_list_error& e) {
    throw IngestionError(fmt::format("malformed CSV line: {}", e.what()), row);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!have_header) {
      table.header = split_line(line, 0);
      for (auto& h : table.header) h = std::string(trim(h));
      have_header = true;
      continue;
    }
    ++row;
    auto fields = split_line(line, row);
    if (fields.size() != table.header.size()) {
      throw IngestionError(fmt::format("expected {} fields, found {}",
                                       table.header.size(), fields.size()),
                           row);
    }
    for (auto& f : fields) f = std::string(trim(f));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw IngestionError("CSV input is empty", 0);
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError(fmt::format("cannot open '{}'", path.string()), 0);
  return read_csv(in);
}

double parse_double(std::string_view text, std::size_t row,
                    std::string_view column) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  // from_chars rejects a leading '+', which some exporters emit.
  const char* begin = text.data();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw IngestionError(
        fmt::format("column '{}': '{}' is not a finite number", column, text),
        row);
  }
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{}", value);
}

void CsvWriter::separator() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::field(std::string_view text) {
  separator();
  if (text.find_first_of(",\"\\\n") == std::string_view::npos) {
    out_ << text;
    return *this;
  }
  out_ << '"';
  for (char c : text) {
    if (c == '"' || c == '\\') out_ << '\\';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

CsvWriter& CsvWriter::field(double value) {
  separator();
  out_ << format_double(value);
  return *this;
}

CsvWriter& CsvWriter::field(std::size_t value) {
  separator();
  out_ << value;
  return *this;
}

CsvWriter& CsvWriter::field(int value) {
  separator();
  out_ << value;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void CsvWriter::row(std::initializer_list<std::string_view> fields) {
  for (auto f : fields) field(f);
  end_row();
}

}  // namespace randalloc::io
