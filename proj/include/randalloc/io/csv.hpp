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

// Comma-separated tables. Fields may be double-quoted; quotes inside a
// quoted field are escaped by backslash. Real numbers are written in the
// shortest form that parses back to the same double.

#ifndef RANDALLOC_IO_CSV_HPP_
#define RANDALLOC_IO_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace randalloc::io {

struct CsvTable {
  std::vector<std::string> header;
  // Row i is data row i + 1 in IngestionError numbering.
  std::vector<std::vector<std::string>> rows;

  // Index of `name` in the header, if present.
  std::optional<std::size_t> column(std::string_view name) const;
};

// Every row must have as many fields as the header; IngestionError otherwise.
// Blank lines are skipped.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

// Parses a finite double, throwing IngestionError(row) on failure.
double parse_double(std::string_view text, std::size_t row,
                    std::string_view column);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(std::size_t value);
  CsvWriter& field(int value);
  void end_row();

  void row(std::initializer_list<std::string_view> fields);

 private:
  void separator();

  std::ostream& out_;
  bool first_ = true;
};

// Shortest round-trip decimal form; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double value);

}  // namespace randalloc::io

#endif  // RANDALLOC_IO_CSV_HPP_
