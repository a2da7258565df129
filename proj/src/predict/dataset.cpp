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

#include "randalloc/predict/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "randalloc/core/errors.hpp"
#include "randalloc/core/log.hpp"
#include "randalloc/core/random.hpp"

namespace randalloc::predict {
namespace {

constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;  // "split"

std::size_t require_column(const io::CsvTable& table, const std::string& name) {
  const auto index = table.column(name);
  if (!index) {
    throw IngestionError(fmt::format("missing column '{}'", name), 0);
  }
  return *index;
}

}  // namespace

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= rows_) throw StructuralError("row index out of range");
    std::copy_n(data_.begin() + rows[i] * cols_, cols_,
                out.data_.begin() + i * cols_);
  }
  return out;
}

void DatasetSchema::validate() const {
  if (label_column.empty()) throw ConfigError("schema needs a label column");
  if (categorical.empty() && numeric.empty()) {
    throw ConfigError("schema declares no feature columns");
  }
  std::set<std::string> seen{label_column};
  if (!id_column.empty() && !seen.insert(id_column).second) {
    throw ConfigError("id column doubles as the label column");
  }
  if (!probability_column.empty() && !seen.insert(probability_column).second) {
    throw ConfigError("probability column is declared twice");
  }
  for (const auto* list : {&categorical, &numeric}) {
    for (const auto& c : *list) {
      if (!seen.insert(c).second) {
        throw ConfigError(fmt::format("column '{}' is declared twice", c));
      }
    }
  }
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> rows) const {
  TabularDataset out;
  out.features = features.select_rows(rows);
  out.columns = columns;
  out.labels.reserve(rows.size());
  out.ids.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels.push_back(labels[r]);
    out.ids.push_back(ids[r]);
  }
  if (probabilities) {
    std::vector<double> p;
    p.reserve(rows.size());
    for (std::size_t r : rows) p.push_back((*probabilities)[r]);
    out.probabilities = std::move(p);
  }
  return out;
}

double TabularDataset::positive_rate() const {
  if (labels.empty()) return 0.0;
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  return static_cast<double>(positives) / static_cast<double>(labels.size());
}

TabularDataset ingest(const io::CsvTable& table, const DatasetSchema& schema) {
  schema.validate();
  const std::size_t n = table.rows.size();
  if (n == 0) throw IngestionError("dataset has no rows", 0);

  const std::size_t label_col = require_column(table, schema.label_column);
  std::vector<std::size_t> numeric_cols;
  for (const auto& c : schema.numeric) numeric_cols.push_back(require_column(table, c));
  std::vector<std::size_t> categorical_cols;
  for (const auto& c : schema.categorical) {
    categorical_cols.push_back(require_column(table, c));
  }

  TabularDataset data;
  for (const auto& c : schema.numeric) data.columns.push_back({c, c, true});
  std::vector<std::map<std::string, std::size_t>> levels(categorical_cols.size());
  for (std::size_t j = 0; j < categorical_cols.size(); ++j) {
    std::set<std::string> values;
    for (std::size_t r = 0; r < n; ++r) {
      const auto& v = table.rows[r][categorical_cols[j]];
      if (v.empty()) {
        throw IngestionError(
            fmt::format("column '{}' has a missing value", schema.categorical[j]),
            r + 1);
      }
      values.insert(v);
    }
    for (const auto& v : values) {
      levels[j].emplace(v, data.columns.size());
      data.columns.push_back(
          {fmt::format("{}={}", schema.categorical[j], v), schema.categorical[j],
           false});
    }
  }

  data.features = Matrix(n, data.columns.size());
  data.labels.resize(n);
  data.ids.resize(n);
  std::optional<std::size_t> id_col;
  if (!schema.id_column.empty()) id_col = require_column(table, schema.id_column);
  std::optional<std::size_t> prob_col;
  if (!schema.probability_column.empty()) {
    prob_col = require_column(table, schema.probability_column);
    data.probabilities.emplace(n);
  }

  std::unordered_set<IndividualId> seen_ids;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& fields = table.rows[r];
    const std::size_t row_number = r + 1;

    const double label =
        io::parse_double(fields[label_col], row_number, schema.label_column);
    if (label != 0.0 && label != 1.0) {
      throw IngestionError(
          fmt::format("label '{}' is not binary", fields[label_col]), row_number);
    }
    data.labels[r] = label == 1.0 ? 1 : 0;

    if (id_col) {
      const auto& text = fields[*id_col];
      IndividualId id = 0;
      const auto [ptr, ec] =
          std::from_chars(text.data(), text.data() + text.size(), id);
      if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw IngestionError(fmt::format("id '{}' is not an unsigned integer", text),
                             row_number);
      }
      data.ids[r] = id;
    } else {
      data.ids[r] = r;
    }
    if (!seen_ids.insert(data.ids[r]).second) {
      throw IngestionError(fmt::format("duplicate id {}", data.ids[r]), row_number);
    }

    if (prob_col) {
      const double p = io::parse_double(fields[*prob_col], row_number,
                                        schema.probability_column);
      if (p < 0.0 || p > 1.0) {
        throw IngestionError("probability outside [0, 1]", row_number);
      }
      (*data.probabilities)[r] = p;
    }

    for (std::size_t j = 0; j < numeric_cols.size(); ++j) {
      data.features(r, j) =
          io::parse_double(fields[numeric_cols[j]], row_number, schema.numeric[j]);
    }
    for (std::size_t j = 0; j < categorical_cols.size(); ++j) {
      data.features(r, levels[j].at(fields[categorical_cols[j]])) = 1.0;
    }
  }

  logger().info("ingested {} rows: {} numeric + {} categorical columns -> {} features, "
                "positive rate {:.4f}",
                n, schema.numeric.size(), schema.categorical.size(),
                data.columns.size(), data.positive_rate());
  return data;
}

TabularDataset ingest_csv(const std::filesystem::path& path,
                          const DatasetSchema& schema) {
  return ingest(io::read_csv_file(path), schema);
}

Standardizer Standardizer::fit(const TabularDataset& train) {
  Standardizer s;
  const auto& x = train.features;
  if (x.rows() == 0) throw PreconditionError("cannot standardize an empty fold");
  for (std::size_t c = 0; c < train.columns.size(); ++c) {
    if (!train.columns[c].numeric) continue;
    double mean = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
    mean /= static_cast<double>(x.rows());
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.rows()));
    s.columns_.push_back(c);
    s.means_.push_back(mean);
    s.scales_.push_back(sd > 0.0 ? sd : 1.0);
  }
  return s;
}

TabularDataset Standardizer::apply(TabularDataset data) const {
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const std::size_t c = columns_[j];
    if (c >= data.features.cols()) throw StructuralError("feature layout mismatch");
    for (std::size_t r = 0; r < data.features.rows(); ++r) {
      data.features(r, c) = (data.features(r, c) - means_[j]) / scales_[j];
    }
  }
  return data;
}

SplitIndices split(std::size_t rows, double ratio, std::size_t repetition,
                   std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError(fmt::format("split ratio {} outside (0, 1)", ratio));
  }
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  RandomSource rng(seed, hash_combine(kSplitStream, repetition));
  for (std::size_t i = rows; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(rows)));
  SplitIndices out;
  out.train.assign(perm.begin(), perm.begin() + n_train);
  out.test.assign(perm.begin() + n_train, perm.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

Fold make_fold(const TabularDataset& data, double ratio, std::size_t repetition,
               std::uint64_t seed) {
  const auto idx = split(data.rows(), ratio, repetition, seed);
  Fold fold;
  fold.train = data.subset(idx.train);
  fold.test = data.subset(idx.test);
  fold.standardizer = Standardizer::fit(fold.train);
  fold.train = fold.standardizer.apply(std::move(fold.train));
  fold.test = fold.standardizer.apply(std::move(fold.test));
  return fold;
}

}  // namespace randalloc::predict
