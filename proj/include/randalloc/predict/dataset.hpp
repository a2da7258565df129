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

// Tabular datasets: ingestion, one-hot encoding, standardization and the
// repeated train/test protocol.

#ifndef RANDALLOC_PREDICT_DATASET_HPP_
#define RANDALLOC_PREDICT_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "randalloc/core/types.hpp"
#include "randalloc/io/csv.hpp"

namespace randalloc::predict {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  Matrix select_rows(std::span<const std::size_t> rows) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct DatasetSchema {
  std::string label_column;
  // Empty: ids are the 0-based data row numbers.
  std::string id_column;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
  // Optional generator-known success probability. Never used as a feature.
  std::string probability_column;

  void validate() const;
};

struct FeatureInfo {
  std::string name;
  std::string source;
  bool numeric = false;
};

struct TabularDataset {
  Matrix features;
  std::vector<std::uint8_t> labels;
  std::vector<IndividualId> ids;
  std::vector<FeatureInfo> columns;
  std::optional<std::vector<double>> probabilities;

  std::size_t rows() const { return labels.size(); }
  TabularDataset subset(std::span<const std::size_t> rows) const;
  double positive_rate() const;
};

// Numeric columns are kept raw; standardize per fold with Standardizer.
// Categorical levels are one-hot encoded in lexicographic order, one column
// per level ("column=level").
TabularDataset ingest(const io::CsvTable& table, const DatasetSchema& schema);
TabularDataset ingest_csv(const std::filesystem::path& path,
                          const DatasetSchema& schema);

// Mean and standard deviation of numeric columns. Constant columns are only
// centered.
class Standardizer {
 public:
  static Standardizer fit(const TabularDataset& train);
  TabularDataset apply(TabularDataset data) const;

  std::span<const double> means() const { return means_; }
  std::span<const double> scales() const { return scales_; }

 private:
  std::vector<std::size_t> columns_;
  std::vector<double> means_;
  std::vector<double> scales_;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded permutation split; train gets round(ratio * rows) rows. Both index
// lists are ascending. Same (rows, ratio, repetition, seed) gives the same
// split.
SplitIndices split(std::size_t rows, double ratio, std::size_t repetition,
                   std::uint64_t seed);

struct Fold {
  TabularDataset train;
  TabularDataset test;
  Standardizer standardizer;
};

// Split plus standardization with training-fold statistics.
Fold make_fold(const TabularDataset& data, double ratio, std::size_t repetition,
               std::uint64_t seed);

}  // namespace randalloc::predict

#endif  // RANDALLOC_PREDICT_DATASET_HPP_
