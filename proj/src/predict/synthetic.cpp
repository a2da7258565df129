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

#include "randalloc/predict/synthetic.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "randalloc/core/random.hpp"

namespace randalloc::predict {
namespace {

struct Level {
  const char* name;
  double cumulative;
  double effect;
};

constexpr std::array<Level, 5> kRegions{{{"center", 0.30, 0.0},
                                         {"east", 0.50, 0.15},
                                         {"north", 0.65, -0.1},
                                         {"south", 0.85, 0.25},
                                         {"west", 1.00, -0.2}}};

constexpr std::array<Level, 3> kEducation{{{"primary", 0.25, 0.7},
                                           {"secondary", 0.70, 0.0},
                                           {"tertiary", 1.00, -0.8}}};

constexpr double kIntercept = -0.85;

template <std::size_t N>
const Level& pick(const std::array<Level, N>& levels, double u) {
  for (const auto& l : levels) {
    if (u < l.cumulative) return l;
  }
  return levels.back();
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Round to 4 decimals so the CSV text is the value the model sees.
double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

io::CsvTable synthetic_job_seekers(std::size_t rows, std::uint64_t seed) {
  io::CsvTable table;
  table.header = {"id",    "age",    "region", "education", "prior_income",
                  "months_unemployed", "noise", "p_true",    "label"};
  RandomSource rng(seed);
  for (std::size_t i = 0; i < rows; ++i) {
    RandomSource row_rng = rng.derive(i);
    const double age = 18.0 + static_cast<double>(row_rng.below(47));
    const Level& region = pick(kRegions, row_rng.uniform());
    const Level& education = pick(kEducation, row_rng.uniform());
    const double log_income = 10.3 + 0.25 * education.effect * -1.0 +
                              0.45 * row_rng.normal();
    const double income = round4(std::exp(log_income) / 1000.0);
    const double months = std::floor(-8.0 * std::log(row_rng.uniform_open()));
    const double noise = round4(row_rng.normal());

    const double z_age = (age - 41.0) / 13.6;
    const double z_income = (log_income - 10.3) / 0.47;
    const double logit = kIntercept + 0.045 * (age - 40.0) + 0.07 * months -
                         0.9 * z_income + education.effect + region.effect +
                         (months > 12.0 ? 0.35 * z_age : 0.0);
    const double p = round4(sigmoid(logit));
    const int label = row_rng.uniform() < p ? 1 : 0;

    table.rows.push_back({std::to_string(i), io::format_double(age), region.name,
                          education.name, io::format_double(income),
                          io::format_double(months), io::format_double(noise),
                          io::format_double(p), std::to_string(label)});
  }
  return table;
}

DatasetSchema job_seeker_schema() {
  DatasetSchema schema;
  schema.label_column = "label";
  schema.id_column = "id";
  schema.categorical = {"region", "education"};
  schema.numeric = {"age", "prior_income", "months_unemployed", "noise"};
  schema.probability_column = "p_true";
  return schema;
}

void write_csv(std::ostream& out, const io::CsvTable& table) {
  io::CsvWriter writer(out);
  for (const auto& h : table.header) writer.field(h);
  writer.end_row();
  for (const auto& row : table.rows) {
    for (const auto& f : row) writer.field(f);
    writer.end_row();
  }
}

}  // namespace randalloc::predict
