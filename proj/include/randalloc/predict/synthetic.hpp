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

// Synthetic job-seeker records with a known outcome model.
//
// Each row describes a job seeker (age, region, education, prior income,
// months already unemployed, one irrelevant noise feature). The label marks
// long-term unemployment and is drawn from Bernoulli(p_true) with
//
//   logit p_true = b + 0.045 (age - 40) + 0.07 months
//                  - 0.9 z_income + education + region + 0.35 [months > 12] z_age
//
// where education is +0.7 / 0 / -0.8 for primary / secondary / tertiary and
// the region shifts are small. The intercept b puts the positive rate near
// 0.44.

#ifndef RANDALLOC_PREDICT_SYNTHETIC_HPP_
#define RANDALLOC_PREDICT_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>

#include "randalloc/io/csv.hpp"
#include "randalloc/predict/dataset.hpp"

namespace randalloc::predict {

// Bump when synthetic_job_seekers output changes for a given seed.
inline constexpr std::string_view kFixtureVersion = "job-seekers/1";
inline constexpr std::uint64_t kFixtureSeed = 2026;
inline constexpr std::size_t kFixtureRows = 5000;

// Columns: id, age, region, education, prior_income, months_unemployed,
// noise, p_true, label.
io::CsvTable synthetic_job_seekers(std::size_t rows = kFixtureRows,
                                   std::uint64_t seed = kFixtureSeed);

// Schema for synthetic_job_seekers; p_true is the probability column.
DatasetSchema job_seeker_schema();

void write_csv(std::ostream& out, const io::CsvTable& table);

}  // namespace randalloc::predict

#endif  // RANDALLOC_PREDICT_SYNTHETIC_HPP_
