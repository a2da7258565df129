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

// Writes the synthetic job-seeker fixture as CSV.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "randalloc/core/errors.hpp"
#include "randalloc/predict/synthetic.hpp"

int main(int argc, char** argv) {
  namespace predict = randalloc::predict;
  CLI::App app{"Generate the synthetic job-seeker fixture"};
  std::size_t rows = predict::kFixtureRows;
  std::uint64_t seed = predict::kFixtureSeed;
  std::string out = "-";
  app.add_option("--rows", rows, "Number of rows")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--out", out, "Output file, - for stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto table = predict::synthetic_job_seekers(rows, seed);
    if (out == "-") {
      predict::write_csv(std::cout, table);
    } else {
      std::ofstream file(out, std::ios::binary);
      predict::write_csv(file, table);
      if (!file) throw randalloc::Error("cannot write " + out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
