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

// Run manifests: what was run, with which resolved configuration and seed,
// and the SHA-256 of every file it produced. Timestamps and timings live
// only here and never feed into an output digest.

#ifndef RANDALLOC_IO_MANIFEST_HPP_
#define RANDALLOC_IO_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace randalloc::io {

inline constexpr std::string_view kManifestFile = "manifest.json";

struct FileDigest {
  // Path relative to the output directory, or as given for inputs.
  std::string file;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  // Fully resolved configuration; feeding it back reproduces the outputs.
  std::string config;
  std::string generator_version;
  std::string code_version;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::map<std::string, std::string> notes;
  // UTC, ISO 8601.
  std::string started_at;
  std::vector<std::pair<std::string, double>> timings_seconds;

  std::string to_json() const;
  static RunManifest from_json(std::string_view text);

  void write(const std::filesystem::path& path) const;
  static RunManifest read(const std::filesystem::path& path);
};

std::string sha256_hex(std::string_view bytes);
FileDigest digest_file(const std::filesystem::path& path, std::string name);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace randalloc::io

#endif  // RANDALLOC_IO_MANIFEST_HPP_
