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

#include "randalloc/io/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "randalloc/core/errors.hpp"

namespace randalloc::io {
namespace {

using nlohmann::json;

json digests_to_json(const std::vector<FileDigest>& digests) {
  json out = json::array();
  for (const auto& d : digests) {
    out.push_back({{"file", d.file}, {"sha256", d.sha256}, {"bytes", d.bytes}});
  }
  return out;
}

std::vector<FileDigest> digests_from_json(const json& array) {
  std::vector<FileDigest> out;
  for (const auto& d : array) {
    out.push_back({d.at("file").get<std::string>(), d.at("sha256").get<std::string>(),
                   d.at("bytes").get<std::uintmax_t>()});
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      EVP_MD_CTX_free(ctx_);
      throw Error("SHA-256 initialisation failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_, data, size) != 1) throw Error("SHA-256 update failed");
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    if (EVP_DigestFinal_ex(ctx_, digest, &size) != 1) throw Error("SHA-256 final failed");
    std::string out;
    out.reserve(2 * size);
    for (unsigned int i = 0; i < size; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string RunManifest::to_json() const {
  json timings = json::object();
  for (const auto& [name, seconds] : timings_seconds) timings[name] = seconds;
  const json doc = {
      {"command", command},
      {"seed", seed},
      {"generator_version", generator_version},
      {"code_version", code_version},
      {"config", config},
      {"inputs", digests_to_json(inputs)},
      {"outputs", digests_to_json(outputs)},
      {"notes", notes},
      {"started_at", started_at},
      {"timings_seconds", timings},
  };
  return doc.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
  try {
    const auto doc = json::parse(text);
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.config = doc.at("config").get<std::string>();
    m.generator_version = doc.value("generator_version", "");
    m.code_version = doc.value("code_version", "");
    if (doc.contains("inputs")) m.inputs = digests_from_json(doc.at("inputs"));
    if (doc.contains("outputs")) m.outputs = digests_from_json(doc.at("outputs"));
    if (doc.contains("notes")) {
      m.notes = doc.at("notes").get<std::map<std::string, std::string>>();
    }
    m.started_at = doc.value("started_at", "");
    if (doc.contains("timings_seconds")) {
      for (const auto& [name, seconds] : doc.at("timings_seconds").items()) {
        m.timings_seconds.emplace_back(name, seconds.get<double>());
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed manifest: {}", e.what()));
  }
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << to_json();
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open manifest '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str());
}

std::string sha256_hex(std::string_view bytes) {
  Sha256 sha;
  sha.update(bytes.data(), bytes.size());
  return sha.hex();
}

FileDigest digest_file(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot read '{}'", path.string()));
  Sha256 sha;
  FileDigest d{std::move(name), {}, 0};
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    const auto got = static_cast<std::size_t>(in.gcount());
    sha.update(buffer, got);
    d.bytes += got;
  }
  d.sha256 = sha.hex();
  return d;
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char text[32];
  std::strftime(text, sizeof text, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return text;
}

}  // namespace randalloc::io
