#pragma once

// Run manifests: every output file gets a sidecar "<output>.manifest.json"
// recording the command line, seed, SHA-256 of inputs and outputs, tool
// version and a UTC timestamp. Only the timestamp varies between identical
// runs.

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "turnback/errors.hpp"
#include "turnback/json_io.hpp"

namespace turnback {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

inline std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  std::vector<std::string> command;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
  std::string tool_version{kToolVersion};
  std::string timestamp;

  void add_input(const std::filesystem::path& p) { inputs.emplace_back(p.string(), sha256_file(p)); }
  void add_output(const std::filesystem::path& p) {
    outputs.emplace_back(p.string(), sha256_file(p));
  }
};

inline OrderedJson manifest_to_json(const RunManifest& m) {
  auto files = [](const auto& list) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& [path, hash] : list) arr.push_back({{"path", path}, {"sha256", hash}});
    return arr;
  };
  return {{"tool", "turnback"},
          {"tool_version", m.tool_version},
          {"command", m.command},
          {"seed", m.seed ? OrderedJson(*m.seed) : OrderedJson(nullptr)},
          {"inputs", files(m.inputs)},
          {"outputs", files(m.outputs)},
          {"timestamp", m.timestamp}};
}

inline std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

inline void write_manifest(RunManifest m, const std::filesystem::path& output) {
  if (m.timestamp.empty()) m.timestamp = utc_timestamp();
  write_text_file(manifest_path(output), manifest_to_json(m).dump(2) + "\n");
}

// True when every recorded output still hashes to its recorded digest.
inline bool verify_manifest(const std::filesystem::path& manifest_file) {
  Json j = read_json_file(manifest_file);
  for (const auto& f : detail::require_array(j, "outputs", manifest_file.string())) {
    auto path = detail::require_string(f, "path", manifest_file.string());
    if (!std::filesystem::exists(path)) return false;
    if (sha256_file(path) != detail::require_string(f, "sha256", manifest_file.string())) {
      return false;
    }
  }
  return true;
}

}  // namespace turnback
