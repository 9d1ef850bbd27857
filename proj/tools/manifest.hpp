#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace coarse::cli {

inline constexpr const char* kToolVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);

struct FileDigest {
  std::string path;
  std::string sha256;
};

// One CLI run. Re-running `args` reproduces every output digest.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::string config_hash;  // sha256 of the canonical option JSON
  std::optional<std::uint64_t> seed;
  std::string tool_version = kToolVersion;
  std::vector<FileDigest> inputs, outputs;
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

}  // namespace coarse::cli
