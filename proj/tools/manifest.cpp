#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "coarse/error.hpp"

namespace coarse::cli {

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
    throw DependencyError("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace {

nlohmann::json digests(const std::vector<FileDigest>& v) {
  auto j = nlohmann::json::array();
  for (const auto& d : v) j.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return j;
}

std::vector<FileDigest> digests_from(const nlohmann::json& j) {
  std::vector<FileDigest> out;
  for (const auto& e : j) out.push_back({e.at("path").get<std::string>(), e.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

nlohmann::json manifest_to_json(const RunManifest& m) {
  return {{"version", 1},
          {"command", m.command},
          {"args", m.args},
          {"config_hash", m.config_hash},
          {"seed", m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr)},
          {"tool_version", m.tool_version},
          {"inputs", digests(m.inputs)},
          {"outputs", digests(m.outputs)}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  try {
    RunManifest m;
    if (j.at("version").get<int>() != 1) throw InputError("manifest: unsupported version");
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.config_hash = j.at("config_hash").get<std::string>();
    if (!j.at("seed").is_null()) m.seed = j.at("seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.inputs = digests_from(j.at("inputs"));
    m.outputs = digests_from(j.at("outputs"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("manifest: ") + e.what());
  }
}

}  // namespace coarse::cli
