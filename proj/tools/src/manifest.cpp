#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "cutofflab/cli/commands.hpp"
#include "cutofflab/error.hpp"

namespace cutofflab::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

std::string config_digest(const nlohmann::json& resolved) { return sha256_hex(resolved.dump()); }

std::string tool_version() { return CUTOFFLAB_VERSION; }

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("CUTOFFLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string text(raw);
  if (text.find_first_not_of("0123456789") != std::string::npos || text.size() > 20) {
    throw InvalidParameters("CUTOFFLAB_SEED must be an unsigned integer, got '" + text + "'");
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw InvalidParameters("CUTOFFLAB_SEED out of range: '" + text + "'");
  }
}

namespace {

std::string iso_timestamp() {
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunManifest make_manifest(std::string command, nlohmann::json config, std::uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.config_digest = config_digest(config);
  m.config = std::move(config);
  m.seed = seed;
  m.tool_version = tool_version();
  m.timestamp = iso_timestamp();
  return m;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& p : input_paths) inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& p : output_paths) outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  return {{"command", command},         {"config_digest", config_digest},
          {"config", config},           {"seed", seed},
          {"input_paths", inputs},      {"output_paths", outputs},
          {"tool_version", tool_version}, {"timestamp", timestamp}};
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << m.to_json().dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace cutofflab::cli
