#include "manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>
#include <openssl/evp.h>

#include "hedge/persist.hpp"
#include "hedge/types.hpp"

#ifndef HEDGE_VERSION
#define HEDGE_VERSION "unknown"
#endif

namespace hedge::cli {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const fs::path& path) { return sha256_hex(persist::read_text(path)); }

namespace {

std::string relative_key(const fs::path& root, const fs::path& file) {
  const auto rel = fs::relative(file, root);
  return (rel.empty() ? file : rel).generic_string();
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    if (e.path().filename().string().starts_with(kManifestPrefix)) continue;
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void Manifest::add_input(const fs::path& root, const fs::path& file) {
  inputs[relative_key(root, file)] = file_sha256(file);
}

void Manifest::add_output(const fs::path& root, const fs::path& file) {
  outputs[relative_key(root, file)] = file_sha256(file);
}

void Manifest::add_inputs_under(const fs::path& root, const fs::path& dir) {
  for (const auto& f : files_under(dir)) add_input(root, f);
}

void Manifest::add_outputs_under(const fs::path& root, const fs::path& dir) {
  for (const auto& f : files_under(dir)) add_output(root, f);
}

std::string Manifest::to_json() const {
  std::string config_text;
  for (const auto& [k, v] : config) config_text += k + " = " + v + "\n";
  nlohmann::ordered_json j;
  j["command"] = command;
  j["seed"] = seed;
  j["config_sha256"] = sha256_hex(config_text);
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["versions"] = {
      {"hedge", HEDGE_VERSION},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
  };
  return j.dump(2) + "\n";
}

fs::path manifest_path(const fs::path& dir, std::string_view command) {
  return dir / (std::string(kManifestPrefix) + "_" + std::string(command) + ".json");
}

void write_manifest(const fs::path& dir, const Manifest& manifest) {
  persist::write_text(manifest_path(dir, manifest.command), manifest.to_json());
}

}  // namespace hedge::cli
