#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace hedge::cli {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data);
std::string file_sha256(const fs::path& path);

/// Reproduction record of one command run. Paths are relative to the
/// workspace root so that equal runs in different roots agree byte for byte.
struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256

  void add_input(const fs::path& root, const fs::path& file);
  void add_output(const fs::path& root, const fs::path& file);
  /// Every regular file below `dir` except manifests.
  void add_inputs_under(const fs::path& root, const fs::path& dir);
  void add_outputs_under(const fs::path& root, const fs::path& dir);

  [[nodiscard]] std::string to_json() const;
};

inline constexpr std::string_view kManifestPrefix = "manifest";

/// `dir/manifest_{command}.json`.
fs::path manifest_path(const fs::path& dir, std::string_view command);
void write_manifest(const fs::path& dir, const Manifest& manifest);

}  // namespace hedge::cli
