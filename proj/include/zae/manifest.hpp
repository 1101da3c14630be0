#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "zae/core.hpp"

namespace zae {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproducibility record written before a command produces any output:
/// the exact invocation, the effective configuration, the master seed, and
/// fingerprints of every input file. Re-running the recorded command line on
/// the same inputs regenerates the outputs byte for byte.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::vector<std::string> command_line;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_hashes;  // path -> fnv1a-64 hex
  std::vector<std::string> outputs;

  void add_input(const std::filesystem::path& path) {
    input_hashes[path.string()] = fnv1a_file_hex(path);
  }
};

inline void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["tool_version"] = manifest.tool_version;
  j["command_line"] = manifest.command_line;
  j["config"] = manifest.config;
  j["seed"] = manifest.seed;
  j["inputs"] = manifest.input_hashes;
  j["outputs"] = manifest.outputs;
  std::ofstream os(path);
  if (!os) throw parse_error("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace zae
