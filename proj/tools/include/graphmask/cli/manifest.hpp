#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace graphmask::cli {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct ManifestFile {
  std::string role;  // e.g. "dataset", "checkpoint", "report"
  std::string path;
  std::string sha256;
  /// False for files that legitimately differ between reruns (timings).
  bool reproducible = true;
};

/// Everything needed to re-execute one command and check its artifacts.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  /// Effective configuration after defaults and flag overrides.
  std::map<std::string, std::string> config;
  /// Non-config command options (paths, mode, split, ...).
  std::map<std::string, std::string> options;
  std::map<std::string, std::string> seeds;
  std::vector<ManifestFile> inputs;
  std::vector<ManifestFile> outputs;
  std::map<std::string, double> timings;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

ManifestFile describe_file(const std::string& role, const std::filesystem::path& path,
                           bool reproducible = true);

}  // namespace graphmask::cli
