#include "graphmask/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <memory>

#include "graphmask/error.hpp"

namespace graphmask::cli {

using nlohmann::json;

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string() + " for checksumming");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

ManifestFile describe_file(const std::string& role, const std::filesystem::path& path,
                           bool reproducible) {
  return {role, path.string(), sha256_file(path), reproducible};
}

namespace {

json files_to_json(const std::vector<ManifestFile>& files) {
  json arr = json::array();
  for (const auto& f : files) {
    arr.push_back({{"role", f.role}, {"path", f.path}, {"sha256", f.sha256},
                   {"reproducible", f.reproducible}});
  }
  return arr;
}

std::vector<ManifestFile> files_from_json(const json& arr) {
  std::vector<ManifestFile> out;
  for (const auto& f : arr) {
    out.push_back({f.at("role").get<std::string>(), f.at("path").get<std::string>(),
                   f.at("sha256").get<std::string>(), f.value("reproducible", true)});
  }
  return out;
}

}  // namespace

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  json j;
  j["format"] = "graphmask-run-manifest";
  j["version"] = 1;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["options"] = m.options;
  j["seeds"] = m.seeds;
  j["inputs"] = files_to_json(m.inputs);
  j["outputs"] = files_to_json(m.outputs);
  j["timings"] = m.timings;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest " + path.string());
  try {
    const json j = json::parse(in);
    if (j.value("format", "") != "graphmask-run-manifest") {
      throw InvalidInput(path.string() + " is not a run manifest");
    }
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.options = j.at("options").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::string>>();
    m.inputs = files_from_json(j.at("inputs"));
    m.outputs = files_from_json(j.at("outputs"));
    m.timings = j.at("timings").get<std::map<std::string, double>>();
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace graphmask::cli
