#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "graphmask/losses.hpp"
#include "graphmask/model.hpp"

namespace graphmask {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to rebuild a trained detector. Values are written as
/// hexadecimal floats so a save/load cycle is bit-exact.
struct Checkpoint {
  ModelParams params;
  double gamma = 0.8;
  LossWeights weights;
  /// Free-form key/value pairs (no whitespace in keys or values).
  std::map<std::string, std::string> metadata;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string hex_double(double v);
double parse_double(const std::string& text);

}  // namespace graphmask
