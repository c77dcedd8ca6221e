#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "graphmask/attacks.hpp"
#include "graphmask/split.hpp"
#include "graphmask/synthetic.hpp"
#include "graphmask/training.hpp"

namespace graphmask::cli {

/// Flat `key = value` text. Blank lines and lines starting with '#' are
/// ignored. Typed getters record which keys were read so that leftovers can
/// be reported as unknown.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& in, const std::string& source_name = "<config>");
  static ConfigFile load(const std::filesystem::path& path);
  static ConfigFile from_entries(std::map<std::string, std::string> entries);

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::size_t> get_size(const std::string& key) const;
  std::optional<std::uint64_t> get_u64(const std::string& key) const;

  /// Throws InvalidInput naming the first key nobody asked for.
  void reject_unknown() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
  std::string source_;
  mutable std::set<std::string> used_;
};

/// Writes entries as sorted `key = value` lines.
void write_config(std::ostream& out, const std::map<std::string, std::string>& entries);

std::string format_double(double v);

// --- typed command configs ---------------------------------------------------

SyntheticConfig synthetic_config_from(const ConfigFile& file);
std::map<std::string, std::string> to_entries(const SyntheticConfig& c);

struct TrainRunConfig {
  TrainConfig train;
  SplitRatios split;
  std::optional<ClassRatio> class_ratio = ClassRatio{};
  std::uint64_t split_seed = 7;

  void validate() const;
};
TrainRunConfig train_run_config_from(const ConfigFile& file);
std::map<std::string, std::string> to_entries(const TrainRunConfig& c);

struct AttackRunConfig {
  AttackConfig attack;
  SurrogateOptions surrogate;

  void validate() const;
};
AttackRunConfig attack_run_config_from(const ConfigFile& file);
std::map<std::string, std::string> to_entries(const AttackRunConfig& c);

/// "9:1" style ratio; an empty string or "none" means no check.
std::optional<ClassRatio> parse_class_ratio(const std::string& text);
std::string class_ratio_text(const std::optional<ClassRatio>& r);

}  // namespace graphmask::cli
