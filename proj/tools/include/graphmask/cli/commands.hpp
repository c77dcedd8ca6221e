#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "graphmask/attacks.hpp"
#include "graphmask/metrics.hpp"
#include "graphmask/model.hpp"
#include "graphmask/training.hpp"

namespace graphmask::cli {

namespace fs = std::filesystem;

/// Documented process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;

struct GenDataOptions {
  fs::path config;
  fs::path out;
};

struct TrainOptions {
  fs::path data;
  std::optional<fs::path> config;
  fs::path out_dir;
  std::optional<Variant> variant;  // overrides the config's `variant`
};

/// Partition names accepted by --split.
enum class SplitName { kAll, kTrain, kValidation, kTest };
SplitName parse_split_name(const std::string& name);
std::string split_name_text(SplitName s);

struct EvalOptions {
  fs::path checkpoint;
  fs::path data;
  SplitName split = SplitName::kTest;
  fs::path out;
};

enum class AttackMode { kWhitebox, kBlackbox };

struct AttackOptions {
  fs::path checkpoint;
  fs::path data;
  AttackMode mode = AttackMode::kWhitebox;
  std::optional<fs::path> config;
  fs::path out;
  /// gnn2_mlp, mlp_on_degree_features, or exact (the victim's own gradients).
  /// Required in black-box mode.
  std::optional<std::string> surrogate;
  SplitName split = SplitName::kTest;
  std::optional<fs::path> perturbed_out;
};

struct ExportOptions {
  fs::path checkpoint;
  fs::path data;
  fs::path out;
  SplitName split = SplitName::kAll;
};

struct ReplayOptions {
  fs::path manifest;
  fs::path scratch;
};

struct AttackReport {
  std::vector<AttackResult> results;
  std::optional<RobustnessSummary> summary;  // absent for an empty population
  std::optional<double> surrogate_agreement;
};

struct ReplayOutcome {
  bool reproduced = true;
  std::vector<std::string> mismatches;
};

/// `argv` is recorded verbatim in the run manifest; `log` receives progress.
void cmd_gen_data(const GenDataOptions& o, const std::vector<std::string>& argv, std::ostream& log);
TrainReport cmd_train(const TrainOptions& o, const std::vector<std::string>& argv, std::ostream& log);
Metrics cmd_eval(const EvalOptions& o, const std::vector<std::string>& argv, std::ostream& log);
AttackReport cmd_attack(const AttackOptions& o, const std::vector<std::string>& argv,
                        std::ostream& log);
void cmd_export_embeddings(const ExportOptions& o, const std::vector<std::string>& argv,
                           std::ostream& log);
ReplayOutcome cmd_replay(const ReplayOptions& o, std::ostream& log);

/// Where each command places its manifest.
fs::path manifest_path_for_file(const fs::path& output);
fs::path manifest_path_for_dir(const fs::path& out_dir);

/// Full command-line entry point: parses flags, dispatches, and maps
/// exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace graphmask::cli
