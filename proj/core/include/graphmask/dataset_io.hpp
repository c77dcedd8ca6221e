#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "graphmask/graph.hpp"

namespace graphmask {

/// A loaded graph file. `schema` is empty only for a file with no header and
/// no records.
struct Dataset {
  std::optional<FeatureSchema> schema;
  std::vector<FeatureGraph> graphs;
};

// Line format: first line is a header object {"opcode_dim":..,"permission_dim":..};
// every following non-blank line is one graph record
// {"id":..,"label":0|1,"year":..(optional),"n":..,"edges":[[s,d],..],"x":["0101..",..]}.

/// Fail-fast: the first malformed record aborts the load with its line number.
Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::istream& in, const std::string& source_name = "<stream>");

void write_dataset(std::ostream& out, const FeatureSchema& schema,
                   const std::vector<FeatureGraph>& graphs);
void save_dataset(const std::filesystem::path& path, const FeatureSchema& schema,
                  const std::vector<FeatureGraph>& graphs);

/// Serializes one graph record as a single line (no trailing newline).
std::string graph_to_line(const FeatureGraph& g);

std::string bits_to_string(const Matrix& row_matrix, Eigen::Index row);

}  // namespace graphmask
