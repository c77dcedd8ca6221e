#include "graphmask/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "graphmask/error.hpp"

namespace graphmask {
namespace {

using nlohmann::json;

FeatureGraph parse_record(const json& rec, std::size_t width) {
  FeatureGraph g;
  g.graph_id = rec.at("id").get<std::string>();
  g.label = label_from_int(rec.at("label").get<int>());
  if (rec.contains("year") && !rec.at("year").is_null()) g.year_tag = rec.at("year").get<int>();
  const auto n = rec.at("n").get<long long>();
  if (n < 0) throw InvalidInput("negative node count");
  g.node_count = static_cast<std::size_t>(n);

  for (const auto& e : rec.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw InvalidInput("edge must be a [src,dst] pair");
    const auto s = e[0].get<long long>();
    const auto d = e[1].get<long long>();
    if (s < 0 || d < 0) throw InvalidInput("negative edge endpoint");
    g.edges.emplace_back(static_cast<NodeId>(s), static_cast<NodeId>(d));
  }

  const auto& rows = rec.at("x");
  if (rows.size() != g.node_count) {
    throw InvalidInput("x has " + std::to_string(rows.size()) + " rows, expected " +
                       std::to_string(g.node_count));
  }
  g.features = Matrix::Zero(static_cast<Eigen::Index>(g.node_count),
                            static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto bits = rows[i].get<std::string>();
    if (bits.size() != width) {
      throw InvalidInput("inconsistent feature width: row " + std::to_string(i) + " has " +
                         std::to_string(bits.size()) + " bits, schema says " +
                         std::to_string(width));
    }
    for (std::size_t j = 0; j < width; ++j) {
      if (bits[j] == '1') {
        g.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
      } else if (bits[j] != '0') {
        throw InvalidInput("feature bit-string contains a character other than 0/1");
      }
    }
  }
  g.validate();
  return g;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& source_name) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw InvalidInput(where + "malformed record: " + e.what());
    }
    try {
      if (!ds.schema) {
        if (!obj.contains("opcode_dim")) throw InvalidInput("first line must be the dataset header");
        FeatureSchema schema;
        schema.opcode_dim = obj.at("opcode_dim").get<std::size_t>();
        schema.permission_dim = obj.at("permission_dim").get<std::size_t>();
        schema.validate();
        ds.schema = schema;
        continue;
      }
      ds.graphs.push_back(parse_record(obj, ds.schema->width()));
    } catch (const json::exception& e) {
      throw InvalidInput(where + "malformed record: " + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + e.what());
    }
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  return parse_dataset(in, path.string());
}

std::string bits_to_string(const Matrix& m, Eigen::Index row) {
  std::string s(static_cast<std::size_t>(m.cols()), '0');
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(row, j) != 0.0) s[static_cast<std::size_t>(j)] = '1';
  }
  return s;
}

std::string graph_to_line(const FeatureGraph& g) {
  json rec;
  rec["id"] = g.graph_id;
  rec["label"] = to_int(g.label);
  if (g.year_tag) rec["year"] = *g.year_tag;
  rec["n"] = g.node_count;
  json edges = json::array();
  for (const auto& [s, d] : g.edges) edges.push_back({s, d});
  rec["edges"] = std::move(edges);
  json rows = json::array();
  for (Eigen::Index i = 0; i < g.features.rows(); ++i) rows.push_back(bits_to_string(g.features, i));
  rec["x"] = std::move(rows);
  return rec.dump();
}

void write_dataset(std::ostream& out, const FeatureSchema& schema,
                   const std::vector<FeatureGraph>& graphs) {
  json header;
  header["opcode_dim"] = schema.opcode_dim;
  header["permission_dim"] = schema.permission_dim;
  out << header.dump() << '\n';
  for (const auto& g : graphs) out << graph_to_line(g) << '\n';
}

void save_dataset(const std::filesystem::path& path, const FeatureSchema& schema,
                  const std::vector<FeatureGraph>& graphs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file: " + path.string());
  write_dataset(out, schema, graphs);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace graphmask
