#include "graphmask/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "graphmask/error.hpp"

namespace graphmask::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InvalidInput("config field '" + key + "': expected " + expected + ", got '" + value + "'");
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source_name) {
  ConfigFile cfg;
  cfg.source_ = source_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": empty key");
    if (!cfg.entries_.emplace(key, trim(t.substr(eq + 1))).second) {
      throw InvalidInput(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file " + path.string());
  return parse(in, path.string());
}

ConfigFile ConfigFile::from_entries(std::map<std::string, std::string> entries) {
  ConfigFile cfg;
  cfg.entries_ = std::move(entries);
  cfg.source_ = "<entries>";
  return cfg;
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  if (s->empty()) bad_value(key, *s, "a number");
  char* end = nullptr;
  const double v = std::strtod(s->c_str(), &end);
  if (end != s->c_str() + s->size() || !std::isfinite(v)) bad_value(key, *s, "a finite number");
  return v;
}

std::optional<std::uint64_t> ConfigFile::get_u64(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size() || s->empty()) {
    bad_value(key, *s, "a non-negative integer");
  }
  return v;
}

std::optional<std::size_t> ConfigFile::get_size(const std::string& key) const {
  const auto v = get_u64(key);
  if (!v) return std::nullopt;
  return static_cast<std::size_t>(*v);
}

void ConfigFile::reject_unknown() const {
  for (const auto& [key, value] : entries_) {
    if (!used_.count(key)) throw InvalidInput(source_ + ": unknown config field '" + key + "'");
  }
}

void write_config(std::ostream& out, const std::map<std::string, std::string>& entries) {
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::optional<ClassRatio> parse_class_ratio(const std::string& text) {
  if (text.empty() || text == "none") return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos) bad_value("class_ratio", text, "'benign:malicious' such as 9:1");
  char* end = nullptr;
  const std::string b = text.substr(0, colon), m = text.substr(colon + 1);
  ClassRatio r;
  r.benign = std::strtod(b.c_str(), &end);
  if (b.empty() || *end != '\0') bad_value("class_ratio", text, "'benign:malicious' such as 9:1");
  r.malicious = std::strtod(m.c_str(), &end);
  if (m.empty() || *end != '\0') bad_value("class_ratio", text, "'benign:malicious' such as 9:1");
  if (!(r.benign > 0.0 && r.malicious > 0.0)) {
    throw InvalidInput("config field 'class_ratio': both parts must be positive");
  }
  return r;
}

std::string class_ratio_text(const std::optional<ClassRatio>& r) {
  if (!r) return "none";
  return format_double(r->benign) + ":" + format_double(r->malicious);
}

// --- synthetic ----------------------------------------------------------------

SyntheticConfig synthetic_config_from(const ConfigFile& f) {
  SyntheticConfig c;
  if (auto v = f.get_size("n_graphs")) c.n_graphs = *v;
  if (auto v = f.get_size("min_nodes")) c.min_nodes = *v;
  if (auto v = f.get_size("max_nodes")) c.max_nodes = *v;
  if (auto v = f.get_size("motif_node_count")) c.motif_node_count = *v;
  if (auto v = f.get_string("motif_signature")) c.motif_signature = *v;
  if (auto v = f.get_double("malicious_fraction")) c.malicious_fraction = *v;
  if (auto v = f.get_double("background_edge_prob")) c.background_edge_prob = *v;
  if (auto v = f.get_double("opcode_density")) c.opcode_density = *v;
  if (auto v = f.get_double("permission_density")) c.permission_density = *v;
  if (auto v = f.get_size("archetype_count")) c.archetype_count = *v;
  if (auto v = f.get_size("archetypes_per_graph")) c.archetypes_per_graph = *v;
  if (auto v = f.get_double("archetype_inherit_prob")) c.archetype_inherit_prob = *v;
  if (auto v = f.get_double("feature_noise")) c.feature_noise = *v;
  if (auto v = f.get_u64("rng_seed")) c.rng_seed = *v;
  if (auto v = f.get_size("opcode_dim")) c.schema.opcode_dim = *v;
  if (auto v = f.get_size("permission_dim")) c.schema.permission_dim = *v;
  f.reject_unknown();
  c.validate();
  return c;
}

std::map<std::string, std::string> to_entries(const SyntheticConfig& c) {
  return {
      {"n_graphs", std::to_string(c.n_graphs)},
      {"min_nodes", std::to_string(c.min_nodes)},
      {"max_nodes", std::to_string(c.max_nodes)},
      {"motif_node_count", std::to_string(c.motif_node_count)},
      {"motif_signature", c.motif_signature},
      {"malicious_fraction", format_double(c.malicious_fraction)},
      {"background_edge_prob", format_double(c.background_edge_prob)},
      {"opcode_density", format_double(c.opcode_density)},
      {"permission_density", format_double(c.permission_density)},
      {"archetype_count", std::to_string(c.archetype_count)},
      {"archetypes_per_graph", std::to_string(c.archetypes_per_graph)},
      {"archetype_inherit_prob", format_double(c.archetype_inherit_prob)},
      {"feature_noise", format_double(c.feature_noise)},
      {"rng_seed", std::to_string(c.rng_seed)},
      {"opcode_dim", std::to_string(c.schema.opcode_dim)},
      {"permission_dim", std::to_string(c.schema.permission_dim)},
  };
}

// --- training -----------------------------------------------------------------

void TrainRunConfig::validate() const {
  train.validate();
  for (const auto& [name, v] : {std::pair{"split_train", split.train},
                                std::pair{"split_val", split.validation},
                                std::pair{"split_test", split.test}}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput(std::string(name) + " must lie in [0,1]");
  }
  if (std::abs(split.train + split.validation + split.test - 1.0) > 1e-9) {
    throw InvalidInput("split_train + split_val + split_test must equal 1");
  }
}

TrainRunConfig train_run_config_from(const ConfigFile& f) {
  TrainRunConfig c;
  TrainConfig& t = c.train;
  if (auto v = f.get_double("gamma")) t.gamma = *v;
  if (auto v = f.get_double("learning_rate")) t.learning_rate = *v;
  if (auto v = f.get_size("layers")) t.layers = *v;
  if (auto v = f.get_size("hidden")) t.hidden = *v;
  if (auto v = f.get_double("lambda1")) t.lambda1 = *v;
  if (auto v = f.get_double("lambda2")) t.lambda2 = *v;
  if (auto v = f.get_size("max_epochs")) t.max_epochs = *v;
  if (auto v = f.get_size("early_stop_patience")) t.early_stop_patience = *v;
  if (auto v = f.get_size("batch_size")) t.batch_size = *v;
  if (auto v = f.get_u64("rng_seed")) t.rng_seed = *v;
  if (auto v = f.get_string("variant")) t.variant = parse_variant(*v);
  if (auto v = f.get_double("split_train")) c.split.train = *v;
  if (auto v = f.get_double("split_val")) c.split.validation = *v;
  if (auto v = f.get_double("split_test")) c.split.test = *v;
  if (auto v = f.get_u64("split_seed")) c.split_seed = *v;
  if (auto v = f.get_string("class_ratio")) c.class_ratio = parse_class_ratio(*v);
  f.reject_unknown();
  c.validate();
  return c;
}

std::map<std::string, std::string> to_entries(const TrainRunConfig& c) {
  const TrainConfig& t = c.train;
  return {
      {"gamma", format_double(t.gamma)},
      {"learning_rate", format_double(t.learning_rate)},
      {"layers", std::to_string(t.layers)},
      {"hidden", std::to_string(t.hidden)},
      {"lambda1", format_double(t.lambda1)},
      {"lambda2", format_double(t.lambda2)},
      {"max_epochs", std::to_string(t.max_epochs)},
      {"early_stop_patience", std::to_string(t.early_stop_patience)},
      {"batch_size", std::to_string(t.batch_size)},
      {"rng_seed", std::to_string(t.rng_seed)},
      {"variant", std::string(variant_name(t.variant))},
      {"split_train", format_double(c.split.train)},
      {"split_val", format_double(c.split.validation)},
      {"split_test", format_double(c.split.test)},
      {"split_seed", std::to_string(c.split_seed)},
      {"class_ratio", class_ratio_text(c.class_ratio)},
  };
}

// --- attacks ------------------------------------------------------------------

void AttackRunConfig::validate() const {
  attack.validate();
  if (surrogate.hidden < 1) throw InvalidInput("surrogate_hidden must be >= 1");
  if (surrogate.batch_size < 1) throw InvalidInput("surrogate_batch_size must be >= 1");
  if (!(surrogate.learning_rate > 0.0)) throw InvalidInput("surrogate_learning_rate must be > 0");
}

AttackRunConfig attack_run_config_from(const ConfigFile& f) {
  AttackRunConfig c;
  if (auto v = f.get_size("max_iterations")) c.attack.max_iterations = *v;
  if (auto v = f.get_size("ig_steps")) c.attack.ig_steps = *v;
  if (auto v = f.get_size("edges_per_iteration")) c.attack.edges_per_iteration = *v;
  if (auto v = f.get_u64("rng_seed")) c.attack.rng_seed = *v;
  if (auto v = f.get_string("candidate_policy"); v && *v != "any_missing_edge") {
    throw InvalidInput("config field 'candidate_policy': only 'any_missing_edge' is supported");
  }
  if (auto v = f.get_string("surrogate_arch")) c.surrogate.arch = parse_surrogate_arch(*v);
  if (auto v = f.get_size("surrogate_hidden")) c.surrogate.hidden = *v;
  if (auto v = f.get_size("surrogate_epochs")) c.surrogate.epochs = *v;
  if (auto v = f.get_size("surrogate_batch_size")) c.surrogate.batch_size = *v;
  if (auto v = f.get_double("surrogate_learning_rate")) c.surrogate.learning_rate = *v;
  if (auto v = f.get_u64("surrogate_seed")) c.surrogate.rng_seed = *v;
  f.reject_unknown();
  c.validate();
  return c;
}

std::map<std::string, std::string> to_entries(const AttackRunConfig& c) {
  return {
      {"max_iterations", std::to_string(c.attack.max_iterations)},
      {"ig_steps", std::to_string(c.attack.ig_steps)},
      {"edges_per_iteration", std::to_string(c.attack.edges_per_iteration)},
      {"rng_seed", std::to_string(c.attack.rng_seed)},
      {"candidate_policy", "any_missing_edge"},
      {"surrogate_arch", std::string(surrogate_arch_name(c.surrogate.arch))},
      {"surrogate_hidden", std::to_string(c.surrogate.hidden)},
      {"surrogate_epochs", std::to_string(c.surrogate.epochs)},
      {"surrogate_batch_size", std::to_string(c.surrogate.batch_size)},
      {"surrogate_learning_rate", format_double(c.surrogate.learning_rate)},
      {"surrogate_seed", std::to_string(c.surrogate.rng_seed)},
  };
}

}  // namespace graphmask::cli
