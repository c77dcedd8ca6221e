#include "graphmask/cli/commands.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "graphmask/checkpoint.hpp"
#include "graphmask/cli/config.hpp"
#include "graphmask/cli/manifest.hpp"
#include "graphmask/dataset_io.hpp"
#include "graphmask/error.hpp"
#include "graphmask/split.hpp"
#include "graphmask/synthetic.hpp"

namespace graphmask::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fmt(double v) { return format_double(v); }

Dataset load_nonempty(const fs::path& path) {
  Dataset d = load_dataset(path);
  if (!d.schema) throw InvalidInput("dataset " + path.string() + " has no header line");
  if (d.graphs.empty()) throw InvalidInput("dataset " + path.string() + " has no graphs");
  return d;
}

std::string schema_text(const FeatureSchema& s) {
  return "opcode_dim=" + std::to_string(s.opcode_dim) +
         ", permission_dim=" + std::to_string(s.permission_dim) + " (d=" + std::to_string(s.width()) +
         ")";
}

void require_schema_match(const Checkpoint& ckpt, const Dataset& data) {
  const FeatureSchema& a = ckpt.params.schema;
  const FeatureSchema& b = *data.schema;
  if (a.opcode_dim != b.opcode_dim || a.permission_dim != b.permission_dim) {
    throw InvalidInput("schema mismatch: checkpoint expects " + schema_text(a) + " but dataset has " +
                       schema_text(b));
  }
}

std::string metadata_or_throw(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.metadata.find(key);
  if (it == ckpt.metadata.end()) {
    throw InvalidInput("checkpoint lacks split metadata '" + key + "'; use --split all");
  }
  return it->second;
}

DatasetSplit recompute_split(const Checkpoint& ckpt, const Dataset& data, const fs::path& data_path) {
  if (metadata_or_throw(ckpt, "dataset_sha256") != sha256_file(data_path)) {
    throw InvalidInput("dataset " + data_path.string() +
                       " differs from the one this checkpoint was trained on; use --split all");
  }
  SplitRatios ratios;
  ratios.train = parse_double(metadata_or_throw(ckpt, "split_train"));
  ratios.validation = parse_double(metadata_or_throw(ckpt, "split_val"));
  ratios.test = parse_double(metadata_or_throw(ckpt, "split_test"));
  const auto seed = std::stoull(metadata_or_throw(ckpt, "split_seed"));
  const auto class_ratio = parse_class_ratio(metadata_or_throw(ckpt, "class_ratio"));
  return split_dataset(data.graphs, ratios, class_ratio, seed);
}

std::vector<FeatureGraph> select_split(const Checkpoint& ckpt, const Dataset& data,
                                       const fs::path& data_path, SplitName which) {
  if (which == SplitName::kAll) return data.graphs;
  const DatasetSplit split = recompute_split(ckpt, data, data_path);
  switch (which) {
    case SplitName::kTrain:
      return select_graphs(data.graphs, split.train);
    case SplitName::kValidation:
      return select_graphs(data.graphs, split.validation);
    default:
      return select_graphs(data.graphs, split.test);
  }
}

std::map<std::string, std::string> load_config_entries(const std::optional<fs::path>& path) {
  if (!path) return {};
  return ConfigFile::load(*path).entries();
}

}  // namespace

SplitName parse_split_name(const std::string& name) {
  if (name == "all") return SplitName::kAll;
  if (name == "train") return SplitName::kTrain;
  if (name == "val" || name == "validation") return SplitName::kValidation;
  if (name == "test") return SplitName::kTest;
  throw InvalidInput("unknown split '" + name + "' (expected all, train, val or test)");
}

std::string split_name_text(SplitName s) {
  switch (s) {
    case SplitName::kAll:
      return "all";
    case SplitName::kTrain:
      return "train";
    case SplitName::kValidation:
      return "val";
    default:
      return "test";
  }
}

fs::path manifest_path_for_file(const fs::path& output) {
  fs::path p = output;
  p += ".manifest.json";
  return p;
}

fs::path manifest_path_for_dir(const fs::path& out_dir) { return out_dir / "manifest.json"; }

// --- gen-data ---------------------------------------------------------------------

void cmd_gen_data(const GenDataOptions& o, const std::vector<std::string>& argv, std::ostream& log) {
  const auto start = Clock::now();
  const SyntheticConfig config = synthetic_config_from(ConfigFile::load(o.config));
  const auto graphs = generate_synthetic_dataset(config);
  {
    auto out = open_output(o.out);
    write_dataset(out, config.schema, graphs);
    finish_output(out, o.out);
  }
  RunManifest m;
  m.command = "gen-data";
  m.argv = argv;
  m.config = to_entries(config);
  m.options = {{"out", o.out.string()}};
  m.seeds = {{"rng_seed", std::to_string(config.rng_seed)}};
  m.outputs = {describe_file("dataset", o.out)};
  m.timings = {{"total_seconds", seconds_since(start)}};
  save_manifest(manifest_path_for_file(o.out), m);
  log << "wrote " << graphs.size() << " graphs to " << o.out.string() << '\n';
}

// --- train ------------------------------------------------------------------------

TrainReport cmd_train(const TrainOptions& o, const std::vector<std::string>& argv, std::ostream& log) {
  const auto start = Clock::now();
  auto entries = load_config_entries(o.config);
  if (o.variant) entries["variant"] = std::string(variant_name(*o.variant));
  const TrainRunConfig config = train_run_config_from(ConfigFile::from_entries(entries));

  const Dataset data = load_nonempty(o.data);
  const DatasetSplit split = split_dataset(data.graphs, config.split, config.class_ratio, config.split_seed);
  const auto train_graphs = select_graphs(data.graphs, split.train);
  const auto val_graphs = select_graphs(data.graphs, split.validation);
  log << "split: train=" << train_graphs.size() << " val=" << val_graphs.size()
      << " test=" << split.test.size() << '\n';

  const TrainResult result = train(train_graphs, val_graphs, *data.schema, config.train,
                                   [&log](const EpochRecord& e) {
                                     char line[160];
                                     std::snprintf(line, sizeof line,
                                                   "epoch %zu loss %.6f rec %.6f cl %.6f val_f1 %.4f (%.2fs)\n",
                                                   e.epoch, e.train_loss, e.rec_loss, e.cl_loss,
                                                   e.val_f1, e.seconds);
                                     log << line << std::flush;
                                   });

  fs::create_directories(o.out_dir);
  const std::string data_sha = sha256_file(o.data);
  Checkpoint ckpt;
  ckpt.params = result.params;
  ckpt.gamma = config.train.gamma;
  ckpt.weights = config.train.effective_weights();
  ckpt.metadata = {
      {"variant", std::string(variant_name(config.train.variant))},
      {"rng_seed", std::to_string(config.train.rng_seed)},
      {"split_train", hex_double(config.split.train)},
      {"split_val", hex_double(config.split.validation)},
      {"split_test", hex_double(config.split.test)},
      {"split_seed", std::to_string(config.split_seed)},
      {"class_ratio", class_ratio_text(config.class_ratio)},
      {"dataset_sha256", data_sha},
      {"best_epoch", std::to_string(result.report.best_epoch)},
      {"stopping_epoch", std::to_string(result.report.stopping_epoch)},
  };
  const fs::path ckpt_path = o.out_dir / "checkpoint.txt";
  const fs::path report_path = o.out_dir / "report.csv";
  const fs::path timing_path = o.out_dir / "timing.csv";
  save_checkpoint(ckpt_path, ckpt);
  {
    auto out = open_output(report_path);
    write_report_csv(out, result.report);
    finish_output(out, report_path);
  }
  {
    auto out = open_output(timing_path);
    write_timing_csv(out, result.report);
    finish_output(out, timing_path);
  }

  RunManifest m;
  m.command = "train";
  m.argv = argv;
  m.config = to_entries(config);
  m.options = {{"data", o.data.string()}, {"out_dir", o.out_dir.string()}};
  m.seeds = {{"rng_seed", std::to_string(config.train.rng_seed)},
             {"split_seed", std::to_string(config.split_seed)}};
  m.inputs = {{"dataset", o.data.string(), data_sha, true}};
  m.outputs = {describe_file("checkpoint", ckpt_path), describe_file("report", report_path),
               describe_file("timing", timing_path, false)};
  double train_seconds = 0.0;
  for (const auto& e : result.report.epochs) train_seconds += e.seconds;
  m.timings = {{"train_seconds", train_seconds},
               {"seconds_per_epoch", train_seconds / static_cast<double>(result.report.epochs.size())},
               {"total_seconds", seconds_since(start)}};
  save_manifest(manifest_path_for_dir(o.out_dir), m);
  log << "best epoch " << result.report.best_epoch << " (val_f1 " << fmt(result.report.best_val_f1)
      << "), stopped at " << result.report.stopping_epoch << '\n';
  return result.report;
}

// --- eval -------------------------------------------------------------------------

Metrics cmd_eval(const EvalOptions& o, const std::vector<std::string>& argv, std::ostream& log) {
  const auto start = Clock::now();
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const Dataset data = load_nonempty(o.data);
  require_schema_match(ckpt, data);
  const auto graphs = select_split(ckpt, data, o.data, o.split);
  const Metrics m = evaluate(ckpt.params, graphs);

  {
    auto out = open_output(o.out);
    out << "split,graphs,precision,recall,f1,accuracy,tp,fp,tn,fn\n"
        << split_name_text(o.split) << ',' << graphs.size() << ',' << fmt(m.precision) << ','
        << fmt(m.recall) << ',' << fmt(m.f1) << ',' << fmt(m.accuracy) << ',' << m.tp << ','
        << m.fp << ',' << m.tn << ',' << m.fn << '\n';
    finish_output(out, o.out);
  }
  RunManifest man;
  man.command = "eval";
  man.argv = argv;
  man.options = {{"checkpoint", o.checkpoint.string()},
                 {"data", o.data.string()},
                 {"split", split_name_text(o.split)},
                 {"out", o.out.string()}};
  man.inputs = {describe_file("checkpoint", o.checkpoint), describe_file("dataset", o.data)};
  man.outputs = {describe_file("metrics", o.out)};
  man.timings = {{"total_seconds", seconds_since(start)}};
  save_manifest(manifest_path_for_file(o.out), man);

  char line[256];
  std::snprintf(line, sizeof line,
                "%s (%zu graphs): precision %.4f recall %.4f f1 %.4f accuracy %.4f "
                "tp %zu fp %zu tn %zu fn %zu\n",
                split_name_text(o.split).c_str(), graphs.size(), m.precision, m.recall, m.f1,
                m.accuracy, m.tp, m.fp, m.tn, m.fn);
  log << line;
  return m;
}

// --- attack -----------------------------------------------------------------------

AttackReport cmd_attack(const AttackOptions& o, const std::vector<std::string>& argv,
                        std::ostream& log) {
  const auto start = Clock::now();
  auto entries = load_config_entries(o.config);
  const bool exact_surrogate = o.surrogate && *o.surrogate == "exact";
  if (o.mode == AttackMode::kBlackbox) {
    if (!o.surrogate) {
      throw InvalidInput("black-box mode requires --surrogate (gnn2_mlp, mlp_on_degree_features or exact)");
    }
    if (!exact_surrogate) entries["surrogate_arch"] = *o.surrogate;
  }
  const AttackRunConfig config = attack_run_config_from(ConfigFile::from_entries(entries));

  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const Dataset data = load_nonempty(o.data);
  require_schema_match(ckpt, data);
  const auto graphs = select_split(ckpt, data, o.data, o.split);

  const DetectorModel victim(ckpt.params);
  std::vector<const FeatureGraph*> population;
  for (const auto& g : graphs) {
    if (g.label == Label::kMalicious && victim.label(g) == Label::kMalicious) population.push_back(&g);
  }
  log << population.size() << " initially detected malicious graphs\n";

  AttackReport report;
  std::optional<SurrogateModel> surrogate;
  const LabelOracle oracle = [&victim](const FeatureGraph& g) { return victim.label(g); };
  if (o.mode == AttackMode::kBlackbox && !population.empty()) {
    if (exact_surrogate) {
      report.surrogate_agreement = 1.0;
    } else {
      const bool has_split = ckpt.metadata.count("dataset_sha256") > 0 &&
                             ckpt.metadata.at("dataset_sha256") == sha256_file(o.data);
      const auto distill_graphs =
          has_split ? select_split(ckpt, data, o.data, SplitName::kTrain) : data.graphs;
      DistillResult distilled = distill_surrogate(oracle, distill_graphs, config.surrogate);
      report.surrogate_agreement = distilled.agreement;
      surrogate.emplace(std::move(distilled.surrogate));
      log << "surrogate agreement " << fmt(distilled.agreement) << '\n';
    }
  }
  for (const FeatureGraph* g : population) {
    if (o.mode == AttackMode::kWhitebox) {
      report.results.push_back(whitebox_attack(victim, *g, config.attack));
    } else if (surrogate) {
      report.results.push_back(blackbox_attack(oracle, *surrogate, *g, config.attack));
    } else {
      report.results.push_back(blackbox_attack(oracle, victim, *g, config.attack));
    }
  }
  if (!report.results.empty()) report.summary = compute_asr_apr(report.results);

  {
    auto out = open_output(o.out);
    out << "graph_id,success,iterations,edges_added,original_edges,queries\n";
    for (const auto& r : report.results) {
      out << r.original_id << ',' << (r.success ? 1 : 0) << ',' << r.iterations_used << ','
          << r.edges_added.size() << ',' << r.original_edge_count << ',' << r.queries << '\n';
    }
    out << "# attempts=" << report.results.size() << '\n';
    out << "# empty_population=" << (report.results.empty() ? 1 : 0) << '\n';
    if (report.summary) {
      out << "# successes=" << report.summary->successes << '\n'
          << "# asr=" << fmt(report.summary->asr) << '\n'
          << "# apr=" << fmt(report.summary->apr) << '\n'
          << "# apr_defined=" << (report.summary->apr_defined ? 1 : 0) << '\n';
    }
    if (report.surrogate_agreement) out << "# surrogate_agreement=" << fmt(*report.surrogate_agreement) << '\n';
    finish_output(out, o.out);
  }
  if (o.perturbed_out) {
    std::vector<FeatureGraph> perturbed;
    for (const auto& r : report.results) perturbed.push_back(r.perturbed);
    auto out = open_output(*o.perturbed_out);
    write_dataset(out, *data.schema, perturbed);
    finish_output(out, *o.perturbed_out);
  }

  RunManifest m;
  m.command = "attack";
  m.argv = argv;
  m.config = to_entries(config);
  m.options = {{"checkpoint", o.checkpoint.string()},
               {"data", o.data.string()},
               {"mode", o.mode == AttackMode::kWhitebox ? "whitebox" : "blackbox"},
               {"split", split_name_text(o.split)},
               {"out", o.out.string()}};
  if (o.surrogate) m.options["surrogate"] = *o.surrogate;
  if (o.perturbed_out) m.options["perturbed_out"] = o.perturbed_out->string();
  m.seeds = {{"rng_seed", std::to_string(config.attack.rng_seed)},
             {"surrogate_seed", std::to_string(config.surrogate.rng_seed)}};
  m.inputs = {describe_file("checkpoint", o.checkpoint), describe_file("dataset", o.data)};
  m.outputs = {describe_file("attack_report", o.out)};
  if (o.perturbed_out) m.outputs.push_back(describe_file("perturbed", *o.perturbed_out));
  m.timings = {{"total_seconds", seconds_since(start)}};
  save_manifest(manifest_path_for_file(o.out), m);

  if (report.summary) {
    log << "ASR " << fmt(report.summary->asr) << " ("
        << report.summary->successes << '/' << report.summary->attempts << "), APR "
        << (report.summary->apr_defined ? fmt(report.summary->apr) : std::string("undefined")) << '\n';
  } else {
    log << "empty population: no malicious graph is detected by the victim\n";
  }
  return report;
}

// --- export-embeddings --------------------------------------------------------------

void cmd_export_embeddings(const ExportOptions& o, const std::vector<std::string>& argv,
                           std::ostream& log) {
  const auto start = Clock::now();
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const Dataset data = load_nonempty(o.data);
  require_schema_match(ckpt, data);
  const auto graphs = select_split(ckpt, data, o.data, o.split);
  {
    auto out = open_output(o.out);
    out << "graph_id,label";
    for (std::size_t j = 1; j <= ckpt.params.hidden; ++j) out << ",g_" << j;
    out << ",cos_p0,cos_p1\n";
    for (const auto& g : graphs) {
      const Embedding e = embed(g, ckpt.params);
      out << g.graph_id << ',' << to_int(g.label);
      for (Eigen::Index j = 0; j < e.graph.cols(); ++j) out << ',' << fmt(e.graph(0, j));
      out << ',' << fmt(e.prediction.score_benign) << ',' << fmt(e.prediction.score_malicious) << '\n';
    }
    finish_output(out, o.out);
  }
  RunManifest m;
  m.command = "export-embeddings";
  m.argv = argv;
  m.options = {{"checkpoint", o.checkpoint.string()},
               {"data", o.data.string()},
               {"split", split_name_text(o.split)},
               {"out", o.out.string()}};
  m.inputs = {describe_file("checkpoint", o.checkpoint), describe_file("dataset", o.data)};
  m.outputs = {describe_file("embeddings", o.out)};
  m.timings = {{"total_seconds", seconds_since(start)}};
  save_manifest(manifest_path_for_file(o.out), m);
  log << "wrote " << graphs.size() << " embeddings to " << o.out.string() << '\n';
}

// --- replay -----------------------------------------------------------------------

ReplayOutcome cmd_replay(const ReplayOptions& o, std::ostream& log) {
  const RunManifest m = load_manifest(o.manifest);
  ReplayOutcome outcome;
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path) || sha256_file(in.path) != in.sha256) {
      outcome.reproduced = false;
      outcome.mismatches.push_back("input " + in.role + " (" + in.path + ") is missing or changed");
    }
  }
  if (!outcome.reproduced) return outcome;

  fs::create_directories(o.scratch);
  const fs::path config_path = o.scratch / "replay.config";
  {
    auto out = open_output(config_path);
    write_config(out, m.config);
    finish_output(out, config_path);
  }
  auto opt = [&m](const std::string& key) {
    const auto it = m.options.find(key);
    if (it == m.options.end()) throw InvalidInput("manifest lacks option '" + key + "'");
    return it->second;
  };
  auto retarget = [&o](const std::string& path) { return o.scratch / fs::path(path).filename(); };
  const std::vector<std::string> argv = {"replay", o.manifest.string()};

  fs::path new_manifest;
  if (m.command == "gen-data") {
    GenDataOptions g{config_path, retarget(opt("out"))};
    cmd_gen_data(g, argv, log);
    new_manifest = manifest_path_for_file(g.out);
  } else if (m.command == "train") {
    TrainOptions t{opt("data"), config_path, o.scratch, std::nullopt};
    cmd_train(t, argv, log);
    new_manifest = manifest_path_for_dir(t.out_dir);
  } else if (m.command == "eval") {
    EvalOptions e{opt("checkpoint"), opt("data"), parse_split_name(opt("split")), retarget(opt("out"))};
    cmd_eval(e, argv, log);
    new_manifest = manifest_path_for_file(e.out);
  } else if (m.command == "attack") {
    AttackOptions a;
    a.checkpoint = opt("checkpoint");
    a.data = opt("data");
    a.mode = opt("mode") == "blackbox" ? AttackMode::kBlackbox : AttackMode::kWhitebox;
    a.config = config_path;
    a.out = retarget(opt("out"));
    if (m.options.count("surrogate")) a.surrogate = opt("surrogate");
    a.split = parse_split_name(opt("split"));
    if (m.options.count("perturbed_out")) a.perturbed_out = retarget(opt("perturbed_out"));
    cmd_attack(a, argv, log);
    new_manifest = manifest_path_for_file(a.out);
  } else if (m.command == "export-embeddings") {
    ExportOptions e{opt("checkpoint"), opt("data"), retarget(opt("out")), parse_split_name(opt("split"))};
    cmd_export_embeddings(e, argv, log);
    new_manifest = manifest_path_for_file(e.out);
  } else {
    throw InvalidInput("manifest names unknown command '" + m.command + "'");
  }

  const RunManifest replayed = load_manifest(new_manifest);
  for (const auto& before : m.outputs) {
    if (!before.reproducible) continue;
    const ManifestFile* after = nullptr;
    for (const auto& f : replayed.outputs) {
      if (f.role == before.role) after = &f;
    }
    if (!after || after->sha256 != before.sha256) {
      outcome.reproduced = false;
      outcome.mismatches.push_back("output " + before.role + " checksum differs");
    }
  }
  return outcome;
}

// --- command line -----------------------------------------------------------------

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"graphmask: masked graph autoencoder detector and edge-attack harness"};
  app.require_subcommand(1);

  GenDataOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic planted-motif dataset");
  gen_cmd->add_option("--config", gen.config, "Synthetic dataset config file")->required();
  gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();

  TrainOptions tr;
  std::string tr_variant;
  auto* train_cmd = app.add_subcommand("train", "Train a detector");
  train_cmd->add_option("--data", tr.data, "Dataset path")->required();
  train_cmd->add_option("--config", tr.config, "Training config file");
  train_cmd->add_option("--out-dir", tr.out_dir, "Directory for checkpoint, reports, manifest")->required();
  train_cmd->add_option("--variant", tr_variant, "full, minus_c, minus_r or minus_cr");

  EvalOptions ev;
  std::string ev_split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint path")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset path")->required();
  eval_cmd->add_option("--split", ev_split, "all, train, val or test")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Metrics CSV path")->required();

  AttackOptions at;
  std::string at_mode, at_split = "test";
  auto* attack_cmd = app.add_subcommand("attack", "Run edge-insertion attacks");
  attack_cmd->add_option("--checkpoint", at.checkpoint, "Victim checkpoint")->required();
  attack_cmd->add_option("--data", at.data, "Dataset path")->required();
  attack_cmd->add_option("--mode", at_mode, "whitebox or blackbox")->required();
  attack_cmd->add_option("--config", at.config, "Attack config file");
  attack_cmd->add_option("--out", at.out, "Attack report CSV path")->required();
  attack_cmd->add_option("--surrogate", at.surrogate,
                         "gnn2_mlp, mlp_on_degree_features or exact (black-box only)");
  attack_cmd->add_option("--split", at_split, "all, train, val or test")->capture_default_str();
  attack_cmd->add_option("--perturbed-out", at.perturbed_out, "Write perturbed graphs here");

  ExportOptions ex;
  std::string ex_split = "all";
  auto* export_cmd = app.add_subcommand("export-embeddings", "Export graph embeddings and scores");
  export_cmd->add_option("--checkpoint", ex.checkpoint, "Checkpoint path")->required();
  export_cmd->add_option("--data", ex.data, "Dataset path")->required();
  export_cmd->add_option("--out", ex.out, "Embeddings CSV path")->required();
  export_cmd->add_option("--split", ex_split, "all, train, val or test")->capture_default_str();

  ReplayOptions rp;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare checksums");
  replay_cmd->add_option("--manifest", rp.manifest, "Run manifest path")->required();
  replay_cmd->add_option("--scratch", rp.scratch, "Directory for replayed outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    if (gen_cmd->parsed()) {
      cmd_gen_data(gen, args, out);
    } else if (train_cmd->parsed()) {
      if (!tr_variant.empty()) tr.variant = parse_variant(tr_variant);
      cmd_train(tr, args, out);
    } else if (eval_cmd->parsed()) {
      ev.split = parse_split_name(ev_split);
      cmd_eval(ev, args, out);
    } else if (attack_cmd->parsed()) {
      if (at_mode == "whitebox") {
        at.mode = AttackMode::kWhitebox;
      } else if (at_mode == "blackbox") {
        at.mode = AttackMode::kBlackbox;
      } else {
        throw InvalidInput("--mode must be whitebox or blackbox, got '" + at_mode + "'");
      }
      at.split = parse_split_name(at_split);
      cmd_attack(at, args, out);
    } else if (export_cmd->parsed()) {
      ex.split = parse_split_name(ex_split);
      cmd_export_embeddings(ex, args, out);
    } else if (replay_cmd->parsed()) {
      const ReplayOutcome r = cmd_replay(rp, out);
      for (const auto& msg : r.mismatches) err << "mismatch: " << msg << '\n';
      if (!r.reproduced) return kExitRuntime;
      out << "replay reproduced every checksum\n";
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace graphmask::cli
