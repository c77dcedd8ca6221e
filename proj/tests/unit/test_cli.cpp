#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "graphmask/checkpoint.hpp"
#include "graphmask/cli/commands.hpp"
#include "graphmask/cli/config.hpp"
#include "graphmask/cli/manifest.hpp"
#include "graphmask/dataset_io.hpp"
#include "graphmask/error.hpp"

using namespace graphmask;
namespace cli = graphmask::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "graphmask");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string cell; std::getline(s, cell, ',');) out.push_back(cell);
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("graphmask_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  /// Small balanced synthetic dataset.
  fs::path make_data(const std::string& name = "data.jsonl", const std::string& extra = "") {
    write_text(path(name + ".cfg"),
               "n_graphs = 60\nmin_nodes = 5\nmax_nodes = 10\nmalicious_fraction = 0.5\n"
               "rng_seed = 3\n" + extra);
    const Outcome r = run_cli({"gen-data", "--config", path(name + ".cfg").string(), "--out", path(name).string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path train_config() {
    write_text(path("train.cfg"),
               "hidden = 8\nmax_epochs = 4\nbatch_size = 8\nlearning_rate = 0.01\nclass_ratio = none\n");
    return path("train.cfg");
  }

  fs::path trained(const fs::path& data, const std::string& out_dir, const std::string& variant = "full") {
    const Outcome r = run_cli({"train", "--data", data.string(), "--config", train_config().string(),
                               "--out-dir", path(out_dir).string(), "--variant", variant});
    EXPECT_EQ(r.code, 0) << r.err;
    return path(out_dir) / "checkpoint.txt";
  }

  fs::path dir_;
};

/// A hand-built detector for a 2+2 schema: opcode bits map to the benign
/// proxy direction, permission bits to the malicious one.
Checkpoint separating_checkpoint(double scale) {
  Checkpoint c;
  ModelParams& p = c.params;
  p.schema = FeatureSchema{2, 2};
  p.hidden = 2;
  Matrix w(4, 2);
  w << 1, 0, 1, 0, 0, 1, 0, 1;
  p.encoder = {scale * w};
  p.decoder = {Matrix::Zero(2, 4)};
  p.mask_token = Matrix::Zero(1, 4);
  p.proxy_benign = Matrix(1, 2);
  p.proxy_benign << 1, 0;
  p.proxy_malicious = Matrix(1, 2);
  p.proxy_malicious << 0, 1;
  return c;
}

std::vector<FeatureGraph> separable_graphs() {
  std::vector<FeatureGraph> out;
  for (int i = 0; i < 6; ++i) {
    FeatureGraph g;
    g.graph_id = "s" + std::to_string(i);
    g.node_count = 4;
    g.edges = {{0, 1}, {1, 2}, {2, 3}};
    g.label = i % 2 ? Label::kMalicious : Label::kBenign;
    g.features = Matrix::Zero(4, 4);
    for (Eigen::Index r = 0; r < 4; ++r) g.features(r, (i % 2 ? 2 : 0) + r % 2) = 1.0;
    out.push_back(g);
  }
  return out;
}

}  // namespace

TEST(CliConfig, ParsesCommentsAndRejectsProblemsByName) {
  std::istringstream ok("# comment\n\nhidden = 16\n  gamma=0.5  \n");
  const auto cfg = cli::ConfigFile::parse(ok);
  EXPECT_EQ(cfg.get_size("hidden"), 16u);
  EXPECT_EQ(cfg.get_double("gamma"), 0.5);

  std::istringstream dup("hidden = 1\nhidden = 2\n");
  try {
    cli::ConfigFile::parse(dup);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("hidden"), std::string::npos);
  }
  std::istringstream bad("hidden = lots\n");
  const auto f = cli::ConfigFile::parse(bad);
  try {
    f.get_size("hidden");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("hidden"), std::string::npos);
  }
  std::istringstream unknown("hiden = 3\n");
  try {
    cli::train_run_config_from(cli::ConfigFile::parse(unknown));
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("hiden"), std::string::npos);
  }
}

TEST(CliConfig, EntriesRoundTrip) {
  cli::TrainRunConfig c;
  c.train.gamma = 0.3;
  c.train.learning_rate = 0.1 + 0.2;
  c.train.variant = Variant::kMinusC;
  c.class_ratio = std::nullopt;
  const auto back = cli::train_run_config_from(cli::ConfigFile::from_entries(cli::to_entries(c)));
  EXPECT_EQ(back.train.gamma, c.train.gamma);
  EXPECT_EQ(back.train.learning_rate, c.train.learning_rate);
  EXPECT_EQ(back.train.variant, Variant::kMinusC);
  EXPECT_FALSE(back.class_ratio.has_value());

  cli::AttackRunConfig a;
  a.attack.max_iterations = 7;
  a.surrogate.arch = SurrogateArch::kMlpOnDegreeFeatures;
  const auto ab = cli::attack_run_config_from(cli::ConfigFile::from_entries(cli::to_entries(a)));
  EXPECT_EQ(ab.attack.max_iterations, 7u);
  EXPECT_EQ(ab.surrogate.arch, SurrogateArch::kMlpOnDegreeFeatures);
  EXPECT_EQ(cli::parse_class_ratio("9:1")->malicious, 1.0);
}

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(run_cli({"train"}).code, cli::kExitInvalid);
}

TEST_F(CliTest, GenDataWritesDeterministicDatasetAndManifest) {
  const fs::path a = make_data("a.jsonl");
  const fs::path b = make_data("b.jsonl");
  EXPECT_EQ(lines_of(a).size(), 61u);
  EXPECT_EQ(cli::sha256_file(a), cli::sha256_file(b));
  const auto man = cli::load_manifest(cli::manifest_path_for_file(a));
  EXPECT_EQ(man.command, "gen-data");
  ASSERT_EQ(man.outputs.size(), 1u);
  EXPECT_EQ(man.outputs[0].sha256, cli::sha256_file(a));
}

TEST_F(CliTest, GenDataInvalidConfigNamesField) {
  write_text(path("bad.cfg"), "malicious_fraction = 1.5\n");
  const Outcome r = run_cli({"gen-data", "--config", path("bad.cfg").string(), "--out", path("x").string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  EXPECT_NE(r.err.find("malicious_fraction"), std::string::npos) << r.err;

  write_text(path("typo.cfg"), "n_graph = 5\n");
  const Outcome t = run_cli({"gen-data", "--config", path("typo.cfg").string(), "--out", path("x").string()});
  EXPECT_EQ(t.code, cli::kExitInvalid);
  EXPECT_NE(t.err.find("n_graph"), std::string::npos) << t.err;
}

TEST_F(CliTest, TrainIsDeterministicAndCheckpointRoundTrips) {
  const fs::path data = make_data();
  const fs::path c1 = trained(data, "run1");
  const fs::path c2 = trained(data, "run2");
  EXPECT_EQ(slurp(path("run1") / "report.csv"), slurp(path("run2") / "report.csv"));
  EXPECT_EQ(slurp(c1), slurp(c2));
  EXPECT_TRUE(fs::exists(path("run1") / "timing.csv"));
  EXPECT_TRUE(fs::exists(cli::manifest_path_for_dir(path("run1"))));

  const Checkpoint ck = load_checkpoint(c1);
  save_checkpoint(path("copy.txt"), ck);
  const auto graphs = load_dataset(data).graphs;
  const Metrics a = evaluate(ck.params, graphs);
  const Metrics b = evaluate(load_checkpoint(path("copy.txt")).params, graphs);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.tp, b.tp);
  EXPECT_EQ(a.fp, b.fp);
}

TEST_F(CliTest, MinusCrReportHasZeroReconstructionColumn) {
  const fs::path data = make_data();
  trained(data, "cr", "minus_cr");
  const auto rows = lines_of(path("cr") / "report.csv");
  ASSERT_GT(rows.size(), 1u);
  const auto header = split_csv(rows[0]);
  const auto col = std::find(header.begin(), header.end(), "rec_loss") - header.begin();
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::stod(split_csv(rows[i])[col]), 0.0);
}

TEST_F(CliTest, EvalCsvParsesBackAndSchemaMismatchFails) {
  const fs::path data = make_data();
  const fs::path ck = trained(data, "run");
  cli::EvalOptions o;
  o.checkpoint = ck;
  o.data = data;
  o.out = path("metrics.csv");
  std::ostringstream log;
  const Metrics m = cli::cmd_eval(o, {}, log);
  const auto rows = lines_of(o.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "split,graphs,precision,recall,f1,accuracy,tp,fp,tn,fn");
  const auto cells = split_csv(rows[1]);
  EXPECT_EQ(cells[0], "test");
  EXPECT_EQ(std::stod(cells[2]), m.precision);
  EXPECT_EQ(std::stod(cells[3]), m.recall);
  EXPECT_EQ(std::stod(cells[4]), m.f1);
  EXPECT_EQ(std::stod(cells[5]), m.accuracy);
  EXPECT_EQ(std::stoul(cells[6]), m.tp);
  EXPECT_EQ(std::stoul(cells[9]), m.fn);

  const fs::path other = make_data("wide.jsonl", "opcode_dim = 40\n");
  const Outcome r = run_cli({"eval", "--checkpoint", ck.string(), "--data", other.string(), "--split", "all",
                             "--out", path("m2.csv").string()});
  EXPECT_EQ(r.code, cli::kExitInvalid);
  const std::string dims = std::to_string(load_checkpoint(ck).params.schema.width());
  EXPECT_NE(r.err.find(dims), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(std::to_string(40 + load_checkpoint(ck).params.schema.permission_dim)), std::string::npos)
      << r.err;
}

TEST_F(CliTest, PerfectCheckpointScoresOne) {
  save_checkpoint(path("perfect.txt"), separating_checkpoint(1.0));
  save_dataset(path("sep.jsonl"), FeatureSchema{2, 2}, separable_graphs());
  const Outcome r = run_cli({"eval", "--checkpoint", path("perfect.txt").string(), "--data",
                             path("sep.jsonl").string(), "--split", "all", "--out", path("m.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cells = split_csv(lines_of(path("m.csv"))[1]);
  for (int k = 2; k <= 5; ++k) EXPECT_EQ(std::stod(cells[k]), 1.0) << k;
}

TEST_F(CliTest, EdgeBlindVictimHasZeroAsr) {
  // A zero encoder ignores everything; ties go to malicious and the margin
  // gradient vanishes.
  save_checkpoint(path("blind.txt"), separating_checkpoint(0.0));
  save_dataset(path("sep.jsonl"), FeatureSchema{2, 2}, separable_graphs());
  write_text(path("atk.cfg"), "max_iterations = 5\n");
  const Outcome r = run_cli({"attack", "--checkpoint", path("blind.txt").string(), "--data",
                             path("sep.jsonl").string(), "--mode", "whitebox", "--split", "all", "--config",
                             path("atk.cfg").string(), "--out", path("a.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines_of(path("a.csv"));
  EXPECT_NE(std::find(rows.begin(), rows.end(), "# asr=0"), rows.end());
  EXPECT_NE(std::find(rows.begin(), rows.end(), "# attempts=3"), rows.end());
}

TEST_F(CliTest, AttackReportsAreDeterministicAndBlackboxExactMatches) {
  const fs::path data = make_data();
  const fs::path ck = trained(data, "run");
  write_text(path("atk.cfg"), "max_iterations = 6\n");
  auto attack = [&](const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> args = {"attack", "--checkpoint", ck.string(), "--data", data.string(), "--split",
                                     "all", "--config", path("atk.cfg").string(), "--out", path(out).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const Outcome r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
  };
  attack("w1.csv", {"--mode", "whitebox"});
  attack("w2.csv", {"--mode", "whitebox"});
  attack("b.csv", {"--mode", "blackbox", "--surrogate", "exact"});
  EXPECT_EQ(slurp(path("w1.csv")), slurp(path("w2.csv")));

  auto result_rows = [](const fs::path& p) {
    std::vector<std::string> out;
    for (const auto& l : lines_of(p)) {
      if (!l.empty() && l[0] != '#') out.push_back(l);
    }
    return out;
  };
  EXPECT_EQ(result_rows(path("w1.csv")), result_rows(path("b.csv")));

  // One row per malicious graph the victim initially detects.
  const ModelParams params = load_checkpoint(ck).params;
  std::size_t detected = 0;
  for (const auto& g : load_dataset(data).graphs) {
    if (g.label == Label::kMalicious && predict(g, params).label == Label::kMalicious) ++detected;
  }
  EXPECT_EQ(result_rows(path("w1.csv")).size(), detected + 1);

  const Outcome missing = run_cli({"attack", "--checkpoint", ck.string(), "--data", data.string(), "--mode",
                                   "blackbox", "--out", path("x.csv").string()});
  EXPECT_EQ(missing.code, cli::kExitInvalid);
  EXPECT_NE(missing.err.find("surrogate"), std::string::npos);
}

TEST_F(CliTest, BlackboxDistilledSurrogateRecordsAgreement) {
  const fs::path data = make_data();
  const fs::path ck = trained(data, "run");
  write_text(path("atk.cfg"), "max_iterations = 3\nsurrogate_epochs = 5\nsurrogate_hidden = 8\n");
  const Outcome r = run_cli({"attack", "--checkpoint", ck.string(), "--data", data.string(), "--mode", "blackbox",
                             "--surrogate", "gnn2_mlp", "--config", path("atk.cfg").string(), "--out",
                             path("b.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  bool found = false;
  for (const auto& l : lines_of(path("b.csv"))) found |= l.rfind("# surrogate_agreement=", 0) == 0;
  EXPECT_TRUE(found);
}

TEST_F(CliTest, ExportMatchesPredictAndIsDeterministic) {
  const fs::path data = make_data();
  const fs::path ck = trained(data, "run");
  for (const std::string out : {"e1.csv", "e2.csv"}) {
    const Outcome r = run_cli({"export-embeddings", "--checkpoint", ck.string(), "--data", data.string(),
                               "--out", path(out).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(slurp(path("e1.csv")), slurp(path("e2.csv")));

  const ModelParams params = load_checkpoint(ck).params;
  const auto graphs = load_dataset(data).graphs;
  const auto rows = lines_of(path("e1.csv"));
  ASSERT_EQ(rows.size(), graphs.size() + 1);
  EXPECT_EQ(split_csv(rows[0]).size(), params.hidden + 4);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto cells = split_csv(rows[i + 1]);
    ASSERT_EQ(cells.size(), params.hidden + 4);
    const Prediction p = predict(graphs[i], params);
    EXPECT_EQ(cells[0], graphs[i].graph_id);
    EXPECT_EQ(parse_double(cells[params.hidden + 2]), p.score_benign);
    EXPECT_EQ(parse_double(cells[params.hidden + 3]), p.score_malicious);
    const Label by_argmax = p.score_benign > p.score_malicious ? Label::kBenign : Label::kMalicious;
    EXPECT_EQ(by_argmax, p.label);
  }
}

TEST_F(CliTest, ReplayReproducesAndDetectsTampering) {
  const fs::path data = make_data();
  trained(data, "run");
  const fs::path manifest = cli::manifest_path_for_dir(path("run"));
  const Outcome ok = run_cli({"replay", "--manifest", manifest.string(), "--scratch", path("scratch").string()});
  EXPECT_EQ(ok.code, 0) << ok.err;

  const Outcome gen = run_cli({"replay", "--manifest", cli::manifest_path_for_file(data).string(), "--scratch",
                               path("scratch2").string()});
  EXPECT_EQ(gen.code, 0) << gen.err;

  std::ofstream(data, std::ios::app) << "\n";
  const Outcome bad = run_cli({"replay", "--manifest", manifest.string(), "--scratch", path("scratch3").string()});
  EXPECT_NE(bad.code, 0);
}
