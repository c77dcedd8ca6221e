#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "graphmask/error.hpp"
#include "graphmask/gradcheck.hpp"
#include "graphmask/model.hpp"
#include "../support/oracles.hpp"

using namespace graphmask;
using graphmask::testing::dense_propagation_oracle;
using graphmask::testing::dense_stack_oracle;
using graphmask::testing::random_graph;

namespace {

FeatureGraph two_nodes() {
  FeatureGraph g;
  g.graph_id = "pair";
  g.node_count = 2;
  g.edges = {{0, 1}};
  g.features = Matrix::Identity(2, 2);
  return g;
}

ModelParams identity_params(std::size_t d, std::size_t layers) {
  ModelParams p = init_params(FeatureSchema{1, d - 1}, d, layers, 0);
  for (auto& w : p.encoder) w = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (auto& w : p.decoder) w = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  return p;
}

FeatureGraph permuted(const FeatureGraph& g, const std::vector<std::size_t>& perm) {
  FeatureGraph out = g;
  for (std::size_t v = 0; v < g.node_count; ++v) {
    out.features.row(static_cast<Eigen::Index>(perm[v])) = g.features.row(static_cast<Eigen::Index>(v));
  }
  out.edges.clear();
  for (const auto& [u, v] : g.edges) out.edges.emplace_back(perm[u], perm[v]);
  return out;
}

}  // namespace

TEST(InitParams, ShapeChainForDefaults) {
  const ModelParams p = init_params(FeatureSchema{24, 16}, 128, 2, 1);
  ASSERT_EQ(p.encoder.size(), 2u);
  EXPECT_EQ(p.encoder[0].rows(), 40);
  EXPECT_EQ(p.encoder[0].cols(), 128);
  EXPECT_EQ(p.encoder[1].rows(), 128);
  EXPECT_EQ(p.encoder[1].cols(), 128);
  EXPECT_EQ(p.decoder[0].rows(), 128);
  EXPECT_EQ(p.decoder[0].cols(), 128);
  EXPECT_EQ(p.decoder[1].rows(), 128);
  EXPECT_EQ(p.decoder[1].cols(), 40);
  EXPECT_EQ(p.mask_token.cols(), 40);
  EXPECT_EQ(p.proxy_benign.cols(), 128);
  EXPECT_NO_THROW(p.validate());
  const double bound = std::sqrt(6.0 / (40 + 128));
  EXPECT_LE(p.encoder[0].cwiseAbs().maxCoeff(), bound);
}

TEST(InitParams, DeterministicAndRejectsZeroLayers) {
  EXPECT_TRUE(init_params(FeatureSchema{}, 16, 2, 5) == init_params(FeatureSchema{}, 16, 2, 5));
  EXPECT_FALSE(init_params(FeatureSchema{}, 16, 2, 5) == init_params(FeatureSchema{}, 16, 2, 6));
  EXPECT_THROW(init_params(FeatureSchema{}, 16, 0, 5), InvalidInput);
}

TEST(SampleMask, CountsAndClamp) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(sample_mask(10, 0.8, rng).masked.size(), 8u);
  EXPECT_EQ(sample_mask(2, 0.9, rng).masked.size(), 1u);
  EXPECT_EQ(sample_mask(2, 0.01, rng).masked.size(), 1u);
  EXPECT_THROW(sample_mask(1, 0.5, rng), InvalidInput);
  EXPECT_THROW(sample_mask(5, 1.0, rng), InvalidInput);
}

TEST(SampleMask, SortedUniqueInRange) {
  std::mt19937_64 rng(2);
  for (std::size_t n = 2; n < 40; ++n) {
    for (double gamma : {0.1, 0.5, 0.8, 0.95}) {
      const MaskPlan p = sample_mask(n, gamma, rng);
      EXPECT_EQ(p.masked.size(), masked_count(n, gamma));
      EXPECT_TRUE(std::is_sorted(p.masked.begin(), p.masked.end()));
      EXPECT_EQ(std::adjacent_find(p.masked.begin(), p.masked.end()), p.masked.end());
      EXPECT_LT(p.masked.back(), n);
    }
  }
}

TEST(ApplyMask, ReplacesOnlyPlannedRows) {
  std::mt19937_64 rng(3);
  const Matrix x = Matrix::Random(3, 4);
  ad::Tape t;
  const ad::Var token = t.leaf(Matrix::Constant(1, 4, 7.0));
  const MaskPlan plan{{1}, 0.3};
  const Matrix& out = t.value(apply_mask(t, t.constant(x), plan, token));
  EXPECT_EQ(out.row(0), x.row(0));
  EXPECT_EQ(out.row(1), Matrix::Constant(1, 4, 7.0));
  EXPECT_EQ(out.row(2), x.row(2));
  const Matrix& same = t.value(apply_mask(t, t.constant(x), MaskPlan{}, token));
  EXPECT_EQ(same, x);
}

TEST(ApplyMask, MaskTokenGradientIsMaskedCount) {
  ad::Tape t;
  const ad::Var token = t.leaf(Matrix::Random(1, 3));
  const MaskPlan plan{{0, 2, 3}, 0.6};
  const ad::Var out = apply_mask(t, t.constant(Matrix::Random(5, 3)), plan, token);
  EXPECT_EQ(t.backward(t.sum(out))[token], Matrix::Constant(1, 3, 3.0));
  // Same value by finite differences.
  const auto report = ad::finite_difference_check(
      [&plan](ad::Tape& tape, ad::Var tok) {
        return tape.sum(apply_mask(tape, tape.constant(Matrix::Zero(5, 3)), plan, tok));
      },
      Matrix::Random(1, 3), 1e-6, 1e-8);
  EXPECT_TRUE(report.passed);
}

TEST(ApplyMask, MaskedRowContentIsIrrelevant) {
  Matrix a = Matrix::Random(4, 3), b = a;
  b.row(2).setConstant(42.0);
  ad::Tape t;
  const ad::Var token = t.leaf(Matrix::Zero(1, 3));
  const MaskPlan plan{{2}, 0.25};
  EXPECT_EQ(t.value(apply_mask(t, t.constant(a), plan, token)),
            t.value(apply_mask(t, t.constant(b), plan, token)));
}

TEST(ApplyMask, OutOfRangeThrows) {
  ad::Tape t;
  EXPECT_THROW(apply_mask(t, t.constant(Matrix::Zero(2, 2)), MaskPlan{{2}, 0.5}, t.leaf(Matrix::Zero(1, 2))),
               InvalidInput);
}

TEST(Encode, IsolatedNodeSelfTermAndRelu) {
  FeatureGraph g;
  g.node_count = 1;
  g.features = Matrix(1, 2);
  g.features << 1, -2;
  const Matrix h = encode(g, g.features, identity_params(2, 1));
  EXPECT_EQ(h(0, 0), 1.0);
  EXPECT_EQ(h(0, 1), 0.0);
}

TEST(Encode, TwoNodeEdge) {
  const FeatureGraph g = two_nodes();
  const Matrix h = encode(g, g.features, identity_params(2, 1));
  EXPECT_EQ(h, Matrix::Ones(2, 2));
}

TEST(Encode, StarMatchesDenseOracle) {
  std::mt19937_64 rng(4);
  FeatureGraph g = random_graph(rng, 5, 3, 0.0);
  g.edges = {{0, 1}, {0, 2}, {3, 0}, {0, 4}};
  ModelParams p = identity_params(3, 1);
  const Matrix expected = dense_stack_oracle(g, g.features, p.encoder, false);
  EXPECT_LT((encode(g, g.features, p) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(dense_propagation_oracle(g)(0, 1), 1.0 / 2.0, 1e-15);
}

TEST(Decode, LinearFinalLayer) {
  FeatureGraph g;
  g.node_count = 1;
  g.features = Matrix::Zero(1, 2);
  Matrix h(1, 2);
  h << 1, -1;
  const Matrix z = decode(g, h, identity_params(2, 1));
  EXPECT_EQ(z, h);
  EXPECT_EQ(decode(g, Matrix::Zero(1, 2), identity_params(2, 1)), Matrix::Zero(1, 2));
}

TEST(EncodeDecode, RandomGraphsMatchDenseOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng() % 16;
    const FeatureGraph g = random_graph(rng, n, 6, 0.2);
    const ModelParams p = init_params(FeatureSchema{4, 2}, 8, 2, rng());
    const Matrix h = encode(g, g.features, p);
    EXPECT_LT((h - dense_stack_oracle(g, g.features, p.encoder, false)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((decode(g, h, p) - dense_stack_oracle(g, h, p.decoder, true)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Remask, ZeroesPlannedRowsAndBlocksGradient) {
  const Matrix e = Matrix::Random(3, 4);
  ad::Tape t;
  const ad::Var x = t.leaf(e);
  const MaskPlan plan{{0, 2}, 0.6};
  const ad::Var r = remask(t, x, plan);
  EXPECT_EQ(t.value(r).row(0), Matrix::Zero(1, 4));
  EXPECT_EQ(t.value(r).row(2), Matrix::Zero(1, 4));
  EXPECT_EQ(t.value(r).row(1), e.row(1));
  EXPECT_EQ(t.value(remask(t, x, MaskPlan{})), e);
  const Matrix g = t.backward(t.sum(t.square(r)))[x];
  EXPECT_EQ(g.row(0), Matrix::Zero(1, 4));
  EXPECT_EQ(g.row(2), Matrix::Zero(1, 4));
  EXPECT_EQ(g.row(1), 2.0 * e.row(1));
}

TEST(Readout, MeanPooling) {
  Matrix h(2, 2);
  h << 1, 3, 3, 1;
  EXPECT_EQ(readout(h), Matrix::Constant(1, 2, 2.0));
  EXPECT_EQ(readout(h.topRows(1)), h.topRows(1));
  EXPECT_THROW(readout(Matrix(0, 2)), InvalidInput);
}

TEST(Predict, DecisionRuleAndTie) {
  EXPECT_EQ(decide(0.9, 0.2), Label::kBenign);
  EXPECT_EQ(decide(0.5, 0.5), Label::kMalicious);
  EXPECT_EQ(decide(0.1, 0.2), Label::kMalicious);
}

TEST(Predict, ScoresAreCosinesToProxies) {
  std::mt19937_64 rng(6);
  const FeatureGraph g = random_graph(rng, 6, 6, 0.3);
  const ModelParams p = init_params(FeatureSchema{3, 3}, 5, 2, 9);
  const Prediction pr = predict(g, p);
  const Matrix emb = readout(encode(g, g.features, p));
  EXPECT_NEAR(pr.score_benign, graphmask::testing::cosine_oracle(emb, p.proxy_benign), 1e-14);
  EXPECT_NEAR(pr.score_malicious, graphmask::testing::cosine_oracle(emb, p.proxy_malicious), 1e-14);
  FeatureGraph empty;
  empty.features = Matrix(0, 6);
  EXPECT_THROW(predict(empty, p), InvalidInput);
}

TEST(Predict, EmptyMaskPlanIsTheInferencePath) {
  std::mt19937_64 rng(7);
  const FeatureGraph g = random_graph(rng, 7, 6, 0.3);
  const ModelParams p = init_params(FeatureSchema{3, 3}, 5, 2, 9);
  ad::Tape t;
  const BoundParams b = bind(t, p, false);
  const Propagation prop = Propagation::from_graph(g);
  const ad::Var masked = apply_mask(t, t.constant(g.features), MaskPlan{}, b.mask_token);
  const ScoreVars s = class_scores(t, readout(t, encode(t, prop, masked, b)), b);
  const Prediction pr = predict(g, p);
  EXPECT_EQ(t.scalar(s.benign), pr.score_benign);
  EXPECT_EQ(t.scalar(s.malicious), pr.score_malicious);
}

TEST(Predict, PermutationInvariance) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    const FeatureGraph g = random_graph(rng, n, 6, 0.3);
    const ModelParams p = init_params(FeatureSchema{3, 3}, 5, 2, rng());
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const FeatureGraph q = permuted(g, perm);
    const Matrix hg = encode(g, g.features, p), hq = encode(q, q.features, p);
    for (std::size_t v = 0; v < n; ++v) {
      EXPECT_LT((hg.row(static_cast<Eigen::Index>(v)) - hq.row(static_cast<Eigen::Index>(perm[v])))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
    EXPECT_LT((readout(hg) - readout(hq)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(predict(g, p).label, predict(q, p).label);
  }
}

TEST(Predict, ProxyScaleInvariance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureGraph g = random_graph(rng, 6, 6, 0.3);
    ModelParams p = init_params(FeatureSchema{3, 3}, 5, 2, rng());
    const Label before = predict(g, p).label;
    const double c = 0.01 + static_cast<double>(rng() % 1000);
    p.proxy_benign *= c;
    p.proxy_malicious *= c;
    EXPECT_EQ(predict(g, p).label, before);
  }
}

TEST(Propagation, RelaxedMatchesDiscreteOnBinaryAdjacency) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureGraph g = random_graph(rng, 1 + rng() % 12, 4, 0.25);
    ad::Tape t;
    const Propagation relaxed = Propagation::relaxed(t, t.constant(dense_adjacency(g)));
    const Propagation exact = Propagation::from_graph(g);
    const ad::Var x = t.constant(g.features);
    EXPECT_LT((t.value(relaxed.apply(t, x)) - t.value(exact.apply(t, x))).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(ForwardCounters, DecodeAndMaskIncrement) {
  auto& c = forward_counters();
  const auto masks = c.mask_samples.load(), decodes = c.decoder_passes.load();
  std::mt19937_64 rng(11);
  sample_mask(5, 0.5, rng);
  const FeatureGraph g = two_nodes();
  decode(g, Matrix::Zero(2, 2), identity_params(2, 1));
  EXPECT_EQ(c.mask_samples.load(), masks + 1);
  EXPECT_EQ(c.decoder_passes.load(), decodes + 1);
}
