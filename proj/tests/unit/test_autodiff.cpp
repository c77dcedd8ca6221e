#include <gtest/gtest.h>

#include <random>

#include "graphmask/autodiff.hpp"
#include "graphmask/error.hpp"
#include "graphmask/gradcheck.hpp"

using namespace graphmask;
using namespace graphmask::ad;

namespace {

Matrix rand_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index j = 0;
  for (double x : v) m(0, j++) = x;
  return m;
}

}  // namespace

TEST(Tape, MatmulValues) {
  Tape t;
  Matrix a(2, 3), b(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  b << 7, 8, 9, 10, 11, 12;
  const Matrix& c = t.value(t.matmul(t.leaf(a), t.leaf(b)));
  Matrix expected(2, 2);
  expected << 58, 64, 139, 154;
  EXPECT_EQ(c, expected);
  EXPECT_EQ(t.count(OpKind::kMatMul), 1u);
}

TEST(Tape, ReluValuesAndZeroSubgradient) {
  Tape t;
  const Var x = t.leaf(row({-1, 0, 2}));
  const Var y = t.relu(x);
  EXPECT_EQ(t.value(y), row({0, 0, 2}));
  const Gradients g = t.backward(t.sum(y));
  EXPECT_EQ(g[x], row({0, 0, 1}));
}

TEST(Tape, CosineValues) {
  Tape t;
  EXPECT_DOUBLE_EQ(t.scalar(t.cosine_rows(t.leaf(row({1, 0})), t.leaf(row({0, 1})))), 0.0);
  EXPECT_DOUBLE_EQ(t.scalar(t.cosine_rows(t.leaf(row({2, 0})), t.leaf(row({5, 0})))), 1.0);
}

TEST(Tape, SquareGradient) {
  Tape t;
  const Var x = t.leaf(row({3}));
  EXPECT_DOUBLE_EQ(t.backward(t.square(x))[x](0, 0), 6.0);
}

TEST(Tape, DotGradient) {
  Tape t;
  const Var x = t.leaf(row({1, 2}));
  const Var y = t.leaf(row({3, 4}));
  const Gradients g = t.backward(t.dot(x, y));
  EXPECT_EQ(g[x], row({3, 4}));
  EXPECT_EQ(g[y], row({1, 2}));
}

TEST(Tape, UnreachedLeavesGetZeroGradient) {
  Tape t;
  const Var x = t.leaf(row({1, 2}));
  const Var unused = t.leaf(row({5, 6, 7}));
  const Gradients g = t.backward(t.sum(x));
  EXPECT_EQ(g[unused], Matrix::Zero(1, 3));
}

TEST(Tape, Errors) {
  Tape t;
  const Var a = t.leaf(Matrix::Ones(2, 3));
  const Var b = t.leaf(Matrix::Ones(2, 3));
  EXPECT_THROW(t.matmul(a, b), InvalidInput);
  EXPECT_THROW(t.backward(a), InvalidInput);
  const Var z = t.leaf(row({0.0}));
  EXPECT_THROW(t.scale(t.leaf(row({1e308})), 1e10), NumericError);
  (void)z;
}

TEST(Tape, CompositeCosineLossMatchesFiniteDifferences) {
  std::mt19937_64 rng(1);
  const Matrix z = rand_matrix(rng, 3, 4);
  const auto report = finite_difference_check(
      [&z](Tape& t, Var x) {
        return t.mean(t.square(t.add_scalar(t.scale(t.cosine_rows(x, t.constant(z)), -1.0), 1.0)));
      },
      rand_matrix(rng, 3, 4), 1e-6, 1e-5);
  EXPECT_TRUE(report.passed) << report.worst_error;
}

TEST(Tape, EveryOpPassesFiniteDifferences) {
  std::mt19937_64 rng(2);
  const Matrix other = rand_matrix(rng, 4, 3);
  const Matrix right = rand_matrix(rng, 3, 2);
  const Matrix col = rand_matrix(rng, 4, 1).cwiseAbs().array() + 0.5;
  const std::vector<std::size_t> rows{0, 2};
  const auto sparse = std::make_shared<SparseMatrix>(
      4, 4, std::vector<SparseMatrix::Entry>{{0, 1, 0.5}, {1, 0, 2.0}, {2, 3, -1.0}, {3, 3, 1.5}});
  const std::vector<std::pair<const char*, TapeFn>> cases = {
      {"matmul", [&](Tape& t, Var x) { return t.sum(t.matmul(x, t.constant(right))); }},
      {"mul", [&](Tape& t, Var x) { return t.sum(t.mul(x, t.mul(x, t.constant(other)))); }},
      {"sub", [&](Tape& t, Var x) { return t.sum(t.square(t.sub(t.constant(other), x))); }},
      {"relu", [&](Tape& t, Var x) { return t.sum(t.mul(t.relu(x), t.constant(other))); }},
      {"row_norm", [&](Tape& t, Var x) { return t.sum(t.row_norm(x)); }},
      {"cosine", [&](Tape& t, Var x) { return t.sum(t.cosine_rows(x, t.constant(other))); }},
      {"mean_rows", [&](Tape& t, Var x) { return t.dot(t.mean_rows(x), t.constant(right.col(0).transpose())); }},
      {"concat", [&](Tape& t, Var x) { return t.sum(t.square(t.concat_cols(x, t.mul(x, t.constant(other))))); }},
      {"gather", [&](Tape& t, Var x) { return t.sum(t.square(t.gather_rows(x, rows))); }},
      {"replace", [&](Tape& t, Var x) {
         return t.sum(t.square(t.replace_rows(x, rows, t.gather_rows(x, std::span(rows).subspan(1)))));
       }},
      {"zero_rows", [&](Tape& t, Var x) { return t.sum(t.square(t.zero_rows(x, rows))); }},
      {"spmm", [&](Tape& t, Var x) { return t.sum(t.square(t.spmm(sparse, x))); }},
      {"row_sum", [&](Tape& t, Var x) { return t.sum(t.square(t.row_sum(x))); }},
      {"rsqrt", [&](Tape& t, Var x) { return t.sum(t.rsqrt_or_zero(t.add_scalar(t.square(x), 0.5))); }},
      {"scale_rows", [&](Tape& t, Var x) { return t.sum(t.square(t.scale_rows(x, t.constant(col)))); }},
      {"scale_rows_vec", [&](Tape& t, Var x) {
         return t.sum(t.square(t.scale_rows(t.constant(other), t.row_sum(x))));
       }},
      {"scale_cols", [&](Tape& t, Var x) {
         return t.sum(t.square(t.scale_cols(t.transpose(x), t.constant(col))));
       }},
      {"broadcast", [&](Tape& t, Var x) {
         return t.sum(t.square(t.add_row_broadcast(x, t.gather_rows(x, std::span(rows).subspan(0, 1)))));
       }},
      {"softmax_ce", [&](Tape& t, Var x) { return t.softmax_cross_entropy(t.gather_rows(x, std::span(rows).subspan(1)), 2); }},
  };
  for (const auto& [name, fn] : cases) {
    const auto report = finite_difference_check(fn, rand_matrix(rng, 4, 3), 1e-6, 1e-5);
    EXPECT_TRUE(report.passed) << name << " worst " << report.worst_error << " at " << report.worst_index;
  }
}

TEST(Tape, LinearityOfBackward) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix xv = rand_matrix(rng, 3, 3), w = rand_matrix(rng, 3, 3);
    const double alpha = rand_matrix(rng, 1, 1)(0, 0), beta = rand_matrix(rng, 1, 1)(0, 0);
    auto f = [&](Tape& t, Var x) { return t.sum(t.relu(t.matmul(x, t.constant(w)))); };
    auto g = [&](Tape& t, Var x) { return t.mean(t.square(t.cosine_rows(x, t.constant(w)))); };
    Tape t1;
    const Var x1 = t1.leaf(xv);
    const Matrix combined =
        t1.backward(t1.add(t1.scale(f(t1, x1), alpha), t1.scale(g(t1, x1), beta)))[x1];
    Tape t2;
    const Var x2 = t2.leaf(xv);
    const Matrix gf = t2.backward(f(t2, x2))[x2];
    Tape t3;
    const Var x3 = t3.leaf(xv);
    const Matrix gg = t3.backward(g(t3, x3))[x3];
    EXPECT_LT((combined - (alpha * gf + beta * gg)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Tape, ReplayIsBitIdentical) {
  std::mt19937_64 rng(4);
  const Matrix xv = rand_matrix(rng, 5, 4), w = rand_matrix(rng, 4, 4);
  auto run = [&] {
    Tape t;
    const Var x = t.leaf(xv);
    const Var y = t.mean(t.square(t.cosine_rows(t.relu(t.matmul(x, t.constant(w))), x)));
    return std::pair{t.scalar(y), Matrix(t.backward(y)[x])};
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(GradCheck, SumOfSquaresPasses) {
  std::mt19937_64 rng(5);
  const auto report = finite_difference_check([](Tape& t, Var x) { return t.sum(t.square(x)); },
                                              rand_matrix(rng, 3, 3), 1e-6, 1e-4);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.coordinates, 9u);
}

TEST(GradCheck, PlantedFactorTwoBugFails) {
  std::mt19937_64 rng(6);
  const Matrix point = rand_matrix(rng, 2, 3);
  const ScalarFn f = [](const Matrix& x) { return x.cwiseProduct(x).sum(); };
  const Matrix wrong = 4.0 * point;  // true gradient is 2x
  const auto report = finite_difference_check(f, point, wrong, 1e-6, 1e-4);
  EXPECT_FALSE(report.passed);
  EXPECT_NEAR(report.analytic_at_worst / report.numeric_at_worst, 2.0, 1e-6);
}

TEST(GradCheck, NonFiniteProbeThrows) {
  const ScalarFn f = [](const Matrix& x) { return 1.0 / x(0, 0) * 0.0 + (x(0, 0) > 0 ? INFINITY : 0.0); };
  EXPECT_THROW(finite_difference_check(f, Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1), 1e-6, 1e-4),
               NumericError);
}
