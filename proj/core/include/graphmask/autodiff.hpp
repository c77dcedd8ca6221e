#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "graphmask/tensor.hpp"

namespace graphmask::ad {

/// Norms below this are clamped before dividing (cosine, row normalization).
inline constexpr double kNormFloor = 1e-12;

enum class OpKind {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kRelu,
  kSquare,
  kRowNorm,
  kDot,
  kCosineRows,
  kMean,
  kMeanRows,
  kSum,
  kConcatCols,
  kGatherRows,
  kReplaceRows,
  kZeroRows,
  kSpMM,
  kTranspose,
  kRowSum,
  kRsqrt,
  kScaleRows,
  kScaleCols,
  kAddRowBroadcast,
  kSoftmaxCrossEntropy,
  kCount_,
};

std::string_view op_name(OpKind kind);

/// Handle to a tensor recorded on a Tape. Only meaningful with its own tape.
class Var {
 public:
  Var() = default;
  std::size_t id() const { return id_; }
  bool operator==(const Var&) const = default;

 private:
  friend class Tape;
  explicit Var(std::size_t id) : id_(id) {}
  std::size_t id_ = static_cast<std::size_t>(-1);
};

class Gradients {
 public:
  /// Gradient w.r.t. `v`; an all-zero tensor of v's shape when v was not reached.
  const Matrix& operator[](Var v) const { return grads_.at(v.id()); }

 private:
  friend class Tape;
  std::vector<Matrix> grads_;
};

/// Append-only record of dense rank-2 operations. Inputs always precede
/// outputs, so backward is a single reverse sweep. Every forward result is
/// checked for NaN/Inf; a non-finite value throws NumericError.
class Tape {
 public:
  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  const Matrix& value(Var v) const { return nodes_.at(v.id()).value; }
  double scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  std::size_t count(OpKind kind) const { return counts_[static_cast<std::size_t>(kind)]; }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  /// Subgradient 0 at exactly 0.
  Var relu(Var a);
  Var square(Var a);
  /// n x c -> n x 1 Euclidean norm of each row.
  Var row_norm(Var a);
  /// Sum of elementwise products of equal-shaped tensors -> 1 x 1.
  Var dot(Var a, Var b);
  /// Row-wise cosine similarity of equal-shaped tensors -> n x 1; norms are
  /// clamped below at kNormFloor.
  Var cosine_rows(Var a, Var b);
  /// Mean over all entries -> 1 x 1.
  Var mean(Var a);
  /// Column means -> 1 x c.
  Var mean_rows(Var a);
  Var sum(Var a);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var a, std::span<const std::size_t> rows);
  /// Copy of `base` with the listed rows overwritten by the 1 x c `row`.
  Var replace_rows(Var base, std::span<const std::size_t> rows, Var row);
  /// Copy of `base` with the listed rows set to zero.
  Var zero_rows(Var base, std::span<const std::size_t> rows);
  /// Constant sparse matrix times a recorded tensor.
  Var spmm(std::shared_ptr<const SparseMatrix> lhs, Var rhs);
  Var transpose(Var a);
  /// n x c -> n x 1 row sums.
  Var row_sum(Var a);
  /// Elementwise x^(-1/2) for x > 0 and 0 for x == 0 (isolated nodes).
  Var rsqrt_or_zero(Var a);
  /// m(i,j) * v(i), v is n x 1.
  Var scale_rows(Var m, Var v);
  /// m(i,j) * v(j), v is c x 1.
  Var scale_cols(Var m, Var v);
  /// m + 1 * row, row is 1 x c.
  Var add_row_broadcast(Var m, Var row);
  /// -log softmax(logits)[target] for a 1 x k logit row -> 1 x 1.
  Var softmax_cross_entropy(Var logits, std::size_t target);

  /// Reverse sweep from a 1 x 1 output.
  Gradients backward(Var output) const;

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::array<std::size_t, 2> inputs{kNone, kNone};
    Matrix value;
    Matrix saved;
    std::vector<std::size_t> rows;
    std::shared_ptr<const SparseMatrix> sparse;
    double scalar = 0.0;
    bool needs_grad = false;
  };
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  Var push(OpKind kind, Matrix value, std::size_t a, std::size_t b = kNone);
  const Node& node(Var v) const { return nodes_.at(v.id()); }
  void check_rows(Var a, std::span<const std::size_t> rows, const char* op) const;

  std::vector<Node> nodes_;
  std::array<std::size_t, static_cast<std::size_t>(OpKind::kCount_)> counts_{};
};

}  // namespace graphmask::ad
