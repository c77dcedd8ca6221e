#include "graphmask/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphmask/error.hpp"

namespace graphmask::ad {
namespace {

std::string shape_str(const Matrix& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw InvalidInput(std::string(op) + ": shape mismatch " + detail);
}

bool same_shape(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kRelu: return "relu";
    case OpKind::kSquare: return "square";
    case OpKind::kRowNorm: return "row_norm";
    case OpKind::kDot: return "dot";
    case OpKind::kCosineRows: return "cosine_rows";
    case OpKind::kMean: return "mean";
    case OpKind::kMeanRows: return "mean_rows";
    case OpKind::kSum: return "sum";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kGatherRows: return "gather_rows";
    case OpKind::kReplaceRows: return "replace_rows";
    case OpKind::kZeroRows: return "zero_rows";
    case OpKind::kSpMM: return "spmm";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kRowSum: return "row_sum";
    case OpKind::kRsqrt: return "rsqrt_or_zero";
    case OpKind::kScaleRows: return "scale_rows";
    case OpKind::kScaleCols: return "scale_cols";
    case OpKind::kAddRowBroadcast: return "add_row_broadcast";
    case OpKind::kSoftmaxCrossEntropy: return "softmax_cross_entropy";
    case OpKind::kCount_: break;
  }
  return "?";
}

Var Tape::push(OpKind kind, Matrix value, std::size_t a, std::size_t b) {
  if (!value.allFinite()) {
    throw NumericError("non-finite value produced by " + std::string(op_name(kind)));
  }
  Node n;
  n.kind = kind;
  n.inputs = {a, b};
  n.value = std::move(value);
  n.needs_grad = (a != kNone && nodes_[a].needs_grad) || (b != kNone && nodes_[b].needs_grad);
  nodes_.push_back(std::move(n));
  ++counts_[static_cast<std::size_t>(kind)];
  return Var(nodes_.size() - 1);
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  Var v = push(OpKind::kLeaf, std::move(value), kNone);
  nodes_.back().needs_grad = requires_grad;
  return v;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw InvalidInput("scalar(): tensor is " + shape_str(m));
  return m(0, 0);
}

void Tape::check_rows(Var a, std::span<const std::size_t> rows, const char* op) const {
  const auto n = static_cast<std::size_t>(value(a).rows());
  for (std::size_t r : rows) {
    if (r >= n) {
      throw InvalidInput(std::string(op) + ": row index " + std::to_string(r) +
                         " out of range for " + std::to_string(n) + " rows");
    }
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.cols() == y.rows(), "matmul", shape_str(x) + "*" + shape_str(y));
  return push(OpKind::kMatMul, x * y, a.id(), b.id());
}

Var Tape::add(Var a, Var b) {
  require(same_shape(value(a), value(b)), "add", shape_str(value(a)) + "+" + shape_str(value(b)));
  return push(OpKind::kAdd, value(a) + value(b), a.id(), b.id());
}

Var Tape::sub(Var a, Var b) {
  require(same_shape(value(a), value(b)), "sub", shape_str(value(a)) + "-" + shape_str(value(b)));
  return push(OpKind::kSub, value(a) - value(b), a.id(), b.id());
}

Var Tape::mul(Var a, Var b) {
  require(same_shape(value(a), value(b)), "mul", shape_str(value(a)) + "*" + shape_str(value(b)));
  return push(OpKind::kMul, value(a).cwiseProduct(value(b)), a.id(), b.id());
}

Var Tape::scale(Var a, double s) {
  Var v = push(OpKind::kScale, value(a) * s, a.id());
  nodes_.back().scalar = s;
  return v;
}

Var Tape::add_scalar(Var a, double s) {
  Matrix out = value(a).array() + s;
  return push(OpKind::kAddScalar, std::move(out), a.id());
}

Var Tape::relu(Var a) {
  return push(OpKind::kRelu, value(a).cwiseMax(0.0), a.id());
}

Var Tape::square(Var a) {
  return push(OpKind::kSquare, value(a).cwiseAbs2(), a.id());
}

Var Tape::row_norm(Var a) {
  Matrix out = value(a).rowwise().norm();
  return push(OpKind::kRowNorm, std::move(out), a.id());
}

Var Tape::dot(Var a, Var b) {
  require(same_shape(value(a), value(b)), "dot", shape_str(value(a)) + "." + shape_str(value(b)));
  Matrix out(1, 1);
  out(0, 0) = value(a).cwiseProduct(value(b)).sum();
  return push(OpKind::kDot, std::move(out), a.id(), b.id());
}

Var Tape::cosine_rows(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(same_shape(x, y), "cosine_rows", shape_str(x) + "," + shape_str(y));
  Matrix out(x.rows(), 1);
  Matrix norms(x.rows(), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double na = std::max(x.row(i).norm(), kNormFloor);
    const double nb = std::max(y.row(i).norm(), kNormFloor);
    norms(i, 0) = na;
    norms(i, 1) = nb;
    out(i, 0) = x.row(i).dot(y.row(i)) / (na * nb);
  }
  Var v = push(OpKind::kCosineRows, std::move(out), a.id(), b.id());
  nodes_.back().saved = std::move(norms);
  return v;
}

Var Tape::mean(Var a) {
  const Matrix& x = value(a);
  require(x.size() > 0, "mean", "of empty tensor");
  Matrix out(1, 1);
  out(0, 0) = x.mean();
  return push(OpKind::kMean, std::move(out), a.id());
}

Var Tape::mean_rows(Var a) {
  const Matrix& x = value(a);
  require(x.rows() > 0, "mean_rows", "of tensor with zero rows");
  Matrix out = x.colwise().mean();
  return push(OpKind::kMeanRows, std::move(out), a.id());
}

Var Tape::sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = value(a).sum();
  return push(OpKind::kSum, std::move(out), a.id());
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  require(x.rows() == y.rows(), "concat_cols", shape_str(x) + "|" + shape_str(y));
  Matrix out(x.rows(), x.cols() + y.cols());
  out << x, y;
  return push(OpKind::kConcatCols, std::move(out), a.id(), b.id());
}

Var Tape::gather_rows(Var a, std::span<const std::size_t> rows) {
  check_rows(a, rows, "gather_rows");
  const Matrix& x = value(a);
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  Var v = push(OpKind::kGatherRows, std::move(out), a.id());
  nodes_.back().rows.assign(rows.begin(), rows.end());
  return v;
}

Var Tape::replace_rows(Var base, std::span<const std::size_t> rows, Var row) {
  check_rows(base, rows, "replace_rows");
  const Matrix& x = value(base);
  const Matrix& r = value(row);
  require(r.rows() == 1 && r.cols() == x.cols(), "replace_rows",
          shape_str(x) + " <- " + shape_str(r));
  std::vector<std::size_t> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("replace_rows: duplicate row index");
  }
  Matrix out = x;
  for (std::size_t k : sorted) out.row(static_cast<Eigen::Index>(k)) = r;
  Var v = push(OpKind::kReplaceRows, std::move(out), base.id(), row.id());
  nodes_.back().rows = std::move(sorted);
  return v;
}

Var Tape::zero_rows(Var base, std::span<const std::size_t> rows) {
  check_rows(base, rows, "zero_rows");
  Matrix out = value(base);
  for (std::size_t k : rows) out.row(static_cast<Eigen::Index>(k)).setZero();
  Var v = push(OpKind::kZeroRows, std::move(out), base.id());
  nodes_.back().rows.assign(rows.begin(), rows.end());
  return v;
}

Var Tape::spmm(std::shared_ptr<const SparseMatrix> lhs, Var rhs) {
  require(lhs && lhs->cols() == static_cast<std::size_t>(value(rhs).rows()), "spmm",
          "sparse cols vs " + shape_str(value(rhs)));
  Matrix out = lhs->multiply(value(rhs));
  Var v = push(OpKind::kSpMM, std::move(out), rhs.id());
  nodes_.back().sparse = std::move(lhs);
  return v;
}

Var Tape::transpose(Var a) {
  Matrix out = value(a).transpose();
  return push(OpKind::kTranspose, std::move(out), a.id());
}

Var Tape::row_sum(Var a) {
  Matrix out = value(a).rowwise().sum();
  return push(OpKind::kRowSum, std::move(out), a.id());
}

Var Tape::rsqrt_or_zero(Var a) {
  const Matrix& x = value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x.data()[i];
    if (v < 0.0) throw NumericError("rsqrt_or_zero: negative input");
    out.data()[i] = v == 0.0 ? 0.0 : 1.0 / std::sqrt(v);
  }
  return push(OpKind::kRsqrt, std::move(out), a.id());
}

Var Tape::scale_rows(Var m, Var v) {
  const Matrix& x = value(m);
  const Matrix& s = value(v);
  require(s.rows() == x.rows() && s.cols() == 1, "scale_rows", shape_str(x) + "," + shape_str(s));
  Matrix out = s.col(0).asDiagonal() * x;
  return push(OpKind::kScaleRows, std::move(out), m.id(), v.id());
}

Var Tape::scale_cols(Var m, Var v) {
  const Matrix& x = value(m);
  const Matrix& s = value(v);
  require(s.rows() == x.cols() && s.cols() == 1, "scale_cols", shape_str(x) + "," + shape_str(s));
  Matrix out = x * s.col(0).asDiagonal();
  return push(OpKind::kScaleCols, std::move(out), m.id(), v.id());
}

Var Tape::add_row_broadcast(Var m, Var row) {
  const Matrix& x = value(m);
  const Matrix& r = value(row);
  require(r.rows() == 1 && r.cols() == x.cols(), "add_row_broadcast",
          shape_str(x) + "+" + shape_str(r));
  Matrix out = x.rowwise() + r.row(0);
  return push(OpKind::kAddRowBroadcast, std::move(out), m.id(), row.id());
}

Var Tape::softmax_cross_entropy(Var logits, std::size_t target) {
  const Matrix& z = value(logits);
  require(z.rows() == 1 && static_cast<std::size_t>(z.cols()) > target, "softmax_cross_entropy",
          shape_str(z) + " target " + std::to_string(target));
  const double zmax = z.maxCoeff();
  Matrix p = (z.array() - zmax).exp();
  const double norm = p.sum();
  p /= norm;
  Matrix out(1, 1);
  out(0, 0) = -(z(0, static_cast<Eigen::Index>(target)) - zmax - std::log(norm));
  Var v = push(OpKind::kSoftmaxCrossEntropy, std::move(out), logits.id());
  nodes_.back().saved = std::move(p);
  nodes_.back().scalar = static_cast<double>(target);
  return v;
}

Gradients Tape::backward(Var output) const {
  const Matrix& out = value(output);
  if (out.size() != 1) throw InvalidInput("backward: output must be scalar, got " + shape_str(out));

  Gradients result;
  auto& g = result.grads_;
  g.resize(output.id() + 1);
  g[output.id()] = Matrix::Ones(1, 1);

  auto accumulate = [&](std::size_t idx, Matrix&& contrib) {
    if (idx == kNone || !nodes_[idx].needs_grad) return;
    if (g[idx].size() == 0) {
      g[idx] = std::move(contrib);
    } else {
      g[idx] += contrib;
    }
  };

  for (std::size_t i = output.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.kind == OpKind::kLeaf || !n.needs_grad || g[i].size() == 0) continue;
    const Matrix& up = g[i];
    const std::size_t a = n.inputs[0];
    const std::size_t b = n.inputs[1];
    // Topological order holds by construction: inputs were pushed first.
    if ((a != kNone && a >= i) || (b != kNone && b >= i)) {
      throw NumericError("tape order violated");
    }
    switch (n.kind) {
      case OpKind::kMatMul:
        accumulate(a, up * nodes_[b].value.transpose());
        accumulate(b, nodes_[a].value.transpose() * up);
        break;
      case OpKind::kAdd:
        accumulate(a, Matrix(up));
        accumulate(b, Matrix(up));
        break;
      case OpKind::kSub:
        accumulate(a, Matrix(up));
        accumulate(b, -up);
        break;
      case OpKind::kMul:
        accumulate(a, up.cwiseProduct(nodes_[b].value));
        accumulate(b, up.cwiseProduct(nodes_[a].value));
        break;
      case OpKind::kScale:
        accumulate(a, up * n.scalar);
        break;
      case OpKind::kAddScalar:
        accumulate(a, Matrix(up));
        break;
      case OpKind::kRelu: {
        Matrix d = (nodes_[a].value.array() > 0.0).cast<double>().matrix().cwiseProduct(up);
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kSquare:
        accumulate(a, 2.0 * nodes_[a].value.cwiseProduct(up));
        break;
      case OpKind::kRowNorm: {
        const Matrix& x = nodes_[a].value;
        Matrix d = Matrix::Zero(x.rows(), x.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          const double norm = n.value(r, 0);
          if (norm > kNormFloor) d.row(r) = x.row(r) * (up(r, 0) / norm);
        }
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kDot:
        accumulate(a, nodes_[b].value * up(0, 0));
        accumulate(b, nodes_[a].value * up(0, 0));
        break;
      case OpKind::kCosineRows: {
        const Matrix& x = nodes_[a].value;
        const Matrix& y = nodes_[b].value;
        Matrix dx(x.rows(), x.cols());
        Matrix dy(y.rows(), y.cols());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          const double na = n.saved(r, 0);
          const double nb = n.saved(r, 1);
          const double c = n.value(r, 0);
          const double w = up(r, 0);
          dx.row(r) = y.row(r) / (na * nb);
          if (x.row(r).norm() > kNormFloor) dx.row(r) -= x.row(r) * (c / (na * na));
          dy.row(r) = x.row(r) / (na * nb);
          if (y.row(r).norm() > kNormFloor) dy.row(r) -= y.row(r) * (c / (nb * nb));
          dx.row(r) *= w;
          dy.row(r) *= w;
        }
        accumulate(a, std::move(dx));
        accumulate(b, std::move(dy));
        break;
      }
      case OpKind::kMean: {
        const Matrix& x = nodes_[a].value;
        accumulate(a, Matrix::Constant(x.rows(), x.cols(), up(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case OpKind::kMeanRows: {
        const Matrix& x = nodes_[a].value;
        Matrix d = up.replicate(x.rows(), 1) / static_cast<double>(x.rows());
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kSum: {
        const Matrix& x = nodes_[a].value;
        accumulate(a, Matrix::Constant(x.rows(), x.cols(), up(0, 0)));
        break;
      }
      case OpKind::kConcatCols: {
        const auto ca = nodes_[a].value.cols();
        const auto cb = nodes_[b].value.cols();
        accumulate(a, up.leftCols(ca));
        accumulate(b, up.rightCols(cb));
        break;
      }
      case OpKind::kGatherRows: {
        const Matrix& x = nodes_[a].value;
        Matrix d = Matrix::Zero(x.rows(), x.cols());
        for (std::size_t k = 0; k < n.rows.size(); ++k) {
          d.row(static_cast<Eigen::Index>(n.rows[k])) += up.row(static_cast<Eigen::Index>(k));
        }
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kReplaceRows: {
        Matrix d_base = up;
        Matrix d_row = Matrix::Zero(1, up.cols());
        for (std::size_t k : n.rows) {
          d_row += up.row(static_cast<Eigen::Index>(k));
          d_base.row(static_cast<Eigen::Index>(k)).setZero();
        }
        accumulate(a, std::move(d_base));
        accumulate(b, std::move(d_row));
        break;
      }
      case OpKind::kZeroRows: {
        Matrix d = up;
        for (std::size_t k : n.rows) d.row(static_cast<Eigen::Index>(k)).setZero();
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kSpMM:
        accumulate(a, n.sparse->multiply_transposed(up));
        break;
      case OpKind::kTranspose:
        accumulate(a, up.transpose());
        break;
      case OpKind::kRowSum: {
        const auto cols = nodes_[a].value.cols();
        accumulate(a, up.replicate(1, cols));
        break;
      }
      case OpKind::kRsqrt: {
        // d/dx x^(-1/2) = -y^3 / 2; zero where the forward returned 0.
        Matrix d = (-0.5 * n.value.array().cube()).matrix().cwiseProduct(up);
        accumulate(a, std::move(d));
        break;
      }
      case OpKind::kScaleRows: {
        const Matrix& x = nodes_[a].value;
        const Matrix& s = nodes_[b].value;
        accumulate(a, s.col(0).asDiagonal() * up);
        accumulate(b, up.cwiseProduct(x).rowwise().sum());
        break;
      }
      case OpKind::kScaleCols: {
        const Matrix& x = nodes_[a].value;
        const Matrix& s = nodes_[b].value;
        accumulate(a, up * s.col(0).asDiagonal());
        accumulate(b, up.cwiseProduct(x).colwise().sum().transpose());
        break;
      }
      case OpKind::kAddRowBroadcast:
        accumulate(a, Matrix(up));
        accumulate(b, up.colwise().sum());
        break;
      case OpKind::kSoftmaxCrossEntropy: {
        Matrix d = n.saved;
        d(0, static_cast<Eigen::Index>(n.scalar)) -= 1.0;
        accumulate(a, d * up(0, 0));
        break;
      }
      case OpKind::kLeaf:
      case OpKind::kCount_:
        break;
    }
  }

  g.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (g[i].size() == 0) g[i] = Matrix::Zero(nodes_[i].value.rows(), nodes_[i].value.cols());
  }
  return result;
}

}  // namespace graphmask::ad
