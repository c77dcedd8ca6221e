#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "graphmask/tensor.hpp"

namespace graphmask {

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive moment estimation with bias correction. Moment buffers are sized
/// on the first step; later steps must pass tensors of the same shapes in the
/// same order.
class Adam {
 public:
  explicit Adam(AdamOptions options) : opt_(options) {}

  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);
  std::size_t steps_taken() const { return t_; }

 private:
  AdamOptions opt_;
  std::size_t t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace graphmask
