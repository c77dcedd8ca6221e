#include "graphmask/optimizer.hpp"

#include <cmath>

#include "graphmask/error.hpp"

namespace graphmask {

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != grads.size()) throw InvalidInput("adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw InvalidInput("adam: parameter count changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    const Matrix& g = *grads[i];
    if (g.rows() != p.rows() || g.cols() != p.cols()) {
      throw InvalidInput("adam: gradient shape differs from parameter");
    }
    m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
    v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g.cwiseAbs2();
    p.array() -= opt_.learning_rate * (m_[i].array() / c1) /
                 ((v_[i].array() / c2).sqrt() + opt_.epsilon);
  }
}

}  // namespace graphmask
