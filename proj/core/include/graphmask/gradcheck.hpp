#pragma once

#include <cstddef>
#include <functional>

#include "graphmask/autodiff.hpp"

namespace graphmask::ad {

struct GradCheckReport {
  bool passed = true;
  std::size_t coordinates = 0;
  double worst_error = 0.0;  // relative, or absolute below kAbsoluteFallback
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

/// Magnitudes below this are compared by absolute error.
inline constexpr double kAbsoluteFallback = 1e-8;

using ScalarFn = std::function<double(const Matrix&)>;

/// Central differences of `f` at `point`, coordinate by coordinate, compared
/// against `analytic`. Throws NumericError if f is non-finite at a probe.
GradCheckReport finite_difference_check(const ScalarFn& f, const Matrix& point,
                                        const Matrix& analytic, double step, double tolerance);

/// Builds a fresh tape per evaluation; the analytic gradient comes from
/// Tape::backward with `point` as the only differentiable leaf.
using TapeFn = std::function<Var(Tape&, Var)>;
GradCheckReport finite_difference_check(const TapeFn& f, const Matrix& point, double step,
                                        double tolerance);

}  // namespace graphmask::ad
