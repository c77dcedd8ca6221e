#include "graphmask/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "graphmask/error.hpp"

namespace graphmask::ad {

GradCheckReport finite_difference_check(const ScalarFn& f, const Matrix& point,
                                        const Matrix& analytic, double step, double tolerance) {
  if (analytic.rows() != point.rows() || analytic.cols() != point.cols()) {
    throw InvalidInput("gradient check: analytic gradient shape differs from point");
  }
  GradCheckReport report;
  report.coordinates = static_cast<std::size_t>(point.size());
  Matrix probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + step;
    const double up = f(probe);
    probe.data()[i] = orig - step;
    const double down = f(probe);
    probe.data()[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("gradient check: function is non-finite at a probe point");
    }
    const double numeric = (up - down) / (2.0 * step);
    const double exact = analytic.data()[i];
    const double scale = std::max(std::abs(numeric), std::abs(exact));
    const double err =
        scale < kAbsoluteFallback ? std::abs(numeric - exact) : std::abs(numeric - exact) / scale;
    if (err > report.worst_error || i == 0) {
      report.worst_error = err;
      report.worst_index = static_cast<std::size_t>(i);
      report.analytic_at_worst = exact;
      report.numeric_at_worst = numeric;
    }
  }
  report.passed = report.worst_error <= tolerance;
  return report;
}

GradCheckReport finite_difference_check(const TapeFn& f, const Matrix& point, double step,
                                        double tolerance) {
  Tape tape;
  Var x = tape.leaf(point);
  Var out = f(tape, x);
  const Matrix analytic = tape.backward(out)[x];
  ScalarFn eval = [&f](const Matrix& p) {
    Tape t;
    return t.scalar(f(t, t.constant(p)));
  };
  return finite_difference_check(eval, point, analytic, step, tolerance);
}

}  // namespace graphmask::ad
