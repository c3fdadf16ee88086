#pragma once

// Central finite differences and gradient comparison.

#include <functional>

#include "ste/numerics.hpp"

namespace ste {

using ScalarFunction = std::function<double(const Matrix&)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every entry of x.
Matrix finite_difference_gradient(const ScalarFunction& f, const Matrix& x, double step = 1e-6);

/// max_i |analytic_i - numeric_i| / max(max_i |analytic_i|, max_i |numeric_i|).
///
/// Infinity-norm relative error: entries whose true gradient is far below the
/// gradient's scale are judged against that scale rather than against
/// themselves. Returns 0 when both gradients are identically zero.
double max_relative_error(const Matrix& analytic, const Matrix& numeric);

struct GradientCheck {
  Matrix analytic;
  Matrix numeric;
  double relative_error = 0.0;
  bool passed(double tolerance) const { return relative_error < tolerance; }
};

/// Compares an analytic gradient against central differences of f at x.
GradientCheck check_gradient(const ScalarFunction& f, const Matrix& analytic, const Matrix& x,
                             double step = 1e-6);

}  // namespace ste
