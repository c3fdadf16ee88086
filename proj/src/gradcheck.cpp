#include "ste/gradcheck.hpp"

#include <algorithm>
#include <stdexcept>

namespace ste {

Matrix finite_difference_gradient(const ScalarFunction& f, const Matrix& x, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_difference_gradient: step must be > 0");
  }
  Matrix probe = x;
  Matrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + step;
      const double up = f(probe);
      probe(i, j) = saved - step;
      const double down = f(probe);
      probe(i, j) = saved;
      out(i, j) = (up - down) / (2.0 * step);
    }
  }
  return out;
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric) {
  if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
    throw std::invalid_argument("max_relative_error: shape mismatch");
  }
  if (analytic.size() == 0) {
    return 0.0;
  }
  const double scale =
      std::max(analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff());
  const double diff = (analytic - numeric).cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    return 0.0;
  }
  return diff / scale;
}

GradientCheck check_gradient(const ScalarFunction& f, const Matrix& analytic, const Matrix& x,
                             double step) {
  GradientCheck out;
  out.analytic = analytic;
  out.numeric = finite_difference_gradient(f, x, step);
  out.relative_error = max_relative_error(out.analytic, out.numeric);
  return out;
}

}  // namespace ste
