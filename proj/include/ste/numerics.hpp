#pragma once

// Dense kernels and smooth aggregation operators.
//
// Everything here is a pure function of its arguments. Reductions shift by
// the extreme value before exponentiating, so the log-sum-exp family stays
// finite for any finite input.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ste/error.hpp"

namespace ste {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Logistic function, evaluated on the branch that cannot overflow.
template <typename Scalar>
inline Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) {
    return Scalar(1) / (Scalar(1) + std::exp(-z));
  }
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Derived>
MatrixX<typename Derived::Scalar> sigmoid_elementwise(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  return m.unaryExpr([](Scalar z) { return sigmoid(z); });
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

/// Sum_{k=1..K} alpha^{k-1} m^k.
///
/// Throws NumericalError when an intermediate power leaves the representable
/// range, which means K or alpha is too aggressive for this matrix.
template <typename Derived>
MatrixX<typename Derived::Scalar> matpow_sum(const Eigen::MatrixBase<Derived>& m, int K,
                                             typename Derived::Scalar alpha = 1) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("matpow_sum: matrix must be square");
  }
  if (K < 1) {
    throw std::invalid_argument("matpow_sum: K must be >= 1");
  }
  if (!(alpha > Scalar(0) && alpha <= Scalar(1))) {
    throw std::invalid_argument("matpow_sum: alpha must lie in (0, 1]");
  }
  const MatrixX<Scalar> base = m;
  MatrixX<Scalar> power = base;
  MatrixX<Scalar> total = base;
  Scalar weight = 1;
  for (int k = 2; k <= K; ++k) {
    power = power * base;
    weight *= alpha;
    total.noalias() += weight * power;
    if (!all_finite(total)) {
      throw NumericalError("matpow_sum: overflow at path length " + std::to_string(k));
    }
  }
  if (!all_finite(total)) {
    throw NumericalError("matpow_sum: non-finite input");
  }
  return total;
}

namespace detail {

template <typename Derived>
void require_non_empty(const Eigen::DenseBase<Derived>& values, const char* what) {
  if (values.size() == 0) {
    throw std::invalid_argument(std::string(what) + ": empty value list");
  }
}

template <typename Scalar>
void require_positive_temperature(Scalar tau, const char* what) {
  if (!(tau > Scalar(0))) {
    throw std::invalid_argument(std::string(what) + ": temperature must be > 0");
  }
}

}  // namespace detail

/// log sum_i exp(z_i), shifted by max(z).
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& values) {
  detail::require_non_empty(values, "log_sum_exp");
  const auto top = values.maxCoeff();
  return top + std::log((values.derived().array() - top).exp().sum());
}

/// -tau log sum_i exp(-z_i / tau). Bounded by min(z) - tau log m <= . <= min(z).
template <typename Derived>
typename Derived::Scalar softmin(const Eigen::DenseBase<Derived>& values,
                                 typename Derived::Scalar tau) {
  detail::require_non_empty(values, "softmin");
  detail::require_positive_temperature(tau, "softmin");
  return -tau * log_sum_exp(-values.derived().array() / tau);
}

/// tau log sum_i exp(z_i / tau). Bounded by max(z) <= . <= max(z) + tau log m.
template <typename Derived>
typename Derived::Scalar smax(const Eigen::DenseBase<Derived>& values,
                              typename Derived::Scalar tau) {
  detail::require_non_empty(values, "smax");
  detail::require_positive_temperature(tau, "smax");
  return tau * log_sum_exp(values.derived().array() / tau);
}

/// Softmax weights exp(z_i / tau) / sum_j exp(z_j / tau).
template <typename Derived>
VectorX<typename Derived::Scalar> softmax_weights(const Eigen::DenseBase<Derived>& values,
                                                  typename Derived::Scalar tau) {
  detail::require_non_empty(values, "softmax_weights");
  detail::require_positive_temperature(tau, "softmax_weights");
  using Scalar = typename Derived::Scalar;
  const Scalar top = values.maxCoeff();
  VectorX<Scalar> w(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    w(i) = std::exp((values.derived()(i) - top) / tau);
  }
  return w / w.sum();
}

/// Boltzmann operator: the softmax-weighted mean of the values.
///
/// Stays inside [min(z), max(z)] and tends to max(z) as tau -> 0, so it works
/// as a bounded scalar soft-OR.
template <typename Derived>
typename Derived::Scalar boltzmann_max(const Eigen::DenseBase<Derived>& values,
                                       typename Derived::Scalar tau) {
  detail::require_non_empty(values, "boltzmann_max");
  const auto w = softmax_weights(values, tau);
  typename Derived::Scalar acc = 0;
  for (Index i = 0; i < values.size(); ++i) {
    acc += w(i) * values.derived()(i);
  }
  // Rounding can push the weighted mean a hair outside the hull.
  return std::clamp(acc, values.minCoeff(), values.maxCoeff());
}

}  // namespace ste
