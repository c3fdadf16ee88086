#pragma once

// Calibration of membership scores against 0/1 ground truth.

#include "ste/numerics.hpp"

namespace ste {

/// Mean squared error between scores and 0/1 truth.
double brier(const Vector& scores, const Vector& truth);

/// Expected calibration error over `bins` equal-width bins on [0, 1]:
/// sum_m |B_m| / N * |mean truth in B_m - mean score in B_m|.
/// A score of exactly 1 falls in the last bin. Empty bins contribute 0.
double expected_calibration_error(const Vector& scores, const Vector& truth, int bins = 10);

}  // namespace ste
