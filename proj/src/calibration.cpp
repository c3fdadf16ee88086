#include "ste/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ste {

namespace {

void require_same_length(const Vector& scores, const Vector& truth, const char* what) {
  if (scores.size() != truth.size()) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(scores.size()) + " scores, " +
                                std::to_string(truth.size()) + " labels)");
  }
}

}  // namespace

double brier(const Vector& scores, const Vector& truth) {
  require_same_length(scores, truth, "brier");
  if (scores.size() == 0) return 0.0;
  return (scores - truth).squaredNorm() / static_cast<double>(scores.size());
}

double expected_calibration_error(const Vector& scores, const Vector& truth, int bins) {
  require_same_length(scores, truth, "expected_calibration_error");
  if (bins < 1) {
    throw std::invalid_argument("expected_calibration_error: bins must be >= 1");
  }
  const Index n = scores.size();
  if (n == 0) return 0.0;
  std::vector<double> conf(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> acc(static_cast<std::size_t>(bins), 0.0);
  std::vector<Index> count(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < n; ++i) {
    const double s = std::clamp(scores(i), 0.0, 1.0);
    const auto m = static_cast<std::size_t>(
        std::min(bins - 1, static_cast<int>(std::floor(s * static_cast<double>(bins)))));
    conf[m] += scores(i);
    acc[m] += truth(i);
    ++count[m];
  }
  double ece = 0.0;
  for (std::size_t m = 0; m < conf.size(); ++m) {
    if (count[m] == 0) continue;
    // |B_m|/N * |acc/|B_m| - conf/|B_m||
    ece += std::abs(acc[m] - conf[m]) / static_cast<double>(n);
  }
  return ece;
}

}  // namespace ste
