#pragma once

// From comparison records to probabilistic tournaments: empirical win rates,
// Bradley-Terry-Luce maximum likelihood, and the regularized training loop
// that differentiates through the soft tournament operators.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ste/numerics.hpp"
#include "ste/soft_core.hpp"
#include "ste/tournament.hpp"

namespace ste {

/// One match: outcome 1 means a beat b, 0 means b beat a.
struct Comparison {
  Index a = 0;
  Index b = 0;
  int outcome = 0;

  friend bool operator==(const Comparison&, const Comparison&) = default;
};

class ComparisonDataset {
 public:
  ComparisonDataset() = default;
  explicit ComparisonDataset(AgentRegistry agents);

  /// Throws DataError for a == b, unknown indices or outcome outside {0, 1}.
  void add(Index a, Index b, int outcome);
  /// Registers unseen names in first-appearance order.
  void add(const std::string& a, const std::string& b, int outcome);

  /// Same registry, different record list (for resampling).
  ComparisonDataset with_records(const std::vector<Comparison>& records) const;

  const AgentRegistry& agents() const { return agents_; }
  const std::vector<Comparison>& records() const { return records_; }
  Index num_agents() const { return agents_.size(); }
  std::size_t size() const { return records_.size(); }

  /// wins(a, b): number of records in which a beat b.
  const Matrix& wins() const { return wins_; }
  /// totals(a, b) = wins(a, b) + wins(b, a).
  Matrix totals() const { return wins_ + wins_.transpose(); }

  friend bool operator==(const ComparisonDataset& x, const ComparisonDataset& y) {
    return x.agents_ == y.agents_ && x.records_ == y.records_;
  }

 private:
  void grow();

  AgentRegistry agents_;
  std::vector<Comparison> records_;
  Matrix wins_ = Matrix::Zero(0, 0);
};

/// Per-agent BTL strengths, gauge-fixed to mean zero.
struct BtlParams {
  Vector lambda;

  static BtlParams zeros(Index n) { return {Vector::Zero(n)}; }
  void fix_gauge();
};

enum class SharpnessForm {
  entropy,        ///< mean binary entropy
  abs_deviation,  ///< -mean |s - 1/2|
};

/// Which membership scores the regularizers act on.
enum class ScoreTarget {
  uncovered,  ///< u, already in [0, 1]
  top_cycle,  ///< sigmoid(t)
};

std::string to_string(SharpnessForm f);
SharpnessForm sharpness_form_from_string(const std::string& s);
std::string to_string(ScoreTarget t);
ScoreTarget score_target_from_string(const std::string& s);

struct TrainConfig {
  int epochs = 500;
  double learning_rate = 1.0;
  double lambda_s = 0.0;
  double lambda_c = 0.0;
  AnnealSchedule anneal{1.0, 0.01, 500};
  SoftConfig soft;
  /// Regularizers are added on epochs divisible by reg_every.
  int reg_every = 1;
  /// Recorded for provenance; full-batch descent from zero consumes no randomness.
  std::uint64_t seed = 0;
  SharpnessForm sharpness = SharpnessForm::entropy;
  ScoreTarget target = ScoreTarget::uncovered;
  double grad_tolerance = 1e-8;
  /// Compare every regularizer gradient with finite differences (slow).
  bool check_gradients = false;

  void validate() const;
};

/// Ground-truth core membership, available for synthetic data.
struct GroundTruthMembership {
  std::vector<bool> in_top_cycle;
  std::vector<bool> in_uncovered;

  /// Throws DataError unless uc is a subset of tc.
  static GroundTruthMembership from_sets(Index n, const AgentSet& tc, const AgentSet& uc);
  Vector top_cycle_indicator() const;
  Vector uncovered_indicator() const;
};

/// Empirical win rates; never-compared pairs get 1/2.
ProbTournament empirical_tournament(const ComparisonDataset& data);

double btl_probability(const BtlParams& params, Index a, Index b);
ProbTournament btl_tournament(const BtlParams& params);

/// Mean binary cross-entropy over records, probabilities clamped to [1e-12, 1 - 1e-12].
double ce_loss(const BtlParams& params, const ComparisonDataset& data);
/// Gradient of ce_loss with respect to lambda (zero where the clamp is active).
Vector ce_gradient(const BtlParams& params, const ComparisonDataset& data);

/// Mean binary entropy with eps = 1e-9 inside the logs.
double sharpness_reg(const Vector& scores);
/// Gradient of sharpness_reg.
Vector sharpness_gradient(const Vector& scores);

/// Exact binned ECE of scores against one core's truth.
double calibration_reg(const Vector& scores, const Vector& truth, int bins = 10);

/// Connected components of the comparison graph, each sorted, ordered by smallest member.
std::vector<AgentSet> comparison_components(const ComparisonDataset& data);

enum class StopReason { epochs_exhausted, gradient_norm };

struct FitResult {
  BtlParams params;
  std::vector<double> loss_trace;  ///< objective after each epoch's step
  StopReason stop = StopReason::epochs_exhausted;
};

/// Gradient descent on ce_loss. Throws DataError naming the components when the
/// comparison graph is disconnected.
FitResult fit_btl(const ComparisonDataset& data, const TrainConfig& config);

struct TrainResult {
  BtlParams params;
  CoreScores scores;  ///< at the final annealed temperature
  std::vector<double> loss_trace;
  StopReason stop = StopReason::epochs_exhausted;
};

/// CE + lambda_s * sharpness + lambda_c * Brier(scores, truth), annealed tau.
/// lambda_c > 0 requires truth.
TrainResult train_ste(const ComparisonDataset& data, const TrainConfig& config,
                      const std::optional<GroundTruthMembership>& truth = std::nullopt);

}  // namespace ste
