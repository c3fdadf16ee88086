#pragma once

// Core-recovery metrics, bootstrap stability and the synthetic recovery grid.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ste/calibration.hpp"
#include "ste/estimation.hpp"
#include "ste/synthetic.hpp"

namespace ste {

struct SetMetrics {
  double jaccard = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

/// Two empty sets agree perfectly (every metric 1). A ratio with an empty
/// denominator is otherwise 0. Throws std::invalid_argument for members
/// outside [0, universe).
SetMetrics set_metrics(const AgentSet& predicted, const AgentSet& truth, Index universe);

/// Per-agent membership scores computed from one dataset.
using ScorePipeline = std::function<Vector(const ComparisonDataset&)>;

enum class ResampleLevel {
  record,  ///< individual comparisons with replacement
  pair,    ///< observed unordered pairs with replacement, all their records kept
};

std::string to_string(ResampleLevel level);
ResampleLevel resample_level_from_string(const std::string& s);

struct BootstrapOptions {
  int replicates = 200;
  CoreThreshold rule = CoreThreshold::absolute();
  std::uint64_t seed = 0;
  int threads = 1;
  ResampleLevel level = ResampleLevel::record;
  /// Largest tolerated fraction of failed replicates.
  double max_failure_rate = 0.1;
};

struct BootstrapReport {
  int replicates = 0;
  int failed = 0;
  Vector inclusion_rate;
  Vector ci_low;   ///< 2.5th percentile of each agent's score
  Vector ci_high;  ///< 97.5th percentile
  Vector mean_score;
  double stability_jaccard = 0.0;
  std::string rule;
};

/// Resampled dataset for replicate seed.
ComparisonDataset resample(const ComparisonDataset& data, ResampleLevel level, std::uint64_t seed);

/// Runs pipeline on B resamples. Failed replicates are excluded and counted;
/// more than max_failure_rate of them raises NumericalError. Results do not
/// depend on the thread count.
BootstrapReport bootstrap(const ComparisonDataset& data, const ScorePipeline& pipeline,
                          const BootstrapOptions& options);

/// Linear-interpolated quantile of values (q in [0, 1]).
double quantile(std::vector<double> values, double q);

struct RecoveryOptions {
  /// Training used for the STE row; scores come out at anneal.tau_min.
  TrainConfig train;
  /// Soft operators for the empirical STE row.
  SoftConfig ste;
  CoreThreshold t_rule = CoreThreshold::absolute();
  CoreThreshold u_rule = CoreThreshold::absolute();
  int seeds = 10;
  int threads = 1;
};

/// One method on one instance against one truth core.
struct RecoveryRow {
  std::size_t cell = 0;
  SynthConfig config;  ///< seed holds the instance seed
  int seed_index = 0;
  std::string method;
  std::string core;  ///< "tc" or "uc"
  Index truth_size = 0;
  Index predicted_size = 0;
  SetMetrics metrics;
  /// Top-ranked agent lies in the truth core (1/0), -1 when not applicable.
  int agreement = -1;
  /// Empty dataset or constant scores: the method had nothing to separate.
  bool degenerate = false;
  std::string error;
};

/// Generates every cell x seed instance and scores methods "ste" (trained),
/// "ste-empirical", "win-rate", "elo", "btl" and "rank-centrality". The
/// instance seed is derive_seed(cell.seed, seed_index), so cells that differ
/// only in rho, mu or eta share their base strengths. Per-instance errors are
/// recorded in the row instead of thrown.
std::vector<RecoveryRow> recovery_curve(const std::vector<SynthConfig>& grid,
                                        const RecoveryOptions& options);

struct RecoverySummary {
  std::size_t cell = 0;
  SynthConfig config;
  std::string method;
  std::string core;
  int runs = 0;    ///< rows without error
  int errors = 0;
  int degenerate = 0;
  double f1_mean = 0.0, f1_std = 0.0;
  double jaccard_mean = 0.0, jaccard_std = 0.0;
  double agreement_rate = -1.0;  ///< -1 when not applicable
  double truth_size_mean = 0.0;
};

/// Mean and sample standard deviation per (cell, method, core), in first-seen order.
std::vector<RecoverySummary> summarize(const std::vector<RecoveryRow>& rows);

}  // namespace ste
