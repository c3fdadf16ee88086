#pragma once

// Single-winner ranking baselines.

#include <vector>

#include "ste/estimation.hpp"
#include "ste/tournament.hpp"

namespace ste {

struct Ranking {
  Vector scores;
  /// Agents by descending score, lower index first on ties.
  std::vector<Index> order;

  static Ranking from_scores(Vector scores);
  Index top() const { return order.front(); }
};

/// Fraction of games won; agents without games score 1/2.
Ranking win_rate(const ComparisonDataset& data);

/// Sequential Elo over records in dataset order.
Ranking elo(const ComparisonDataset& data, double k = 32.0, double initial = 1500.0);

/// BTL strengths from fit_btl.
Ranking btl_ranking(const BtlParams& params);

struct RankCentralityOptions {
  double teleport = 1e-6;
  double tolerance = 1e-10;  ///< L1 change between iterates
  int max_iterations = 100000;
};

/// Stationary distribution of the walk that moves from a to b with probability
/// P(b,a) / n, mixed with uniform teleportation. Throws NumericalError when
/// power iteration does not converge.
Ranking rank_centrality(const ProbTournament& p, const RankCentralityOptions& options = {});

/// Whether the top-ranked agent lies in core. Throws std::invalid_argument on an empty core.
bool core_agreement(const Ranking& ranking, const AgentSet& core);

}  // namespace ste
