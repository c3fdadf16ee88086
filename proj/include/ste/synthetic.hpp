#pragma once

// Synthetic tournaments with known cores: a transitive BTL base, an optional
// injected cycle, and Bernoulli match sampling with label noise and missing
// pairs.

#include <cstdint>

#include "ste/estimation.hpp"
#include "ste/tournament.hpp"

namespace ste {

struct SynthConfig {
  Index n = 8;
  /// Mixture weight of the cyclic component.
  double rho = 0.0;
  /// Agents on the injected cycle; 0 means all n.
  Index cycle_size = 3;
  /// Probability with which each cycle edge is won in the cyclic component.
  double cycle_win_prob = 0.9;
  /// Per-match label-flip probability.
  double eta = 0.0;
  /// Fraction of unordered pairs never compared.
  double mu = 0.0;
  /// Matches per observed pair.
  int m = 100;
  std::uint64_t seed = 0;

  Index resolved_cycle_size() const { return cycle_size == 0 ? n : cycle_size; }
  /// Throws ConfigError for out-of-range fields.
  void validate() const;
};

struct BaseTournament {
  Vector lambda;
  ProbTournament p;
};

struct SynthInstance {
  ProbTournament truth_p;
  AgentSet truth_tc;
  AgentSet truth_uc;
  ComparisonDataset dataset;
  Vector lambda_true;
  /// Seed of the accepted attempt and the number of attempts used.
  std::uint64_t instance_seed = 0;
  int attempts = 1;
};

/// lambda_i ~ N(0, 1); P(a,b) = sigmoid(lambda_a - lambda_b).
BaseTournament gen_base(Index n, std::uint64_t seed);

/// (1 - rho) P_base + rho P_cycle. P_cycle puts cycle_win_prob on the edges of
/// a random directed cycle through cycle_size random agents and copies P_base
/// on every other pair, so only cycle pairs move.
ProbTournament inject_cycle(const ProbTournament& base, double rho, Index cycle_size,
                            std::uint64_t seed, double cycle_win_prob = 0.9);

/// Keeps each unordered pair with probability 1 - mu; draws m Bernoulli(P(a,b))
/// outcomes per kept pair, each flipped with probability eta.
ComparisonDataset sample_dataset(const ProbTournament& p, int m, double eta, double mu,
                                 std::uint64_t seed);

/// Full pipeline. Retries with derived seeds until threshold(truth_p) is
/// tie-free; throws DataError after 100 attempts.
SynthInstance gen_instance(const SynthConfig& config);

/// ceil(log(2 * C(n,2) / fail_prob) / (2 delta^2)): matches per pair after which
/// Hoeffding plus a union bound give an exact hard-tournament estimate with
/// probability >= 1 - fail_prob.
long sample_size_for_recovery(Index n, double delta, double fail_prob);

}  // namespace ste
