#pragma once

// Differentiable tournament solutions.
//
//   P --soft_edges--> D --soft_reach--> R --top_cycle_scores--> t
//                     D --cover_scores--> C --uncovered_scores--> u
//
// Every stage is available both as a plain function and recorded on a Tape,
// and the two paths produce the same values.

#include <optional>
#include <string>

#include "ste/numerics.hpp"
#include "ste/tape.hpp"
#include "ste/tournament.hpp"

namespace ste {

enum class UncoveredVariant {
  /// u(a) = 1 - boltzmann_max_{c != a} cover(c, a). Default.
  boltzmann,
  /// u(a) = 1 - sigmoid(beta * smax_{c != a} cover(c, a)). Since cover >= 0
  /// the smax is >= 0 and this form never exceeds 1/2.
  squashed_smax,
};

std::string to_string(UncoveredVariant v);
UncoveredVariant uncovered_variant_from_string(const std::string& s);

struct SoftConfig {
  /// Edge temperature.
  double tau = 0.1;
  /// Temperature of the Top-Cycle softmin; follows tau when unset.
  std::optional<double> tau_softmin;
  /// Temperature of both cover aggregations; follows tau when unset.
  std::optional<double> tau_cover;
  /// Longest path counted by soft reachability; n - 1 when unset.
  std::optional<int> max_path_length;
  /// Damping of path length k by alpha^(k-1).
  double alpha = 1.0;
  UncoveredVariant uc_variant = UncoveredVariant::boltzmann;
  double beta = 10.0;

  double softmin_temperature() const { return tau_softmin.value_or(tau); }
  double cover_temperature() const { return tau_cover.value_or(tau); }
  int path_length(Index n) const;

  /// Throws ConfigError when a temperature, K, alpha or beta is out of range.
  void validate() const;
  /// Same config with every temperature pinned, K resolved for n agents.
  SoftConfig resolved(Index n) const;
  /// Same overrides with a different edge temperature. Tied temperatures follow.
  SoftConfig with_tau(double new_tau) const;
};

struct CoreScores {
  Vector t;  ///< Top-Cycle scores, >= 0 up to softmin slack.
  Vector u;  ///< Uncovered-Set scores in [0, 1].
  SoftConfig config;  ///< Resolved configuration used.
};

/// Set extraction from membership scores.
struct CoreThreshold {
  enum class Kind { absolute, relative_to_max };
  Kind kind = Kind::absolute;
  double level = 0.5;

  /// score > level.
  static CoreThreshold absolute(double level = 0.5) { return {Kind::absolute, level}; }
  /// score > fraction * max(score).
  static CoreThreshold relative(double fraction = 0.5) { return {Kind::relative_to_max, fraction}; }

  AgentSet apply(const Vector& scores) const;
  std::string describe() const;
};

/// Geometric schedule tau_t = tau_max (tau_min / tau_max)^(t / steps).
struct AnnealSchedule {
  double tau_max = 1.0;
  double tau_min = 0.01;
  int steps = 1;

  void validate() const;
};

/// D(a,b) = sigmoid((P(a,b) - 1/2) / tau); D(a,a) = 1/2.
Matrix soft_edges(const ProbTournament& p, double tau);

/// Sum_{k=1..K} alpha^(k-1) D^k.
Matrix soft_reach(const Matrix& d, int K, double alpha = 1.0);

/// t(a) = softmin_{b != a} R(a,b). A single agent scores 0.
Vector top_cycle_scores(const Matrix& r, double tau_softmin);

/// cover(c,a) = D(c,a) (1 - max(0, boltzmann_max_b (D(a,b) - D(c,b)))), zero diagonal.
Matrix cover_scores(const Matrix& d, double tau_cover);

/// Uncovered-Set scores from a cover matrix. A single agent scores 1.
Vector uncovered_scores(const Matrix& cover, const SoftConfig& config);

CoreScores ste_scores(const ProbTournament& p, const SoftConfig& config);

double anneal(const AnnealSchedule& schedule, int step);

/// Thresholded cores. Defaults: t > 0.5 and u > 0.5.
AgentSet soft_top_cycle(const CoreScores& s, CoreThreshold rule = CoreThreshold::absolute());
AgentSet soft_uncovered_set(const CoreScores& s, CoreThreshold rule = CoreThreshold::absolute());

/// Node handles of the pipeline recorded on a tape.
struct ScoreNodes {
  NodeId edges;
  NodeId reach;
  NodeId top_cycle;  ///< n x 1
  NodeId cover;
  NodeId uncovered;  ///< n x 1
};

/// Records cover_scores as a single fused node.
NodeId record_cover_scores(Tape& tape, NodeId edges, double tau_cover);

/// Records the full pipeline starting from a win-probability node (n x n).
ScoreNodes record_ste_scores(Tape& tape, NodeId p, const SoftConfig& config);

}  // namespace ste
