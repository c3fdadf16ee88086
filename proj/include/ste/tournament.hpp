#pragma once

// Probabilistic and majority-rule tournaments, plus the exact classical
// solutions (Top Cycle, Uncovered Set, Condorcet winner) used as ground truth.

#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ste/error.hpp"
#include "ste/numerics.hpp"

namespace ste {

/// Sorted, duplicate-free list of agent indices.
using AgentSet = std::vector<Index>;
using AgentPair = std::pair<Index, Index>;
using BoolMatrix = MatrixX<bool>;

/// Ordered list of unique agent names with the inverse index map.
class AgentRegistry {
 public:
  AgentRegistry() = default;
  /// Throws DataError on duplicate names.
  explicit AgentRegistry(std::vector<std::string> names);

  /// Registry named "A", "B", ..., "Z", "A1", ... for n anonymous agents.
  static AgentRegistry letters(Index n);

  /// Returns the index of name, registering it at the end when new.
  Index intern(const std::string& name);
  std::optional<Index> find(const std::string& name) const;
  /// Throws DataError for unknown names.
  Index index_of(const std::string& name) const;

  const std::string& name(Index i) const { return names_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& names() const { return names_; }
  Index size() const { return static_cast<Index>(names_.size()); }

  friend bool operator==(const AgentRegistry& a, const AgentRegistry& b) {
    return a.names_ == b.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Index> index_;
};

/// Raised when an exact solution is requested on a tournament with ties.
class TieError : public DataError {
 public:
  explicit TieError(std::vector<AgentPair> tied);
  const std::vector<AgentPair>& tied_pairs() const { return tied_; }

 private:
  std::vector<AgentPair> tied_;
};

/// First entry violating the probabilistic-tournament invariants, if any.
struct MatrixViolation {
  Index row = 0;
  Index col = 0;
  std::string reason;
};

std::optional<MatrixViolation> find_prob_violation(const Matrix& p, double tolerance);

/// Win-probability matrix with P(a,b) + P(b,a) = 1 and P(a,a) = 1/2.
class ProbTournament {
 public:
  /// Validates the invariants; throws DataError naming the first bad entry.
  explicit ProbTournament(Matrix p, double tolerance = 1e-12);

  /// Every pair at 1/2.
  static ProbTournament uniform(Index n);

  Index size() const { return p_.rows(); }
  const Matrix& matrix() const { return p_; }
  double operator()(Index a, Index b) const { return p_(a, b); }

 private:
  Matrix p_;
};

/// Majority-rule tournament: edge a -> b iff P(a,b) > 1/2. Exact 1/2 is a tie.
class HardTournament {
 public:
  /// Validates antisymmetry and completeness outside the tie list.
  HardTournament(BoolMatrix adjacency, std::vector<AgentPair> ties = {});

  /// Tie-free tournament from an explicit list of directed edges.
  static HardTournament from_edges(Index n, const std::vector<AgentPair>& edges);

  Index size() const { return adj_.rows(); }
  bool beats(Index a, Index b) const { return adj_(a, b); }
  const BoolMatrix& adjacency() const { return adj_; }
  const std::vector<AgentPair>& ties() const { return ties_; }
  bool has_ties() const { return !ties_.empty(); }

 private:
  BoolMatrix adj_;
  std::vector<AgentPair> ties_;
};

struct MarginReport {
  double delta = 0.0;
  std::vector<AgentPair> tied_pairs;
};

HardTournament threshold(const ProbTournament& p);

/// Transitive closure of the edge relation (paths of any length >= 1).
BoolMatrix reachability(const HardTournament& t);

/// Agents that reach every other agent. Throws TieError on tied input.
AgentSet top_cycle(const HardTournament& t);

/// c covers a: c beats a and c beats everything a beats.
/// Throws std::invalid_argument when c == a and TieError on tied input.
bool covers(const HardTournament& t, Index c, Index a);

/// Agents not covered by anyone. Throws TieError on tied input.
AgentSet uncovered_set(const HardTournament& t);

std::optional<Index> condorcet_winner(const HardTournament& t);

MarginReport margin_report(const ProbTournament& p);

/// Q(perm[a], perm[b]) = P(a, b): agent a is renamed perm[a].
ProbTournament relabel(const ProbTournament& p, const std::vector<Index>& perm);

}  // namespace ste
