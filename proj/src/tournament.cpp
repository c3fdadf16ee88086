#include "ste/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ste {

AgentRegistry::AgentRegistry(std::vector<std::string> names) {
  for (auto& n : names) {
    if (find(n)) {
      throw DataError("duplicate agent name '" + n + "'");
    }
    intern(n);
  }
}

AgentRegistry AgentRegistry::letters(Index n) {
  AgentRegistry reg;
  for (Index i = 0; i < n; ++i) {
    std::string name(1, static_cast<char>('A' + i % 26));
    if (i >= 26) {
      name += std::to_string(i / 26);
    }
    reg.intern(name);
  }
  return reg;
}

Index AgentRegistry::intern(const std::string& name) {
  if (auto it = index_.find(name); it != index_.end()) {
    return it->second;
  }
  const Index id = size();
  names_.push_back(name);
  index_.emplace(name, id);
  return id;
}

std::optional<Index> AgentRegistry::find(const std::string& name) const {
  if (auto it = index_.find(name); it != index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

Index AgentRegistry::index_of(const std::string& name) const {
  if (auto id = find(name)) {
    return *id;
  }
  throw DataError("unknown agent '" + name + "'");
}

namespace {

std::string describe_pairs(const std::vector<AgentPair>& pairs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) os << ", ";
    os << '(' << pairs[i].first << ',' << pairs[i].second << ')';
  }
  return os.str();
}

}  // namespace

TieError::TieError(std::vector<AgentPair> tied)
    : DataError("tournament has tied pairs: " + describe_pairs(tied)), tied_(std::move(tied)) {}

std::optional<MatrixViolation> find_prob_violation(const Matrix& p, double tolerance) {
  if (p.rows() != p.cols()) {
    return MatrixViolation{p.rows(), p.cols(), "matrix is not square"};
  }
  const Index n = p.rows();
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const double v = p(a, b);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        return MatrixViolation{a, b, "entry outside [0, 1]"};
      }
    }
  }
  for (Index a = 0; a < n; ++a) {
    if (p(a, a) != 0.5) {
      return MatrixViolation{a, a, "diagonal entry must be 0.5"};
    }
    for (Index b = a + 1; b < n; ++b) {
      if (std::abs(p(a, b) + p(b, a) - 1.0) > tolerance) {
        return MatrixViolation{a, b, "complementarity violated: P(a,b) + P(b,a) != 1"};
      }
    }
  }
  return std::nullopt;
}

ProbTournament::ProbTournament(Matrix p, double tolerance) : p_(std::move(p)) {
  if (auto bad = find_prob_violation(p_, tolerance)) {
    std::ostringstream os;
    os << "invalid probabilistic tournament at (" << bad->row << ',' << bad->col
       << "): " << bad->reason;
    throw DataError(os.str());
  }
}

ProbTournament ProbTournament::uniform(Index n) {
  return ProbTournament(Matrix::Constant(n, n, 0.5));
}

HardTournament::HardTournament(BoolMatrix adjacency, std::vector<AgentPair> ties)
    : adj_(std::move(adjacency)), ties_(std::move(ties)) {
  if (adj_.rows() != adj_.cols()) {
    throw DataError("hard tournament adjacency must be square");
  }
  const Index n = adj_.rows();
  BoolMatrix tied = BoolMatrix::Constant(n, n, false);
  for (auto& [a, b] : ties_) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw DataError("hard tournament: invalid tie entry");
    }
    if (a > b) std::swap(a, b);
    tied(a, b) = tied(b, a) = true;
  }
  std::sort(ties_.begin(), ties_.end());
  ties_.erase(std::unique(ties_.begin(), ties_.end()), ties_.end());
  for (Index a = 0; a < n; ++a) {
    if (adj_(a, a)) {
      throw DataError("hard tournament: self edge at " + std::to_string(a));
    }
    for (Index b = a + 1; b < n; ++b) {
      const int edges = int(adj_(a, b)) + int(adj_(b, a));
      if (tied(a, b) ? edges != 0 : edges != 1) {
        throw DataError("hard tournament: pair (" + std::to_string(a) + ',' +
                        std::to_string(b) + ") needs exactly one edge or a tie");
      }
    }
  }
}

HardTournament HardTournament::from_edges(Index n, const std::vector<AgentPair>& edges) {
  BoolMatrix adj = BoolMatrix::Constant(n, n, false);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw DataError("edge endpoint out of range");
    }
    adj(a, b) = true;
  }
  return HardTournament(std::move(adj));
}

HardTournament threshold(const ProbTournament& p) {
  const Index n = p.size();
  BoolMatrix adj = BoolMatrix::Constant(n, n, false);
  std::vector<AgentPair> ties;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (p(a, b) > 0.5) {
        adj(a, b) = true;
      } else if (p(b, a) > 0.5) {
        adj(b, a) = true;
      } else {
        ties.emplace_back(a, b);
      }
    }
  }
  return HardTournament(std::move(adj), std::move(ties));
}

BoolMatrix reachability(const HardTournament& t) {
  // Warshall: after round k, reach(a,b) allows intermediates from {0..k}.
  BoolMatrix reach = t.adjacency();
  const Index n = t.size();
  for (Index k = 0; k < n; ++k) {
    for (Index a = 0; a < n; ++a) {
      if (!reach(a, k)) continue;
      for (Index b = 0; b < n; ++b) {
        reach(a, b) = reach(a, b) || reach(k, b);
      }
    }
  }
  return reach;
}

namespace {

void require_tie_free(const HardTournament& t) {
  if (t.has_ties()) {
    throw TieError(t.ties());
  }
}

}  // namespace

AgentSet top_cycle(const HardTournament& t) {
  require_tie_free(t);
  const BoolMatrix reach = reachability(t);
  const Index n = t.size();
  AgentSet out;
  for (Index a = 0; a < n; ++a) {
    bool all = true;
    for (Index b = 0; b < n && all; ++b) {
      all = (b == a) || reach(a, b);
    }
    if (all) out.push_back(a);
  }
  return out;
}

bool covers(const HardTournament& t, Index c, Index a) {
  if (c == a) {
    throw std::invalid_argument("covers: an agent cannot cover itself");
  }
  require_tie_free(t);
  if (!t.beats(c, a)) {
    return false;
  }
  for (Index b = 0; b < t.size(); ++b) {
    if (t.beats(a, b) && !t.beats(c, b)) {
      return false;
    }
  }
  return true;
}

AgentSet uncovered_set(const HardTournament& t) {
  require_tie_free(t);
  const Index n = t.size();
  AgentSet out;
  for (Index a = 0; a < n; ++a) {
    bool covered = false;
    for (Index c = 0; c < n && !covered; ++c) {
      covered = c != a && covers(t, c, a);
    }
    if (!covered) out.push_back(a);
  }
  return out;
}

std::optional<Index> condorcet_winner(const HardTournament& t) {
  const Index n = t.size();
  for (Index a = 0; a < n; ++a) {
    bool all = true;
    for (Index b = 0; b < n && all; ++b) {
      all = (b == a) || t.beats(a, b);
    }
    if (all) return a;
  }
  return std::nullopt;
}

MarginReport margin_report(const ProbTournament& p) {
  MarginReport r;
  const Index n = p.size();
  double delta = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const double d = std::abs(p(a, b) - 0.5);
      delta = std::min(delta, d);
      if (p(a, b) == 0.5) {
        r.tied_pairs.emplace_back(a, b);
      }
    }
  }
  // No pairs: the minimum over an empty set stays +inf.
  r.delta = delta;
  return r;
}

ProbTournament relabel(const ProbTournament& p, const std::vector<Index>& perm) {
  const Index n = p.size();
  if (static_cast<Index>(perm.size()) != n) {
    throw std::invalid_argument("relabel: permutation size mismatch");
  }
  Matrix q(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      q(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]) = p(a, b);
    }
  }
  return ProbTournament(std::move(q));
}

}  // namespace ste
