#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// The oracles follow the textbook definitions directly and share no code with
// the library's implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ste/tournament.hpp"

namespace ste::test {

// Three-agent cycle at 0.7.
inline Matrix example1() {
  Matrix p(3, 3);
  p << 0.5, 0.7, 0.3,
       0.3, 0.5, 0.7,
       0.7, 0.3, 0.5;
  return p;
}

// Condorcet winner A, transitive A > B > C > D.
inline Matrix example2() {
  Matrix p(4, 4);
  p << 0.5, 0.8, 0.9, 0.85,
       0.2, 0.5, 0.6, 0.55,
       0.1, 0.4, 0.5, 0.52,
       0.15, 0.45, 0.48, 0.5;
  return p;
}

// 3-cycle A -> B -> C -> A, everyone beats D.
inline HardTournament example3() {
  return HardTournament::from_edges(4, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}});
}

// Four-agent walkthrough matrix.
inline Matrix walkthrough() {
  Matrix p(4, 4);
  p << 0.5, 0.7, 0.6, 0.9,
       0.3, 0.5, 0.8, 0.7,
       0.4, 0.2, 0.5, 0.6,
       0.1, 0.3, 0.4, 0.5;
  return p;
}

// Soft edges of the walkthrough matrix at tau = 0.1, rounded to 3 decimals.
inline Matrix walkthrough_edges_rounded() {
  Matrix d(4, 4);
  d << 0.5, 0.881, 0.731, 0.982,
       0.119, 0.5, 0.953, 0.881,
       0.269, 0.047, 0.5, 0.731,
       0.018, 0.119, 0.269, 0.5;
  return d;
}

/// Random P with every |P(a,b) - 1/2| in [margin, 1/2].
inline Matrix random_tournament(Index n, double margin, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> gap(margin, 0.5);
  std::bernoulli_distribution coin(0.5);
  Matrix p = Matrix::Constant(n, n, 0.5);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const double g = gap(rng);
      p(a, b) = coin(rng) ? 0.5 + g : 0.5 - g;
      p(b, a) = 1.0 - p(a, b);
    }
  }
  return p;
}

/// Random P in which `winner` beats everyone with margin at least `margin`.
inline Matrix planted_condorcet(Index n, Index winner, double margin, std::mt19937_64& rng) {
  Matrix p = random_tournament(n, margin, rng);
  for (Index b = 0; b < n; ++b) {
    if (b == winner) continue;
    if (p(winner, b) < 0.5) {
      p(winner, b) = 1.0 - p(winner, b);
      p(b, winner) = 1.0 - p(winner, b);
    }
  }
  return p;
}

/// Random tie-free hard tournament.
inline HardTournament random_hard(Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<AgentPair> edges;
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) edges.push_back(coin(rng) ? AgentPair{a, b} : AgentPair{b, a});
  }
  return HardTournament::from_edges(n, edges);
}

/// Depth-first search from every agent.
inline BoolMatrix dfs_reachability(const HardTournament& t) {
  const Index n = t.size();
  BoolMatrix r = BoolMatrix::Constant(n, n, false);
  for (Index s = 0; s < n; ++s) {
    std::vector<Index> stack{s};
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      for (Index w = 0; w < n; ++w) {
        if (t.beats(v, w) && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          r(s, w) = true;
          stack.push_back(w);
        }
      }
    }
  }
  return r;
}

/// Smallest non-empty dominant set: every member beats every non-member.
inline AgentSet brute_force_top_cycle(const HardTournament& t) {
  const Index n = t.size();
  AgentSet best;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool dominant = true;
    for (Index a = 0; a < n && dominant; ++a) {
      if (!(mask >> a & 1u)) continue;
      for (Index b = 0; b < n && dominant; ++b) {
        if (mask >> b & 1u) continue;
        dominant = t.beats(a, b);
      }
    }
    if (!dominant) continue;
    AgentSet s;
    for (Index a = 0; a < n; ++a) {
      if (mask >> a & 1u) s.push_back(a);
    }
    if (best.empty() || s.size() < best.size()) best = s;
  }
  return best;
}

/// Agents no one covers, straight from the definition.
inline AgentSet brute_force_uncovered(const HardTournament& t) {
  const Index n = t.size();
  AgentSet out;
  for (Index a = 0; a < n; ++a) {
    bool covered = false;
    for (Index c = 0; c < n && !covered; ++c) {
      if (c == a || !t.beats(c, a)) continue;
      bool all = true;
      for (Index b = 0; b < n; ++b) {
        if (t.beats(a, b) && !t.beats(c, b)) all = false;
      }
      covered = all;
    }
    if (!covered) out.push_back(a);
  }
  return out;
}

/// Naive triple-loop product.
inline Matrix naive_matmul(const Matrix& x, const Matrix& y) {
  Matrix z = Matrix::Zero(x.rows(), y.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < y.cols(); ++j) {
      double s = 0.0;
      for (Index k = 0; k < x.cols(); ++k) s += x(i, k) * y(k, j);
      z(i, j) = s;
    }
  }
  return z;
}

inline double naive_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline AgentSet all_agents(Index n) {
  AgentSet s(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

}  // namespace ste::test
