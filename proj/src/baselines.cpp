#include "ste/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ste {

Ranking Ranking::from_scores(Vector scores) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(a) > scores(b); });
  return {std::move(scores), std::move(order)};
}

Ranking win_rate(const ComparisonDataset& data) {
  const Matrix& w = data.wins();
  const Vector won = w.rowwise().sum();
  const Vector played = data.totals().rowwise().sum();
  Vector s(data.num_agents());
  for (Index a = 0; a < s.size(); ++a) s(a) = played(a) > 0 ? won(a) / played(a) : 0.5;
  return Ranking::from_scores(std::move(s));
}

Ranking elo(const ComparisonDataset& data, double k, double initial) {
  Vector r = Vector::Constant(data.num_agents(), initial);
  for (const Comparison& c : data.records()) {
    const double expected = 1.0 / (1.0 + std::pow(10.0, (r(c.b) - r(c.a)) / 400.0));
    const double delta = k * (static_cast<double>(c.outcome) - expected);
    r(c.a) += delta;
    r(c.b) -= delta;
  }
  return Ranking::from_scores(std::move(r));
}

Ranking btl_ranking(const BtlParams& params) { return Ranking::from_scores(params.lambda); }

Ranking rank_centrality(const ProbTournament& p, const RankCentralityOptions& options) {
  const Index n = p.size();
  if (n == 0) throw std::invalid_argument("rank_centrality: empty tournament");
  const double dn = static_cast<double>(n);
  Matrix walk = p.matrix().transpose() / dn;
  for (Index a = 0; a < n; ++a) {
    walk(a, a) = 0.0;
    walk(a, a) = 1.0 - walk.row(a).sum();
  }
  walk = (1.0 - options.teleport) * walk + Matrix::Constant(n, n, options.teleport / dn);

  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / dn);
  double change = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::RowVectorXd next = pi * walk;
    next /= next.sum();
    change = (next - pi).cwiseAbs().sum();
    pi = next;
    if (change < options.tolerance) return Ranking::from_scores(pi.transpose());
  }
  std::ostringstream msg;
  msg << "rank_centrality: no convergence after " << options.max_iterations
      << " iterations (residual " << change << ")";
  throw NumericalError(msg.str());
}

bool core_agreement(const Ranking& ranking, const AgentSet& core) {
  if (core.empty()) throw std::invalid_argument("core_agreement: empty core");
  if (ranking.order.empty()) return false;
  return std::binary_search(core.begin(), core.end(), ranking.top());
}

}  // namespace ste
