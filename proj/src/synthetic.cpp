#include "ste/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ste/rng.hpp"

namespace ste {

namespace {

constexpr int kMaxAttempts = 100;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("synthetic: " + message);
}

}  // namespace

void SynthConfig::validate() const {
  require(n >= 1, "n must be >= 1");
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  require(eta >= 0.0 && eta <= 0.5, "eta must lie in [0, 0.5]");
  require(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
  require(m >= 1, "m must be >= 1");
  require(cycle_win_prob > 0.5 && cycle_win_prob <= 1.0, "cycle_win_prob must lie in (0.5, 1]");
  require(cycle_size >= 0, "cycle_size must be >= 0");
  if (rho > 0.0) {
    const Index k = resolved_cycle_size();
    require(k >= 3 && k <= n, "cycle_size must lie in [3, n] when rho > 0");
  }
}

BaseTournament gen_base(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector lambda(n);
  for (Index i = 0; i < n; ++i) lambda(i) = rng.normal();
  Matrix p(n, n);
  for (Index a = 0; a < n; ++a) {
    p(a, a) = 0.5;
    for (Index b = a + 1; b < n; ++b) {
      p(a, b) = sigmoid(lambda(a) - lambda(b));
      p(b, a) = 1.0 - p(a, b);
    }
  }
  return {lambda, ProbTournament(std::move(p))};
}

ProbTournament inject_cycle(const ProbTournament& base, double rho, Index cycle_size,
                            std::uint64_t seed, double cycle_win_prob) {
  const Index n = base.size();
  if (rho == 0.0) return base;
  if (cycle_size < 3 || cycle_size > n) {
    throw ConfigError("inject_cycle: cycle_size must lie in [3, n]");
  }
  Rng rng(seed);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng.engine());
  order.resize(static_cast<std::size_t>(cycle_size));

  Matrix mix = base.matrix();
  for (Index i = 0; i < cycle_size; ++i) {
    const Index a = order[static_cast<std::size_t>(i)];
    const Index b = order[static_cast<std::size_t>((i + 1) % cycle_size)];
    mix(a, b) = (1.0 - rho) * base(a, b) + rho * cycle_win_prob;
    mix(b, a) = 1.0 - mix(a, b);
  }
  return ProbTournament(std::move(mix));
}

ComparisonDataset sample_dataset(const ProbTournament& p, int m, double eta, double mu,
                                 std::uint64_t seed) {
  const Index n = p.size();
  Rng rng(seed);
  ComparisonDataset data(AgentRegistry::letters(n));
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (rng.bernoulli(mu)) continue;
      for (int k = 0; k < m; ++k) {
        int outcome = rng.bernoulli(p(a, b)) ? 1 : 0;
        if (rng.bernoulli(eta)) outcome = 1 - outcome;
        data.add(a, b, outcome);
      }
    }
  }
  return data;
}

SynthInstance gen_instance(const SynthConfig& config) {
  config.validate();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t s = derive_seed(config.seed, static_cast<std::uint64_t>(attempt));
    BaseTournament base = gen_base(config.n, derive_seed(s, 1));
    ProbTournament truth = config.rho > 0.0
                               ? inject_cycle(base.p, config.rho, config.resolved_cycle_size(),
                                              derive_seed(s, 2), config.cycle_win_prob)
                               : base.p;
    const HardTournament hard = threshold(truth);
    if (hard.has_ties()) continue;
    AgentSet tc = top_cycle(hard);
    AgentSet uc = uncovered_set(hard);
    ComparisonDataset data =
        sample_dataset(truth, config.m, config.eta, config.mu, derive_seed(s, 3));
    return {std::move(truth), std::move(tc), std::move(uc), std::move(data),
            std::move(base.lambda), s, attempt + 1};
  }
  std::ostringstream msg;
  msg << "gen_instance: no tie-free tournament after " << kMaxAttempts
      << " attempts (n=" << config.n << ", rho=" << config.rho << ", seed=" << config.seed << ")";
  throw DataError(msg.str());
}

long sample_size_for_recovery(Index n, double delta, double fail_prob) {
  if (n < 2) throw std::invalid_argument("sample_size_for_recovery: n must be >= 2");
  if (!(delta > 0.0 && delta <= 0.5)) {
    throw std::invalid_argument("sample_size_for_recovery: delta must lie in (0, 0.5]");
  }
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) {
    throw std::invalid_argument("sample_size_for_recovery: fail_prob must lie in (0, 1)");
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double m = std::log(2.0 * pairs / fail_prob) / (2.0 * delta * delta);
  return std::max(1L, static_cast<long>(std::ceil(m)));
}

}  // namespace ste
