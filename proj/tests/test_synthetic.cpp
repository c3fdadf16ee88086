#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ste/rng.hpp"
#include "ste/synthetic.hpp"
#include "support.hpp"

using namespace ste;

namespace {

int count_changed_pairs(const Matrix& x, const Matrix& y) {
  int changed = 0;
  for (Index a = 0; a < x.rows(); ++a) {
    for (Index b = a + 1; b < x.cols(); ++b) changed += x(a, b) != y(a, b);
  }
  return changed;
}

double max_entry_error(const Matrix& x, const Matrix& y) { return (x - y).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Rng, DeterministicStreams) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  Rng c(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(c.below(7), 7u);
  }
}

TEST(GenBase, ComplementarityAndOrder) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BaseTournament base = gen_base(7, seed);
    const Matrix& p = base.p.matrix();
    EXPECT_EQ(p + p.transpose(), Matrix::Ones(7, 7));
    const HardTournament t = threshold(base.p);
    for (Index a = 0; a < 7; ++a) {
      for (Index b = 0; b < 7; ++b) {
        if (a != b) {
          EXPECT_EQ(t.beats(a, b), base.lambda(a) > base.lambda(b));
        }
      }
    }
  }
}

TEST(GenBase, NormalStrengths) {
  const BaseTournament base = gen_base(4000, 9);
  EXPECT_NEAR(base.lambda.mean(), 0.0, 0.06);
  const double var = (base.lambda.array() - base.lambda.mean()).square().mean();
  EXPECT_NEAR(var, 1.0, 0.08);
}

TEST(InjectCycle, RhoZeroIsIdentity) {
  const BaseTournament base = gen_base(6, 1);
  EXPECT_EQ(inject_cycle(base.p, 0.0, 3, 2).matrix(), base.p.matrix());
}

TEST(InjectCycle, FullWeightThreeCycle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BaseTournament base = gen_base(3, seed);
    const HardTournament t = threshold(inject_cycle(base.p, 1.0, 3, seed + 100));
    EXPECT_FALSE(condorcet_winner(t));
    EXPECT_EQ(top_cycle(t), test::all_agents(3));
    for (Index a = 0; a < 3; ++a) {
      int wins = 0;
      for (Index b = 0; b < 3; ++b) wins += a != b && t.beats(a, b);
      EXPECT_EQ(wins, 1);
    }
  }
}

TEST(InjectCycle, OnlyCyclePairsMove) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BaseTournament base = gen_base(8, seed);
    for (Index k : {3, 5, 8}) {
      const ProbTournament p = inject_cycle(base.p, 0.5, k, seed);
      const Matrix& m = p.matrix();
      EXPECT_LT((m + m.transpose() - Matrix::Ones(8, 8)).cwiseAbs().maxCoeff(), 1e-15);
      EXPECT_EQ(count_changed_pairs(m, base.p.matrix()), static_cast<int>(k));
    }
  }
  EXPECT_THROW(inject_cycle(gen_base(4, 0).p, 0.3, 2, 0), ConfigError);
  EXPECT_THROW(inject_cycle(gen_base(4, 0).p, 0.3, 5, 0), ConfigError);
}

TEST(InjectCycle, MixtureEntries) {
  const BaseTournament base = gen_base(5, 3);
  const Matrix mixed = inject_cycle(base.p, 0.4, 5, 4).matrix();
  // Every agent sits on the five-cycle; each changed entry is the mixture with 0.9 or 0.1.
  for (Index a = 0; a < 5; ++a) {
    for (Index b = 0; b < 5; ++b) {
      if (a == b || mixed(a, b) == base.p(a, b)) continue;
      const double hi = 0.6 * base.p(a, b) + 0.4 * 0.9;
      const double lo = 1.0 - (0.6 * base.p(b, a) + 0.4 * 0.9);
      EXPECT_TRUE(std::abs(mixed(a, b) - hi) < 1e-15 || std::abs(mixed(a, b) - lo) < 1e-15);
    }
  }
}

TEST(SampleDataset, MissingAndSizes) {
  const ProbTournament p(test::example2());
  EXPECT_EQ(sample_dataset(p, 50, 0.0, 1.0, 1).size(), 0u);
  const ComparisonDataset full = sample_dataset(p, 50, 0.0, 0.0, 1);
  EXPECT_EQ(full.size(), 6u * 50u);
  EXPECT_EQ(full.num_agents(), 4);
  EXPECT_EQ(full.agents().name(0), "A");
  const ComparisonDataset half = sample_dataset(ProbTournament::uniform(40), 1, 0.0, 0.5, 2);
  EXPECT_NEAR(static_cast<double>(half.size()) / 780.0, 0.5, 0.06);
}

TEST(SampleDataset, HoeffdingConvergence) {
  std::mt19937_64 rng(31);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ProbTournament p(test::random_tournament(5, 0.0, rng));
    const ComparisonDataset d = sample_dataset(p, 5000, 0.0, 0.0, seed);
    good += max_entry_error(empirical_tournament(d).matrix(), p.matrix()) < 0.03;
  }
  EXPECT_GE(good, 99);
}

TEST(SampleDataset, FullNoiseSymmetrizes) {
  const ProbTournament p(test::example2());
  const ComparisonDataset d = sample_dataset(p, 20000, 0.5, 0.0, 3);
  EXPECT_LT(max_entry_error(empirical_tournament(d).matrix(), Matrix::Constant(4, 4, 0.5)), 0.02);
}

TEST(SampleDataset, NoiseFlipsLabels) {
  const ProbTournament p(test::example2());
  const ComparisonDataset d = sample_dataset(p, 20000, 0.2, 0.0, 4);
  const Matrix expect = (0.8 * p.matrix().array() + 0.2 * (1.0 - p.matrix().array())).matrix();
  EXPECT_LT(max_entry_error(empirical_tournament(d).matrix(), expect), 0.02);
}

TEST(GenInstance, ThreeCycle) {
  SynthConfig c;
  c.n = 3;
  c.rho = 1.0;
  c.cycle_size = 3;
  c.m = 100;
  const SynthInstance inst = gen_instance(c);
  EXPECT_EQ(inst.truth_tc, test::all_agents(3));
  EXPECT_EQ(inst.truth_uc, test::all_agents(3));
  EXPECT_EQ(inst.dataset.size(), 300u);
}

TEST(GenInstance, TransitiveGivesTopStrength) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SynthConfig c;
    c.n = 9;
    c.seed = seed;
    const SynthInstance inst = gen_instance(c);
    Index top = 0;
    inst.lambda_true.maxCoeff(&top);
    EXPECT_EQ(inst.truth_tc, AgentSet{top});
    EXPECT_EQ(inst.truth_uc, AgentSet{top});
  }
}

TEST(GenInstance, Deterministic) {
  SynthConfig c;
  c.n = 7;
  c.rho = 0.6;
  c.cycle_size = 0;
  c.eta = 0.1;
  c.mu = 0.2;
  c.m = 30;
  c.seed = 77;
  const SynthInstance x = gen_instance(c);
  const SynthInstance y = gen_instance(c);
  EXPECT_EQ(x.truth_p.matrix(), y.truth_p.matrix());
  EXPECT_EQ(x.dataset, y.dataset);
  EXPECT_EQ(x.truth_tc, y.truth_tc);
  EXPECT_EQ(x.lambda_true, y.lambda_true);
  EXPECT_EQ(x.instance_seed, y.instance_seed);
  c.seed = 78;
  EXPECT_NE(gen_instance(c).lambda_true, x.lambda_true);
}

TEST(GenInstance, ValidatesConfig) {
  SynthConfig c;
  c.rho = 1.5;
  EXPECT_THROW(gen_instance(c), ConfigError);
  c = SynthConfig{};
  c.n = 4;
  c.rho = 0.5;
  c.cycle_size = 6;
  EXPECT_THROW(gen_instance(c), ConfigError);
  c.rho = 0.0;
  EXPECT_NO_THROW(gen_instance(c));
  c = SynthConfig{};
  c.eta = 0.7;
  EXPECT_THROW(gen_instance(c), ConfigError);
}

TEST(SampleSize, Examples) {
  EXPECT_EQ(sample_size_for_recovery(20, 0.1, 0.05), 447);
  EXPECT_EQ(sample_size_for_recovery(20, 0.1, 0.05),
            static_cast<long>(std::ceil(50.0 * std::log(7600.0))));
  EXPECT_GE(sample_size_for_recovery(2, 0.5, 0.5), 1);
  for (Index n = 4; n <= 64; ++n) {
    const long v = sample_size_for_recovery(n, 0.1, 0.05);
    EXPECT_LT(sample_size_for_recovery(2 * n, 0.1, 0.05) - v, v);
    EXPECT_GE(sample_size_for_recovery(n + 1, 0.1, 0.05), v);
  }
  EXPECT_THROW(sample_size_for_recovery(20, 0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(sample_size_for_recovery(20, 0.6, 0.05), std::invalid_argument);
  EXPECT_THROW(sample_size_for_recovery(20, 0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(sample_size_for_recovery(1, 0.1, 0.05), std::invalid_argument);
}

// With the Hoeffding sample size the sign of every pair is recovered.
TEST(SampleSize, EmpiricalRecovery) {
  for (Index n : {5, 10}) {
    for (double delta : {0.1, 0.2}) {
      std::mt19937_64 rng(static_cast<std::uint64_t>(n * 1000 + delta * 100));
      const int m = static_cast<int>(sample_size_for_recovery(n, delta, 0.05));
      int good = 0;
      for (std::uint64_t trial = 0; trial < 200; ++trial) {
        const ProbTournament p(test::random_tournament(n, delta, rng));
        const ComparisonDataset d = sample_dataset(p, m, 0.0, 0.0, trial);
        const ProbTournament e = empirical_tournament(d);
        const HardTournament truth = threshold(p);
        const HardTournament est = threshold(e);
        good += !est.has_ties() && est.adjacency() == truth.adjacency();
      }
      EXPECT_GE(good, 190) << "n=" << n << " delta=" << delta;
    }
  }
}
