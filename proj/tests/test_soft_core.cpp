#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ste/gradcheck.hpp"
#include "ste/soft_core.hpp"
#include "support.hpp"

using namespace ste;

namespace {

double direct_softmin(const std::vector<double>& z, double tau) {
  double s = 0.0;
  const double lo = *std::min_element(z.begin(), z.end());
  for (double v : z) s += std::exp(-(v - lo) / tau);
  return lo - tau * std::log(s);
}

double direct_boltzmann(const std::vector<double>& z, double tau) {
  const double hi = *std::max_element(z.begin(), z.end());
  double num = 0.0, den = 0.0;
  for (double v : z) {
    const double w = std::exp((v - hi) / tau);
    num += v * w;
    den += w;
  }
  return num / den;
}

// cover(c,a) straight from the formula.
double direct_cover(const Matrix& d, Index c, Index a, double tau) {
  std::vector<double> z;
  for (Index b = 0; b < d.rows(); ++b) z.push_back(d(a, b) - d(c, b));
  const double agg = std::max(0.0, direct_boltzmann(z, tau));
  return std::clamp(d(c, a) * (1.0 - agg), 0.0, 1.0);
}

SoftConfig config(double tau, int K = 0) {
  SoftConfig c;
  c.tau = tau;
  if (K > 0) c.max_path_length = K;
  return c;
}

double min_margin(const Matrix& p) {
  double m = 1.0;
  for (Index a = 0; a < p.rows(); ++a) {
    for (Index b = a + 1; b < p.rows(); ++b) m = std::min(m, std::abs(p(a, b) - 0.5));
  }
  return m;
}

int classification_errors(const ProbTournament& p, double tau) {
  const CoreScores s = ste_scores(p, config(tau));
  const HardTournament hard = threshold(p);
  const AgentSet tc = top_cycle(hard);
  const AgentSet uc = uncovered_set(hard);
  const AgentSet stc = soft_top_cycle(s);
  const AgentSet suc = soft_uncovered_set(s);
  int errors = 0;
  for (Index a = 0; a < p.size(); ++a) {
    errors += std::binary_search(tc.begin(), tc.end(), a) != std::binary_search(stc.begin(), stc.end(), a);
    errors += std::binary_search(uc.begin(), uc.end(), a) != std::binary_search(suc.begin(), suc.end(), a);
  }
  return errors;
}

Index argmax(const Vector& v) {
  Index i = 0;
  v.maxCoeff(&i);
  return i;
}

}  // namespace

TEST(SoftEdges, WalkthroughMatrixToThreeDecimals) {
  const Matrix d = soft_edges(ProbTournament(test::walkthrough()), 0.1);
  EXPECT_LE((d - test::walkthrough_edges_rounded()).cwiseAbs().maxCoeff(), 5e-4 + 1e-12);
  EXPECT_NEAR(d(0, 1), 0.881, 5e-4);
}

TEST(SoftEdges, HalfIsHalfAndComplementary) {
  const Matrix d = soft_edges(ProbTournament::uniform(3), 0.37);
  EXPECT_TRUE(d.isApprox(Matrix::Constant(3, 3, 0.5)));
  std::mt19937_64 rng(1);
  const Matrix e = soft_edges(ProbTournament(test::random_tournament(6, 0.0, rng)), 0.05);
  EXPECT_LT((e + e.transpose() - Matrix::Ones(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(soft_edges(ProbTournament::uniform(2), 0.0), std::invalid_argument);
}

TEST(SoftReach, Examples) {
  Matrix cyc = Matrix::Zero(3, 3);
  cyc(0, 1) = cyc(1, 2) = cyc(2, 0) = 1.0;
  const Matrix r = soft_reach(cyc, 2);
  for (Index a = 0; a < 3; ++a) {
    for (Index b = 0; b < 3; ++b) {
      if (a != b) {
        EXPECT_GE(r(a, b), 1.0);
      }
    }
  }
  EXPECT_TRUE(soft_reach(Matrix::Zero(4, 4), 3).isZero());
  const Matrix d = soft_edges(ProbTournament(test::walkthrough()), 0.1);
  const Matrix d2 = test::naive_matmul(d, d);
  const Matrix expect = d + d2 + test::naive_matmul(d2, d);
  EXPECT_LT((soft_reach(d, 3) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TopCycleScores, WalkthroughOrderingAndExactValues) {
  const Matrix d = soft_edges(ProbTournament(test::walkthrough()), 0.1);
  const Matrix d2 = test::naive_matmul(d, d);
  const Matrix r = d + d2 + test::naive_matmul(d2, d);
  const Vector t = top_cycle_scores(soft_reach(d, 3), 0.1);
  for (Index a = 0; a < 4; ++a) {
    std::vector<double> row;
    for (Index b = 0; b < 4; ++b) {
      if (b != a) row.push_back(r(a, b));
    }
    EXPECT_NEAR(t(a), direct_softmin(row, 0.1), 1e-12);
  }
  EXPECT_GT(t(0), t(1));
  EXPECT_GT(t(1), t(2));
  EXPECT_GT(t(2), t(3));
}

TEST(TopCycleScores, ZeroRowAndDegenerate) {
  Matrix r = Matrix::Constant(4, 4, 2.0);
  r.row(2).setZero();
  const double tau = 0.1;
  const Vector t = top_cycle_scores(r, tau);
  EXPECT_LE(t(2), 0.0);
  EXPECT_GE(t(2), -tau * std::log(3.0));
  EXPECT_EQ(top_cycle_scores(Matrix::Constant(1, 1, 0.5), tau)(0), 0.0);
  EXPECT_THROW(top_cycle_scores(Matrix(0, 0), tau), std::invalid_argument);
}

TEST(TopCycleScores, CondorcetWinnerNearOne) {
  const CoreScores s = ste_scores(ProbTournament(test::example2()), config(0.01, 3));
  EXPECT_GE(s.t(0), 1.0 - 1e-2);
}

TEST(CoverScores, HardLimits) {
  const Matrix d2 = soft_edges(ProbTournament(test::example2()), 0.01);
  EXPECT_NEAR(cover_scores(d2, 0.01)(0, 1), 1.0, 0.05);
  const Matrix d1 = soft_edges(ProbTournament(test::example1()), 0.01);
  EXPECT_NEAR(cover_scores(d1, 0.01)(0, 1), 0.0, 0.05);
}

TEST(CoverScores, AllHalf) {
  const Matrix c = cover_scores(Matrix::Constant(4, 4, 0.5), 0.1);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(c(i, j), i == j ? 0.0 : 0.5);
  }
}

TEST(CoverScores, MatchesDirectFormula) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + trial % 6;
    const double tau = 0.02 + 0.1 * (trial % 3);
    const Matrix d = soft_edges(ProbTournament(test::random_tournament(n, 0.0, rng)), 0.15);
    const Matrix c = cover_scores(d, tau);
    for (Index x = 0; x < n; ++x) {
      for (Index a = 0; a < n; ++a) {
        EXPECT_NEAR(c(x, a), x == a ? 0.0 : direct_cover(d, x, a, tau), 1e-12);
        EXPECT_GE(c(x, a), 0.0);
        EXPECT_LE(c(x, a), 1.0);
      }
    }
  }
}

TEST(UncoveredScores, Examples) {
  const SoftConfig cfg = config(0.01);
  EXPECT_TRUE(uncovered_scores(Matrix::Zero(4, 4), cfg).isApprox(Vector::Ones(4)));
  Matrix cover = Matrix::Zero(3, 3);
  cover(1, 0) = 1.0;
  EXPECT_NEAR(uncovered_scores(cover, cfg)(0), 0.0, 1e-12);
  EXPECT_EQ(uncovered_scores(Matrix::Zero(1, 1), cfg)(0), 1.0);

  const CoreScores s = ste_scores(ProbTournament(test::example2()), cfg);
  EXPECT_EQ(argmax(s.u), 0);
}

TEST(UncoveredScores, SquashedSmaxVariant) {
  SoftConfig cfg = config(0.2);
  cfg.uc_variant = UncoveredVariant::squashed_smax;
  cfg.beta = 4.0;
  std::mt19937_64 rng(43);
  const Matrix d = soft_edges(ProbTournament(test::random_tournament(5, 0.05, rng)), 0.2);
  const Matrix cover = cover_scores(d, 0.2);
  const Vector u = uncovered_scores(cover, cfg);
  for (Index a = 0; a < 5; ++a) {
    double s = 0.0;
    std::vector<double> col;
    for (Index c = 0; c < 5; ++c) {
      if (c != a) col.push_back(cover(c, a));
    }
    const double hi = *std::max_element(col.begin(), col.end());
    for (double v : col) s += std::exp((v - hi) / 0.2);
    const double smax_value = hi + 0.2 * std::log(s);
    EXPECT_NEAR(u(a), 1.0 - test::naive_sigmoid(4.0 * smax_value), 1e-12);
    EXPECT_LE(u(a), 0.5);
  }
  EXPECT_EQ(uncovered_variant_from_string("squashed-smax"), UncoveredVariant::squashed_smax);
  EXPECT_THROW(uncovered_variant_from_string("softmax"), ConfigError);
}

TEST(SteScores, SymmetricCycleGivesEqualScores) {
  for (double tau : {0.01, 0.1, 1.0}) {
    const CoreScores s = ste_scores(ProbTournament(test::example1()), config(tau));
    EXPECT_NEAR(s.t(0), s.t(1), 1e-12);
    EXPECT_NEAR(s.t(1), s.t(2), 1e-12);
    EXPECT_NEAR(s.u(0), s.u(1), 1e-12);
    EXPECT_NEAR(s.u(1), s.u(2), 1e-12);
  }
}

TEST(SteScores, CondorcetExample) {
  const CoreScores s = ste_scores(ProbTournament(test::example2()), config(0.01, 3));
  EXPECT_EQ(argmax(s.t), 0);
  EXPECT_EQ(argmax(s.u), 0);
  EXPECT_EQ(s.config.max_path_length, 3);
  EXPECT_EQ(s.config.softmin_temperature(), 0.01);
}

TEST(SteScores, SingleAgent) {
  const CoreScores s = ste_scores(ProbTournament::uniform(1), config(0.1));
  EXPECT_EQ(s.t(0), 0.0);
  EXPECT_EQ(s.u(0), 1.0);
}

TEST(SteScores, RandomSixAgentCoresAtLowTemperature) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 100; ++trial) {
    const ProbTournament p(test::random_tournament(6, 0.05, rng));
    const CoreScores s = ste_scores(p, config(0.005, 5));
    const HardTournament hard = threshold(p);
    EXPECT_EQ(soft_top_cycle(s), top_cycle(hard));
    EXPECT_EQ(soft_uncovered_set(s), uncovered_set(hard));
  }
}

TEST(SteScores, InvalidConfig) {
  SoftConfig bad = config(0.1);
  bad.alpha = 0.0;
  EXPECT_THROW(ste_scores(ProbTournament::uniform(3), bad), ConfigError);
  bad = config(-1.0);
  EXPECT_THROW(ste_scores(ProbTournament::uniform(3), bad), ConfigError);
  bad = config(0.1);
  bad.max_path_length = 0;
  EXPECT_THROW(ste_scores(ProbTournament::uniform(3), bad), ConfigError);
}

TEST(Anneal, Schedule) {
  const AnnealSchedule s{1.0, 0.01, 2};
  EXPECT_EQ(anneal(s, 0), 1.0);
  EXPECT_EQ(anneal(s, 2), 0.01);
  EXPECT_NEAR(anneal(s, 1), 0.1, 1e-15);
  EXPECT_THROW(anneal(s, 3), std::invalid_argument);
  const AnnealSchedule long_run{2.0, 0.003, 50};
  for (int k = 0; k < 50; ++k) EXPECT_GE(anneal(long_run, k), anneal(long_run, k + 1));
  EXPECT_THROW(anneal(AnnealSchedule{0.1, 1.0, 3}, 0), ConfigError);
}

TEST(CoreThreshold, Rules) {
  Vector v(4);
  v << 0.2, 0.6, 3.0, 1.4;
  EXPECT_EQ(CoreThreshold::absolute().apply(v), (AgentSet{1, 2, 3}));
  EXPECT_EQ(CoreThreshold::relative(0.5).apply(v), (AgentSet{2}));
}

// Descending through the temperature ladder, the thresholded sets settle on
// the exact solutions.
TEST(Properties, ZeroTemperatureConsistency) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const ProbTournament p(test::random_tournament(size(rng), 0.05, rng));
    EXPECT_EQ(classification_errors(p, 0.01), 0);
  }
}

TEST(Properties, FiniteTemperatureDecay) {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> size(3, 7);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = test::random_tournament(size(rng), 0.05, rng);
    const ProbTournament p(m);
    const double delta = min_margin(m);
    int previous = classification_errors(p, 0.2);
    double tau = 0.2;
    while (tau > delta / 10.0) {
      tau /= 2.0;
      const int now = classification_errors(p, tau);
      EXPECT_LE(now, previous) << "tau " << tau;
      previous = now;
    }
    EXPECT_EQ(previous, 0);
  }
}

TEST(Properties, CondorcetUniqueness) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 7;
    const Index w = static_cast<Index>(trial) % n;
    const ProbTournament p(test::planted_condorcet(n, w, 0.05, rng));
    const CoreScores s = ste_scores(p, config(0.01));
    EXPECT_EQ(argmax(s.t), w);
    EXPECT_EQ(argmax(s.u), w);
    for (Index a = 0; a < n; ++a) {
      if (a != w) {
        EXPECT_GT(s.t(w), s.t(a));
      }
    }
  }
}

namespace {

// Gradient of t(a) with respect to every entry of P, entries treated as independent.
Matrix top_cycle_gradient(const Matrix& p, const SoftConfig& cfg, Index a) {
  Tape tape;
  const NodeId in = tape.input(p);
  const ScoreNodes s = record_ste_scores(tape, in, cfg);
  Matrix pick = Matrix::Zero(p.rows(), 1);
  pick(a, 0) = 1.0;
  return tape.gradient(tape.weighted_sum(s.top_cycle, pick)).wrt(in);
}

}  // namespace

TEST(Properties, SoftMonotonicityPartial) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 6;
    const Matrix p = test::random_tournament(n, 0.0, rng);
    const SoftConfig cfg = config(0.05 + 0.05 * (trial % 4));
    for (Index a = 0; a < n; ++a) {
      const Matrix g = top_cycle_gradient(p, cfg, a);
      for (Index b = 0; b < n; ++b) {
        if (b != a) {
          EXPECT_GE(g(a, b), -1e-9);
        }
      }
    }
  }
}

// Moving P(a,b) and P(b,a) together only touches t(a) through D(b,a) on paths
// that return to a, which needs at least three steps.
TEST(Properties, SoftMonotonicityWithComplementShortPaths) {
  std::mt19937_64 rng(68);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 6;
    const Matrix p = test::random_tournament(n, 0.0, rng);
    const SoftConfig cfg = config(0.05 + 0.05 * (trial % 4), std::min<int>(2, static_cast<int>(n) - 1));
    for (Index a = 0; a < n; ++a) {
      const Matrix g = top_cycle_gradient(p, cfg, a);
      for (Index b = 0; b < n; ++b) {
        if (b != a) {
          EXPECT_GE(g(a, b) - g(b, a), -1e-9);
        }
      }
    }
  }
}

TEST(Properties, SoftMonotonicityWithComplementFailsForLongPaths) {
  const auto instance = [](double x) {
    Matrix p(4, 4);
    p << 0.5, x, 0.9, 0.9,
         1.0 - x, 0.5, 0.1, 0.1,
         0.1, 0.9, 0.5, 0.9,
         0.1, 0.9, 0.1, 0.5;
    return ProbTournament(p, 1e-12);
  };
  const double lo = ste_scores(instance(0.7), config(0.1, 3)).t(0);
  const double hi = ste_scores(instance(0.8), config(0.1, 3)).t(0);
  EXPECT_NEAR(lo, 2.9744153863218488, 1e-10);
  EXPECT_NEAR(hi, 2.918925053255567, 1e-10);
  EXPECT_LT(hi, lo);
  EXPECT_LT(ste_scores(instance(0.7), config(0.1, 2)).t(0),
            ste_scores(instance(0.8), config(0.1, 2)).t(0));
}

TEST(Properties, Continuity) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  const double eps = 1e-4;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 3 + trial % 5;
    const Matrix p = test::random_tournament(n, 0.0, rng);
    Matrix dir = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n; ++b) {
        dir(a, b) = noise(rng);
        dir(b, a) = -dir(a, b);
      }
    }
    const SoftConfig cfg = config(0.1);
    const auto clamp01 = [](Matrix m) { return m.cwiseMax(0.0).cwiseMin(1.0).eval(); };
    const CoreScores base = ste_scores(ProbTournament(p), cfg);
    const auto change = [&](double scale) {
      const CoreScores s = ste_scores(ProbTournament(clamp01(p + scale * dir), 1e-9), cfg);
      return std::max((s.t - base.t).cwiseAbs().maxCoeff(), (s.u - base.u).cwiseAbs().maxCoeff());
    };
    // Fitted local constant from a ten-times smaller step; a jump would break it.
    const double c_fit = change(eps / 10) / (eps / 10);
    EXPECT_LE(change(eps), 2.0 * c_fit * eps + 1e-12);
    EXPECT_LT(c_fit, 1e3);
  }
}

TEST(Properties, RelabelingPermutesScores) {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + trial % 6;
    const ProbTournament p(test::random_tournament(n, 0.0, rng));
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const CoreScores s = ste_scores(p, config(0.1));
    const CoreScores q = ste_scores(relabel(p, perm), config(0.1));
    for (Index a = 0; a < n; ++a) {
      EXPECT_NEAR(q.t(perm[static_cast<std::size_t>(a)]), s.t(a), 1e-10);
      EXPECT_NEAR(q.u(perm[static_cast<std::size_t>(a)]), s.u(a), 1e-10);
    }
  }
}

TEST(Properties, GradientHealth) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 2 + trial % 5;
    const Matrix p = test::random_tournament(n, 0.0, rng);
    const SoftConfig cfg = config(0.15);
    for (int which = 0; which < 2; ++which) {
      const auto record = [&](Tape& t, NodeId in) {
        const ScoreNodes s = record_ste_scores(t, in, cfg);
        return t.mean(which == 0 ? s.top_cycle : s.uncovered);
      };
      const auto f = [&](const Matrix& x) {
        Tape t;
        return t.scalar(record(t, t.input(x)));
      };
      Tape t;
      const NodeId in = t.input(p);
      const Matrix g = t.gradient(record(t, in)).wrt(in);
      EXPECT_LT(check_gradient(f, g, p).relative_error, 1e-4) << "n=" << n << " which=" << which;
    }
  }
}

TEST(Properties, TapeMatchesPlainScores) {
  std::mt19937_64 rng(83);
  const Matrix p = test::random_tournament(6, 0.0, rng);
  const SoftConfig cfg = config(0.1);
  Tape t;
  const ScoreNodes s = record_ste_scores(t, t.input(p), cfg);
  const CoreScores plain = ste_scores(ProbTournament(p), cfg);
  EXPECT_LT((t.value(s.top_cycle) - plain.t).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.value(s.uncovered) - plain.u).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Properties, HardLimitInclusion) {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    const ProbTournament p(test::random_tournament(2 + trial % 7, 0.05, rng));
    const CoreScores s = ste_scores(p, config(0.01));
    const AgentSet tc = soft_top_cycle(s);
    const AgentSet uc = soft_uncovered_set(s);
    EXPECT_TRUE(std::includes(tc.begin(), tc.end(), uc.begin(), uc.end()));
  }
}
