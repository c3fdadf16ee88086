#include "ste/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ste/baselines.hpp"
#include "ste/parallel.hpp"
#include "ste/rng.hpp"

namespace ste {

namespace {

Index intersection_size(const AgentSet& x, const AgentSet& y) {
  Index count = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double jaccard(const AgentSet& x, const AgentSet& y) {
  if (x.empty() && y.empty()) return 1.0;
  const Index inter = intersection_size(x, y);
  return static_cast<double>(inter) / static_cast<double>(x.size() + y.size() - inter);
}

void check_members(const AgentSet& s, Index universe) {
  for (Index a : s) {
    if (a < 0 || a >= universe) {
      throw std::invalid_argument("set_metrics: agent " + std::to_string(a) +
                                  " outside universe of " + std::to_string(universe));
    }
  }
}

bool is_constant(const Vector& v) {
  return v.size() == 0 || v.maxCoeff() - v.minCoeff() < 1e-12;
}

}  // namespace

SetMetrics set_metrics(const AgentSet& predicted, const AgentSet& truth, Index universe) {
  check_members(predicted, universe);
  check_members(truth, universe);
  if (predicted.empty() && truth.empty()) return {1.0, 1.0, 1.0, 1.0};
  const double inter = static_cast<double>(intersection_size(predicted, truth));
  SetMetrics m;
  m.precision = predicted.empty() ? 0.0 : inter / static_cast<double>(predicted.size());
  m.recall = truth.empty() ? 0.0 : inter / static_cast<double>(truth.size());
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                      : 0.0;
  m.jaccard = jaccard(predicted, truth);
  return m;
}

std::string to_string(ResampleLevel level) {
  return level == ResampleLevel::record ? "record" : "pair";
}

ResampleLevel resample_level_from_string(const std::string& s) {
  if (s == "record") return ResampleLevel::record;
  if (s == "pair") return ResampleLevel::pair;
  throw ConfigError("unknown resample level '" + s + "' (expected record or pair)");
}

ComparisonDataset resample(const ComparisonDataset& data, ResampleLevel level,
                           std::uint64_t seed) {
  Rng rng(seed);
  const auto& records = data.records();
  std::vector<Comparison> out;
  out.reserve(records.size());
  if (level == ResampleLevel::record) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      out.push_back(records[rng.below(records.size())]);
    }
    return data.with_records(out);
  }
  std::map<std::pair<Index, Index>, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    by_pair[{std::min(r.a, r.b), std::max(r.a, r.b)}].push_back(i);
  }
  std::vector<const std::vector<std::size_t>*> groups;
  for (const auto& [key, idx] : by_pair) groups.push_back(&idx);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i : *groups[rng.below(groups.size())]) out.push_back(records[i]);
  }
  return data.with_records(out);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapReport bootstrap(const ComparisonDataset& data, const ScorePipeline& pipeline,
                          const BootstrapOptions& options) {
  if (options.replicates < 2) throw ConfigError("bootstrap: replicates must be >= 2");
  const Index n = data.num_agents();
  const auto B = static_cast<std::size_t>(options.replicates);

  std::vector<Vector> scores(B);
  std::vector<std::string> failures(B);
  parallel_for(B, options.threads, [&](std::size_t b) {
    try {
      const ComparisonDataset sample = resample(data, options.level, derive_seed(options.seed, b));
      Vector s = pipeline(sample);
      if (s.size() != n) throw DataError("pipeline returned the wrong number of scores");
      if (!all_finite(s)) throw NumericalError("pipeline returned non-finite scores");
      scores[b] = std::move(s);
    } catch (const std::exception& e) {
      failures[b] = e.what();
      if (failures[b].empty()) failures[b] = "unknown failure";
    }
  });

  std::vector<Vector> ok;
  std::vector<AgentSet> cores;
  int failed = 0;
  std::string first_failure;
  for (std::size_t b = 0; b < B; ++b) {
    if (!failures[b].empty()) {
      if (first_failure.empty()) first_failure = failures[b];
      ++failed;
      continue;
    }
    cores.push_back(options.rule.apply(scores[b]));
    ok.push_back(std::move(scores[b]));
  }
  if (static_cast<double>(failed) > options.max_failure_rate * static_cast<double>(B) ||
      ok.empty()) {
    std::ostringstream msg;
    msg << "bootstrap: " << failed << " of " << B << " replicates failed (first: "
        << first_failure << ")";
    throw NumericalError(msg.str());
  }

  BootstrapReport report;
  report.replicates = options.replicates;
  report.failed = failed;
  report.rule = options.rule.describe();
  report.inclusion_rate = Vector::Zero(n);
  report.ci_low.resize(n);
  report.ci_high.resize(n);
  report.mean_score.resize(n);
  const double count = static_cast<double>(ok.size());
  for (const AgentSet& core : cores) {
    for (Index a : core) report.inclusion_rate(a) += 1.0;
  }
  report.inclusion_rate /= count;
  std::vector<double> column(ok.size());
  for (Index a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < ok.size(); ++b) column[b] = ok[b](a);
    report.ci_low(a) = quantile(column, 0.025);
    report.ci_high(a) = quantile(column, 0.975);
    double sum = 0.0;
    for (double v : column) sum += v;
    report.mean_score(a) = sum / count;
  }
  if (cores.size() < 2) {
    report.stability_jaccard = 1.0;
  } else {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < cores.size(); ++i) {
      for (std::size_t j = i + 1; j < cores.size(); ++j) {
        sum += jaccard(cores[i], cores[j]);
        ++pairs;
      }
    }
    report.stability_jaccard = sum / static_cast<double>(pairs);
  }
  return report;
}

namespace {

struct Job {
  std::size_t cell;
  int seed_index;
};

RecoveryRow base_row(const Job& job, const SynthConfig& config, const std::string& method,
                     const std::string& core) {
  RecoveryRow row;
  row.cell = job.cell;
  row.config = config;
  row.seed_index = job.seed_index;
  row.method = method;
  row.core = core;
  return row;
}

RecoveryRow score_row(const Job& job, const SynthInstance& inst, const SynthConfig& config,
                      const std::string& method, const std::string& core, const Vector& scores,
                      const CoreThreshold& rule) {
  const AgentSet& truth = core == "tc" ? inst.truth_tc : inst.truth_uc;
  RecoveryRow row = base_row(job, config, method, core);
  const AgentSet predicted = rule.apply(scores);
  row.truth_size = static_cast<Index>(truth.size());
  row.predicted_size = static_cast<Index>(predicted.size());
  row.metrics = set_metrics(predicted, truth, inst.truth_p.size());
  row.agreement = core_agreement(Ranking::from_scores(scores), truth) ? 1 : 0;
  row.degenerate = inst.dataset.size() == 0 || is_constant(scores);
  return row;
}

RecoveryRow ranking_row(const Job& job, const SynthInstance& inst, const SynthConfig& config,
                        const std::string& method, const Ranking& ranking) {
  RecoveryRow row = base_row(job, config, method, "tc");
  const AgentSet predicted{ranking.top()};
  row.truth_size = static_cast<Index>(inst.truth_tc.size());
  row.predicted_size = 1;
  row.metrics = set_metrics(predicted, inst.truth_tc, inst.truth_p.size());
  row.agreement = core_agreement(ranking, inst.truth_tc) ? 1 : 0;
  row.degenerate = inst.dataset.size() == 0 || is_constant(ranking.scores);
  return row;
}

template <class F>
void guarded(std::vector<RecoveryRow>& rows, const Job& job, const SynthConfig& config,
             const std::string& method, std::initializer_list<const char*> cores, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    for (const char* core : cores) {
      RecoveryRow row = base_row(job, config, method, core);
      row.error = e.what();
      rows.push_back(std::move(row));
    }
  }
}

std::vector<RecoveryRow> run_instance(const Job& job, const SynthConfig& cell,
                                      const RecoveryOptions& options) {
  SynthConfig config = cell;
  config.seed = derive_seed(cell.seed, static_cast<std::uint64_t>(job.seed_index));
  std::vector<RecoveryRow> rows;
  std::optional<SynthInstance> inst;
  guarded(rows, job, config, "instance", {"tc"}, [&] { inst = gen_instance(config); });
  if (!inst) return rows;
  const SynthInstance& in = *inst;

  guarded(rows, job, config, "ste", {"tc", "uc"}, [&] {
    const TrainResult r = train_ste(in.dataset, options.train);
    rows.push_back(score_row(job, in, config, "ste", "tc", r.scores.t, options.t_rule));
    rows.push_back(score_row(job, in, config, "ste", "uc", r.scores.u, options.u_rule));
  });
  guarded(rows, job, config, "ste-empirical", {"tc", "uc"}, [&] {
    const CoreScores s = ste_scores(empirical_tournament(in.dataset), options.ste);
    rows.push_back(score_row(job, in, config, "ste-empirical", "tc", s.t, options.t_rule));
    rows.push_back(score_row(job, in, config, "ste-empirical", "uc", s.u, options.u_rule));
  });
  guarded(rows, job, config, "win-rate", {"tc"}, [&] {
    rows.push_back(ranking_row(job, in, config, "win-rate", win_rate(in.dataset)));
  });
  guarded(rows, job, config, "elo", {"tc"}, [&] {
    rows.push_back(ranking_row(job, in, config, "elo", elo(in.dataset)));
  });
  guarded(rows, job, config, "btl", {"tc"}, [&] {
    const FitResult fit = fit_btl(in.dataset, options.train);
    rows.push_back(ranking_row(job, in, config, "btl", btl_ranking(fit.params)));
  });
  guarded(rows, job, config, "rank-centrality", {"tc"}, [&] {
    rows.push_back(ranking_row(job, in, config, "rank-centrality",
                               rank_centrality(empirical_tournament(in.dataset))));
  });
  return rows;
}

}  // namespace

std::vector<RecoveryRow> recovery_curve(const std::vector<SynthConfig>& grid,
                                        const RecoveryOptions& options) {
  if (grid.empty()) throw ConfigError("recovery_curve: empty grid");
  if (options.seeds < 1) throw ConfigError("recovery_curve: seeds must be >= 1");
  options.train.validate();
  options.ste.validate();
  for (const SynthConfig& c : grid) c.validate();

  std::vector<Job> jobs;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    for (int s = 0; s < options.seeds; ++s) jobs.push_back({c, s});
  }
  std::vector<std::vector<RecoveryRow>> results(jobs.size());
  parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    results[j] = run_instance(jobs[j], grid[jobs[j].cell], options);
  });
  std::vector<RecoveryRow> rows;
  for (auto& r : results) {
    for (auto& row : r) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RecoverySummary> summarize(const std::vector<RecoveryRow>& rows) {
  using Key = std::tuple<std::size_t, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RecoveryRow*>> groups;
  for (const RecoveryRow& row : rows) {
    Key key{row.cell, row.method, row.core};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }
  const auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
  };

  std::vector<RecoverySummary> out;
  for (const Key& key : order) {
    const auto& members = groups[key];
    RecoverySummary s;
    s.cell = std::get<0>(key);
    s.config = members.front()->config;
    s.config.seed = 0;
    s.method = std::get<1>(key);
    s.core = std::get<2>(key);
    std::vector<double> f1, jac, truth;
    int agree = 0;
    int agree_n = 0;
    for (const RecoveryRow* r : members) {
      if (!r->error.empty()) {
        ++s.errors;
        continue;
      }
      ++s.runs;
      if (r->degenerate) ++s.degenerate;
      f1.push_back(r->metrics.f1);
      jac.push_back(r->metrics.jaccard);
      truth.push_back(static_cast<double>(r->truth_size));
      if (r->agreement >= 0) {
        agree += r->agreement;
        ++agree_n;
      }
    }
    std::tie(s.f1_mean, s.f1_std) = mean_std(f1);
    std::tie(s.jaccard_mean, s.jaccard_std) = mean_std(jac);
    s.truth_size_mean = mean_std(truth).first;
    s.agreement_rate = agree_n > 0 ? static_cast<double>(agree) / agree_n : -1.0;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ste
