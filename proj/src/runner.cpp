#include "ste/runner.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ste/baselines.hpp"
#include "ste/evaluation.hpp"
#include "ste/io.hpp"
#include "ste/synthetic.hpp"

#ifndef STE_VERSION
#define STE_VERSION "0.0.0"
#endif

namespace ste {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigBegin = "--- config ---\n";
constexpr const char* kConfigEnd = "--- end config ---\n";

std::string fmt(double x) { return format_double(x); }

std::string set_string(const AgentSet& s, const AgentRegistry& agents) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + agents.name(s[i]);
  return out + "}";
}

bool contains(const AgentSet& s, Index a) {
  return std::binary_search(s.begin(), s.end(), a);
}

std::string csv_safe(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects output files so a failed run can take them back.
class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) {
    if (dir_.empty()) throw ConfigError("output directory must not be empty");
    created_ = !fs::exists(dir_);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  }

  std::string write(const std::string& name, const std::string& content) {
    const std::string path = (dir_ / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    files_.push_back(path);
    out << content;
    if (!out) throw DataError("write failed for '" + path + "'");
    return path;
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& f : files_) fs::remove(f, ec);
    if (created_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    files_.clear();
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  bool created_ = false;
  std::vector<std::string> files_;
};

struct Named {
  AgentRegistry agents;
  ProbTournament p;
};

Named load_tournament(const ExperimentConfig& c, Report& report) {
  if (!c.matrix_path.empty()) {
    LabeledTournament t = load_matrix(c.matrix_path);
    report.result("input", "matrix");
    return {std::move(t.agents), std::move(t.p)};
  }
  const ComparisonDataset data = load_comparisons(c.comparisons_path);
  report.result("input", "comparisons");
  report.result("records", std::to_string(data.size()));
  return {data.agents(), empirical_tournament(data)};
}

std::string scores_csv(const CoreScores& s, const AgentRegistry& agents, const AgentSet& tc,
                       const AgentSet& uc) {
  std::ostringstream o;
  o << "agent,t,u,soft_top_cycle,soft_uncovered\n";
  for (Index a = 0; a < agents.size(); ++a) {
    o << agents.name(a) << ',' << fmt(s.t(a)) << ',' << fmt(s.u(a)) << ',' << contains(tc, a)
      << ',' << contains(uc, a) << '\n';
  }
  return o.str();
}

void describe_soft(const CoreScores& s, const ExperimentConfig& c, Report& report) {
  report.result("tau", fmt(s.config.tau));
  report.result("tau_softmin", fmt(s.config.softmin_temperature()));
  report.result("tau_cover", fmt(s.config.cover_temperature()));
  report.result("max_path_length", std::to_string(s.config.path_length(s.t.size())));
  report.result("uc_variant", to_string(s.config.uc_variant));
  report.result("top_cycle_rule", c.t_rule.describe());
  report.result("uncovered_rule", c.u_rule.describe());
}

void run_solve(const ExperimentConfig& c, Report& report, OutputDir& out) {
  const Named in = load_tournament(c, report);
  const HardTournament hard = threshold(in.p);
  const AgentSet tc = top_cycle(hard);
  const AgentSet uc = uncovered_set(hard);
  const auto winner = condorcet_winner(hard);
  const MarginReport margin = margin_report(in.p);
  report.result("agents", std::to_string(in.p.size()));
  report.result("top_cycle", set_string(tc, in.agents));
  report.result("uncovered_set", set_string(uc, in.agents));
  report.result("condorcet_winner", winner ? in.agents.name(*winner) : "none");
  report.result("margin", fmt(margin.delta));
  std::ostringstream o;
  o << "agent,top_cycle,uncovered,condorcet_winner\n";
  for (Index a = 0; a < in.agents.size(); ++a) {
    o << in.agents.name(a) << ',' << contains(tc, a) << ',' << contains(uc, a) << ','
      << (winner && *winner == a) << '\n';
  }
  report.table("membership", o.str());
  out.write("membership.csv", o.str());
}

void run_soft(const ExperimentConfig& c, Report& report, OutputDir& out) {
  const Named in = load_tournament(c, report);
  const CoreScores s = ste_scores(in.p, c.soft);
  const AgentSet tc = c.t_rule.apply(s.t);
  const AgentSet uc = c.u_rule.apply(s.u);
  report.result("agents", std::to_string(in.p.size()));
  describe_soft(s, c, report);
  report.result("soft_top_cycle", set_string(tc, in.agents));
  report.result("soft_uncovered_set", set_string(uc, in.agents));
  const HardTournament hard = threshold(in.p);
  if (!hard.has_ties()) {
    report.result("exact_top_cycle", set_string(top_cycle(hard), in.agents));
    report.result("exact_uncovered_set", set_string(uncovered_set(hard), in.agents));
  }
  const std::string csv = scores_csv(s, in.agents, tc, uc);
  report.table("scores", csv);
  out.write("scores.csv", csv);
}

void run_fit(const ExperimentConfig& c, Report& report, OutputDir& out) {
  const ComparisonDataset data = load_comparisons(c.comparisons_path);
  TrainConfig tc = c.train;
  tc.soft = c.soft;
  const TrainResult r = train_ste(data, tc);
  const AgentRegistry& agents = data.agents();
  const AgentSet top = c.t_rule.apply(r.scores.t);
  const AgentSet unc = c.u_rule.apply(r.scores.u);
  report.result("records", std::to_string(data.size()));
  report.result("agents", std::to_string(data.num_agents()));
  report.result("epochs_run", std::to_string(r.loss_trace.size()));
  report.result("stop", r.stop == StopReason::gradient_norm ? "gradient_norm" : "epochs_exhausted");
  report.result("final_loss", r.loss_trace.empty() ? "nan" : fmt(r.loss_trace.back()));
  report.result("final_ce_loss", fmt(ce_loss(r.params, data)));
  describe_soft(r.scores, c, report);
  report.result("soft_top_cycle", set_string(top, agents));
  report.result("soft_uncovered_set", set_string(unc, agents));

  std::ostringstream strengths;
  strengths << "agent,lambda\n";
  for (Index a = 0; a < agents.size(); ++a) {
    strengths << agents.name(a) << ',' << fmt(r.params.lambda(a)) << '\n';
  }
  std::ostringstream loss;
  loss << "epoch,loss\n";
  for (std::size_t e = 0; e < r.loss_trace.size(); ++e) loss << e + 1 << ',' << fmt(r.loss_trace[e]) << '\n';
  std::ostringstream matrix;
  write_matrix(matrix, btl_tournament(r.params), agents);

  const std::string scores = scores_csv(r.scores, agents, top, unc);
  report.table("strengths", strengths.str());
  report.table("scores", scores);
  out.write("strengths.csv", strengths.str());
  out.write("scores.csv", scores);
  out.write("loss.csv", loss.str());
  out.write("fitted_matrix.csv", matrix.str());
}

void run_synth(const ExperimentConfig& c, Report& report, OutputDir& out) {
  SynthConfig sc = c.synth;
  sc.seed = c.seed;
  const SynthInstance inst = gen_instance(sc);
  const AgentRegistry& agents = inst.dataset.agents();
  report.result("agents", std::to_string(inst.truth_p.size()));
  report.result("records", std::to_string(inst.dataset.size()));
  report.result("attempts", std::to_string(inst.attempts));
  report.result("instance_seed", std::to_string(inst.instance_seed));
  report.result("truth_top_cycle", set_string(inst.truth_tc, agents));
  report.result("truth_uncovered_set", set_string(inst.truth_uc, agents));

  std::ostringstream truth;
  truth << "agent,lambda,top_cycle,uncovered\n";
  for (Index a = 0; a < agents.size(); ++a) {
    truth << agents.name(a) << ',' << fmt(inst.lambda_true(a)) << ',' << contains(inst.truth_tc, a)
          << ',' << contains(inst.truth_uc, a) << '\n';
  }
  std::ostringstream matrix;
  write_matrix(matrix, inst.truth_p, agents);
  std::ostringstream comparisons;
  write_comparisons(comparisons, inst.dataset);
  report.table("truth", truth.str());
  out.write("truth.csv", truth.str());
  out.write("truth_matrix.csv", matrix.str());
  out.write("comparisons.csv", comparisons.str());
}

void run_experiment(const ExperimentConfig& c, Report& report, OutputDir& out) {
  const std::vector<SynthConfig> cells = c.grid_cells();
  const std::vector<RecoveryRow> rows = recovery_curve(cells, c.recovery_options());
  const std::vector<RecoverySummary> summary = summarize(rows);

  std::ostringstream r;
  r << "cell,n,rho,cycle_size,eta,mu,m,seed_index,instance_seed,method,core,truth_size,"
       "predicted_size,precision,recall,f1,jaccard,agreement,degenerate,error\n";
  int errors = 0;
  for (const RecoveryRow& row : rows) {
    const SynthConfig& s = row.config;
    r << row.cell << ',' << s.n << ',' << fmt(s.rho) << ',' << s.resolved_cycle_size() << ','
      << fmt(s.eta) << ',' << fmt(s.mu) << ',' << s.m << ',' << row.seed_index << ',' << s.seed
      << ',' << row.method << ',' << row.core << ',' << row.truth_size << ','
      << row.predicted_size << ',' << fmt(row.metrics.precision) << ','
      << fmt(row.metrics.recall) << ',' << fmt(row.metrics.f1) << ','
      << fmt(row.metrics.jaccard) << ',' << row.agreement << ',' << row.degenerate << ','
      << csv_safe(row.error) << '\n';
    if (!row.error.empty()) ++errors;
  }
  std::ostringstream s;
  s << "cell,n,rho,cycle_size,eta,mu,m,method,core,runs,errors,degenerate,f1_mean,f1_std,"
       "jaccard_mean,jaccard_std,agreement_rate,truth_size_mean\n";
  for (const RecoverySummary& row : summary) {
    const SynthConfig& g = row.config;
    s << row.cell << ',' << g.n << ',' << fmt(g.rho) << ',' << g.resolved_cycle_size() << ','
      << fmt(g.eta) << ',' << fmt(g.mu) << ',' << g.m << ',' << row.method << ',' << row.core
      << ',' << row.runs << ',' << row.errors << ',' << row.degenerate << ','
      << fmt(row.f1_mean) << ',' << fmt(row.f1_std) << ',' << fmt(row.jaccard_mean) << ','
      << fmt(row.jaccard_std) << ',' << fmt(row.agreement_rate) << ','
      << fmt(row.truth_size_mean) << '\n';
  }
  report.result("cells", std::to_string(cells.size()));
  report.result("seeds", std::to_string(c.grid.seeds));
  report.result("rows", std::to_string(rows.size()));
  report.result("row_errors", std::to_string(errors));
  report.result("top_cycle_rule", c.t_rule.describe());
  report.result("uncovered_rule", c.u_rule.describe());
  report.table("summary", s.str());
  out.write("rows.csv", r.str());
  out.write("summary.csv", s.str());
}

void run_bootstrap(const ExperimentConfig& c, Report& report, OutputDir& out) {
  const ComparisonDataset data = load_comparisons(c.comparisons_path);
  const bool use_u = c.boot.score == ScoreTarget::uncovered;
  TrainConfig tc = c.train;
  tc.soft = c.soft;
  const SoftConfig soft = c.soft;
  const BootstrapEstimator estimator = c.boot.estimator;
  const ScorePipeline pipeline = [=](const ComparisonDataset& d) -> Vector {
    const ProbTournament p = estimator == BootstrapEstimator::btl
                                 ? btl_tournament(fit_btl(d, tc).params)
                                 : empirical_tournament(d);
    const CoreScores s = ste_scores(p, soft);
    return use_u ? s.u : s.t;
  };
  BootstrapOptions opt;
  opt.replicates = c.boot.replicates;
  opt.rule = use_u ? c.u_rule : c.t_rule;
  opt.seed = c.seed;
  opt.threads = c.threads;
  opt.level = c.boot.level;
  const BootstrapReport b = bootstrap(data, pipeline, opt);

  report.result("records", std::to_string(data.size()));
  report.result("agents", std::to_string(data.num_agents()));
  report.result("replicates", std::to_string(b.replicates));
  report.result("failed_replicates", std::to_string(b.failed));
  report.result("score", to_string(c.boot.score));
  report.result("rule", b.rule);
  report.result("level", to_string(c.boot.level));
  report.result("stability_jaccard", fmt(b.stability_jaccard));
  std::ostringstream o;
  o << "agent,inclusion_rate,mean_score,ci_low,ci_high\n";
  for (Index a = 0; a < data.num_agents(); ++a) {
    o << data.agents().name(a) << ',' << fmt(b.inclusion_rate(a)) << ',' << fmt(b.mean_score(a))
      << ',' << fmt(b.ci_low(a)) << ',' << fmt(b.ci_high(a)) << '\n';
  }
  report.table("bootstrap", o.str());
  out.write("bootstrap.csv", o.str());
}

}  // namespace

const char* version() { return STE_VERSION; }

void Report::meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
void Report::result(const std::string& key, const std::string& value) {
  results_.emplace_back(key, value);
}
void Report::table(const std::string& name, std::string csv) {
  tables_.emplace_back(name, std::move(csv));
}

std::string Report::render() const {
  std::ostringstream o;
  o << "# ste report\n";
  for (const auto& [k, v] : meta_) o << k << " = " << v << '\n';
  o << kConfigBegin << config_ << kConfigEnd;
  o << "--- results ---\n";
  for (const auto& [k, v] : results_) o << k << " = " << v << '\n';
  for (const auto& [name, csv] : tables_) o << "--- table " << name << " ---\n" << csv;
  return o.str();
}

std::string embedded_config(const std::string& text) {
  const auto begin = text.find(kConfigBegin);
  const auto end = text.find(kConfigEnd);
  if (begin == std::string::npos || end == std::string::npos || end < begin) {
    throw DataError("report has no embedded config");
  }
  const auto start = begin + std::char_traits<char>::length(kConfigBegin);
  return text.substr(start, end - start);
}

RunOutcome run(const ExperimentConfig& config) {
  config.validate();
  OutputDir out(config.out_dir);
  try {
    Report report;
    const std::string rendered = render_config(config);
    report.meta("tool", "ste");
    report.meta("version", version());
    report.meta("mode", to_string(config.mode));
    report.meta("seed", std::to_string(config.seed));
    report.meta("config_hash", "fnv1a64:" + fnv1a_hex(rendered));
    if (!config.reproducible) report.meta("timestamp", utc_timestamp());
    report.config(rendered);

    switch (config.mode) {
      case Mode::solve: run_solve(config, report, out); break;
      case Mode::soft: run_soft(config, report, out); break;
      case Mode::fit: run_fit(config, report, out); break;
      case Mode::synth: run_synth(config, report, out); break;
      case Mode::experiment: run_experiment(config, report, out); break;
      case Mode::bootstrap: run_bootstrap(config, report, out); break;
    }
    out.write("report.txt", report.render());
    RunOutcome outcome;
    outcome.files.push_back(out.files().back());
    for (std::size_t i = 0; i + 1 < out.files().size(); ++i) outcome.files.push_back(out.files()[i]);
    return outcome;
  } catch (...) {
    out.rollback();
    throw;
  }
}

}  // namespace ste
