#include "ste/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ste/io.hpp"

namespace ste {

namespace {

namespace pt = boost::property_tree;

using Setter = std::function<void(const std::string&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError("config key '" + key + "': cannot read '" + value + "' as " + expected);
}

template <class T>
T parse_number(const std::string& key, const std::string& s, const char* expected) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, expected);
  return v;
}

double parse_real(const std::string& key, const std::string& s) {
  return parse_number<double>(key, s, "a real number");
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  bad_value(key, s, "a boolean (true/false)");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& s,
                          T (*one)(const std::string&, const std::string&)) {
  std::vector<T> out;
  for (const std::string& item : split_csv_line(s)) out.push_back(one(key, item));
  if (out.empty()) bad_value(key, s, "a non-empty comma-separated list");
  return out;
}

Index parse_index(const std::string& key, const std::string& s) {
  return parse_number<Index>(key, s, "an integer");
}
int parse_int(const std::string& key, const std::string& s) {
  return parse_number<int>(key, s, "an integer");
}

template <class T, class F>
T parse_enum(const std::string& key, const std::string& s, F from) {
  try {
    return from(s);
  } catch (const std::exception& e) {
    bad_value(key, s, std::string("a known option (") + e.what() + ")");
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

template <class T, class F>
std::string join_as(const std::vector<T>& v, F f) {
  std::vector<std::string> s;
  for (const T& x : v) s.push_back(f(x));
  return join(s);
}

std::string fmt(double x) { return format_double(x); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::map<std::string, std::map<std::string, Setter>> setters(ExperimentConfig& c) {
  std::map<std::string, std::map<std::string, Setter>> t;
  auto& run = t["run"];
  run["mode"] = [&c](const std::string& v) { c.mode = parse_enum<Mode>("run.mode", v, mode_from_string); };
  run["seed"] = [&c](const std::string& v) { c.seed = parse_number<std::uint64_t>("run.seed", v, "a seed"); };
  run["threads"] = [&c](const std::string& v) { c.threads = parse_int("run.threads", v); };
  run["reproducible"] = [&c](const std::string& v) { c.reproducible = parse_bool("run.reproducible", v); };
  run["comparisons"] = [&c](const std::string& v) { c.comparisons_path = v; };
  run["matrix"] = [&c](const std::string& v) { c.matrix_path = v; };

  auto& soft = t["soft"];
  soft["tau"] = [&c](const std::string& v) { c.soft.tau = parse_real("soft.tau", v); };
  soft["tau_softmin"] = [&c](const std::string& v) {
    if (v == "auto") c.soft.tau_softmin.reset(); else c.soft.tau_softmin = parse_real("soft.tau_softmin", v);
  };
  soft["tau_cover"] = [&c](const std::string& v) {
    if (v == "auto") c.soft.tau_cover.reset(); else c.soft.tau_cover = parse_real("soft.tau_cover", v);
  };
  soft["max_path_length"] = [&c](const std::string& v) {
    if (v == "auto") c.soft.max_path_length.reset();
    else c.soft.max_path_length = parse_int("soft.max_path_length", v);
  };
  soft["alpha"] = [&c](const std::string& v) { c.soft.alpha = parse_real("soft.alpha", v); };
  soft["uc_variant"] = [&c](const std::string& v) {
    c.soft.uc_variant = parse_enum<UncoveredVariant>("soft.uc_variant", v, uncovered_variant_from_string);
  };
  soft["beta"] = [&c](const std::string& v) { c.soft.beta = parse_real("soft.beta", v); };

  auto& th = t["threshold"];
  th["top_cycle"] = [&c](const std::string& v) {
    c.t_rule = parse_enum<CoreThreshold>("threshold.top_cycle", v, threshold_from_string);
  };
  th["uncovered"] = [&c](const std::string& v) {
    c.u_rule = parse_enum<CoreThreshold>("threshold.uncovered", v, threshold_from_string);
  };

  auto& tr = t["train"];
  tr["epochs"] = [&c](const std::string& v) { c.train.epochs = parse_int("train.epochs", v); };
  tr["learning_rate"] = [&c](const std::string& v) { c.train.learning_rate = parse_real("train.learning_rate", v); };
  tr["lambda_s"] = [&c](const std::string& v) { c.train.lambda_s = parse_real("train.lambda_s", v); };
  tr["lambda_c"] = [&c](const std::string& v) { c.train.lambda_c = parse_real("train.lambda_c", v); };
  tr["tau_max"] = [&c](const std::string& v) { c.train.anneal.tau_max = parse_real("train.tau_max", v); };
  tr["tau_min"] = [&c](const std::string& v) { c.train.anneal.tau_min = parse_real("train.tau_min", v); };
  tr["anneal_steps"] = [&c](const std::string& v) { c.train.anneal.steps = parse_int("train.anneal_steps", v); };
  tr["reg_every"] = [&c](const std::string& v) { c.train.reg_every = parse_int("train.reg_every", v); };
  tr["sharpness"] = [&c](const std::string& v) {
    c.train.sharpness = parse_enum<SharpnessForm>("train.sharpness", v, sharpness_form_from_string);
  };
  tr["target"] = [&c](const std::string& v) {
    c.train.target = parse_enum<ScoreTarget>("train.target", v, score_target_from_string);
  };
  tr["grad_tolerance"] = [&c](const std::string& v) { c.train.grad_tolerance = parse_real("train.grad_tolerance", v); };
  tr["check_gradients"] = [&c](const std::string& v) { c.train.check_gradients = parse_bool("train.check_gradients", v); };

  auto& sy = t["synth"];
  sy["n"] = [&c](const std::string& v) { c.synth.n = parse_index("synth.n", v); };
  sy["rho"] = [&c](const std::string& v) { c.synth.rho = parse_real("synth.rho", v); };
  sy["cycle_size"] = [&c](const std::string& v) { c.synth.cycle_size = parse_index("synth.cycle_size", v); };
  sy["cycle_win_prob"] = [&c](const std::string& v) { c.synth.cycle_win_prob = parse_real("synth.cycle_win_prob", v); };
  sy["eta"] = [&c](const std::string& v) { c.synth.eta = parse_real("synth.eta", v); };
  sy["mu"] = [&c](const std::string& v) { c.synth.mu = parse_real("synth.mu", v); };
  sy["m"] = [&c](const std::string& v) { c.synth.m = parse_int("synth.m", v); };

  auto& ex = t["experiment"];
  ex["n"] = [&c](const std::string& v) { c.grid.n = parse_list<Index>("experiment.n", v, parse_index); };
  ex["rho"] = [&c](const std::string& v) { c.grid.rho = parse_list<double>("experiment.rho", v, parse_real); };
  ex["mu"] = [&c](const std::string& v) { c.grid.mu = parse_list<double>("experiment.mu", v, parse_real); };
  ex["eta"] = [&c](const std::string& v) { c.grid.eta = parse_list<double>("experiment.eta", v, parse_real); };
  ex["m"] = [&c](const std::string& v) { c.grid.m = parse_list<int>("experiment.m", v, parse_int); };
  ex["cycle_size"] = [&c](const std::string& v) { c.grid.cycle_size = parse_index("experiment.cycle_size", v); };
  ex["cycle_win_prob"] = [&c](const std::string& v) {
    c.grid.cycle_win_prob = parse_real("experiment.cycle_win_prob", v);
  };
  ex["seeds"] = [&c](const std::string& v) { c.grid.seeds = parse_int("experiment.seeds", v); };
  ex["ste_tau"] = [&c](const std::string& v) { c.grid.ste_tau = parse_real("experiment.ste_tau", v); };

  auto& bs = t["bootstrap"];
  bs["replicates"] = [&c](const std::string& v) { c.boot.replicates = parse_int("bootstrap.replicates", v); };
  bs["level"] = [&c](const std::string& v) {
    c.boot.level = parse_enum<ResampleLevel>("bootstrap.level", v, resample_level_from_string);
  };
  bs["score"] = [&c](const std::string& v) {
    c.boot.score = parse_enum<ScoreTarget>("bootstrap.score", v, score_target_from_string);
  };
  bs["estimator"] = [&c](const std::string& v) {
    if (v == "empirical") c.boot.estimator = BootstrapEstimator::empirical;
    else if (v == "btl") c.boot.estimator = BootstrapEstimator::btl;
    else bad_value("bootstrap.estimator", v, "empirical or btl");
  };
  return t;
}

std::string optional_real(const std::optional<double>& v) { return v ? fmt(*v) : "auto"; }

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::solve: return "solve";
    case Mode::soft: return "soft";
    case Mode::fit: return "fit";
    case Mode::synth: return "synth";
    case Mode::experiment: return "experiment";
    case Mode::bootstrap: return "bootstrap";
  }
  return "solve";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::solve, Mode::soft, Mode::fit, Mode::synth, Mode::experiment, Mode::bootstrap}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

CoreThreshold threshold_from_string(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("threshold must look like absolute:0.5 or relative:0.5");
  const std::string kind = s.substr(0, colon);
  const double level = parse_real("threshold", s.substr(colon + 1));
  if (kind == "absolute") return CoreThreshold::absolute(level);
  if (kind == "relative") return CoreThreshold::relative(level);
  throw ConfigError("threshold kind must be absolute or relative, got '" + kind + "'");
}

std::string to_string(const CoreThreshold& rule) {
  return std::string(rule.kind == CoreThreshold::Kind::absolute ? "absolute:" : "relative:") +
         fmt(rule.level);
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  ExperimentConfig config;
  auto table = setters(config);
  for (const auto& [section, body] : tree) {
    auto sec = table.find(section);
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(source + ": key '" + section + "' outside any section");
    }
    if (sec == table.end()) throw ConfigError(source + ": unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError(source + ": unknown key '" + key + "' in [" + section + "]");
      }
      setter->second(node.data());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[run]\n"
    << "mode = " << to_string(c.mode) << '\n'
    << "seed = " << c.seed << '\n'
    << "threads = " << c.threads << '\n'
    << "reproducible = " << fmt_bool(c.reproducible) << '\n'
    << "comparisons = " << c.comparisons_path << '\n'
    << "matrix = " << c.matrix_path << '\n'
    << "\n[soft]\n"
    << "tau = " << fmt(c.soft.tau) << '\n'
    << "tau_softmin = " << optional_real(c.soft.tau_softmin) << '\n'
    << "tau_cover = " << optional_real(c.soft.tau_cover) << '\n'
    << "max_path_length = "
    << (c.soft.max_path_length ? std::to_string(*c.soft.max_path_length) : "auto") << '\n'
    << "alpha = " << fmt(c.soft.alpha) << '\n'
    << "uc_variant = " << to_string(c.soft.uc_variant) << '\n'
    << "beta = " << fmt(c.soft.beta) << '\n'
    << "\n[threshold]\n"
    << "top_cycle = " << to_string(c.t_rule) << '\n'
    << "uncovered = " << to_string(c.u_rule) << '\n'
    << "\n[train]\n"
    << "epochs = " << c.train.epochs << '\n'
    << "learning_rate = " << fmt(c.train.learning_rate) << '\n'
    << "lambda_s = " << fmt(c.train.lambda_s) << '\n'
    << "lambda_c = " << fmt(c.train.lambda_c) << '\n'
    << "tau_max = " << fmt(c.train.anneal.tau_max) << '\n'
    << "tau_min = " << fmt(c.train.anneal.tau_min) << '\n'
    << "anneal_steps = " << c.train.anneal.steps << '\n'
    << "reg_every = " << c.train.reg_every << '\n'
    << "sharpness = " << to_string(c.train.sharpness) << '\n'
    << "target = " << to_string(c.train.target) << '\n'
    << "grad_tolerance = " << fmt(c.train.grad_tolerance) << '\n'
    << "check_gradients = " << fmt_bool(c.train.check_gradients) << '\n'
    << "\n[synth]\n"
    << "n = " << c.synth.n << '\n'
    << "rho = " << fmt(c.synth.rho) << '\n'
    << "cycle_size = " << c.synth.cycle_size << '\n'
    << "cycle_win_prob = " << fmt(c.synth.cycle_win_prob) << '\n'
    << "eta = " << fmt(c.synth.eta) << '\n'
    << "mu = " << fmt(c.synth.mu) << '\n'
    << "m = " << c.synth.m << '\n'
    << "\n[experiment]\n"
    << "n = " << join_as(c.grid.n, [](Index v) { return std::to_string(v); }) << '\n'
    << "rho = " << join_as(c.grid.rho, fmt) << '\n'
    << "mu = " << join_as(c.grid.mu, fmt) << '\n'
    << "eta = " << join_as(c.grid.eta, fmt) << '\n'
    << "m = " << join_as(c.grid.m, [](int v) { return std::to_string(v); }) << '\n'
    << "cycle_size = " << c.grid.cycle_size << '\n'
    << "cycle_win_prob = " << fmt(c.grid.cycle_win_prob) << '\n'
    << "seeds = " << c.grid.seeds << '\n'
    << "ste_tau = " << fmt(c.grid.ste_tau) << '\n'
    << "\n[bootstrap]\n"
    << "replicates = " << c.boot.replicates << '\n'
    << "level = " << to_string(c.boot.level) << '\n'
    << "score = " << to_string(c.boot.score) << '\n'
    << "estimator = " << (c.boot.estimator == BootstrapEstimator::btl ? "btl" : "empirical") << '\n';
  return o.str();
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  if (threads < 1) throw ConfigError("threads must be >= 1");
  soft.validate();
  TrainConfig tc = train;
  tc.soft = soft;
  tc.validate();
  switch (mode) {
    case Mode::solve:
    case Mode::soft:
      if (matrix_path.empty() && comparisons_path.empty()) {
        throw ConfigError(to_string(mode) + " needs a matrix or comparisons file");
      }
      break;
    case Mode::fit:
    case Mode::bootstrap:
      if (comparisons_path.empty()) throw ConfigError(to_string(mode) + " needs a comparisons file");
      if (mode == Mode::bootstrap && boot.replicates < 2) {
        throw ConfigError("bootstrap.replicates must be >= 2");
      }
      break;
    case Mode::synth: {
      SynthConfig s = synth;
      s.seed = seed;
      s.validate();
      break;
    }
    case Mode::experiment:
      if (grid.seeds < 1) throw ConfigError("experiment.seeds must be >= 1");
      if (!(grid.ste_tau > 0.0)) throw ConfigError("experiment.ste_tau must be > 0");
      for (const SynthConfig& cell : grid_cells()) cell.validate();
      break;
  }
}

std::vector<SynthConfig> ExperimentConfig::grid_cells() const {
  std::vector<SynthConfig> cells;
  for (Index n : grid.n) {
    for (int m : grid.m) {
      for (double mu : grid.mu) {
        for (double eta : grid.eta) {
          for (double rho : grid.rho) {
            SynthConfig c;
            c.n = n;
            c.m = m;
            c.mu = mu;
            c.eta = eta;
            c.rho = rho;
            c.cycle_size = grid.cycle_size;
            c.cycle_win_prob = grid.cycle_win_prob;
            c.seed = seed;
            cells.push_back(c);
          }
        }
      }
    }
  }
  return cells;
}

RecoveryOptions ExperimentConfig::recovery_options() const {
  RecoveryOptions o;
  o.ste = soft.with_tau(grid.ste_tau);
  o.train = train;
  o.train.soft = soft;
  o.train.anneal.tau_min = std::min(grid.ste_tau, o.train.anneal.tau_max);
  o.t_rule = t_rule;
  o.u_rule = u_rule;
  o.seeds = grid.seeds;
  o.threads = threads;
  return o;
}

}  // namespace ste
