#include "ste/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "ste/calibration.hpp"
#include "ste/gradcheck.hpp"
#include "ste/tape.hpp"

namespace ste {

namespace {

constexpr double kProbClamp = 1e-12;
constexpr double kEntropyEps = 1e-9;
constexpr int kMaxHalvings = 30;
// Below this gradient scale the finite differences are rounding noise.
constexpr double kGradientCheckFloor = 1e-7;
// Accepted steps double the trial step, up to this multiple of learning_rate.
constexpr double kMaxStepGrowth = 1 << 20;

}  // namespace

ComparisonDataset::ComparisonDataset(AgentRegistry agents) : agents_(std::move(agents)) {
  grow();
}

void ComparisonDataset::grow() {
  const Index n = agents_.size();
  if (wins_.rows() == n) return;
  Matrix bigger = Matrix::Zero(n, n);
  bigger.topLeftCorner(wins_.rows(), wins_.cols()) = wins_;
  wins_ = std::move(bigger);
}

void ComparisonDataset::add(Index a, Index b, int outcome) {
  const Index n = num_agents();
  if (a < 0 || b < 0 || a >= n || b >= n) {
    throw DataError("comparison references an unknown agent index");
  }
  if (a == b) {
    throw DataError("comparison of agent '" + agents_.name(a) + "' with itself");
  }
  if (outcome != 0 && outcome != 1) {
    throw DataError("outcome must be 0 or 1, got " + std::to_string(outcome));
  }
  records_.push_back({a, b, outcome});
  if (outcome == 1) {
    wins_(a, b) += 1.0;
  } else {
    wins_(b, a) += 1.0;
  }
}

void ComparisonDataset::add(const std::string& a, const std::string& b, int outcome) {
  if (a == b) {
    throw DataError("comparison of agent '" + a + "' with itself");
  }
  const Index ia = agents_.intern(a);
  const Index ib = agents_.intern(b);
  grow();
  add(ia, ib, outcome);
}

ComparisonDataset ComparisonDataset::with_records(const std::vector<Comparison>& records) const {
  ComparisonDataset out(agents_);
  out.records_.reserve(records.size());
  for (const auto& r : records) {
    out.add(r.a, r.b, r.outcome);
  }
  return out;
}

void BtlParams::fix_gauge() {
  if (lambda.size() > 0) {
    lambda.array() -= lambda.mean();
  }
}

std::string to_string(SharpnessForm f) {
  return f == SharpnessForm::entropy ? "entropy" : "abs-deviation";
}

SharpnessForm sharpness_form_from_string(const std::string& s) {
  if (s == "entropy") return SharpnessForm::entropy;
  if (s == "abs-deviation") return SharpnessForm::abs_deviation;
  throw ConfigError("unknown sharpness form '" + s + "' (expected entropy or abs-deviation)");
}

std::string to_string(ScoreTarget t) {
  return t == ScoreTarget::uncovered ? "uncovered" : "top-cycle";
}

ScoreTarget score_target_from_string(const std::string& s) {
  if (s == "uncovered") return ScoreTarget::uncovered;
  if (s == "top-cycle") return ScoreTarget::top_cycle;
  throw ConfigError("unknown score target '" + s + "' (expected uncovered or top-cycle)");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(lambda_s >= 0.0)) throw ConfigError("lambda_s must be >= 0");
  if (!(lambda_c >= 0.0)) throw ConfigError("lambda_c must be >= 0");
  if (reg_every < 1) throw ConfigError("reg_every must be >= 1");
  if (!(grad_tolerance >= 0.0)) throw ConfigError("grad_tolerance must be >= 0");
  anneal.validate();
  soft.validate();
}

GroundTruthMembership GroundTruthMembership::from_sets(Index n, const AgentSet& tc,
                                                       const AgentSet& uc) {
  GroundTruthMembership g;
  g.in_top_cycle.assign(static_cast<std::size_t>(n), false);
  g.in_uncovered.assign(static_cast<std::size_t>(n), false);
  for (Index a : tc) g.in_top_cycle.at(static_cast<std::size_t>(a)) = true;
  for (Index a : uc) {
    if (!g.in_top_cycle.at(static_cast<std::size_t>(a))) {
      throw DataError("ground truth: uncovered agent " + std::to_string(a) +
                      " is outside the top cycle");
    }
    g.in_uncovered[static_cast<std::size_t>(a)] = true;
  }
  return g;
}

namespace {

Vector indicator(const std::vector<bool>& bits) {
  Vector v(static_cast<Index>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) v(static_cast<Index>(i)) = bits[i] ? 1.0 : 0.0;
  return v;
}

}  // namespace

Vector GroundTruthMembership::top_cycle_indicator() const { return indicator(in_top_cycle); }
Vector GroundTruthMembership::uncovered_indicator() const { return indicator(in_uncovered); }

ProbTournament empirical_tournament(const ComparisonDataset& data) {
  const Index n = data.num_agents();
  const Matrix& w = data.wins();
  Matrix p = Matrix::Constant(n, n, 0.5);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      const double total = w(a, b) + w(b, a);
      if (total > 0.0) {
        p(a, b) = w(a, b) / total;
        p(b, a) = w(b, a) / total;
      }
    }
  }
  return ProbTournament(std::move(p));
}

double btl_probability(const BtlParams& params, Index a, Index b) {
  return sigmoid(params.lambda(a) - params.lambda(b));
}

ProbTournament btl_tournament(const BtlParams& params) {
  const Index n = params.lambda.size();
  Matrix p = Matrix::Constant(n, n, 0.5);
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      p(a, b) = btl_probability(params, a, b);
      p(b, a) = 1.0 - p(a, b);
    }
  }
  return ProbTournament(std::move(p));
}

namespace {

void require_matching_agents(const BtlParams& params, const ComparisonDataset& data) {
  if (params.lambda.size() != data.num_agents()) {
    throw std::invalid_argument("BTL parameter count does not match the dataset's agents");
  }
}

}  // namespace

double ce_loss(const BtlParams& params, const ComparisonDataset& data) {
  require_matching_agents(params, data);
  const Matrix& w = data.wins();
  const double total = w.sum();
  if (total == 0.0) return 0.0;
  const Index n = data.num_agents();
  double loss = 0.0;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (w(a, b) == 0.0) continue;
      const double p = std::clamp(btl_probability(params, a, b), kProbClamp, 1.0 - kProbClamp);
      loss -= w(a, b) * std::log(p);
    }
  }
  return loss / total;
}

Vector ce_gradient(const BtlParams& params, const ComparisonDataset& data) {
  require_matching_agents(params, data);
  const Matrix& w = data.wins();
  const Index n = data.num_agents();
  Vector g = Vector::Zero(n);
  const double total = w.sum();
  if (total == 0.0) return g;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (w(a, b) == 0.0) continue;
      const double p = btl_probability(params, a, b);
      if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
      // d/dlambda_a of -log sigmoid(lambda_a - lambda_b) is -(1 - p).
      const double d = w(a, b) * (1.0 - p) / total;
      g(a) -= d;
      g(b) += d;
    }
  }
  return g;
}

double sharpness_reg(const Vector& scores) {
  if (scores.size() == 0) return 0.0;
  const auto s = scores.array();
  return -((s * (s + kEntropyEps).log()) + ((1.0 - s) * (1.0 - s + kEntropyEps).log())).mean();
}

Vector sharpness_gradient(const Vector& scores) {
  if (scores.size() == 0) return Vector();
  const auto s = scores.array();
  const double n = static_cast<double>(scores.size());
  return (-((s + kEntropyEps).log() + s / (s + kEntropyEps) - (1.0 - s + kEntropyEps).log() -
            (1.0 - s) / (1.0 - s + kEntropyEps)) /
          n)
      .matrix();
}

double calibration_reg(const Vector& scores, const Vector& truth, int bins) {
  return expected_calibration_error(scores, truth, bins);
}

std::vector<AgentSet> comparison_components(const ComparisonDataset& data) {
  const Index n = data.num_agents();
  const Matrix totals = data.totals();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  std::function<Index(Index)> root = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      if (totals(a, b) > 0.0) {
        const Index ra = root(a), rb = root(b);
        if (ra != rb) parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
      }
    }
  }
  std::vector<AgentSet> comps;
  std::vector<Index> slot(static_cast<std::size_t>(n), -1);
  for (Index a = 0; a < n; ++a) {
    const Index r = root(a);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<Index>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(a);
  }
  return comps;
}

namespace {

void require_connected(const ComparisonDataset& data) {
  const auto comps = comparison_components(data);
  if (comps.size() <= 1) return;
  std::ostringstream os;
  os << "comparison graph is disconnected; strengths are not identifiable across components:";
  for (const auto& c : comps) {
    os << " {";
    for (std::size_t i = 0; i < c.size(); ++i) {
      os << (i ? "," : "") << data.agents().name(c[i]);
    }
    os << '}';
  }
  throw DataError(os.str());
}

struct Evaluation {
  double value = 0.0;
  Vector gradient;
};

// objective(lambda, epoch, want_gradient)
using Objective = std::function<Evaluation(const Vector&, int, bool)>;

struct DescentResult {
  Vector lambda;
  std::vector<double> trace;
  StopReason stop = StopReason::epochs_exhausted;
};

// Gradient descent with a decrease-or-halve safeguard: a trial step that raises
// the objective is halved up to kMaxHalvings times; if none is accepted the
// parameters stay put for that epoch. Accepted steps double the next trial.
DescentResult descend(Vector lambda, const TrainConfig& config, const Objective& objective) {
  DescentResult out;
  double step = config.learning_rate;
  const double max_step = config.learning_rate * kMaxStepGrowth;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Evaluation here = objective(lambda, epoch, true);
    if (!std::isfinite(here.value)) {
      throw NumericalError("training objective is not finite at epoch " + std::to_string(epoch));
    }
    if (here.gradient.norm() < config.grad_tolerance) {
      out.stop = StopReason::gradient_norm;
      break;
    }
    double accepted_value = here.value;
    bool accepted = false;
    double trial_step = step;
    for (int h = 0; h <= kMaxHalvings; ++h, trial_step *= 0.5) {
      Vector trial = lambda - trial_step * here.gradient;
      trial.array() -= trial.mean();
      const double v = objective(trial, epoch, false).value;
      if (std::isfinite(v) && v <= here.value) {
        lambda = std::move(trial);
        accepted_value = v;
        accepted = true;
        break;
      }
    }
    step = accepted ? std::min(2.0 * trial_step, max_step) : config.learning_rate;
    out.trace.push_back(accepted_value);
  }
  out.lambda = std::move(lambda);
  return out;
}

Evaluation ce_objective(const ComparisonDataset& data, const Vector& lambda, bool want_gradient) {
  const BtlParams params{lambda};
  Evaluation e;
  e.value = ce_loss(params, data);
  if (want_gradient) e.gradient = ce_gradient(params, data);
  return e;
}

}  // namespace

FitResult fit_btl(const ComparisonDataset& data, const TrainConfig& config) {
  config.validate();
  require_connected(data);
  const Objective objective = [&data](const Vector& lambda, int, bool want_gradient) {
    return ce_objective(data, lambda, want_gradient);
  };
  DescentResult d = descend(Vector::Zero(data.num_agents()), config, objective);
  FitResult out;
  out.params.lambda = std::move(d.lambda);
  out.params.fix_gauge();
  out.loss_trace = std::move(d.trace);
  out.stop = d.stop;
  return out;
}

namespace {

// Two equal strengths give identical soft-edge rows, which puts the cover
// clamp exactly at its kink; finite differences are meaningless there.
bool has_tied_strengths(const Vector& lambda) {
  for (Index i = 0; i < lambda.size(); ++i) {
    for (Index j = i + 1; j < lambda.size(); ++j) {
      if (lambda(i) == lambda(j)) return true;
    }
  }
  return false;
}

struct RegularizerTape {
  Tape tape;
  NodeId lambda;
  NodeId total;
};

// lambda -> P = sigmoid(lambda_a - lambda_b) -> soft scores -> weighted regularizers.
RegularizerTape record_regularizers(const Vector& lambda, const TrainConfig& config,
                                    const SoftConfig& soft, const std::optional<Vector>& truth) {
  RegularizerTape r;
  r.lambda = r.tape.input(lambda);
  const NodeId p = r.tape.sigmoid(r.tape.pairwise_difference(r.lambda));
  const ScoreNodes nodes = record_ste_scores(r.tape, p, soft);
  const NodeId scores = config.target == ScoreTarget::uncovered ? nodes.uncovered
                                                                 : r.tape.sigmoid(nodes.top_cycle);
  std::optional<NodeId> total;
  if (config.lambda_s > 0.0) {
    const NodeId sharp = config.sharpness == SharpnessForm::entropy
                             ? r.tape.binary_entropy_mean(scores, kEntropyEps)
                             : r.tape.neg_abs_deviation_mean(scores);
    total = r.tape.scale(sharp, config.lambda_s);
  }
  if (config.lambda_c > 0.0) {
    const NodeId calib = r.tape.scale(r.tape.squared_error_mean(scores, *truth), config.lambda_c);
    total = total ? r.tape.add(*total, calib) : calib;
  }
  r.total = *total;
  return r;
}

}  // namespace

TrainResult train_ste(const ComparisonDataset& data, const TrainConfig& config,
                      const std::optional<GroundTruthMembership>& truth) {
  config.validate();
  if (config.lambda_c > 0.0 && !truth) {
    throw ConfigError("lambda_c > 0 requires ground-truth membership");
  }
  require_connected(data);
  const Index n = data.num_agents();
  std::optional<Vector> target_truth;
  if (truth) {
    target_truth = config.target == ScoreTarget::uncovered ? truth->uncovered_indicator()
                                                           : truth->top_cycle_indicator();
    if (target_truth->size() != n) {
      throw DataError("ground truth covers " + std::to_string(target_truth->size()) +
                      " agents, dataset has " + std::to_string(n));
    }
  }
  const bool regularized = config.lambda_s > 0.0 || config.lambda_c > 0.0;
  auto tau_at = [&config](int epoch) {
    return anneal(config.anneal, std::min(epoch, config.anneal.steps));
  };

  const Objective objective = [&](const Vector& lambda, int epoch, bool want_gradient) {
    Evaluation e = ce_objective(data, lambda, want_gradient);
    if (!regularized || epoch % config.reg_every != 0 || n < 2) {
      return e;
    }
    const SoftConfig soft = config.soft.with_tau(tau_at(epoch));
    RegularizerTape reg = record_regularizers(lambda, config, soft, target_truth);
    e.value += reg.tape.scalar(reg.total);
    if (want_gradient) {
      const Matrix g = grad(reg.tape, reg.total).wrt(reg.lambda);
      if (config.check_gradients && !has_tied_strengths(lambda)) {
        const auto f = [&](const Matrix& x) {
          const RegularizerTape probe = record_regularizers(x, config, soft, target_truth);
          return probe.tape.scalar(probe.total);
        };
        const GradientCheck check = check_gradient(f, g, lambda);
        const double scale = std::max(check.analytic.cwiseAbs().maxCoeff(),
                                      check.numeric.cwiseAbs().maxCoeff());
        if (!check.passed(1e-4) && scale > kGradientCheckFloor) {
          throw NumericalError("regularizer gradient check failed at epoch " +
                               std::to_string(epoch) + ": relative error " +
                               std::to_string(check.relative_error));
        }
      }
      e.gradient += g;
    }
    return e;
  };

  DescentResult d = descend(Vector::Zero(n), config, objective);
  TrainResult out;
  out.params.lambda = std::move(d.lambda);
  out.params.fix_gauge();
  out.loss_trace = std::move(d.trace);
  out.stop = d.stop;
  out.scores = ste_scores(btl_tournament(out.params), config.soft.with_tau(config.anneal.tau_min));
  return out;
}

}  // namespace ste
