#include "ste/soft_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ste {

std::string to_string(UncoveredVariant v) {
  switch (v) {
    case UncoveredVariant::boltzmann:
      return "boltzmann";
    case UncoveredVariant::squashed_smax:
      return "squashed-smax";
  }
  return "unknown";
}

UncoveredVariant uncovered_variant_from_string(const std::string& s) {
  if (s == "boltzmann") return UncoveredVariant::boltzmann;
  if (s == "squashed-smax") return UncoveredVariant::squashed_smax;
  throw ConfigError("unknown uc_variant '" + s + "' (expected boltzmann or squashed-smax)");
}

int SoftConfig::path_length(Index n) const {
  if (max_path_length) return *max_path_length;
  return static_cast<int>(std::max<Index>(1, n - 1));
}

void SoftConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be a finite value > 0");
    }
  };
  positive(tau, "tau");
  positive(softmin_temperature(), "tau_softmin");
  positive(cover_temperature(), "tau_cover");
  positive(beta, "beta");
  if (max_path_length && *max_path_length < 1) {
    throw ConfigError("K must be >= 1");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1]");
  }
}

SoftConfig SoftConfig::resolved(Index n) const {
  SoftConfig out = *this;
  out.tau_softmin = softmin_temperature();
  out.tau_cover = cover_temperature();
  out.max_path_length = path_length(n);
  return out;
}

SoftConfig SoftConfig::with_tau(double new_tau) const {
  SoftConfig out = *this;
  out.tau = new_tau;
  return out;
}

AgentSet CoreThreshold::apply(const Vector& scores) const {
  double cut = level;
  if (kind == Kind::relative_to_max) {
    cut = scores.size() == 0 ? 0.0 : level * scores.maxCoeff();
  }
  AgentSet out;
  for (Index a = 0; a < scores.size(); ++a) {
    if (scores(a) > cut) out.push_back(a);
  }
  return out;
}

std::string CoreThreshold::describe() const {
  std::ostringstream os;
  if (kind == Kind::absolute) {
    os << "score > " << level;
  } else {
    os << "score > " << level << " * max(score)";
  }
  return os.str();
}

void AnnealSchedule::validate() const {
  if (!(tau_max > 0.0) || !(tau_min > 0.0)) {
    throw ConfigError("anneal temperatures must be > 0");
  }
  if (tau_min > tau_max) {
    throw ConfigError("anneal tau_min must not exceed tau_max");
  }
  if (steps < 1) {
    throw ConfigError("anneal steps must be >= 1");
  }
}

double anneal(const AnnealSchedule& schedule, int step) {
  schedule.validate();
  if (step < 0 || step > schedule.steps) {
    throw std::invalid_argument("anneal: step " + std::to_string(step) + " outside [0, " +
                                std::to_string(schedule.steps) + "]");
  }
  if (step == schedule.steps) return schedule.tau_min;
  const double frac = static_cast<double>(step) / static_cast<double>(schedule.steps);
  return schedule.tau_max * std::pow(schedule.tau_min / schedule.tau_max, frac);
}

Matrix soft_edges(const ProbTournament& p, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("soft_edges: tau must be > 0");
  }
  Matrix d = sigmoid_elementwise(((p.matrix().array() - 0.5) / tau).matrix());
  d.diagonal().setConstant(0.5);
  return d;
}

Matrix soft_reach(const Matrix& d, int K, double alpha) { return matpow_sum(d, K, alpha); }

Vector top_cycle_scores(const Matrix& r, double tau_softmin) {
  if (r.rows() != r.cols()) {
    throw std::invalid_argument("top_cycle_scores: reachability must be square");
  }
  const Index n = r.rows();
  if (n == 0) {
    throw std::invalid_argument("top_cycle_scores: empty tournament");
  }
  Vector t = Vector::Zero(n);
  if (n == 1) return t;
  Vector row(n - 1);
  for (Index a = 0; a < n; ++a) {
    Index k = 0;
    for (Index b = 0; b < n; ++b) {
      if (b != a) row(k++) = r(a, b);
    }
    t(a) = softmin(row, tau_softmin);
  }
  return t;
}

namespace {

// Witness vector z_b = D(a,b) - D(c,b) against "c covers a".
Vector witnesses(const Matrix& d, Index c, Index a) {
  return (d.row(a) - d.row(c)).transpose();
}

}  // namespace

Matrix cover_scores(const Matrix& d, double tau_cover) {
  if (d.rows() != d.cols()) {
    throw std::invalid_argument("cover_scores: edge matrix must be square");
  }
  const Index n = d.rows();
  Matrix cover = Matrix::Zero(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index a = 0; a < n; ++a) {
      if (c == a) continue;
      const double against = std::max(0.0, boltzmann_max(witnesses(d, c, a), tau_cover));
      cover(c, a) = std::clamp(d(c, a) * (1.0 - against), 0.0, 1.0);
    }
  }
  return cover;
}

Vector uncovered_scores(const Matrix& cover, const SoftConfig& config) {
  if (cover.rows() != cover.cols()) {
    throw std::invalid_argument("uncovered_scores: cover matrix must be square");
  }
  const Index n = cover.rows();
  if (n == 1) return Vector::Ones(1);
  const double tau_c = config.cover_temperature();
  Vector u(n);
  Vector column(n - 1);
  for (Index a = 0; a < n; ++a) {
    Index k = 0;
    for (Index c = 0; c < n; ++c) {
      if (c != a) column(k++) = cover(c, a);
    }
    double covered = 0.0;
    switch (config.uc_variant) {
      case UncoveredVariant::boltzmann:
        covered = boltzmann_max(column, tau_c);
        break;
      case UncoveredVariant::squashed_smax:
        covered = sigmoid(config.beta * smax(column, tau_c));
        break;
    }
    u(a) = std::clamp(1.0 - covered, 0.0, 1.0);
  }
  return u;
}

CoreScores ste_scores(const ProbTournament& p, const SoftConfig& config) {
  config.validate();
  const Index n = p.size();
  if (n == 0) {
    throw std::invalid_argument("ste_scores: empty tournament");
  }
  CoreScores out;
  out.config = config.resolved(n);
  const Matrix d = soft_edges(p, config.tau);
  const Matrix r = soft_reach(d, config.path_length(n), config.alpha);
  out.t = top_cycle_scores(r, config.softmin_temperature());
  out.u = uncovered_scores(cover_scores(d, config.cover_temperature()), config);
  return out;
}

AgentSet soft_top_cycle(const CoreScores& s, CoreThreshold rule) { return rule.apply(s.t); }

AgentSet soft_uncovered_set(const CoreScores& s, CoreThreshold rule) { return rule.apply(s.u); }

NodeId record_cover_scores(Tape& tape, NodeId edges, double tau_cover) {
  Matrix value = cover_scores(tape.value(edges), tau_cover);
  auto backward = [edges, tau_cover](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix& d = t.value(edges);
    const Index n = d.rows();
    Matrix grad = Matrix::Zero(n, n);
    for (Index c = 0; c < n; ++c) {
      for (Index a = 0; a < n; ++a) {
        if (c == a || g(c, a) == 0.0) continue;
        const Vector z = witnesses(d, c, a);
        const Vector p = softmax_weights(z, tau_cover);
        const double agg = std::clamp(p.dot(z), z.minCoeff(), z.maxCoeff());
        const double against = std::max(0.0, agg);
        const double raw = d(c, a) * (1.0 - against);
        if (raw < 0.0 || raw > 1.0) continue;  // outer clamp is flat here
        grad(c, a) += g(c, a) * (1.0 - against);
        if (agg <= 0.0) continue;  // inner clamp is flat here
        const double coef = -g(c, a) * d(c, a);
        for (Index b = 0; b < n; ++b) {
          const double dz = coef * p(b) * (1.0 + (z(b) - agg) / tau_cover);
          grad(a, b) += dz;
          grad(c, b) -= dz;
        }
      }
    }
    adj.accumulate(edges, grad);
  };
  return tape.custom({edges}, std::move(value), std::move(backward));
}

ScoreNodes record_ste_scores(Tape& tape, NodeId p, const SoftConfig& config) {
  config.validate();
  const Index n = tape.value(p).rows();
  if (n == 0 || tape.value(p).cols() != n) {
    throw std::invalid_argument("record_ste_scores: probability node must be square and non-empty");
  }
  ScoreNodes nodes{};
  nodes.edges = tape.sigmoid(tape.scale(tape.add_scalar(p, -0.5), 1.0 / config.tau));
  nodes.reach = tape.matpow_sum(nodes.edges, config.path_length(n), config.alpha);
  nodes.top_cycle = tape.offdiag_row_softmin(nodes.reach, config.softmin_temperature());
  nodes.cover = record_cover_scores(tape, nodes.edges, config.cover_temperature());
  if (n == 1) {
    nodes.uncovered = tape.constant(Matrix::Ones(1, 1));
    return nodes;
  }
  NodeId covered{};
  switch (config.uc_variant) {
    case UncoveredVariant::boltzmann:
      covered = tape.offdiag_col_boltzmann(nodes.cover, config.cover_temperature());
      break;
    case UncoveredVariant::squashed_smax:
      covered = tape.sigmoid(
          tape.scale(tape.offdiag_col_smax(nodes.cover, config.cover_temperature()), config.beta));
      break;
  }
  nodes.uncovered = tape.add_scalar(tape.scale(covered, -1.0), 1.0);
  return nodes;
}

}  // namespace ste
