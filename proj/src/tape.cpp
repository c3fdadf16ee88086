#include "ste/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ste {

void Adjoints::accumulate(NodeId id, const Matrix& contribution) {
  Matrix& slot = adj_[id.index];
  if (slot.size() == 0) {
    slot = contribution;
  } else {
    slot += contribution;
  }
}

const Matrix& Gradients::wrt(NodeId input) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i] == input) {
      return values_[i];
    }
  }
  throw std::invalid_argument("Gradients::wrt: node is not an input of this tape");
}

NodeId Tape::push(Matrix value, BackwardFn backward) {
  if (!all_finite(value)) {
    throw NumericalError("tape: non-finite value recorded at node " +
                         std::to_string(nodes_.size()));
  }
  nodes_.push_back(Node{std::move(value), std::move(backward)});
  return NodeId{nodes_.size() - 1};
}

void Tape::check(NodeId id) const {
  if (id.index >= nodes_.size()) {
    throw std::out_of_range("tape: unknown node " + std::to_string(id.index));
  }
}

NodeId Tape::input(Matrix value) {
  const NodeId id = push(std::move(value), {});
  inputs_.push_back(id);
  return id;
}

NodeId Tape::constant(Matrix value) { return push(std::move(value), {}); }

double Tape::scalar(NodeId id) const {
  const Matrix& v = value(id);
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("tape: node is not scalar");
  }
  return v(0, 0);
}

NodeId Tape::sigmoid(NodeId x) {
  check(x);
  const NodeId self{nodes_.size()};
  Matrix y = sigmoid_elementwise(value(x));
  return push(std::move(y), [x, self](const Tape& t, const Matrix& g, Adjoints& adj) {
    const auto y = t.value(self).array();
    adj.accumulate(x, (g.array() * y * (1.0 - y)).matrix());
  });
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (value(a).cols() != value(b).rows()) {
    throw std::invalid_argument("tape::matmul: shape mismatch");
  }
  Matrix y = value(a) * value(b);
  return push(std::move(y), [a, b](const Tape& t, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, g * t.value(b).transpose());
    adj.accumulate(b, t.value(a).transpose() * g);
  });
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
  }
}

void require_column(const Matrix& m, const char* what) {
  if (m.cols() != 1) {
    throw std::invalid_argument(std::string(what) + ": expected a column vector");
  }
}

}  // namespace

NodeId Tape::add(NodeId a, NodeId b) {
  check(a);
  check(b);
  require_same_shape(value(a), value(b), "tape::add");
  Matrix y = value(a) + value(b);
  return push(std::move(y), [a, b](const Tape&, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, g);
    adj.accumulate(b, g);
  });
}

NodeId Tape::subtract(NodeId a, NodeId b) {
  check(a);
  check(b);
  require_same_shape(value(a), value(b), "tape::subtract");
  Matrix y = value(a) - value(b);
  return push(std::move(y), [a, b](const Tape&, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, g);
    adj.accumulate(b, -g);
  });
}

NodeId Tape::hadamard(NodeId a, NodeId b) {
  check(a);
  check(b);
  require_same_shape(value(a), value(b), "tape::hadamard");
  Matrix y = value(a).cwiseProduct(value(b));
  return push(std::move(y), [a, b](const Tape& t, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, g.cwiseProduct(t.value(b)));
    adj.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

NodeId Tape::scale(NodeId a, double factor) {
  check(a);
  Matrix y = factor * value(a);
  return push(std::move(y), [a, factor](const Tape&, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, factor * g);
  });
}

NodeId Tape::add_scalar(NodeId a, double offset) {
  check(a);
  Matrix y = value(a).array() + offset;
  return push(std::move(y),
              [a](const Tape&, const Matrix& g, Adjoints& adj) { adj.accumulate(a, g); });
}

NodeId Tape::matpow_sum(NodeId m, int K, double alpha) {
  check(m);
  require_square(value(m), "tape::matpow_sum");
  if (K < 1) {
    throw std::invalid_argument("tape::matpow_sum: K must be >= 1");
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("tape::matpow_sum: alpha must lie in (0, 1]");
  }
  NodeId power = m;
  NodeId total = m;
  double weight = 1.0;
  for (int k = 2; k <= K; ++k) {
    power = matmul(power, m);
    weight *= alpha;
    total = add(total, weight == 1.0 ? power : scale(power, weight));
  }
  return total;
}

NodeId Tape::pairwise_difference(NodeId v) {
  check(v);
  require_column(value(v), "tape::pairwise_difference");
  const Vector& col = value(v);
  const Index n = col.rows();
  Matrix y(n, n);
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      y(a, b) = col(a) - col(b);
    }
  }
  return push(std::move(y), [v](const Tape&, const Matrix& g, Adjoints& adj) {
    adj.accumulate(v, (g.rowwise().sum() - g.colwise().sum().transpose()).eval());
  });
}

namespace {

// Off-diagonal entries of row r (or column r when by_column) as a vector.
Vector offdiag_slice(const Matrix& m, Index r, bool by_column) {
  const Index n = m.rows();
  Vector out(n - 1);
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    if (j == r) continue;
    out(k++) = by_column ? m(j, r) : m(r, j);
  }
  return out;
}

}  // namespace

NodeId Tape::offdiag_row_softmin(NodeId m, double tau) {
  check(m);
  require_square(value(m), "tape::offdiag_row_softmin");
  const Matrix& r = value(m);
  const Index n = r.rows();
  Matrix y = Matrix::Zero(n, 1);
  if (n > 1) {
    for (Index a = 0; a < n; ++a) {
      y(a, 0) = softmin(offdiag_slice(r, a, false), tau);
    }
  }
  return push(std::move(y), [m, tau](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix& r = t.value(m);
    const Index n = r.rows();
    Matrix contribution = Matrix::Zero(n, n);
    if (n > 1) {
      for (Index a = 0; a < n; ++a) {
        const Vector w = softmax_weights((-offdiag_slice(r, a, false)).eval(), tau);
        Index k = 0;
        for (Index b = 0; b < n; ++b) {
          if (b == a) continue;
          contribution(a, b) = g(a, 0) * w(k++);
        }
      }
    }
    adj.accumulate(m, contribution);
  });
}

NodeId Tape::offdiag_col_boltzmann(NodeId m, double tau) {
  check(m);
  require_square(value(m), "tape::offdiag_col_boltzmann");
  const Matrix& c = value(m);
  const Index n = c.rows();
  Matrix y = Matrix::Zero(n, 1);
  if (n > 1) {
    for (Index a = 0; a < n; ++a) {
      y(a, 0) = boltzmann_max(offdiag_slice(c, a, true), tau);
    }
  }
  return push(std::move(y), [m, tau](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix& c = t.value(m);
    const Index n = c.rows();
    Matrix contribution = Matrix::Zero(n, n);
    if (n > 1) {
      for (Index a = 0; a < n; ++a) {
        const Vector z = offdiag_slice(c, a, true);
        const Vector p = softmax_weights(z, tau);
        const double mean = p.dot(z);
        Index k = 0;
        for (Index j = 0; j < n; ++j) {
          if (j == a) continue;
          contribution(j, a) = g(a, 0) * p(k) * (1.0 + (z(k) - mean) / tau);
          ++k;
        }
      }
    }
    adj.accumulate(m, contribution);
  });
}

NodeId Tape::offdiag_col_smax(NodeId m, double tau) {
  check(m);
  require_square(value(m), "tape::offdiag_col_smax");
  const Matrix& c = value(m);
  const Index n = c.rows();
  if (n < 2) {
    throw std::invalid_argument("tape::offdiag_col_smax: needs at least two agents");
  }
  Matrix y(n, 1);
  for (Index a = 0; a < n; ++a) {
    y(a, 0) = smax(offdiag_slice(c, a, true), tau);
  }
  return push(std::move(y), [m, tau](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix& c = t.value(m);
    const Index n = c.rows();
    Matrix contribution = Matrix::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
      const Vector p = softmax_weights(offdiag_slice(c, a, true), tau);
      Index k = 0;
      for (Index j = 0; j < n; ++j) {
        if (j == a) continue;
        contribution(j, a) = g(a, 0) * p(k++);
      }
    }
    adj.accumulate(m, contribution);
  });
}

NodeId Tape::mean(NodeId a) {
  check(a);
  const double count = static_cast<double>(value(a).size());
  Matrix y(1, 1);
  y(0, 0) = value(a).mean();
  return push(std::move(y), [a, count](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix& x = t.value(a);
    adj.accumulate(a, Matrix::Constant(x.rows(), x.cols(), g(0, 0) / count));
  });
}

NodeId Tape::weighted_sum(NodeId a, const Matrix& weights) {
  check(a);
  require_same_shape(value(a), weights, "tape::weighted_sum");
  Matrix y(1, 1);
  y(0, 0) = value(a).cwiseProduct(weights).sum();
  return push(std::move(y), [a, weights](const Tape&, const Matrix& g, Adjoints& adj) {
    adj.accumulate(a, g(0, 0) * weights);
  });
}

NodeId Tape::binary_entropy_mean(NodeId s, double eps) {
  check(s);
  const auto x = value(s).array();
  const double n = static_cast<double>(x.size());
  Matrix y(1, 1);
  y(0, 0) = -((x * (x + eps).log()) + ((1.0 - x) * (1.0 - x + eps).log())).sum() / n;
  return push(std::move(y), [s, eps, n](const Tape& t, const Matrix& g, Adjoints& adj) {
    const auto x = t.value(s).array();
    const Matrix d = (-((x + eps).log() + x / (x + eps) - (1.0 - x + eps).log() -
                        (1.0 - x) / (1.0 - x + eps)) /
                      n)
                         .matrix();
    adj.accumulate(s, g(0, 0) * d);
  });
}

NodeId Tape::neg_abs_deviation_mean(NodeId s) {
  check(s);
  const auto x = value(s).array();
  const double n = static_cast<double>(x.size());
  Matrix y(1, 1);
  y(0, 0) = -(x - 0.5).abs().sum() / n;
  return push(std::move(y), [s, n](const Tape& t, const Matrix& g, Adjoints& adj) {
    const Matrix d = t.value(s).unaryExpr([n](double v) {
      const double sign = v > 0.5 ? 1.0 : (v < 0.5 ? -1.0 : 0.0);
      return -sign / n;
    });
    adj.accumulate(s, g(0, 0) * d);
  });
}

NodeId Tape::squared_error_mean(NodeId s, const Vector& target) {
  check(s);
  require_same_shape(value(s), target, "tape::squared_error_mean");
  const double n = static_cast<double>(target.size());
  Matrix y(1, 1);
  y(0, 0) = (value(s) - target).squaredNorm() / n;
  return push(std::move(y), [s, target, n](const Tape& t, const Matrix& g, Adjoints& adj) {
    adj.accumulate(s, (g(0, 0) * 2.0 / n) * (t.value(s) - target));
  });
}

NodeId Tape::custom(std::vector<NodeId> parents, Matrix value, BackwardFn backward) {
  for (NodeId p : parents) {
    check(p);
  }
  return push(std::move(value), std::move(backward));
}

Gradients Tape::gradient(NodeId output) const {
  check(output);
  const Matrix& out = value(output);
  if (out.rows() != 1 || out.cols() != 1) {
    throw std::invalid_argument("tape::gradient: output must be a 1 x 1 node, got " +
                                std::to_string(out.rows()) + " x " + std::to_string(out.cols()));
  }
  Adjoints adj(nodes_.size());
  adj.accumulate(output, Matrix::Ones(1, 1));
  for (std::size_t i = output.index + 1; i-- > 0;) {
    const NodeId id{i};
    if (!adj.reached(id) || !nodes_[i].backward) {
      continue;
    }
    nodes_[i].backward(*this, adj.at(id), adj);
  }
  std::vector<Matrix> result;
  result.reserve(inputs_.size());
  for (NodeId in : inputs_) {
    if (adj.reached(in)) {
      result.push_back(adj.at(in));
    } else {
      const Matrix& v = value(in);
      result.push_back(Matrix::Zero(v.rows(), v.cols()));
    }
  }
  return Gradients(inputs_, std::move(result));
}

}  // namespace ste
