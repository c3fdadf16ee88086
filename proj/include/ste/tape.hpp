#pragma once

// Minimal reverse-mode differentiation over dense matrices.
//
// A Tape records matrix-valued nodes in creation order, which is always a
// topological order of the data dependencies. Only the vocabulary needed by
// the soft tournament pipeline and the training objective is provided;
// domain-specific kernels register themselves through Tape::custom.

#include <cstddef>
#include <functional>
#include <vector>

#include "ste/numerics.hpp"

namespace ste {

struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

class Tape;

/// Adjoint storage for one backward sweep. Unreached nodes stay empty.
class Adjoints {
 public:
  explicit Adjoints(std::size_t size) : adj_(size) {}

  /// adj[id] += contribution, allocating on first touch.
  void accumulate(NodeId id, const Matrix& contribution);
  Matrix& at(NodeId id) { return adj_[id.index]; }
  const Matrix& at(NodeId id) const { return adj_[id.index]; }
  bool reached(NodeId id) const { return adj_[id.index].size() != 0; }

 private:
  std::vector<Matrix> adj_;
};

/// Receives the output adjoint and pushes contributions to the parents.
using BackwardFn = std::function<void(const Tape&, const Matrix& out_adjoint, Adjoints&)>;

/// Gradient of a scalar output with respect to every input node.
class Gradients {
 public:
  Gradients(std::vector<NodeId> inputs, std::vector<Matrix> values)
      : inputs_(std::move(inputs)), values_(std::move(values)) {}

  /// Gradient with respect to an input node (same shape as the input).
  const Matrix& wrt(NodeId input) const;
  std::size_t size() const { return values_.size(); }
  const Matrix& operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<NodeId> inputs_;
  std::vector<Matrix> values_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// Differentiable leaf.
  NodeId input(Matrix value);
  /// Leaf that receives no gradient.
  NodeId constant(Matrix value);

  NodeId sigmoid(NodeId x);
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId subtract(NodeId a, NodeId b);
  NodeId hadamard(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId add_scalar(NodeId a, double offset);

  /// Sum_{k=1..K} alpha^{k-1} m^k, recorded as matmul/scale/add nodes.
  NodeId matpow_sum(NodeId m, int K, double alpha = 1.0);

  /// n x 1 vector v  ->  n x n matrix M(a,b) = v(a) - v(b).
  NodeId pairwise_difference(NodeId v);

  /// Row-wise softmin over the off-diagonal entries of a square matrix (n x 1).
  /// A 1 x 1 input yields 0.
  NodeId offdiag_row_softmin(NodeId m, double tau);
  /// Column-wise Boltzmann operator over the off-diagonal entries (n x 1).
  /// A 1 x 1 input yields 0.
  NodeId offdiag_col_boltzmann(NodeId m, double tau);
  /// Column-wise smax over the off-diagonal entries (n x 1).
  NodeId offdiag_col_smax(NodeId m, double tau);

  /// Scalar reductions (1 x 1 outputs).
  NodeId mean(NodeId a);
  NodeId weighted_sum(NodeId a, const Matrix& weights);
  /// -(1/n) sum s log(s + eps) + (1 - s) log(1 - s + eps).
  NodeId binary_entropy_mean(NodeId s, double eps);
  /// -(1/n) sum |s - 1/2|.
  NodeId neg_abs_deviation_mean(NodeId s);
  /// (1/n) sum (s - target)^2.
  NodeId squared_error_mean(NodeId s, const Vector& target);

  /// Escape hatch for fused kernels whose backward is written by hand.
  NodeId custom(std::vector<NodeId> parents, Matrix value, BackwardFn backward);

  const Matrix& value(NodeId id) const { return nodes_.at(id.index).value; }
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  const std::vector<NodeId>& inputs() const { return inputs_; }

  /// Reverse sweep from a 1 x 1 output. Visits each node at most once.
  Gradients gradient(NodeId output) const;

 private:
  struct Node {
    Matrix value;
    BackwardFn backward;  // empty for leaves
  };

  NodeId push(Matrix value, BackwardFn backward);
  void check(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<NodeId> inputs_;
};

/// Free-function spelling of Tape::gradient.
inline Gradients grad(const Tape& tape, NodeId output) { return tape.gradient(output); }

}  // namespace ste
