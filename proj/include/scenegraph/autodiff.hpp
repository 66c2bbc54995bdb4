#pragma once

#include <scenegraph/types.hpp>

#include <functional>
#include <span>
#include <vector>

/// Minimal reverse-mode differentiation over row-major dense matrices.
///
/// A Tape records every operation as a node holding its value and a backward
/// closure. Calling `backward` on a 1x1 node walks the tape in reverse order
/// and accumulates gradients into every node that requires them. Tapes are
/// single-use: build, backward, read gradients, discard.
namespace scenegraph::ad {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

class Tape {
 public:
  Var constant(Matrix value);
  Var variable(Matrix value);

  /// Seeds d(out)/d(out) = `seed` and propagates. `out` must be 1x1.
  void backward(Var out, double seed = 1.0);

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  /// Appends an operation node. `backward` receives the output gradient and
  /// must call `accumulate` for each input.
  Var push(Matrix value, bool requires_grad, std::function<void(Tape&, const Matrix&)> backward);
  void accumulate(int id, const Matrix& g);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;
  };
  std::vector<Node> nodes_;
};

Var matmul(Var a, Var b);
/// a + 1 * bias, with bias a 1 x cols row.
Var add_row(Var a, Var bias);
Var relu(Var a);
Var leaky_relu(Var a, double slope = 0.2);
Var scale(Var a, double factor);
Var gather_rows(Var a, std::span<const int> index);
Var hcat(std::initializer_list<Var> parts);
/// Multiplies row k of `a` by s(k, 0).
Var scale_rows(Var a, Var s);
/// Softmax of the column vector `scores` within groups given by `segment`.
Var segment_softmax(Var scores, std::span<const int> segment, int num_segments);
/// Elementwise max over rows sharing a segment; empty segments give zeros.
Var segment_max(Var a, std::span<const int> segment, int num_segments);
/// Mean binary cross-entropy on logits (column vector). Positive-class terms
/// are multiplied by `pos_weight`. Returns 1x1; 0 for an empty batch.
Var bce_with_logits(Var logits, std::span<const double> labels, double pos_weight);

/// Numerically stable softplus and sigmoid, shared with the reference loss.
double softplus(double x);
double sigmoid(double x);

}  // namespace scenegraph::ad
