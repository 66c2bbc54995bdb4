#include <scenegraph/autodiff.hpp>

#include <cmath>

namespace scenegraph::ad {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return push(std::move(value), true, nullptr); }

Var Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&, const Matrix&)> backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(backward)});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var out, double seed) {
  if (out.tape != this || out.value().size() != 1) {
    throw InvalidArgument("Tape::backward: output must be a 1x1 node of this tape");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  accumulate(out.id, Matrix::Constant(1, 1, seed));
  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward || n.grad.size() == 0) continue;
    const Matrix g = n.grad;
    n.backward(*this, g);
  }
}

namespace {

bool any_requires(std::initializer_list<Var> vars) {
  for (const auto& v : vars) {
    if (v.tape->requires_grad(v.id)) return true;
  }
  return false;
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  Tape& t = *a.tape;
  Matrix out = a.value() * b.value();
  return t.push(std::move(out), any_requires({a, b}), [a, b](Tape& tape, const Matrix& g) {
    if (tape.requires_grad(a.id)) tape.accumulate(a.id, g * tape.value(b.id).transpose());
    if (tape.requires_grad(b.id)) tape.accumulate(b.id, tape.value(a.id).transpose() * g);
  });
}

Var add_row(Var a, Var bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw InvalidArgument("add_row: bias shape mismatch");
  Tape& t = *a.tape;
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return t.push(std::move(out), any_requires({a, bias}), [a, bias](Tape& tape, const Matrix& g) {
    tape.accumulate(a.id, g);
    if (tape.requires_grad(bias.id)) tape.accumulate(bias.id, g.colwise().sum());
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  Matrix out = a.value().cwiseMax(0.0);
  return t.push(std::move(out), any_requires({a}), [a](Tape& tape, const Matrix& g) {
    const Matrix& x = tape.value(a.id);
    tape.accumulate(a.id, (x.array() > 0.0).select(g, 0.0));
  });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = *a.tape;
  const Matrix& x = a.value();
  Matrix out = (x.array() > 0.0).select(x, slope * x);
  return t.push(std::move(out), any_requires({a}), [a, slope](Tape& tape, const Matrix& g) {
    const Matrix& xv = tape.value(a.id);
    tape.accumulate(a.id, (xv.array() > 0.0).select(g, slope * g));
  });
}

Var scale(Var a, double factor) {
  Tape& t = *a.tape;
  return t.push(factor * a.value(), any_requires({a}),
                [a, factor](Tape& tape, const Matrix& g) { tape.accumulate(a.id, factor * g); });
}

Var gather_rows(Var a, std::span<const int> index) {
  Tape& t = *a.tape;
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(index.size()), x.cols());
  for (std::size_t k = 0; k < index.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(index[k]);
  std::vector<int> idx(index.begin(), index.end());
  return t.push(std::move(out), any_requires({a}), [a, idx = std::move(idx)](Tape& tape, const Matrix& g) {
    Matrix ga = Matrix::Zero(tape.value(a.id).rows(), tape.value(a.id).cols());
    for (std::size_t k = 0; k < idx.size(); ++k) ga.row(idx[k]) += g.row(static_cast<Eigen::Index>(k));
    tape.accumulate(a.id, ga);
  });
}

Var hcat(std::initializer_list<Var> parts) {
  if (parts.size() == 0) throw InvalidArgument("hcat: no inputs");
  Tape& t = *parts.begin()->tape;
  const Eigen::Index rows = parts.begin()->rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw InvalidArgument("hcat: row counts differ");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> inputs(parts);
  return t.push(std::move(out), any_requires(parts), [inputs](Tape& tape, const Matrix& g) {
    Eigen::Index col = 0;
    for (const auto& p : inputs) {
      const Eigen::Index w = tape.value(p.id).cols();
      if (tape.requires_grad(p.id)) tape.accumulate(p.id, g.middleCols(col, w));
      col += w;
    }
  });
}

Var scale_rows(Var a, Var s) {
  if (s.cols() != 1 || s.rows() != a.rows()) throw InvalidArgument("scale_rows: scale must be rows x 1");
  Tape& t = *a.tape;
  Matrix out = a.value().array().colwise() * s.value().col(0).array();
  return t.push(std::move(out), any_requires({a, s}), [a, s](Tape& tape, const Matrix& g) {
    const Matrix& av = tape.value(a.id);
    const Matrix& sv = tape.value(s.id);
    if (tape.requires_grad(a.id)) tape.accumulate(a.id, g.array().colwise() * sv.col(0).array());
    if (tape.requires_grad(s.id)) tape.accumulate(s.id, (g.array() * av.array()).rowwise().sum().matrix());
  });
}

Var segment_softmax(Var scores, std::span<const int> segment, int num_segments) {
  if (scores.cols() != 1 || static_cast<std::size_t>(scores.rows()) != segment.size()) {
    throw InvalidArgument("segment_softmax: scores must be a column with one entry per segment id");
  }
  Tape& t = *scores.tape;
  const Matrix& s = scores.value();
  std::vector<double> peak(static_cast<std::size_t>(num_segments), -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < segment.size(); ++k) {
    peak[segment[k]] = std::max(peak[segment[k]], s(static_cast<Eigen::Index>(k), 0));
  }
  Matrix out(s.rows(), 1);
  std::vector<double> total(static_cast<std::size_t>(num_segments), 0.0);
  for (std::size_t k = 0; k < segment.size(); ++k) {
    const double e = std::exp(s(static_cast<Eigen::Index>(k), 0) - peak[segment[k]]);
    out(static_cast<Eigen::Index>(k), 0) = e;
    total[segment[k]] += e;
  }
  for (std::size_t k = 0; k < segment.size(); ++k) out(static_cast<Eigen::Index>(k), 0) /= total[segment[k]];

  std::vector<int> seg(segment.begin(), segment.end());
  return t.push(std::move(out), any_requires({scores}),
                [scores, seg = std::move(seg), num_segments, self = t.size()](Tape& tape, const Matrix& g) {
                  const Matrix& alpha = tape.value(static_cast<int>(self));
                  std::vector<double> dot(static_cast<std::size_t>(num_segments), 0.0);
                  for (std::size_t k = 0; k < seg.size(); ++k) {
                    const auto r = static_cast<Eigen::Index>(k);
                    dot[seg[k]] += alpha(r, 0) * g(r, 0);
                  }
                  Matrix gs(alpha.rows(), 1);
                  for (std::size_t k = 0; k < seg.size(); ++k) {
                    const auto r = static_cast<Eigen::Index>(k);
                    gs(r, 0) = alpha(r, 0) * (g(r, 0) - dot[seg[k]]);
                  }
                  tape.accumulate(scores.id, gs);
                });
}

Var segment_max(Var a, std::span<const int> segment, int num_segments) {
  if (static_cast<std::size_t>(a.rows()) != segment.size()) {
    throw InvalidArgument("segment_max: one segment id per row is required");
  }
  Tape& t = *a.tape;
  const Matrix& x = a.value();
  const Eigen::Index cols = x.cols();
  Matrix out = Matrix::Zero(num_segments, cols);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> arg =
      Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(num_segments, cols, -1);
  for (std::size_t k = 0; k < segment.size(); ++k) {
    const int s = segment[k];
    const auto r = static_cast<Eigen::Index>(k);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (arg(s, c) < 0 || x(r, c) > out(s, c)) {
        out(s, c) = x(r, c);
        arg(s, c) = static_cast<int>(k);
      }
    }
  }
  return t.push(std::move(out), any_requires({a}), [a, arg = std::move(arg)](Tape& tape, const Matrix& g) {
    Matrix ga = Matrix::Zero(tape.value(a.id).rows(), tape.value(a.id).cols());
    for (Eigen::Index s = 0; s < arg.rows(); ++s) {
      for (Eigen::Index c = 0; c < arg.cols(); ++c) {
        if (arg(s, c) >= 0) ga(arg(s, c), c) += g(s, c);
      }
    }
    tape.accumulate(a.id, ga);
  });
}

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var bce_with_logits(Var logits, std::span<const double> labels, double pos_weight) {
  if (logits.cols() != 1 || static_cast<std::size_t>(logits.rows()) != labels.size()) {
    throw InvalidArgument("bce_with_logits: logits and labels must have equal length");
  }
  Tape& t = *logits.tape;
  const Matrix& z = logits.value();
  const auto n = static_cast<double>(labels.size());
  double total = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const double zk = z(static_cast<Eigen::Index>(k), 0);
    const double y = labels[k];
    total += pos_weight * y * softplus(-zk) + (1.0 - y) * softplus(zk);
  }
  Matrix out = Matrix::Constant(1, 1, labels.empty() ? 0.0 : total / n);
  std::vector<double> y(labels.begin(), labels.end());
  return t.push(std::move(out), any_requires({logits}),
                [logits, y = std::move(y), pos_weight](Tape& tape, const Matrix& g) {
                  const Matrix& zv = tape.value(logits.id);
                  Matrix gz(zv.rows(), 1);
                  const double inv_n = y.empty() ? 0.0 : 1.0 / static_cast<double>(y.size());
                  for (std::size_t k = 0; k < y.size(); ++k) {
                    const auto r = static_cast<Eigen::Index>(k);
                    const double p = sigmoid(zv(r, 0));
                    gz(r, 0) = g(0, 0) * inv_n * (pos_weight * y[k] * (p - 1.0) + (1.0 - y[k]) * p);
                  }
                  tape.accumulate(logits.id, gz);
                });
}

}  // namespace scenegraph::ad
