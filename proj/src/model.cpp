#include <scenegraph/model.hpp>

#include <cmath>
#include <limits>
#include <tuple>

namespace scenegraph {

Matrix xavier_uniform(int fan_in, int fan_out, std::mt19937_64& rng) {
  if (fan_in < 1 || fan_out < 1) throw InvalidArgument("xavier_uniform: fans must be >= 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

EdgeClassifierModel::EdgeClassifierModel(Relation rel, int hidden, std::uint64_t seed)
    : relation(rel), hidden_dim(hidden), init_seed(seed) {
  if (hidden < 1) throw InvalidArgument("EdgeClassifierModel: hidden_dim must be >= 1");
  std::mt19937_64 rng(seed);
  const int h = hidden;
  int node_in = kNodeFeatureDim;
  int edge_in = kEdgeFeatureDim;
  for (auto& layer : encoder) {
    layer.W_m = xavier_uniform(node_in + edge_in, h, rng);
    layer.b_m = Matrix::Zero(1, h);
    layer.a = xavier_uniform(2 * h, 1, rng);
    layer.W_v = xavier_uniform(node_in + h, h, rng);
    layer.b_v = Matrix::Zero(1, h);
    layer.W_e = xavier_uniform(2 * node_in + edge_in, h, rng);
    layer.b_e = Matrix::Zero(1, h);
    node_in = h;
    edge_in = h;
  }
  const std::array<std::pair<int, int>, 3> shapes{{{3 * h, h}, {h, h}, {h, 1}}};
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    decoder.W[i] = xavier_uniform(shapes[i].first, shapes[i].second, rng);
    decoder.b[i] = Matrix::Zero(1, shapes[i].second);
  }
}

namespace {

template <typename Model, typename Out>
std::vector<Out> list_parameters(Model& m) {
  std::vector<Out> out;
  for (std::size_t l = 0; l < m.encoder.size(); ++l) {
    auto& g = m.encoder[l];
    const std::string p = "gat" + std::to_string(l) + ".";
    out.push_back({p + "W_m", &g.W_m});
    out.push_back({p + "b_m", &g.b_m});
    out.push_back({p + "a", &g.a});
    out.push_back({p + "W_v", &g.W_v});
    out.push_back({p + "b_v", &g.b_v});
    out.push_back({p + "W_e", &g.W_e});
    out.push_back({p + "b_e", &g.b_e});
  }
  for (std::size_t i = 0; i < m.decoder.W.size(); ++i) {
    const std::string p = "dec" + std::to_string(i) + ".";
    out.push_back({p + "W", &m.decoder.W[i]});
    out.push_back({p + "b", &m.decoder.b[i]});
  }
  return out;
}

}  // namespace

std::vector<NamedParameter> EdgeClassifierModel::parameters() {
  return list_parameters<EdgeClassifierModel, NamedParameter>(*this);
}

std::vector<ConstNamedParameter> EdgeClassifierModel::parameters() const {
  return list_parameters<const EdgeClassifierModel, ConstNamedParameter>(*this);
}

std::size_t EdgeClassifierModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += static_cast<std::size_t>(p.value->size());
  return n;
}

EdgeIndex EdgeIndex::of(const ProximityGraph& graph) {
  EdgeIndex idx;
  idx.num_nodes = static_cast<int>(graph.num_nodes());
  idx.src.reserve(graph.num_edges());
  idx.dst.reserve(graph.num_edges());
  for (const auto& [s, d] : graph.edges) {
    idx.src.push_back(s);
    idx.dst.push_back(d);
  }
  return idx;
}

ModelVars bind(ad::Tape& tape, const EdgeClassifierModel& model, bool requires_grad) {
  auto mk = [&](const Matrix& m) { return requires_grad ? tape.variable(m) : tape.constant(m); };
  ModelVars v;
  for (std::size_t l = 0; l < model.encoder.size(); ++l) {
    const auto& g = model.encoder[l];
    v.encoder[l] = GatVars{mk(g.W_m), mk(g.b_m), mk(g.a), mk(g.W_v), mk(g.b_v), mk(g.W_e), mk(g.b_e)};
  }
  for (std::size_t i = 0; i < 3; ++i) {
    v.decoder.W[i] = mk(model.decoder.W[i]);
    v.decoder.b[i] = mk(model.decoder.b[i]);
  }
  return v;
}

namespace {

ad::Var linear(ad::Var x, ad::Var W, ad::Var b) { return ad::add_row(ad::matmul(x, W), b); }

}  // namespace

std::pair<ad::Var, ad::Var> encoder_step(const GatVars& layer, ad::Var nodes, ad::Var edges,
                                         const EdgeIndex& index, double leaky_slope) {
  ad::Tape& tape = *nodes.tape;
  const ad::Var v_src = ad::gather_rows(nodes, index.src);
  const ad::Var v_dst = ad::gather_rows(nodes, index.dst);

  const ad::Var no_edge = tape.constant(Matrix::Zero(nodes.rows(), edges.cols()));
  const ad::Var query = linear(ad::hcat({nodes, no_edge}), layer.W_m, layer.b_m);
  const ad::Var message = linear(ad::hcat({v_src, edges}), layer.W_m, layer.b_m);
  const ad::Var score =
      ad::leaky_relu(ad::matmul(ad::hcat({ad::gather_rows(query, index.dst), message}), layer.a), leaky_slope);
  const ad::Var alpha = ad::segment_softmax(score, index.dst, index.num_nodes);
  const ad::Var aggregated = ad::segment_max(ad::scale_rows(message, alpha), index.dst, index.num_nodes);

  const ad::Var next_nodes = ad::relu(linear(ad::hcat({nodes, aggregated}), layer.W_v, layer.b_v));
  const ad::Var next_edges = ad::relu(linear(ad::hcat({v_src, edges, v_dst}), layer.W_e, layer.b_e));
  return {next_nodes, next_edges};
}

ad::Var decode(const DecoderVars& dec, ad::Var nodes, ad::Var edges, const EdgeIndex& index) {
  ad::Var x = ad::hcat({ad::gather_rows(nodes, index.src), edges, ad::gather_rows(nodes, index.dst)});
  x = ad::relu(linear(x, dec.W[0], dec.b[0]));
  x = ad::relu(linear(x, dec.W[1], dec.b[1]));
  return linear(x, dec.W[2], dec.b[2]);
}

ad::Var forward(const ModelVars& vars, ad::Tape& tape, const ProximityGraph& normalized) {
  const EdgeIndex index = EdgeIndex::of(normalized);
  ad::Var v = tape.constant(normalized.node_feats);
  ad::Var e = tape.constant(normalized.edge_feats.rows() > 0 ? normalized.edge_feats
                                                               : Matrix(0, kEdgeFeatureDim));
  for (const auto& layer : vars.encoder) std::tie(v, e) = encoder_step(layer, v, e, index);
  return decode(vars.decoder, v, e, index);
}

std::pair<Matrix, Matrix> encoder_step(const GatLayer& layer, const Matrix& nodes, const Matrix& edges,
                                       const ProximityGraph& graph) {
  ad::Tape tape;
  const GatVars vars{tape.constant(layer.W_m), tape.constant(layer.b_m), tape.constant(layer.a),
                     tape.constant(layer.W_v), tape.constant(layer.b_v), tape.constant(layer.W_e),
                     tape.constant(layer.b_e)};
  const auto [v, e] = encoder_step(vars, tape.constant(nodes), tape.constant(edges), EdgeIndex::of(graph));
  return {v.value(), e.value()};
}

Vector decode(const Decoder& dec, const Matrix& nodes, const Matrix& edges, const ProximityGraph& graph) {
  ad::Tape tape;
  DecoderVars vars;
  for (std::size_t i = 0; i < 3; ++i) {
    vars.W[i] = tape.constant(dec.W[i]);
    vars.b[i] = tape.constant(dec.b[i]);
  }
  const ad::Var out = decode(vars, tape.constant(nodes), tape.constant(edges), EdgeIndex::of(graph));
  return out.value().col(0);
}

namespace {

// Tape-free evaluation of the same network, used wherever no gradients are
// needed. Optionally records the activation pattern.
class PlainForward {
 public:
  PlainForward(const ProximityGraph& graph, ActivationPattern* pattern)
      : index_(EdgeIndex::of(graph)), pattern_(pattern) {}

  Vector run(const EdgeClassifierModel& model, const ProximityGraph& graph) {
    if (pattern_) pattern_->clear();
    Matrix v = graph.node_feats;
    Matrix e = graph.edge_feats.rows() > 0 ? graph.edge_feats : Matrix(0, kEdgeFeatureDim);
    for (const auto& layer : model.encoder) std::tie(v, e) = step(layer, v, e);
    Matrix x = relu(linear(edge_input(v, e), model.decoder.W[0], model.decoder.b[0]));
    x = relu(linear(x, model.decoder.W[1], model.decoder.b[1]));
    return linear(x, model.decoder.W[2], model.decoder.b[2]).col(0);
  }

 private:
  static Matrix linear(const Matrix& x, const Matrix& W, const Matrix& b) {
    Matrix y = x * W;
    y.rowwise() += b.row(0);
    return y;
  }

  Matrix relu(Matrix x) {
    if (pattern_) {
      for (Eigen::Index i = 0; i < x.size(); ++i) pattern_->push_back(x.data()[i] > 0.0);
    }
    return x.cwiseMax(0.0);
  }

  Matrix gather(const Matrix& m, const std::vector<int>& rows) const {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
    return out;
  }

  Matrix edge_input(const Matrix& v, const Matrix& e) const {
    Matrix x(e.rows(), 2 * v.cols() + e.cols());
    x << gather(v, index_.src), e, gather(v, index_.dst);
    return x;
  }

  std::pair<Matrix, Matrix> step(const GatLayer& layer, const Matrix& v, const Matrix& e) {
    const Eigen::Index nv = v.cols(), h = layer.W_m.cols();
    const std::size_t n_edges = index_.src.size();
    const Matrix v_src = gather(v, index_.src);

    Matrix query = v * layer.W_m.topRows(nv);
    query.rowwise() += layer.b_m.row(0);
    Matrix in(static_cast<Eigen::Index>(n_edges), nv + e.cols());
    in << v_src, e;
    const Matrix message = linear(in, layer.W_m, layer.b_m);

    const Vector score_q = query * layer.a.topRows(h);
    const Vector score_m = message * layer.a.bottomRows(h);
    std::vector<double> score(n_edges), peak(static_cast<std::size_t>(index_.num_nodes),
                                             -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < n_edges; ++k) {
      const double z = score_q(index_.dst[k]) + score_m(static_cast<Eigen::Index>(k));
      if (pattern_) pattern_->push_back(z > 0.0);
      score[k] = z > 0.0 ? z : EdgeClassifierModel::kLeakySlope * z;
      peak[index_.dst[k]] = std::max(peak[index_.dst[k]], score[k]);
    }
    std::vector<double> total(static_cast<std::size_t>(index_.num_nodes), 0.0);
    for (std::size_t k = 0; k < n_edges; ++k) {
      score[k] = std::exp(score[k] - peak[index_.dst[k]]);
      total[index_.dst[k]] += score[k];
    }

    Matrix aggregated = Matrix::Zero(index_.num_nodes, h);
    std::vector<int> arg(static_cast<std::size_t>(index_.num_nodes * h), -1);
    for (std::size_t k = 0; k < n_edges; ++k) {
      const int d = index_.dst[k];
      const double alpha = score[k] / total[d];
      for (Eigen::Index c = 0; c < h; ++c) {
        const double x = alpha * message(static_cast<Eigen::Index>(k), c);
        int& a = arg[static_cast<std::size_t>(d * h + c)];
        if (a < 0 || x > aggregated(d, c)) {
          aggregated(d, c) = x;
          a = static_cast<int>(k);
        }
      }
    }
    if (pattern_) pattern_->insert(pattern_->end(), arg.begin(), arg.end());

    Matrix node_in(v.rows(), nv + h);
    node_in << v, aggregated;
    Matrix next_v = relu(linear(node_in, layer.W_v, layer.b_v));
    Matrix next_e = relu(linear(edge_input(v, e), layer.W_e, layer.b_e));
    return {std::move(next_v), std::move(next_e)};
  }

  EdgeIndex index_;
  ActivationPattern* pattern_;
};

}  // namespace

Vector forward_logits(const EdgeClassifierModel& model, const ProximityGraph& normalized, ActivationPattern* pattern) {
  return PlainForward(normalized, pattern).run(model, normalized);
}

Vector predict_proba(const EdgeClassifierModel& model, const ProximityGraph& raw) {
  const Vector logits = forward_logits(model, apply_normalize(raw, model.norm));
  return logits.unaryExpr([](double z) { return ad::sigmoid(z); });
}

double loss(const Vector& logits, std::span<const double> labels, double pos_weight) {
  ad::Tape tape;
  return ad::bce_with_logits(tape.constant(Matrix(logits)), labels, pos_weight).value()(0, 0);
}

namespace {

std::vector<Matrix> collect_grads(const ModelVars& vars, const EdgeClassifierModel& model) {
  std::vector<ad::Var> order;
  for (const auto& g : vars.encoder) order.insert(order.end(), {g.W_m, g.b_m, g.a, g.W_v, g.b_v, g.W_e, g.b_e});
  for (std::size_t i = 0; i < 3; ++i) order.insert(order.end(), {vars.decoder.W[i], vars.decoder.b[i]});

  const auto params = model.parameters();
  std::vector<Matrix> grads;
  grads.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Matrix& g = order[i].grad();
    grads.push_back(g.size() == 0 ? Matrix(Matrix::Zero(params[i].value->rows(), params[i].value->cols())) : g);
  }
  return grads;
}

}  // namespace

Gradients backward(const EdgeClassifierModel& model, const ProximityGraph& normalized,
                   std::span<const double> labels, double pos_weight, double loss_scale) {
  ad::Tape tape;
  const ModelVars vars = bind(tape, model, true);
  const ad::Var logits = forward(vars, tape, normalized);
  const ad::Var total = ad::scale(ad::bce_with_logits(logits, labels, pos_weight), loss_scale);
  Gradients out;
  out.loss = total.value()(0, 0);
  if (!std::isfinite(out.loss)) throw NumericError("backward: non-finite loss");
  tape.backward(total);
  out.grads = collect_grads(vars, model);
  const auto params = model.parameters();
  for (std::size_t i = 0; i < out.grads.size(); ++i) {
    if (!out.grads[i].allFinite()) throw NumericError("backward: non-finite gradient in " + params[i].name);
  }
  return out;
}

GradCheckReport grad_check(const EdgeClassifierModel& model, const ProximityGraph& normalized,
                           std::span<const double> labels, double pos_weight, double eps,
                           double denom_floor) {
  const Gradients analytic = backward(model, normalized, labels, pos_weight);
  EdgeClassifierModel probe = model;
  auto params = probe.parameters();
  GradCheckReport report;
  report.per_parameter.assign(params.size(), 0.0);

  ActivationPattern base, shifted;
  const double f0 = loss(forward_logits(probe, normalized, &base), labels, pos_weight);
  // Loss at theta + step, and whether the activation pattern matches theta's.
  auto eval = [&](double& slot, double value) {
    slot = value;
    const double f = loss(forward_logits(probe, normalized, &shifted), labels, pos_weight);
    return std::pair{f, shifted == base};
  };

  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& theta = *params[p].value;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      double& slot = theta.data()[k];
      const double saved = slot;
      const auto [up, up_same] = eval(slot, saved + eps);
      const auto [down, down_same] = eval(slot, saved - eps);
      double numeric = 0.0;
      if (up_same && down_same) {
        numeric = (up - down) / (2.0 * eps);
      } else {
        // A kink lies inside the central bracket; difference on the smooth side.
        const double side = up_same ? 1.0 : -1.0;
        const auto [far, far_same] = eval(slot, saved + 2.0 * side * eps);
        const double near = up_same ? up : down;
        if (!(up_same || down_same) || !far_same) {
          slot = saved;
          ++report.skipped;
          continue;
        }
        numeric = side * (-3.0 * f0 + 4.0 * near - far) / (2.0 * eps);
        ++report.one_sided;
      }
      slot = saved;
      const double exact = analytic.grads[p].data()[k];
      const double rel = std::abs(exact - numeric) /
                         std::max({std::abs(exact), std::abs(numeric), denom_floor});
      ++report.checked;
      report.per_parameter[p] = std::max(report.per_parameter[p], rel);
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_parameter = params[p].name;
        report.worst_entry = k;
      }
    }
  }
  return report;
}

}  // namespace scenegraph
