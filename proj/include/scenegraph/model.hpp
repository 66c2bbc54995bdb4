#pragma once

#include <scenegraph/autodiff.hpp>
#include <scenegraph/proxgraph.hpp>

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace scenegraph {

/// Entries i.i.d. uniform on [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
/// Shape is fan_in x fan_out.
Matrix xavier_uniform(int fan_in, int fan_out, std::mt19937_64& rng);

/// One attention/message-passing layer.
///
///   msg_k   = W_m [v_src || e_k] + b_m                 (per edge k = src -> dst)
///   query_i = W_m [v_i || 0] + b_m
///   alpha_k = softmax over edges into dst of LeakyReLU(a . [query_dst || msg_k])
///   v'_i    = ReLU(W_v [v_i || max_k alpha_k msg_k] + b_v)   (max over edges into i)
///   e'_k    = ReLU(W_e [v_src || e_k || v_dst] + b_e)
///
/// Weight matrices are stored input-major (rows = input width), so a layer is
/// applied as X * W + b.
struct GatLayer {
  Matrix W_m, b_m, a, W_v, b_v, W_e, b_e;
};

/// Three linear layers on [v_src || e_k || v_dst] with ReLU between them.
struct Decoder {
  std::array<Matrix, 3> W;
  std::array<Matrix, 3> b;
};

struct NamedParameter {
  std::string name;
  Matrix* value;
};

struct ConstNamedParameter {
  std::string name;
  const Matrix* value;
};

/// GAT encoder (two layers) plus MLP decoder producing one logit per edge.
/// `norm` holds the feature standardization fitted on the training set and is
/// applied to raw graphs by the predict functions.
class EdgeClassifierModel {
 public:
  static constexpr int kEncoderLayers = 2;
  static constexpr int kDecoderLayers = 3;
  static constexpr double kLeakySlope = 0.2;

  EdgeClassifierModel() = default;
  EdgeClassifierModel(Relation relation, int hidden_dim, std::uint64_t seed);

  Relation relation = Relation::kSameRoom;
  int hidden_dim = 32;
  std::uint64_t init_seed = 0;
  std::array<GatLayer, kEncoderLayers> encoder;
  Decoder decoder;
  NormStats norm;

  std::vector<NamedParameter> parameters();
  std::vector<ConstNamedParameter> parameters() const;
  std::size_t parameter_count() const;
};

/// Edge endpoint indices of a graph, in the form the layers consume.
struct EdgeIndex {
  std::vector<int> src;
  std::vector<int> dst;
  int num_nodes = 0;

  static EdgeIndex of(const ProximityGraph& graph);
};

struct GatVars {
  ad::Var W_m, b_m, a, W_v, b_v, W_e, b_e;
};

struct DecoderVars {
  std::array<ad::Var, 3> W, b;
};

struct ModelVars {
  std::array<GatVars, EdgeClassifierModel::kEncoderLayers> encoder;
  DecoderVars decoder;
};

/// Registers every model parameter on `tape` (as variables or constants).
ModelVars bind(ad::Tape& tape, const EdgeClassifierModel& model, bool requires_grad);

std::pair<ad::Var, ad::Var> encoder_step(const GatVars& layer, ad::Var nodes, ad::Var edges,
                                         const EdgeIndex& index, double leaky_slope = EdgeClassifierModel::kLeakySlope);
ad::Var decode(const DecoderVars& dec, ad::Var nodes, ad::Var edges, const EdgeIndex& index);

/// Full forward pass on an already normalized graph; returns E x 1 logits.
ad::Var forward(const ModelVars& vars, ad::Tape& tape, const ProximityGraph& normalized);

/// Plain-value versions of the layers.
std::pair<Matrix, Matrix> encoder_step(const GatLayer& layer, const Matrix& nodes, const Matrix& edges,
                                       const ProximityGraph& graph);
Vector decode(const Decoder& dec, const Matrix& nodes, const Matrix& edges, const ProximityGraph& graph);

/// Signs of every ReLU/LeakyReLU input and the winning row of every max
/// aggregation, in evaluation order. Equal patterns mean both evaluations lie
/// in the same smooth piece of the network.
using ActivationPattern = std::vector<std::int32_t>;

/// Logits for a normalized graph, evaluated without a tape.
Vector forward_logits(const EdgeClassifierModel& model, const ProximityGraph& normalized,
                      ActivationPattern* pattern = nullptr);
/// Edge probabilities for a raw graph (normalization applied internally).
Vector predict_proba(const EdgeClassifierModel& model, const ProximityGraph& raw);

/// Mean weighted binary cross-entropy on logits.
double loss(const Vector& logits, std::span<const double> labels, double pos_weight);

struct Gradients {
  double loss = 0.0;
  std::vector<Matrix> grads;  ///< aligned with model.parameters()
};

/// Reverse-mode gradients of `loss_scale * loss` on a normalized graph.
/// Throws NumericError on a non-finite loss or gradient.
Gradients backward(const EdgeClassifierModel& model, const ProximityGraph& normalized,
                   std::span<const double> labels, double pos_weight, double loss_scale = 1.0);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  Eigen::Index worst_entry = -1;
  std::vector<double> per_parameter;  ///< max relative error per parameter tensor
  std::size_t checked = 0;
  std::size_t one_sided = 0;  ///< entries with a kink inside the central bracket
  std::size_t skipped = 0;    ///< kinks on both sides within 2 eps
};

/// Compares reverse-mode gradients against central differences for every
/// parameter entry. Relative error is |g - fd| / max(|g|, |fd|, denom_floor).
/// Where theta +- eps changes the activation pattern the central difference
/// straddles a kink; the entry is then checked with the second-order
/// one-sided difference on the side that keeps the pattern, or skipped when
/// both sides change within 2 eps.
GradCheckReport grad_check(const EdgeClassifierModel& model, const ProximityGraph& normalized,
                           std::span<const double> labels, double pos_weight, double eps = 1e-5,
                           double denom_floor = 1e-6);

}  // namespace scenegraph
