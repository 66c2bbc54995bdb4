#include <scenegraph/io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scenegraph {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw NumericError("dump_json: non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

bool is_scalar(const Json& j) { return !j.is_array() && !j.is_object(); }

void write(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool inline_array = std::all_of(j.begin(), j.end(), [](const Json& e) {
        return is_scalar(e) || (e.is_array() && std::all_of(e.begin(), e.end(), is_scalar));
      });
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += inline_array ? ", " : ",";
        if (!inline_array) out += "\n" + pad;
        write(e, out, indent + 2);
        first = false;
      }
      if (!inline_array) out += "\n" + std::string(static_cast<std::size_t>(indent), ' ');
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        out += "\n" + pad + Json(key).dump() + ": ";
        write(value, out, indent + 2);
        first = false;
      }
      out += "\n" + std::string(static_cast<std::size_t>(indent), ' ') + '}';
      return;
    }
    default:
      out += j.dump();
  }
}

// --- schema reading helpers -------------------------------------------------

std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') {
      escaped += "~0";
    } else if (c == '/') {
      escaped += "~1";
    } else {
      escaped += c;
    }
  }
  return ptr + "/" + escaped;
}

std::string child(const std::string& ptr, std::size_t index) { return ptr + "/" + std::to_string(index); }

const Json& field(const Json& obj, const std::string& key, const std::string& ptr) {
  if (!obj.is_object()) throw SchemaError(ptr, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(ptr, key), "missing required field");
  return *it;
}

const Json& array_field(const Json& obj, const std::string& key, const std::string& ptr) {
  const Json& a = field(obj, key, ptr);
  if (!a.is_array()) throw SchemaError(child(ptr, key), "expected an array");
  return a;
}

double number(const Json& j, const std::string& ptr) {
  if (!j.is_number()) throw SchemaError(ptr, "expected a number");
  return j.get<double>();
}

std::int64_t integer(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) throw SchemaError(ptr, "expected an integer");
  return j.get<std::int64_t>();
}

std::string text(const Json& j, const std::string& ptr) {
  if (!j.is_string()) throw SchemaError(ptr, "expected a string");
  return j.get<std::string>();
}

Vec2 vec2(const Json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(ptr, "expected [x, y]");
  return {number(j[0], child(ptr, 0)), number(j[1], child(ptr, 1))};
}

Json vec2_json(const Vec2& v) { return Json::array({v.x(), v.y()}); }

std::vector<PlaneId> id_list(const Json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array of plane ids");
  std::vector<PlaneId> ids;
  for (std::size_t i = 0; i < j.size(); ++i) ids.push_back(integer(j[i], child(ptr, i)));
  return ids;
}

void check_version(const Json& j, const std::string& ptr) {
  const std::int64_t v = integer(field(j, "format_version", ptr), child(ptr, "format_version"));
  if (v < 1 || v > kFormatVersion) {
    throw SchemaError(child(ptr, "format_version"), "unsupported format version " + std::to_string(v));
  }
}

Json row_json(const Eigen::RowVectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::RowVectorXd row_from(const Json& j, const std::string& ptr, Eigen::Index expected) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
    throw SchemaError(ptr, "expected an array of " + std::to_string(expected) + " numbers");
  }
  Eigen::RowVectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v(i) = number(j[static_cast<std::size_t>(i)], child(ptr, static_cast<std::size_t>(i)));
  return v;
}

const char* label_name(EdgeLabel l) {
  switch (l) {
    case EdgeLabel::kSameRoom:
      return "same_room";
    case EdgeLabel::kSameWall:
      return "same_wall";
    default:
      return "none";
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  write(value, out, 0);
  out += '\n';
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

// --- layouts ------------------------------------------------------------------

Json layout_to_json(const Layout& layout) {
  Json planes = Json::array();
  for (const auto& p : layout.planes) {
    Json jp{{"id", p.id},
            {"normal", vec2_json(p.normal)},
            {"d", p.offset()},
            {"endpoints", Json::array({vec2_json(p.endpoints[0]), vec2_json(p.endpoints[1])})},
            {"centroid", vec2_json(p.centroid)},
            {"width", p.width}};
    if (!p.ancestry.empty()) jp["ancestry"] = p.ancestry;
    planes.push_back(std::move(jp));
  }
  Json rooms = Json::array();
  for (const auto& r : layout.rooms) {
    rooms.push_back({{"id", r.id}, {"center", vec2_json(r.center)}, {"plane_ids", r.plane_ids}});
  }
  Json walls = Json::array();
  for (const auto& w : layout.walls) {
    walls.push_back({{"id", w.id}, {"center", vec2_json(w.center)}, {"plane_ids", Json::array({w.plane_ids[0], w.plane_ids[1]})}});
  }
  Json edges = Json::array();
  for (const auto& e : layout.gt_edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"label", label_name(e.label)}});
  return Json{{"format_version", kFormatVersion}, {"planes", planes}, {"rooms", rooms}, {"walls", walls}, {"gt_edges", edges}};
}

Layout layout_from_json(const Json& j) {
  const std::string root;
  check_version(j, root);
  Layout layout;
  const Json& planes = array_field(j, "planes", root);
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const std::string ptr = child(child(root, "planes"), i);
    const Json& jp = planes[i];
    PlaneFeature p;
    p.id = integer(field(jp, "id", ptr), child(ptr, "id"));
    p.normal = vec2(field(jp, "normal", ptr), child(ptr, "normal"));
    const Json& ends = field(jp, "endpoints", ptr);
    if (!ends.is_array() || ends.size() != 2) throw SchemaError(child(ptr, "endpoints"), "expected two points");
    p.endpoints = {vec2(ends[0], child(child(ptr, "endpoints"), 0)), vec2(ends[1], child(child(ptr, "endpoints"), 1))};
    p.centroid = vec2(field(jp, "centroid", ptr), child(ptr, "centroid"));
    p.width = number(field(jp, "width", ptr), child(ptr, "width"));
    if (jp.contains("ancestry")) p.ancestry = id_list(jp["ancestry"], child(ptr, "ancestry"));
    try {
      validate(p);
    } catch (const InvalidArgument& e) {
      throw SchemaError(ptr, e.what());
    }
    const double d = number(field(jp, "d", ptr), child(ptr, "d"));
    if (std::abs(d - p.offset()) > 1e-6) throw SchemaError(child(ptr, "d"), "offset inconsistent with normal and centroid");
    layout.planes.push_back(std::move(p));
  }
  const Json& rooms = array_field(j, "rooms", root);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string ptr = child(child(root, "rooms"), i);
    Room r;
    r.id = integer(field(rooms[i], "id", ptr), child(ptr, "id"));
    r.center = vec2(field(rooms[i], "center", ptr), child(ptr, "center"));
    r.plane_ids = id_list(field(rooms[i], "plane_ids", ptr), child(ptr, "plane_ids"));
    layout.rooms.push_back(std::move(r));
  }
  const Json& walls = array_field(j, "walls", root);
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string ptr = child(child(root, "walls"), i);
    Wall w;
    w.id = integer(field(walls[i], "id", ptr), child(ptr, "id"));
    w.center = vec2(field(walls[i], "center", ptr), child(ptr, "center"));
    const auto ids = id_list(field(walls[i], "plane_ids", ptr), child(ptr, "plane_ids"));
    if (ids.size() != 2) throw SchemaError(child(ptr, "plane_ids"), "a wall has exactly two planes");
    w.plane_ids = {ids[0], ids[1]};
    layout.walls.push_back(w);
  }
  const Json& edges = array_field(j, "gt_edges", root);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ptr = child(child(root, "gt_edges"), i);
    LabeledEdge e;
    e.src = integer(field(edges[i], "src", ptr), child(ptr, "src"));
    e.dst = integer(field(edges[i], "dst", ptr), child(ptr, "dst"));
    const std::string label = text(field(edges[i], "label", ptr), child(ptr, "label"));
    if (label == "same_room") {
      e.label = EdgeLabel::kSameRoom;
    } else if (label == "same_wall") {
      e.label = EdgeLabel::kSameWall;
    } else if (label == "none") {
      e.label = EdgeLabel::kNone;
    } else {
      throw SchemaError(child(ptr, "label"), "unknown label '" + label + "'");
    }
    layout.gt_edges.push_back(e);
  }
  return layout;
}

std::string serialize_layout(const Layout& layout) { return dump_json(layout_to_json(layout)); }

Layout parse_layout(const std::string& text) { return layout_from_json(parse_json(text)); }

// --- checkpoints --------------------------------------------------------------

Json checkpoint_to_json(const Checkpoint& c) {
  const auto& m = c.model;
  Json params = Json::array();
  for (const auto& p : m.parameters()) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < p.value->size(); ++i) data.push_back(p.value->data()[i]);
    params.push_back({{"name", p.name}, {"shape", Json::array({p.value->rows(), p.value->cols()})}, {"data", data}});
  }
  const auto& t = c.train_config;
  Json train{{"epochs", t.epochs},
             {"layouts_per_epoch", t.layouts_per_epoch},
             {"learning_rate", t.learning_rate},
             {"beta1", t.beta1},
             {"beta2", t.beta2},
             {"adam_eps", t.adam_eps},
             {"seed", t.seed},
             {"pos_weight", t.pos_weight},
             {"eval_threshold", t.eval_threshold}};
  return Json{{"format_version", kFormatVersion},
              {"relation_type", to_string(m.relation)},
              {"hidden_dim", m.hidden_dim},
              {"rng_seed", m.init_seed},
              {"parameters", params},
              {"norm_stats",
               {{"node_mean", row_json(m.norm.node_mean)},
                {"node_std", row_json(m.norm.node_std)},
                {"edge_mean", row_json(m.norm.edge_mean)},
                {"edge_std", row_json(m.norm.edge_std)}}},
              {"train_config", train}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  const std::string root;
  check_version(j, root);
  Checkpoint c;
  const std::string rel = text(field(j, "relation_type", root), "/relation_type");
  try {
    c.model.relation = relation_from_string(rel);
  } catch (const InvalidArgument& e) {
    throw SchemaError("/relation_type", e.what());
  }
  const std::int64_t hidden = integer(field(j, "hidden_dim", root), "/hidden_dim");
  if (hidden < 1) throw SchemaError("/hidden_dim", "must be >= 1");
  const Json& seed = field(j, "rng_seed", root);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) throw SchemaError("/rng_seed", "expected an integer");
  // Shapes come from a freshly constructed model; the file must match them.
  c.model = EdgeClassifierModel(c.model.relation, static_cast<int>(hidden), seed.get<std::uint64_t>());

  const Json& params = array_field(j, "parameters", root);
  auto expected = c.model.parameters();
  if (params.size() != expected.size()) {
    throw SchemaError("/parameters", "expected " + std::to_string(expected.size()) + " parameter arrays");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string ptr = child("/parameters", i);
    const std::string name = text(field(params[i], "name", ptr), child(ptr, "name"));
    if (name != expected[i].name) throw SchemaError(child(ptr, "name"), "expected parameter '" + expected[i].name + "'");
    const Json& shape = field(params[i], "shape", ptr);
    if (!shape.is_array() || shape.size() != 2) throw SchemaError(child(ptr, "shape"), "expected [rows, cols]");
    const std::int64_t rows = integer(shape[0], child(child(ptr, "shape"), 0));
    const std::int64_t cols = integer(shape[1], child(child(ptr, "shape"), 1));
    Matrix& target = *expected[i].value;
    if (rows != target.rows() || cols != target.cols()) {
      throw SchemaError(child(ptr, "shape"), "shape does not match hidden_dim " + std::to_string(hidden));
    }
    const Json& data = field(params[i], "data", ptr);
    if (!data.is_array() || static_cast<std::int64_t>(data.size()) != rows * cols) {
      throw SchemaError(child(ptr, "data"), "length does not match shape");
    }
    for (std::size_t k = 0; k < data.size(); ++k) target.data()[k] = number(data[k], child(child(ptr, "data"), k));
  }

  const Json& norm = field(j, "norm_stats", root);
  c.model.norm.node_mean = row_from(field(norm, "node_mean", "/norm_stats"), "/norm_stats/node_mean", kNodeFeatureDim);
  c.model.norm.node_std = row_from(field(norm, "node_std", "/norm_stats"), "/norm_stats/node_std", kNodeFeatureDim);
  c.model.norm.edge_mean = row_from(field(norm, "edge_mean", "/norm_stats"), "/norm_stats/edge_mean", kEdgeFeatureDim);
  c.model.norm.edge_std = row_from(field(norm, "edge_std", "/norm_stats"), "/norm_stats/edge_std", kEdgeFeatureDim);

  const Json& t = field(j, "train_config", root);
  const std::string tp = "/train_config";
  c.train_config.epochs = static_cast<int>(integer(field(t, "epochs", tp), tp + "/epochs"));
  c.train_config.layouts_per_epoch =
      static_cast<std::size_t>(integer(field(t, "layouts_per_epoch", tp), tp + "/layouts_per_epoch"));
  c.train_config.learning_rate = number(field(t, "learning_rate", tp), tp + "/learning_rate");
  c.train_config.beta1 = number(field(t, "beta1", tp), tp + "/beta1");
  c.train_config.beta2 = number(field(t, "beta2", tp), tp + "/beta2");
  c.train_config.adam_eps = number(field(t, "adam_eps", tp), tp + "/adam_eps");
  const Json& tseed = field(t, "seed", tp);
  if (!tseed.is_number_unsigned() && !tseed.is_number_integer()) throw SchemaError(tp + "/seed", "expected an integer");
  c.train_config.seed = tseed.get<std::uint64_t>();
  c.train_config.pos_weight = number(field(t, "pos_weight", tp), tp + "/pos_weight");
  c.train_config.eval_threshold = number(field(t, "eval_threshold", tp), tp + "/eval_threshold");
  return c;
}

std::string serialize_checkpoint(const Checkpoint& c) { return dump_json(checkpoint_to_json(c)); }

Checkpoint parse_checkpoint(const std::string& text) { return checkpoint_from_json(parse_json(text)); }

// --- predictions ----------------------------------------------------------------

Json prediction_to_json(const Prediction& p) {
  Json rooms = Json::array();
  for (const auto& r : p.rooms) rooms.push_back({{"id", r.id}, {"center", vec2_json(r.center)}, {"plane_ids", r.plane_ids}});
  Json walls = Json::array();
  for (const auto& w : p.walls) {
    walls.push_back({{"id", w.id},
                     {"center", vec2_json(w.center)},
                     {"plane_ids", Json::array({w.plane_ids[0], w.plane_ids[1]})},
                     {"probability", w.probability}});
  }
  Json edges = Json::array();
  for (const auto& e : p.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"p_room", e.p_room}, {"p_wall", e.p_wall}});
  return Json{{"format_version", kFormatVersion}, {"mode", to_string(p.mode)}, {"rooms", rooms}, {"walls", walls}, {"edges", edges}};
}

Prediction prediction_from_json(const Json& j) {
  const std::string root;
  check_version(j, root);
  Prediction p;
  try {
    p.mode = mode_from_string(text(field(j, "mode", root), "/mode"));
  } catch (const InvalidArgument& e) {
    throw SchemaError("/mode", e.what());
  }
  const Json& rooms = array_field(j, "rooms", root);
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const std::string ptr = child("/rooms", i);
    DetectedRoom r;
    r.id = integer(field(rooms[i], "id", ptr), child(ptr, "id"));
    r.center = vec2(field(rooms[i], "center", ptr), child(ptr, "center"));
    r.plane_ids = id_list(field(rooms[i], "plane_ids", ptr), child(ptr, "plane_ids"));
    p.rooms.push_back(std::move(r));
  }
  const Json& walls = array_field(j, "walls", root);
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const std::string ptr = child("/walls", i);
    DetectedWall w;
    w.id = integer(field(walls[i], "id", ptr), child(ptr, "id"));
    w.center = vec2(field(walls[i], "center", ptr), child(ptr, "center"));
    const auto ids = id_list(field(walls[i], "plane_ids", ptr), child(ptr, "plane_ids"));
    if (ids.size() != 2) throw SchemaError(child(ptr, "plane_ids"), "a wall has exactly two planes");
    w.plane_ids = {ids[0], ids[1]};
    w.probability = number(field(walls[i], "probability", ptr), child(ptr, "probability"));
    p.walls.push_back(w);
  }
  const Json& edges = array_field(j, "edges", root);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string ptr = child("/edges", i);
    EdgeScore e;
    e.src = integer(field(edges[i], "src", ptr), child(ptr, "src"));
    e.dst = integer(field(edges[i], "dst", ptr), child(ptr, "dst"));
    e.p_room = number(field(edges[i], "p_room", ptr), child(ptr, "p_room"));
    e.p_wall = number(field(edges[i], "p_wall", ptr), child(ptr, "p_wall"));
    p.edges.push_back(e);
  }
  return p;
}

Json report_to_json(const DetectionReport& r) {
  Json per = Json::array();
  for (const auto& c : r.per_layout) {
    per.push_back({{"true_positives", c.true_positives}, {"false_positives", c.false_positives}, {"false_negatives", c.false_negatives}});
  }
  Json out{{"relation", r.relation == Relation::kSameRoom ? "room" : "wall"},
           {"true_positives", r.counts.true_positives},
           {"false_positives", r.counts.false_positives},
           {"false_negatives", r.counts.false_negatives}};
  out["precision"] = r.precision_defined ? Json(r.precision) : Json(nullptr);
  out["recall"] = r.recall_defined ? Json(r.recall) : Json(nullptr);
  out["per_layout"] = per;
  return out;
}

}  // namespace scenegraph
