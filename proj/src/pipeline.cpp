#include <scenegraph/pipeline.hpp>

#include <map>

namespace scenegraph {

std::vector<double> edge_labels(const ProximityGraph& graph, const Layout& layout, Relation relation) {
  std::map<PlaneId, int> room_of;
  for (std::size_t r = 0; r < layout.rooms.size(); ++r) {
    for (PlaneId id : layout.rooms[r].plane_ids) room_of[id] = static_cast<int>(r);
  }
  std::map<PlaneId, PlaneId> partner;
  for (const auto& w : layout.walls) {
    partner[w.plane_ids[0]] = w.plane_ids[1];
    partner[w.plane_ids[1]] = w.plane_ids[0];
  }
  std::vector<double> labels;
  labels.reserve(graph.num_edges());
  for (const auto& [s, d] : graph.edges) {
    const PlaneId a = graph.node_ids[static_cast<std::size_t>(s)];
    const PlaneId b = graph.node_ids[static_cast<std::size_t>(d)];
    bool positive = false;
    if (relation == Relation::kSameRoom) {
      const auto ra = room_of.find(a), rb = room_of.find(b);
      positive = ra != room_of.end() && rb != room_of.end() && ra->second == rb->second;
    } else {
      const auto pa = partner.find(a);
      positive = pa != partner.end() && pa->second == b;
    }
    labels.push_back(positive ? 1.0 : 0.0);
  }
  return labels;
}

TrainingExample make_example(const Layout& layout, Relation relation, std::size_t k) {
  TrainingExample ex;
  ex.graph = build_graph(layout.planes, k);
  ex.labels = edge_labels(ex.graph, layout, relation);
  return ex;
}

Mode mode_from_string(const std::string& s) {
  if (s == "conservative") return Mode::kConservative;
  if (s == "greedy") return Mode::kGreedy;
  throw InvalidArgument("unknown mode '" + s + "'");
}

std::string to_string(Mode m) { return m == Mode::kConservative ? "conservative" : "greedy"; }

std::vector<RoomCluster> Prediction::room_clusters() const {
  std::vector<RoomCluster> out;
  for (const auto& r : rooms) out.push_back({r.plane_ids});
  return out;
}

std::vector<WallPair> Prediction::wall_pairs() const {
  std::vector<WallPair> out;
  for (const auto& w : walls) out.push_back({w.plane_ids, w.probability});
  return out;
}

Prediction cluster_predictions(std::span<const PlaneFeature> planes, std::vector<EdgeScore> edges,
                               const InferenceConfig& config) {
  validate(config.cluster);
  Prediction pred;
  pred.mode = config.mode;
  pred.edges = std::move(edges);

  std::vector<EdgePrediction> room_preds, wall_preds;
  for (const auto& e : pred.edges) {
    room_preds.push_back({e.src, e.dst, e.p_room, Relation::kSameRoom});
    wall_preds.push_back({e.src, e.dst, e.p_wall, Relation::kSameWall});
  }
  const auto clusters = cluster_rooms(threshold_edges(room_preds, config.tau_room()), config.cluster);
  for (const auto& c : clusters) {
    pred.rooms.push_back({static_cast<std::int64_t>(pred.rooms.size()), c.plane_ids, room_center(c.plane_ids, planes)});
  }
  for (const auto& w : pair_walls(wall_preds, config.cluster, planes)) {
    pred.walls.push_back(
        {static_cast<std::int64_t>(pred.walls.size()), w.plane_ids, room_center(w.plane_ids, planes), w.probability});
  }
  return pred;
}

Prediction infer(std::span<const PlaneFeature> planes, const EdgeClassifierModel& room_model,
                 const EdgeClassifierModel& wall_model, const InferenceConfig& config,
                 std::vector<PlaneFeature>* planes_used) {
  if (room_model.relation != Relation::kSameRoom || wall_model.relation != Relation::kSameWall) {
    throw InvalidArgument("infer: expected one room model and one wall model");
  }
  std::vector<PlaneFeature> input(planes.begin(), planes.end());
  if (config.preprocess) input = split_planes(dedup_planes(input, config.dedup), config.split);
  if (planes_used) *planes_used = input;
  if (input.size() < 2) {
    Prediction empty;
    empty.mode = config.mode;
    return empty;
  }
  const ProximityGraph graph = build_graph(input, config.k);
  const Vector p_room = predict_proba(room_model, graph);
  const Vector p_wall = predict_proba(wall_model, graph);
  std::vector<EdgeScore> edges;
  edges.reserve(graph.num_edges());
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    const auto [s, d] = graph.edges[k];
    const auto row = static_cast<Eigen::Index>(k);
    edges.push_back({graph.node_ids[static_cast<std::size_t>(s)], graph.node_ids[static_cast<std::size_t>(d)],
                     p_room(row), p_wall(row)});
  }
  return cluster_predictions(input, std::move(edges), config);
}

SceneBuild build_scene_graph(std::span<const PlaneFeature> planes, const Prediction& prediction,
                             const Eigen::Matrix2d& prior_information) {
  SceneBuild out;
  std::map<PlaneId, int> var_of;
  for (const auto& p : planes) {
    const Plane measured = Plane::from_feature(p);
    const int v = out.graph.add_plane(p.id, measured);
    out.graph.add_plane_prior(v, measured, prior_information);
    var_of[p.id] = v;
  }
  auto lookup = [&](PlaneId id) {
    const auto it = var_of.find(id);
    if (it == var_of.end()) throw InvalidArgument("prediction references unknown plane id " + std::to_string(id));
    return it->second;
  };

  for (const auto& room : prediction.rooms) {
    int center = -1;
    try {
      if (room.plane_ids.size() == 4) {
        const std::array<int, 4> idx{lookup(room.plane_ids[0]), lookup(room.plane_ids[1]), lookup(room.plane_ids[2]),
                                     lookup(room.plane_ids[3])};
        const std::array<Plane, 4> params{out.graph.planes[idx[0]].value, out.graph.planes[idx[1]].value,
                                          out.graph.planes[idx[2]].value, out.graph.planes[idx[3]].value};
        pair_room_planes(params);
        center = out.graph.add_center(room.id, room.center);
        out.graph.add_room4(center, idx);
      } else if (room.plane_ids.size() == 2) {
        const std::array<int, 2> idx{lookup(room.plane_ids[0]), lookup(room.plane_ids[1])};
        if (!(out.graph.planes[idx[0]].value.normal().dot(out.graph.planes[idx[1]].value.normal()) < kPairDotMax)) {
          throw DegenerateError("planes are not opposing");
        }
        center = out.graph.add_center(room.id, room.center);
        out.graph.add_room2(center, idx, room_center(room.plane_ids, planes));
      } else {
        throw DegenerateError("unsupported plane count " + std::to_string(room.plane_ids.size()));
      }
    } catch (const DegenerateError& e) {
      out.skipped.push_back("room " + std::to_string(room.id) + ": " + e.what());
    }
    out.room_centers.push_back(center);
  }
  for (const auto& wall : prediction.walls) {
    int center = -1;
    const std::array<int, 2> idx{lookup(wall.plane_ids[0]), lookup(wall.plane_ids[1])};
    if (out.graph.planes[idx[0]].value.normal().dot(out.graph.planes[idx[1]].value.normal()) < kPairDotMax) {
      center = out.graph.add_center(wall.id, wall.center);
      out.graph.add_wall(center, idx, room_center(wall.plane_ids, planes));
    } else {
      out.skipped.push_back("wall " + std::to_string(wall.id) + ": planes are not opposing");
    }
    out.wall_centers.push_back(center);
  }
  return out;
}

}  // namespace scenegraph
