#include <scenegraph/synthgen.hpp>

#include <gtest/gtest.h>

#include <map>
#include <set>

using namespace scenegraph;

namespace {

GenConfig single_room(std::uint64_t seed) {
  GenConfig c;
  c.seed = seed;
  c.n_rooms = {1, 1};
  c.corridor_prob = 0.0;
  return c;
}

// Square room of side s at (x0, y0) with inward normals, planes id0..id0+3.
std::vector<PlaneFeature> square(PlaneId id0, double x0, double y0, double s) {
  return {make_feature(id0, {0, 1}, {x0, y0}, {x0 + s, y0}), make_feature(id0 + 1, {-1, 0}, {x0 + s, y0}, {x0 + s, y0 + s}),
          make_feature(id0 + 2, {0, -1}, {x0 + s, y0 + s}, {x0, y0 + s}), make_feature(id0 + 3, {1, 0}, {x0, y0 + s}, {x0, y0})};
}

void check_layout_invariants(const Layout& L) {
  const auto& P = L.planes;
  std::map<PlaneId, const PlaneFeature*> by_id;
  for (const auto& p : P) {
    EXPECT_TRUE(by_id.emplace(p.id, &p).second) << "duplicate plane id";
    EXPECT_NO_THROW(validate(p));
  }
  std::map<PlaneId, int> room_count, wall_count;
  for (const auto& r : L.rooms) {
    EXPECT_TRUE(r.plane_ids.size() == 2 || r.plane_ids.size() == 4);
    Vec2 mean = Vec2::Zero();
    for (PlaneId id : r.plane_ids) {
      ++room_count[id];
      mean += by_id.at(id)->centroid;
    }
    mean /= static_cast<double>(r.plane_ids.size());
    EXPECT_LE((mean - r.center).norm(), 1e-9);
  }
  for (const auto& p : P) EXPECT_EQ(room_count[p.id], 1) << "plane " << p.id;
  for (const auto& w : L.walls) {
    for (PlaneId id : w.plane_ids) EXPECT_EQ(++wall_count[id], 1);
    EXPECT_LT(by_id.at(w.plane_ids[0])->normal.dot(by_id.at(w.plane_ids[1])->normal), -0.99);
  }
  std::set<std::pair<PlaneId, PlaneId>> edges;
  std::map<std::pair<PlaneId, PlaneId>, EdgeLabel> labels;
  for (const auto& e : L.gt_edges) {
    EXPECT_NE(e.src, e.dst);
    EXPECT_TRUE(edges.emplace(e.src, e.dst).second);
    labels[{e.src, e.dst}] = e.label;
  }
  for (const auto& [k, label] : labels) {
    const auto rev = labels.find({k.second, k.first});
    ASSERT_NE(rev, labels.end());
    EXPECT_EQ(rev->second, label);
    if (label == EdgeLabel::kSameWall) {
      EXPECT_LT(by_id.at(k.first)->normal.dot(by_id.at(k.second)->normal), -0.99);
    }
  }
}

}  // namespace

TEST(Generate, SingleRoom) {
  const Layout L = generate_layout(single_room(7));
  ASSERT_EQ(L.rooms.size(), 1u);
  EXPECT_EQ(L.planes.size(), 4u);
  EXPECT_TRUE(L.walls.empty());
  Vec2 c = Vec2::Zero();
  for (const auto& p : L.planes) c += p.centroid / 4.0;
  EXPECT_LE((L.rooms[0].center - c).norm(), 1e-9);
  // Inward normals: each points from its plane toward the center.
  for (const auto& p : L.planes) EXPECT_GT(p.normal.dot(L.rooms[0].center - p.centroid), 0.0);
  check_layout_invariants(L);
}

TEST(Generate, Deterministic) {
  GenConfig c;
  c.seed = 99;
  EXPECT_EQ(generate_layout(c), generate_layout(c));
  GenConfig d = c;
  d.seed = 100;
  EXPECT_NE(generate_layout(c), generate_layout(d));
}

TEST(Generate, FourRoomGridHasAntiParallelWalls) {
  GenConfig c;
  c.seed = 42;
  c.n_rooms = {4, 4};
  c.corridor_prob = 0.0;
  const Layout L = generate_layout(c);
  EXPECT_EQ(L.rooms.size(), 4u);
  EXPECT_EQ(L.planes.size(), 16u);
  ASSERT_GE(L.walls.size(), 1u);
  // Geometric predicate over the output: each wall is two back-to-back surfaces
  // separated by the configured thickness.
  for (const auto& w : L.walls) {
    const auto& a = L.planes[plane_index(L, w.plane_ids[0])];
    const auto& b = L.planes[plane_index(L, w.plane_ids[1])];
    EXPECT_LT(a.normal.dot(b.normal), -0.99);
    const double sep = std::abs(a.normal.dot(b.centroid) + a.offset());
    EXPECT_GE(sep, c.wall_thickness.lo - 1e-9);
    EXPECT_LE(sep, c.wall_thickness.hi + 1e-9);
    // Normals face away from each other (each faces its own room).
    EXPECT_LT(a.normal.dot(b.centroid - a.centroid), 0.0);
  }
  check_layout_invariants(L);
}

TEST(Generate, InvariantsAcrossSeeds) {
  std::size_t corridors = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    GenConfig c;
    c.seed = s;
    const Layout L = generate_layout(c);
    check_layout_invariants(L);
    for (const auto& r : L.rooms) corridors += r.plane_ids.size() == 2;
  }
  EXPECT_GT(corridors, 0u);
}

TEST(Generate, InfeasibleConfigFails) {
  GenConfig c;
  c.max_extent = 5.0;
  c.n_rooms = {9, 9};
  EXPECT_THROW(generate_layout(c), GenerationError);
}

TEST(Generate, InvalidConfigRejected) {
  GenConfig c;
  c.n_rooms = {5, 3};
  EXPECT_THROW(validate(c), InvalidArgument);
  c = GenConfig{};
  c.k_negatives = 0;
  EXPECT_THROW(validate(c), InvalidArgument);
  c = GenConfig{};
  c.corridor_prob = 1.5;
  EXPECT_THROW(validate(c), InvalidArgument);
}

TEST(LabelEdges, SingleRoomClique) {
  Layout L;
  L.planes = square(0, 0, 0, 4);
  L.rooms.push_back({0, {2, 2}, {0, 1, 2, 3}});
  L = label_edges(std::move(L), 15);
  ASSERT_EQ(L.gt_edges.size(), 12u);
  for (const auto& e : L.gt_edges) EXPECT_EQ(e.label, EdgeLabel::kSameRoom);
}

TEST(LabelEdges, SharedWallIsSameWallNotSameRoom) {
  Layout L;
  L.planes = square(0, 0, 0, 4);
  auto right = square(4, 4.2, 0, 4);
  L.planes.insert(L.planes.end(), right.begin(), right.end());
  L.rooms.push_back({0, {2, 2}, {0, 1, 2, 3}});
  L.rooms.push_back({1, {6.2, 2}, {4, 5, 6, 7}});
  // Plane 1 (x = 4, facing -x) and plane 7 (x = 4.2, facing +x).
  L.walls.push_back({0, {4.1, 2}, {1, 7}});
  L = label_edges(std::move(L), 15);
  std::map<std::pair<PlaneId, PlaneId>, EdgeLabel> labels;
  for (const auto& e : L.gt_edges) labels[{e.src, e.dst}] = e.label;
  EXPECT_EQ(labels.at({1, 7}), EdgeLabel::kSameWall);
  EXPECT_EQ(labels.at({7, 1}), EdgeLabel::kSameWall);
  EXPECT_EQ(labels.at({1, 3}), EdgeLabel::kSameRoom);
  EXPECT_EQ(labels.at({0, 4}), EdgeLabel::kNone);
  check_layout_invariants(L);
}

TEST(LabelEdges, OutDegreeBoundedByK) {
  std::size_t checked = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    GenConfig c;
    c.seed = s;
    const Layout L = generate_layout(c);
    if (L.planes.size() < 28) continue;
    ++checked;
    std::map<PlaneId, std::size_t> out;
    for (const auto& e : L.gt_edges) ++out[e.src];
    for (const auto& [id, deg] : out) EXPECT_LE(deg, 15u) << "seed " << s << " plane " << id;
  }
  EXPECT_GT(checked, 10u);
}

TEST(LabelEdges, SortedBySourceThenDestination) {
  GenConfig c;
  c.seed = 5;
  const Layout L = generate_layout(c);
  for (std::size_t i = 1; i < L.gt_edges.size(); ++i) {
    EXPECT_LT(std::pair(L.gt_edges[i - 1].src, L.gt_edges[i - 1].dst), std::pair(L.gt_edges[i].src, L.gt_edges[i].dst));
  }
}
