#pragma once

#include <scenegraph/geometry.hpp>

#include <array>
#include <cstdint>
#include <numbers>
#include <vector>

namespace scenegraph {

struct Room {
  std::int64_t id = 0;
  Vec2 center = Vec2::Zero();
  std::vector<PlaneId> plane_ids;
  bool operator==(const Room&) const = default;
};

struct Wall {
  std::int64_t id = 0;
  Vec2 center = Vec2::Zero();
  std::array<PlaneId, 2> plane_ids{};
  bool operator==(const Wall&) const = default;
};

enum class EdgeLabel { kNone, kSameRoom, kSameWall };

struct LabeledEdge {
  PlaneId src = 0;
  PlaneId dst = 0;
  EdgeLabel label = EdgeLabel::kNone;
  bool operator==(const LabeledEdge&) const = default;
};

/// A floorplan with ground truth. Rooms hold 4 planes, corridors 2.
struct Layout {
  std::vector<PlaneFeature> planes;
  std::vector<Room> rooms;
  std::vector<Wall> walls;
  std::vector<LabeledEdge> gt_edges;
  bool operator==(const Layout&) const = default;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct GenConfig {
  std::uint64_t seed = 0;
  IntRange n_rooms{3, 9};
  Range room_size{3.0, 7.0};
  /// Translation of the whole layout, per axis.
  double jitter_pos = 1.0;
  /// Rotation of the whole layout.
  double jitter_rot = 10.0 * std::numbers::pi / 180.0;
  /// Relative jitter on each grid column width / row height.
  double jitter_size = 0.2;
  double corridor_prob = 0.25;
  Range corridor_width{1.2, 2.5};
  Range wall_thickness{0.05, 0.4};
  double max_extent = 200.0;
  int max_attempts = 20;
  std::size_t k_negatives = 15;
};

void validate(const GenConfig& config);

/// Generates one labeled layout. Deterministic in `config` (including seed).
Layout generate_layout(const GenConfig& config);

/// Rebuilds `gt_edges`: same-room cliques, same-wall pairs, and negatives.
/// A node's neighbourhood is its positives plus its nearest other planes
/// (centroid distance) up to k in total; negatives join mutual neighbours, so
/// no node has more than max(k, #positives) outgoing edges. Output is
/// symmetric and sorted by (src, dst).
Layout label_edges(Layout layout, std::size_t k_negatives);

/// Room index per plane index (-1 when unassigned), in `layout.planes` order.
std::vector<int> room_membership(const Layout& layout);
/// Wall partner plane index per plane index (-1 when unpaired).
std::vector<int> wall_partner(const Layout& layout);

std::size_t plane_index(const Layout& layout, PlaneId id);

}  // namespace scenegraph
