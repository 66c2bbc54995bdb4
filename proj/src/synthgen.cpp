#include <scenegraph/synthgen.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace scenegraph {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double uniform(Rng& rng, const Range& r) { return uniform(rng, r.lo, r.hi); }

bool bernoulli(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

struct Rect {
  double x0, y0, x1, y1;
};

// Four inward-facing planes: bottom, right, top, left.
void add_room_planes(const Rect& r, std::vector<PlaneFeature>& planes, Room& room) {
  const Vec2 a(r.x0, r.y0), b(r.x1, r.y0), c(r.x1, r.y1), d(r.x0, r.y1);
  const std::array<std::tuple<Vec2, Vec2, Vec2>, 4> sides{{
      {Vec2(0, 1), a, b},
      {Vec2(-1, 0), b, c},
      {Vec2(0, -1), c, d},
      {Vec2(1, 0), d, a},
  }};
  for (const auto& [n, p, q] : sides) {
    const PlaneId id = static_cast<PlaneId>(planes.size());
    planes.push_back(make_feature(id, n, p, q));
    room.plane_ids.push_back(id);
  }
}

void add_corridor_planes(const Rect& r, std::vector<PlaneFeature>& planes, Room& room) {
  const PlaneId bottom = static_cast<PlaneId>(planes.size());
  planes.push_back(make_feature(bottom, Vec2(0, 1), Vec2(r.x0, r.y0), Vec2(r.x1, r.y0)));
  planes.push_back(make_feature(bottom + 1, Vec2(0, -1), Vec2(r.x1, r.y1), Vec2(r.x0, r.y1)));
  room.plane_ids = {bottom, bottom + 1};
}

// Back-to-back anti-parallel surfaces with identical extent across a thin gap.
bool forms_wall(const PlaneFeature& a, const PlaneFeature& b, const Range& thickness) {
  if (a.normal.dot(b.normal) >= -0.99) return false;
  const double sep = -(b.centroid - a.centroid).dot(a.normal);
  if (sep < thickness.lo - 1e-9 || sep > thickness.hi + 1e-9) return false;
  const Vec2 dir = a.direction();
  auto interval = [&](const PlaneFeature& f) {
    const double s0 = f.endpoints[0].dot(dir), s1 = f.endpoints[1].dot(dir);
    return std::pair{std::min(s0, s1), std::max(s0, s1)};
  };
  const auto [alo, ahi] = interval(a);
  const auto [blo, bhi] = interval(b);
  return std::abs(alo - blo) < 1e-6 && std::abs(ahi - bhi) < 1e-6;
}

Vec2 centroid_mean(const std::vector<PlaneFeature>& planes, std::span<const PlaneId> ids) {
  Vec2 sum = Vec2::Zero();
  for (PlaneId id : ids) sum += planes[static_cast<std::size_t>(id)].centroid;
  return sum / static_cast<double>(ids.size());
}

// Returns false when the layout exceeds the configured extent.
bool try_generate(const GenConfig& cfg, Rng& rng, Layout& out) {
  const int n = std::uniform_int_distribution<int>(cfg.n_rooms.lo, cfg.n_rooms.hi)(rng);
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int rows = (n + cols - 1) / cols;

  auto jittered_size = [&] { return uniform(rng, cfg.room_size) * (1.0 + uniform(rng, -cfg.jitter_size, cfg.jitter_size)); };

  std::vector<double> col_x(cols), col_w(cols);
  double x = 0.0;
  for (int c = 0; c < cols; ++c) {
    col_w[c] = jittered_size();
    col_x[c] = x;
    x += col_w[c] + uniform(rng, cfg.wall_thickness);
  }
  const double total_width = col_x.back() + col_w.back();

  std::vector<Rect> corridors;
  std::vector<double> row_y(rows), row_h(rows);
  double y = 0.0;
  for (int b = 0; b <= rows; ++b) {
    if (bernoulli(rng, cfg.corridor_prob)) {
      const double h = uniform(rng, cfg.corridor_width);
      corridors.push_back({0.0, y, total_width, y + h});
      y += h + uniform(rng, cfg.wall_thickness);
    }
    if (b < rows) {
      row_h[b] = jittered_size();
      row_y[b] = y;
      y += row_h[b] + uniform(rng, cfg.wall_thickness);
    }
  }
  if (std::max(total_width, y) > cfg.max_extent) return false;

  Layout layout;
  for (int k = 0; k < n; ++k) {
    const int r = k / cols, c = k % cols;
    Room room;
    room.id = static_cast<std::int64_t>(layout.rooms.size());
    add_room_planes({col_x[c], row_y[r], col_x[c] + col_w[c], row_y[r] + row_h[r]}, layout.planes, room);
    layout.rooms.push_back(std::move(room));
  }
  for (const auto& rect : corridors) {
    Room room;
    room.id = static_cast<std::int64_t>(layout.rooms.size());
    add_corridor_planes(rect, layout.planes, room);
    layout.rooms.push_back(std::move(room));
  }

  std::vector<bool> paired(layout.planes.size(), false);
  for (std::size_t i = 0; i < layout.planes.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.planes.size(); ++j) {
      if (paired[i] || paired[j]) continue;
      if (forms_wall(layout.planes[i], layout.planes[j], cfg.wall_thickness)) {
        paired[i] = paired[j] = true;
        Wall w;
        w.id = static_cast<std::int64_t>(layout.walls.size());
        w.plane_ids = {static_cast<PlaneId>(i), static_cast<PlaneId>(j)};
        layout.walls.push_back(w);
      }
    }
  }

  const double angle = uniform(rng, -cfg.jitter_rot, cfg.jitter_rot);
  const Eigen::Matrix2d rot = Eigen::Rotation2Dd(angle).toRotationMatrix();
  const Vec2 shift(uniform(rng, -cfg.jitter_pos, cfg.jitter_pos), uniform(rng, -cfg.jitter_pos, cfg.jitter_pos));
  const Vec2 pivot(total_width / 2.0, y / 2.0);
  for (auto& p : layout.planes) {
    auto move = [&](const Vec2& v) -> Vec2 { return rot * (v - pivot) + pivot + shift; };
    p = make_feature(p.id, (rot * p.normal).normalized(), move(p.endpoints[0]), move(p.endpoints[1]));
  }

  for (auto& room : layout.rooms) room.center = centroid_mean(layout.planes, room.plane_ids);
  for (auto& wall : layout.walls) wall.center = centroid_mean(layout.planes, wall.plane_ids);
  out = std::move(layout);
  return true;
}

}  // namespace

void validate(const GenConfig& c) {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("GenConfig: ") + what);
  };
  check(c.n_rooms.lo >= 1 && c.n_rooms.lo <= c.n_rooms.hi, "n_rooms must be a non-empty range >= 1");
  check(c.room_size.lo > 0.0 && c.room_size.lo <= c.room_size.hi, "room_size must be a non-empty positive range");
  check(c.corridor_width.lo > 0.0 && c.corridor_width.lo <= c.corridor_width.hi, "corridor_width must be a non-empty positive range");
  check(c.wall_thickness.lo > 0.0 && c.wall_thickness.lo <= c.wall_thickness.hi, "wall_thickness must be a non-empty positive range");
  check(c.jitter_size >= 0.0 && c.jitter_size < 1.0, "jitter_size must lie in [0, 1)");
  check(c.jitter_pos >= 0.0 && c.jitter_rot >= 0.0, "jitter must be non-negative");
  check(c.corridor_prob >= 0.0 && c.corridor_prob <= 1.0, "corridor_prob must be a probability");
  check(c.k_negatives >= 1, "k_negatives must be >= 1");
  check(c.max_attempts >= 1, "max_attempts must be >= 1");
}

Layout generate_layout(const GenConfig& config) {
  validate(config);
  Rng rng(config.seed);
  Layout layout;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    if (try_generate(config, rng, layout)) return label_edges(std::move(layout), config.k_negatives);
  }
  throw GenerationError("generate_layout: rooms do not fit in max_extent after " +
                        std::to_string(config.max_attempts) + " attempts");
}

std::size_t plane_index(const Layout& layout, PlaneId id) {
  for (std::size_t i = 0; i < layout.planes.size(); ++i) {
    if (layout.planes[i].id == id) return i;
  }
  throw InvalidArgument("unknown plane id " + std::to_string(id));
}

std::vector<int> room_membership(const Layout& layout) {
  std::map<PlaneId, int> index;
  for (std::size_t i = 0; i < layout.planes.size(); ++i) index[layout.planes[i].id] = static_cast<int>(i);
  std::vector<int> member(layout.planes.size(), -1);
  for (std::size_t r = 0; r < layout.rooms.size(); ++r) {
    for (PlaneId id : layout.rooms[r].plane_ids) member.at(index.at(id)) = static_cast<int>(r);
  }
  return member;
}

std::vector<int> wall_partner(const Layout& layout) {
  std::map<PlaneId, int> index;
  for (std::size_t i = 0; i < layout.planes.size(); ++i) index[layout.planes[i].id] = static_cast<int>(i);
  std::vector<int> partner(layout.planes.size(), -1);
  for (const auto& w : layout.walls) {
    const int a = index.at(w.plane_ids[0]), b = index.at(w.plane_ids[1]);
    partner[a] = b;
    partner[b] = a;
  }
  return partner;
}

Layout label_edges(Layout layout, std::size_t k_negatives) {
  const auto& planes = layout.planes;
  const std::size_t n = planes.size();
  const auto room = room_membership(layout);
  const auto partner = wall_partner(layout);

  auto positive = [&](std::size_t i, std::size_t j) {
    return (room[i] >= 0 && room[i] == room[j]) || partner[i] == static_cast<int>(j);
  };

  // Each node's neighbourhood holds its positives first; the nearest other
  // planes fill the remaining slots up to k.
  std::vector<std::set<std::size_t>> hood(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (positive(i, j)) {
        hood[i].insert(j);
      } else {
        dist.emplace_back((planes[j].centroid - planes[i].centroid).squaredNorm(), j);
      }
    }
    const std::size_t free = k_negatives > hood[i].size() ? k_negatives - hood[i].size() : 0;
    const std::size_t kk = std::min(free, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t t = 0; t < kk; ++t) hood[i].insert(dist[t].second);
  }

  std::vector<LabeledEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      EdgeLabel label = EdgeLabel::kNone;
      if (room[i] >= 0 && room[i] == room[j]) {
        label = EdgeLabel::kSameRoom;
      } else if (partner[i] == static_cast<int>(j)) {
        label = EdgeLabel::kSameWall;
      } else if (!(hood[i].count(j) && hood[j].count(i))) {
        continue;
      }
      edges.push_back({planes[i].id, planes[j].id, label});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const LabeledEdge& a, const LabeledEdge& b) {
    return std::pair{a.src, a.dst} < std::pair{b.src, b.dst};
  });
  layout.gt_edges = std::move(edges);
  return layout;
}

}  // namespace scenegraph
