#include <scenegraph/geometry.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>

namespace scenegraph {

namespace {

void check_unit(const Vec2& n, const char* where) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(where) + ": normal must have unit length");
  }
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
  std::vector<std::size_t> parent;
};

std::vector<PlaneId> merged_ancestry(std::span<const PlaneFeature* const> members) {
  std::vector<PlaneId> ids;
  for (const auto* m : members) {
    ids.push_back(m->id);
    ids.insert(ids.end(), m->ancestry.begin(), m->ancestry.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

PlaneFeature merge_group(std::span<const PlaneFeature* const> members) {
  Vec2 normal = Vec2::Zero();
  for (const auto* m : members) normal += m->width * m->normal;
  normal.normalize();
  double total_width = 0.0;
  double offset = 0.0;
  for (const auto* m : members) {
    offset += m->width * -normal.dot(m->centroid);
    total_width += m->width;
  }
  offset /= total_width;

  const Vec2 dir(-normal.y(), normal.x());
  const Vec2 base = -offset * normal;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* m : members) {
    for (const auto& e : m->endpoints) {
      const double s = (e - base).dot(dir);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  const PlaneId id =
      (*std::min_element(members.begin(), members.end(),
                         [](const auto* a, const auto* b) { return a->id < b->id; }))->id;
  PlaneFeature merged = make_feature(id, normal, base + lo * dir, base + hi * dir);
  merged.ancestry = merged_ancestry(members);
  return merged;
}

}  // namespace

PlaneFeature make_feature(PlaneId id, const Vec2& normal, const Vec2& a, const Vec2& b) {
  check_unit(normal, "make_feature");
  PlaneFeature f;
  f.id = id;
  f.normal = normal;
  const Vec2 dir = f.direction();
  if (dir.dot(b - a) >= 0.0) {
    f.endpoints = {a, b};
  } else {
    f.endpoints = {b, a};
  }
  f.centroid = 0.5 * (a + b);
  f.width = (b - a).norm();
  return f;
}

PlaneFeature flatten_to_feature(const PlaneObservation& obs) {
  check_unit(obs.normal, "flatten_to_feature");
  if (obs.points.size() < 2) {
    throw InvalidArgument("flatten_to_feature: at least two points are required");
  }
  const Vec2 base = closest_point(obs.normal, obs.offset_d);
  const Vec2 dir(-obs.normal.y(), obs.normal.x());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& p : obs.points) {
    const double s = (p.head<2>() - base).dot(dir);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (!(hi - lo > 1e-9)) {
    throw DegenerateError("flatten_to_feature: points project to a single location");
  }
  return make_feature(obs.id, obs.normal, base + lo * dir, base + hi * dir);
}

PlaneFeature fit_feature_pca(PlaneId id, std::span<const Vec3> points, const Vec2& viewpoint) {
  if (points.size() < 2) {
    throw InvalidArgument("fit_feature_pca: at least two points are required");
  }
  Vec2 mean = Vec2::Zero();
  for (const auto& p : points) mean += p.head<2>();
  mean /= static_cast<double>(points.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : points) {
    const Vec2 q = p.head<2>() - mean;
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  // Eigenvalues ascending: column 0 is the direction of least spread.
  Vec2 normal = eig.eigenvectors().col(0).normalized();
  if (normal.dot(viewpoint - mean) < 0.0) normal = -normal;

  PlaneObservation obs;
  obs.id = id;
  obs.normal = normal;
  obs.offset_d = -normal.dot(mean);
  obs.points.assign(points.begin(), points.end());
  return flatten_to_feature(obs);
}

bool is_duplicate(const PlaneFeature& a, const PlaneFeature& b, const DedupConfig& cfg) {
  const double cosang = std::clamp(a.normal.dot(b.normal), -1.0, 1.0);
  if (std::acos(cosang) >= cfg.angle_tol) return false;

  const double offset_gap = std::max(std::abs(a.normal.dot(b.centroid) + a.offset()),
                                     std::abs(b.normal.dot(a.centroid) + b.offset()));
  if (offset_gap >= cfg.offset_tol) return false;

  const Vec2 dir = a.direction();
  auto interval = [&](const PlaneFeature& f) {
    const double s0 = f.endpoints[0].dot(dir);
    const double s1 = f.endpoints[1].dot(dir);
    return std::pair{std::min(s0, s1), std::max(s0, s1)};
  };
  const auto [alo, ahi] = interval(a);
  const auto [blo, bhi] = interval(b);
  const double gap = std::max(alo, blo) - std::min(ahi, bhi);
  return gap < cfg.gap_tol;
}

std::vector<PlaneFeature> dedup_planes(std::span<const PlaneFeature> planes, const DedupConfig& cfg) {
  std::vector<PlaneFeature> current(planes.begin(), planes.end());
  for (;;) {
    DisjointSets sets(current.size());
    bool merged_any = false;
    for (std::size_t i = 0; i < current.size(); ++i) {
      for (std::size_t j = i + 1; j < current.size(); ++j) {
        if (is_duplicate(current[i], current[j], cfg)) merged_any |= sets.unite(i, j);
      }
    }
    if (!merged_any) return current;

    std::vector<PlaneFeature> next;
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (sets.find(i) != i) continue;
      std::vector<const PlaneFeature*> members;
      for (std::size_t j = i; j < current.size(); ++j) {
        if (sets.find(j) == i) members.push_back(&current[j]);
      }
      next.push_back(members.size() == 1 ? current[i] : merge_group(members));
    }
    current = std::move(next);
  }
}

std::vector<PlaneFeature> split_planes(std::span<const PlaneFeature> planes, const SplitConfig& cfg) {
  PlaneId next_id = 0;
  for (const auto& p : planes) next_id = std::max(next_id, p.id + 1);

  std::vector<PlaneFeature> out;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    const PlaneFeature& target = planes[i];
    const Vec2 origin = target.endpoints[0];
    const Vec2 dir = target.direction();
    const double lo = cfg.endpoint_margin;
    const double hi = target.width - cfg.endpoint_margin;

    std::vector<double> cuts;
    for (std::size_t j = 0; j < planes.size(); ++j) {
      if (j == i) continue;
      const PlaneFeature& other = planes[j];
      for (const auto& q : other.endpoints) {
        const double perp = std::abs(target.normal.dot(q) + target.offset());
        const double s = (q - origin).dot(dir);
        if (perp < cfg.perpendicular_tol && s > lo && s < hi) cuts.push_back(s);
      }
      // Proper crossing of the two segments.
      const Vec2 seg = other.endpoints[1] - other.endpoints[0];
      const double denom = target.normal.dot(seg);
      if (std::abs(denom) > 1e-12) {
        const double u = -(target.normal.dot(other.endpoints[0]) + target.offset()) / denom;
        if (u > 0.0 && u < 1.0) {
          const double s = (other.endpoints[0] + u * seg - origin).dot(dir);
          if (s > lo && s < hi) cuts.push_back(s);
        }
      }
    }
    if (cuts.empty()) {
      out.push_back(target);
      continue;
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> stops{0.0};
    for (double c : cuts) {
      if (c - stops.back() > cfg.endpoint_margin) stops.push_back(c);
    }
    if (target.width - stops.back() > cfg.endpoint_margin) {
      stops.push_back(target.width);
    } else {
      stops.back() = target.width;
    }

    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
      if (stops[k + 1] - stops[k] <= cfg.min_width) continue;
      PlaneFeature child =
          make_feature(next_id++, target.normal, origin + stops[k] * dir, origin + stops[k + 1] * dir);
      child.ancestry = target.ancestry;
      child.ancestry.push_back(target.id);
      std::sort(child.ancestry.begin(), child.ancestry.end());
      out.push_back(std::move(child));
    }
  }
  return out;
}

void validate(const PlaneFeature& f, double tol) {
  if (!f.normal.allFinite() || std::abs(f.normal.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("plane " + std::to_string(f.id) + ": normal is not unit length");
  }
  const Vec2 seg = f.endpoints[1] - f.endpoints[0];
  if (!(f.width > 0.0) || std::abs(seg.norm() - f.width) > tol) {
    throw InvalidArgument("plane " + std::to_string(f.id) + ": width does not match endpoints");
  }
  if ((0.5 * (f.endpoints[0] + f.endpoints[1]) - f.centroid).norm() > tol) {
    throw InvalidArgument("plane " + std::to_string(f.id) + ": centroid is not the segment midpoint");
  }
  if (std::abs(f.normal.dot(seg.normalized())) > tol) {
    throw InvalidArgument("plane " + std::to_string(f.id) + ": normal is not orthogonal to the segment");
  }
}

}  // namespace scenegraph
