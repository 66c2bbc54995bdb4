#pragma once

#include <scenegraph/types.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace scenegraph {

/// A plane as received from the mapping layer: closest-point form
/// n·x + d = 0 plus the 3D points observed on it.
struct PlaneObservation {
  PlaneId id = 0;
  Vec2 normal = Vec2::UnitX();
  double offset_d = 0.0;
  std::vector<Vec3> points;
};

/// A wall surface flattened to a 2D segment. The normal is orthogonal to the
/// segment; `ancestry` lists source IDs when the feature was produced by
/// merging or splitting.
struct PlaneFeature {
  PlaneId id = 0;
  Vec2 normal = Vec2::UnitX();
  double width = 0.0;
  Vec2 centroid = Vec2::Zero();
  std::array<Vec2, 2> endpoints{Vec2::Zero(), Vec2::Zero()};
  std::vector<PlaneId> ancestry;

  /// Signed offset d of the supporting line n·x + d = 0.
  double offset() const { return -normal.dot(centroid); }
  /// Unit direction along the segment, endpoint 0 -> endpoint 1.
  Vec2 direction() const { return Vec2(-normal.y(), normal.x()); }

  bool operator==(const PlaneFeature&) const = default;
};

/// Point on the plane n·x + d = 0 closest to the origin.
template <typename Derived>
Vector2<typename Derived::Scalar> closest_point(const Eigen::MatrixBase<Derived>& normal,
                                                typename Derived::Scalar offset_d) {
  using Scalar = typename Derived::Scalar;
  if (std::abs(normal.norm() - Scalar(1)) > Scalar(1e-9)) {
    throw InvalidArgument("closest_point: normal must have unit length");
  }
  return -offset_d * normal;
}

/// Builds a feature from a normal and two points on its line. Endpoints are
/// ordered along `direction()`.
PlaneFeature make_feature(PlaneId id, const Vec2& normal, const Vec2& a, const Vec2& b);

/// Drops z, projects the points onto the observation's line and takes the
/// extreme projections as the segment.
PlaneFeature flatten_to_feature(const PlaneObservation& obs);

/// Line fit by principal axis for observations without a known normal. The
/// normal sign is chosen to point toward `viewpoint`.
PlaneFeature fit_feature_pca(PlaneId id, std::span<const Vec3> points,
                             const Vec2& viewpoint = Vec2::Zero());

struct DedupConfig {
  double angle_tol = 5.0 * std::numbers::pi / 180.0;
  double offset_tol = 0.10;
  double gap_tol = 0.15;
};

/// True when a and b describe the same surface under `cfg`.
bool is_duplicate(const PlaneFeature& a, const PlaneFeature& b, const DedupConfig& cfg);

/// Merges transitive groups of duplicates into single features spanning the
/// union extent. Repeats until no pair is mergeable, so the result is a fixed
/// point. A merged feature keeps the smallest member ID.
std::vector<PlaneFeature> dedup_planes(std::span<const PlaneFeature> planes,
                                       const DedupConfig& cfg = {});

struct SplitConfig {
  double perpendicular_tol = 0.3;
  double min_width = 0.1;
  /// Cuts closer than this to an existing endpoint are ignored.
  double endpoint_margin = 1e-6;
};

/// Cuts each segment where a neighbour's endpoint projects onto its interior
/// (within `perpendicular_tol`) or where a neighbour properly crosses it.
/// Children narrower than `min_width` are dropped. Unsplit features keep their
/// ID; children receive fresh IDs above the input maximum.
std::vector<PlaneFeature> split_planes(std::span<const PlaneFeature> planes,
                                       const SplitConfig& cfg = {});

/// Throws InvalidArgument if the feature violates its geometric invariants.
void validate(const PlaneFeature& f, double tol = 1e-6);

}  // namespace scenegraph
