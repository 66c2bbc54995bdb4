#pragma once

#include <scenegraph/geometry.hpp>

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace scenegraph {

/// Plane n·x + d = 0 with n = (cos theta, sin theta).
template <typename Scalar>
struct PlaneParams {
  Scalar theta = Scalar(0);
  Scalar d = Scalar(0);

  Vector2<Scalar> normal() const { return {std::cos(theta), std::sin(theta)}; }
  /// dn/dtheta
  Vector2<Scalar> normal_derivative() const { return {-std::sin(theta), std::cos(theta)}; }

  static PlaneParams from_feature(const PlaneFeature& f) {
    return {Scalar(std::atan2(f.normal.y(), f.normal.x())), Scalar(f.offset())};
  }
};

using Plane = PlaneParams<double>;

/// Residual r = center - f(planes) together with dr/d(center) (identity) and
/// dr/d(theta, d) for each plane, in input order.
template <typename Scalar>
struct CenterResidual {
  Vector2<Scalar> residual;
  std::vector<Eigen::Matrix<Scalar, 2, 2>> d_planes;
};

/// Threshold on n_a·n_b below which two planes count as an opposing pair.
inline constexpr double kPairDotMax = -0.7;

/// Mean of the plane centroids; initializes room and wall centers.
Vec2 room_center(std::span<const PlaneId> plane_ids, std::span<const PlaneFeature> planes);

namespace detail {

/// Midpoint contribution of an opposing pair, symmetric in (a, b):
/// (d_b - d_a)/4 (n_a - n_b). Equals ((d_b - d_a)/2) n_a for exact opposition.
template <typename Scalar>
Vector2<Scalar> pair_midpoint(const PlaneParams<Scalar>& a, const PlaneParams<Scalar>& b,
                              Eigen::Matrix<Scalar, 2, 2>* df_da, Eigen::Matrix<Scalar, 2, 2>* df_db) {
  const Vector2<Scalar> diff = a.normal() - b.normal();
  const Scalar half = (b.d - a.d) / Scalar(4);
  if (df_da) {
    df_da->col(0) = half * a.normal_derivative();
    df_da->col(1) = -diff / Scalar(4);
  }
  if (df_db) {
    df_db->col(0) = -half * b.normal_derivative();
    df_db->col(1) = diff / Scalar(4);
  }
  return half * diff;
}

}  // namespace detail

/// Splits four planes into the two opposing pairs minimizing the summed normal
/// dot product. Throws DegenerateError when either pair is not opposing.
template <typename Scalar>
std::array<std::array<int, 2>, 2> pair_room_planes(const std::array<PlaneParams<Scalar>, 4>& planes) {
  static constexpr std::array<std::array<std::array<int, 2>, 2>, 3> kPairings{{
      {{{0, 1}, {2, 3}}},
      {{{0, 2}, {1, 3}}},
      {{{0, 3}, {1, 2}}},
  }};
  auto dot = [&](const std::array<int, 2>& p) { return planes[p[0]].normal().dot(planes[p[1]].normal()); };
  std::size_t best = 0;
  Scalar best_sum = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < kPairings.size(); ++i) {
    const Scalar s = dot(kPairings[i][0]) + dot(kPairings[i][1]);
    if (s < best_sum) {
      best_sum = s;
      best = i;
    }
  }
  for (const auto& p : kPairings[best]) {
    if (!(dot(p) < Scalar(kPairDotMax))) throw DegenerateError("room planes do not form two opposing pairs");
  }
  return kPairings[best];
}

/// Four-plane room: f is the sum of the two pair midpoints, which is the
/// intersection of the pair midlines for a rectangle.
template <typename Scalar>
CenterResidual<Scalar> residual_room4(const Vector2<Scalar>& center, const std::array<PlaneParams<Scalar>, 4>& planes) {
  const auto pairs = pair_room_planes(planes);
  CenterResidual<Scalar> out;
  out.d_planes.assign(4, Eigen::Matrix<Scalar, 2, 2>::Zero());
  Vector2<Scalar> f = Vector2<Scalar>::Zero();
  for (const auto& [ia, ib] : pairs) {
    Eigen::Matrix<Scalar, 2, 2> da, db;
    f += detail::pair_midpoint(planes[ia], planes[ib], &da, &db);
    out.d_planes[ia] = -da;
    out.d_planes[ib] = -db;
  }
  out.residual = center - f;
  return out;
}

/// Two-plane room (and wall): f projects the fixed anchor p onto the pair's
/// midline, f = p - (n_a·p - (d_b - d_a)/2) n_a.
template <typename Scalar>
CenterResidual<Scalar> residual_room2(const Vector2<Scalar>& center, const PlaneParams<Scalar>& a,
                                      const PlaneParams<Scalar>& b, const Vector2<Scalar>& anchor) {
  const Vector2<Scalar> na = a.normal();
  if (!(na.dot(b.normal()) < Scalar(kPairDotMax))) {
    throw DegenerateError("two-plane factor requires opposing normals");
  }
  const Vector2<Scalar> dna = a.normal_derivative();
  const Scalar s = na.dot(anchor) - (b.d - a.d) / Scalar(2);
  CenterResidual<Scalar> out;
  out.residual = center - (anchor - s * na);
  Eigen::Matrix<Scalar, 2, 2> ja, jb;
  // r = c - p + s n_a
  ja.col(0) = dna.dot(anchor) * na + s * dna;
  ja.col(1) = na / Scalar(2);
  jb.col(0).setZero();
  jb.col(1) = -na / Scalar(2);
  out.d_planes = {ja, jb};
  return out;
}

/// Wall: the two-plane form with the anchor at the mean of the surface centroids.
template <typename Scalar>
CenterResidual<Scalar> residual_wall(const Vector2<Scalar>& center, const PlaneParams<Scalar>& a,
                                     const PlaneParams<Scalar>& b, const Vector2<Scalar>& anchor) {
  return residual_room2(center, a, b, anchor);
}

enum class FactorKind { kRoom4, kRoom2, kWall, kPlanePrior };

struct Factor {
  FactorKind kind = FactorKind::kRoom4;
  int center = -1;           ///< index into SceneFactorGraph::centers (unused for priors)
  std::vector<int> planes;   ///< indices into SceneFactorGraph::planes
  Vec2 anchor = Vec2::Zero();
  Plane measured;            ///< prior mean (kPlanePrior only)
  Eigen::Matrix2d information = Eigen::Matrix2d::Identity();
};

struct PlaneVariable {
  PlaneId id = 0;
  Plane value;
};

struct CenterVariable {
  std::int64_t id = 0;
  Vec2 value = Vec2::Zero();
};

/// Plane and room/wall center variables tied by residual factors.
class SceneFactorGraph {
 public:
  int add_plane(PlaneId id, const Plane& value);
  int add_center(std::int64_t id, const Vec2& value);
  void add_room4(int center, std::array<int, 4> planes, const Eigen::Matrix2d& information = Eigen::Matrix2d::Identity());
  void add_room2(int center, std::array<int, 2> planes, const Vec2& anchor,
                 const Eigen::Matrix2d& information = Eigen::Matrix2d::Identity());
  void add_wall(int center, std::array<int, 2> planes, const Vec2& anchor,
                const Eigen::Matrix2d& information = Eigen::Matrix2d::Identity());
  void add_plane_prior(int plane, const Plane& measured, const Eigen::Matrix2d& information);

  std::vector<PlaneVariable> planes;
  std::vector<CenterVariable> centers;
  std::vector<Factor> factors;

  std::size_t state_dim() const { return 2 * (planes.size() + centers.size()); }
  std::size_t residual_dim() const { return 2 * factors.size(); }

  /// Sum over factors of r^T Λ r.
  double cost() const;
  /// Unweighted sum of squared residuals.
  double unweighted_cost() const;

  /// Stacked raw residuals and their Jacobian w.r.t. the state
  /// [plane (theta, d)..., center (x, y)...].
  void linearize(Eigen::VectorXd& residual, Eigen::MatrixXd& jacobian) const;

  Eigen::VectorXd state() const;
  void set_state(const Eigen::VectorXd& x);

 private:
  void check_information(const Eigen::Matrix2d& info) const;
};

struct RefineOptions {
  int max_iterations = 50;
  double initial_damping = 1e-6;
  double max_damping = 1e12;
  double step_tolerance = 1e-10;
};

struct RefineResult {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;  ///< accepted steps
  bool converged = false;
  std::vector<double> cost_history;  ///< cost after each accepted step, starting with the initial cost
};

/// Levenberg-damped Gauss-Newton on the whitened stacked residual.
/// Throws NumericError when the damped normal equations stay unsolvable.
RefineResult refine(SceneFactorGraph& graph, const RefineOptions& options = {});

}  // namespace scenegraph
