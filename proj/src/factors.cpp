#include <scenegraph/factors.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <map>
#include <numbers>
#include <sstream>

namespace scenegraph {

Vec2 room_center(std::span<const PlaneId> plane_ids, std::span<const PlaneFeature> planes) {
  if (plane_ids.empty()) throw InvalidArgument("room_center: empty plane set");
  std::map<PlaneId, const PlaneFeature*> by_id;
  for (const auto& p : planes) by_id[p.id] = &p;
  Vec2 sum = Vec2::Zero();
  for (PlaneId id : plane_ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidArgument("room_center: unknown plane id " + std::to_string(id));
    sum += it->second->centroid;
  }
  return sum / static_cast<double>(plane_ids.size());
}

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

struct FactorLinearization {
  Vec2 residual;
  // (state column, 2x2 block) pairs
  std::vector<std::pair<Eigen::Index, Eigen::Matrix2d>> blocks;
};

}  // namespace

void SceneFactorGraph::check_information(const Eigen::Matrix2d& info) const {
  if (!info.isApprox(info.transpose()) ||
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(info).eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("information matrix must be symmetric positive-definite");
  }
}

int SceneFactorGraph::add_plane(PlaneId id, const Plane& value) {
  planes.push_back({id, value});
  return static_cast<int>(planes.size() - 1);
}

int SceneFactorGraph::add_center(std::int64_t id, const Vec2& value) {
  centers.push_back({id, value});
  return static_cast<int>(centers.size() - 1);
}

void SceneFactorGraph::add_room4(int center, std::array<int, 4> idx, const Eigen::Matrix2d& information) {
  check_information(information);
  const std::array<Plane, 4> params{planes.at(idx[0]).value, planes.at(idx[1]).value, planes.at(idx[2]).value,
                                    planes.at(idx[3]).value};
  pair_room_planes(params);
  factors.push_back({FactorKind::kRoom4, center, {idx.begin(), idx.end()}, Vec2::Zero(), {}, information});
  (void)centers.at(center);
}

void SceneFactorGraph::add_room2(int center, std::array<int, 2> idx, const Vec2& anchor,
                                 const Eigen::Matrix2d& information) {
  check_information(information);
  (void)centers.at(center);
  (void)planes.at(idx[0]);
  (void)planes.at(idx[1]);
  factors.push_back({FactorKind::kRoom2, center, {idx[0], idx[1]}, anchor, {}, information});
}

void SceneFactorGraph::add_wall(int center, std::array<int, 2> idx, const Vec2& anchor,
                                const Eigen::Matrix2d& information) {
  check_information(information);
  (void)centers.at(center);
  (void)planes.at(idx[0]);
  (void)planes.at(idx[1]);
  factors.push_back({FactorKind::kWall, center, {idx[0], idx[1]}, anchor, {}, information});
}

void SceneFactorGraph::add_plane_prior(int plane, const Plane& measured, const Eigen::Matrix2d& information) {
  check_information(information);
  (void)planes.at(plane);
  factors.push_back({FactorKind::kPlanePrior, -1, {plane}, Vec2::Zero(), measured, information});
}

namespace {

FactorLinearization linearize_factor(const SceneFactorGraph& g, const Factor& f) {
  const auto plane_col = [](int i) { return static_cast<Eigen::Index>(2 * i); };
  const auto center_col = [&](int c) { return static_cast<Eigen::Index>(2 * (g.planes.size() + c)); };
  FactorLinearization out;
  if (f.kind == FactorKind::kPlanePrior) {
    const Plane& p = g.planes[f.planes[0]].value;
    out.residual = Vec2(wrap_angle(p.theta - f.measured.theta), p.d - f.measured.d);
    out.blocks.emplace_back(plane_col(f.planes[0]), Eigen::Matrix2d::Identity());
    return out;
  }
  const Vec2& center = g.centers[f.center].value;
  CenterResidual<double> r;
  if (f.kind == FactorKind::kRoom4) {
    const std::array<Plane, 4> params{g.planes[f.planes[0]].value, g.planes[f.planes[1]].value,
                                      g.planes[f.planes[2]].value, g.planes[f.planes[3]].value};
    r = residual_room4(center, params);
  } else {
    r = residual_room2(center, g.planes[f.planes[0]].value, g.planes[f.planes[1]].value, f.anchor);
  }
  out.residual = r.residual;
  out.blocks.emplace_back(center_col(f.center), Eigen::Matrix2d::Identity());
  for (std::size_t k = 0; k < f.planes.size(); ++k) out.blocks.emplace_back(plane_col(f.planes[k]), r.d_planes[k]);
  return out;
}

}  // namespace

double SceneFactorGraph::cost() const {
  double total = 0.0;
  for (const auto& f : factors) {
    const Vec2 r = linearize_factor(*this, f).residual;
    total += r.dot(f.information * r);
  }
  return total;
}

double SceneFactorGraph::unweighted_cost() const {
  double total = 0.0;
  for (const auto& f : factors) total += linearize_factor(*this, f).residual.squaredNorm();
  return total;
}

void SceneFactorGraph::linearize(Eigen::VectorXd& residual, Eigen::MatrixXd& jacobian) const {
  residual.setZero(static_cast<Eigen::Index>(residual_dim()));
  jacobian.setZero(static_cast<Eigen::Index>(residual_dim()), static_cast<Eigen::Index>(state_dim()));
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto lin = linearize_factor(*this, factors[i]);
    const auto row = static_cast<Eigen::Index>(2 * i);
    residual.segment<2>(row) = lin.residual;
    for (const auto& [col, block] : lin.blocks) jacobian.block<2, 2>(row, col) += block;
  }
}

Eigen::VectorXd SceneFactorGraph::state() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(state_dim()));
  Eigen::Index k = 0;
  for (const auto& p : planes) {
    x(k++) = p.value.theta;
    x(k++) = p.value.d;
  }
  for (const auto& c : centers) {
    x(k++) = c.value.x();
    x(k++) = c.value.y();
  }
  return x;
}

void SceneFactorGraph::set_state(const Eigen::VectorXd& x) {
  Eigen::Index k = 0;
  for (auto& p : planes) {
    p.value.theta = x(k++);
    p.value.d = x(k++);
  }
  for (auto& c : centers) {
    c.value.x() = x(k++);
    c.value.y() = x(k++);
  }
}

RefineResult refine(SceneFactorGraph& graph, const RefineOptions& options) {
  RefineResult result;
  result.initial_cost = graph.cost();
  result.final_cost = result.initial_cost;
  result.cost_history.push_back(result.initial_cost);
  if (graph.factors.empty() || graph.state_dim() == 0) {
    result.converged = true;
    return result;
  }

  // Whitening: Λ = L Lᵀ, so rᵀΛr = ‖Lᵀr‖².
  std::vector<Eigen::Matrix2d> whiten;
  for (const auto& f : graph.factors) whiten.push_back(Eigen::LLT<Eigen::Matrix2d>(f.information).matrixL().transpose());

  double lambda = options.initial_damping;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  while (result.iterations < options.max_iterations) {
    graph.linearize(r, J);
    for (std::size_t i = 0; i < whiten.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(2 * i);
      r.segment<2>(row) = whiten[i] * r.segment<2>(row);
      J.middleRows<2>(row) = whiten[i] * J.middleRows<2>(row);
    }
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd grad = J.transpose() * r;
    const Eigen::VectorXd x0 = graph.state();
    const double cost0 = result.final_cost;

    bool accepted = false;
    while (!accepted) {
      const Eigen::MatrixXd damped = H + lambda * Eigen::MatrixXd::Identity(H.rows(), H.cols());
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      const Eigen::VectorXd step = solver.info() == Eigen::Success ? Eigen::VectorXd(-solver.solve(grad))
                                                                   : Eigen::VectorXd();
      if (step.size() == 0 || !step.allFinite()) {
        lambda *= 10.0;
        if (lambda > options.max_damping) {
          const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues();
          std::ostringstream msg;
          msg << "refine: normal equations singular after damping escalation (eigenvalues of JᵀJ in ["
              << ev.minCoeff() << ", " << ev.maxCoeff() << "], lambda " << lambda << ")";
          throw NumericError(msg.str());
        }
        continue;
      }
      if (step.norm() < options.step_tolerance) {
        result.converged = true;
        return result;
      }
      graph.set_state(x0 + step);
      const double cost1 = graph.cost();
      if (std::isfinite(cost1) && cost1 < cost0) {
        accepted = true;
        lambda = std::max(lambda / 10.0, 1e-12);
        result.final_cost = cost1;
        result.cost_history.push_back(cost1);
        ++result.iterations;
      } else {
        graph.set_state(x0);
        lambda *= 10.0;
        if (lambda > options.max_damping) {
          // No descent direction left at this damping: treat as converged.
          result.converged = true;
          return result;
        }
      }
    }
  }
  return result;
}

}  // namespace scenegraph
