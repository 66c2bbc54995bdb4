#include <scenegraph/proxgraph.hpp>

#include <algorithm>
#include <set>

namespace scenegraph {

double closest_segment_distance(const PlaneFeature& a, const PlaneFeature& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : a.endpoints) {
    for (const auto& q : b.endpoints) best = std::min(best, (p - q).norm());
  }
  return best;
}

ProximityGraph build_graph(std::span<const PlaneFeature> planes, std::size_t k) {
  const std::size_t n = planes.size();
  if (n < 2) throw InvalidArgument("build_graph: at least two planes are required");

  std::set<std::pair<int, int>> edge_set;
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.emplace_back((planes[j].centroid - planes[i].centroid).squaredNorm(), j);
    }
    const std::size_t kk = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
    for (std::size_t t = 0; t < kk; ++t) {
      const int a = static_cast<int>(i), b = static_cast<int>(dist[t].second);
      edge_set.emplace(a, b);
      edge_set.emplace(b, a);
    }
  }

  ProximityGraph g;
  g.node_ids.reserve(n);
  g.node_feats.resize(static_cast<Eigen::Index>(n), kNodeFeatureDim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = planes[i];
    g.node_ids.push_back(p.id);
    g.node_feats.row(static_cast<Eigen::Index>(i)) << p.normal.x(), p.normal.y(), p.width;
  }
  g.edges.assign(edge_set.begin(), edge_set.end());
  g.edge_feats.resize(static_cast<Eigen::Index>(g.edges.size()), kEdgeFeatureDim);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& src = planes[static_cast<std::size_t>(g.edges[e].first)];
    const auto& dst = planes[static_cast<std::size_t>(g.edges[e].second)];
    const Vec2 delta = dst.centroid - src.centroid;
    g.edge_feats.row(static_cast<Eigen::Index>(e)) << delta.x(), delta.y(), closest_segment_distance(src, dst);
  }
  return g;
}

namespace {

void column_stats(std::span<const ProximityGraph> graphs, bool nodes, Eigen::RowVectorXd& mean,
                  Eigen::RowVectorXd& stddev) {
  const int dim = nodes ? kNodeFeatureDim : kEdgeFeatureDim;
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(dim);
  double count = 0.0;
  for (const auto& g : graphs) {
    const Matrix& m = nodes ? g.node_feats : g.edge_feats;
    if (m.rows() == 0) continue;
    sum += m.colwise().sum();
    count += static_cast<double>(m.rows());
  }
  mean = count > 0.0 ? Eigen::RowVectorXd(sum / count) : Eigen::RowVectorXd::Zero(dim);
  Eigen::RowVectorXd sq = Eigen::RowVectorXd::Zero(dim);
  for (const auto& g : graphs) {
    const Matrix& m = nodes ? g.node_feats : g.edge_feats;
    if (m.rows() == 0) continue;
    sq += (m.rowwise() - mean).array().square().matrix().colwise().sum();
  }
  stddev = count > 0.0 ? Eigen::RowVectorXd((sq / count).array().sqrt()) : Eigen::RowVectorXd::Ones(dim);
  stddev = stddev.cwiseMax(kMinStd);
}

}  // namespace

NormStats fit_normalize(std::span<const ProximityGraph> graphs) {
  if (graphs.empty()) throw InvalidArgument("fit_normalize: empty training set");
  NormStats stats;
  column_stats(graphs, true, stats.node_mean, stats.node_std);
  column_stats(graphs, false, stats.edge_mean, stats.edge_std);
  return stats;
}

ProximityGraph apply_normalize(ProximityGraph graph, const NormStats& stats) {
  if (graph.node_feats.rows() > 0) {
    graph.node_feats = ((graph.node_feats.rowwise() - stats.node_mean).array().rowwise() /
                        stats.node_std.array()).matrix();
  }
  if (graph.edge_feats.rows() > 0) {
    graph.edge_feats = ((graph.edge_feats.rowwise() - stats.edge_mean).array().rowwise() /
                        stats.edge_std.array()).matrix();
  }
  return graph;
}

}  // namespace scenegraph
