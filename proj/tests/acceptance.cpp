// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <scenegraph/cli.hpp>
#include <scenegraph/evalkit.hpp>
#include <scenegraph/factors.hpp>
#include <scenegraph/io.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace scenegraph;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int n, const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", n, name.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0, one_sided = 0, skipped = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    ProximityGraph g;
    for (int i = 0; i < 6; ++i) g.node_ids.push_back(i);
    g.node_feats = Matrix(6, kNodeFeatureDim);
    for (Eigen::Index i = 0; i < g.node_feats.size(); ++i) g.node_feats.data()[i] = u(rng);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (i != j) g.edges.emplace_back(i, j);
    g.edge_feats = Matrix(static_cast<Eigen::Index>(g.edges.size()), kEdgeFeatureDim);
    for (Eigen::Index i = 0; i < g.edge_feats.size(); ++i) g.edge_feats.data()[i] = u(rng);
    std::vector<double> labels;
    for (std::size_t k = 0; k < g.num_edges(); ++k) labels.push_back(static_cast<double>(rng() % 2));
    const EdgeClassifierModel model(seed % 2 ? Relation::kSameWall : Relation::kSameRoom, 32, seed);
    const auto r = grad_check(model, g, labels, default_pos_weight(model.relation), 1e-5);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    one_sided += r.one_sided;
    skipped += r.skipped;
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-4 && elapsed < 60.0,
          format("max rel error %.3g (< 1e-4), %zu entries, %zu one-sided at kinks, %zu skipped, %.1f s (< 60 s)",
                 worst, checked, one_sided, skipped, elapsed)};
}

// ---------------------------------------------------------------- 2

Outcome clustering_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::bernoulli_distribution keep(0.15 + 0.75 * std::uniform_real_distribution<double>(0, 1)(rng));
    std::vector<PlaneId> nodes;
    for (int i = 0; i < n; ++i) nodes.push_back(static_cast<PlaneId>(rng() % 1000));
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    EdgeGraph g;
    std::set<std::pair<PlaneId, PlaneId>> edges;
    for (PlaneId p : nodes) g.add_node(p);
    for (PlaneId a : nodes)
      for (PlaneId b : nodes)
        if (a != b && keep(rng)) {
          g.add_edge(a, b);
          edges.emplace(a, b);
        }
    if (cluster_rooms(g, ClusterConfig{}) != oracle::cluster_rooms(nodes, edges, {4, 2})) ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  return {mismatches == 0 && elapsed < 120.0,
          format("%d/500 graphs differ from the subset-packing oracle, %.1f s (< 120 s)", mismatches, elapsed)};
}

// ---------------------------------------------------------------- 3, 4

Plane plane_through(const Vec2& n, const Vec2& p) { return {std::atan2(n.y(), n.x()), -n.dot(p)}; }

struct Rect {
  Vec2 center;
  std::array<Plane, 4> planes;
  Vec2 axis;  // direction of planes[0]
};

Rect random_rect(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(-20, 20), half(0.5, 5), rot(-M_PI, M_PI);
  const Vec2 c(pos(rng), pos(rng));
  const double a = half(rng), b = half(rng), t = rot(rng);
  const Vec2 ex(std::cos(t), std::sin(t)), ey(-std::sin(t), std::cos(t));
  return {c,
          {plane_through(ey, c - b * ey), plane_through(-ex, c + a * ex), plane_through(-ey, c + b * ey),
           plane_through(ex, c - a * ex)},
          ex};
}

double jacobian_error(const std::function<Vec2(const std::vector<Plane>&)>& f, const std::vector<Plane>& planes,
                      const std::vector<Eigen::Matrix2d>& analytic) {
  const double eps = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < planes.size(); ++i) {
    Eigen::Matrix2d fd;
    for (int c = 0; c < 2; ++c) {
      auto up = planes, down = planes;
      (c == 0 ? up[i].theta : up[i].d) += eps;
      (c == 0 ? down[i].theta : down[i].d) -= eps;
      fd.col(c) = (f(up) - f(down)) / (2 * eps);
    }
    const double scale = std::max({fd.cwiseAbs().maxCoeff(), analytic[i].cwiseAbs().maxCoeff(), 1e-12});
    worst = std::max(worst, (fd - analytic[i]).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

Outcome residual_zeros_and_jacobians() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0, 0.05);
  std::uniform_real_distribution<double> thick(0.05, 0.4), along(-3, 3);
  double zero = 0.0, jac = 0.0;
  auto perturbed = [&](std::vector<Plane> ps) {
    for (auto& p : ps) {
      p.theta += noise(rng);
      p.d += noise(rng);
    }
    return ps;
  };
  for (int i = 0; i < 100; ++i) {
    const Rect r = random_rect(rng);
    const Vec2 jitter(noise(rng), noise(rng));
    const Vec2 c4 = r.center + jitter;

    // Four-plane room.
    zero = std::max(zero, residual_room4(r.center, r.planes).residual.cwiseAbs().maxCoeff());
    const auto p4 = perturbed({r.planes.begin(), r.planes.end()});
    auto f4 = [&](const std::vector<Plane>& ps) {
      return residual_room4(c4, std::array<Plane, 4>{ps[0], ps[1], ps[2], ps[3]}).residual;
    };
    const auto a4 = residual_room4(c4, std::array<Plane, 4>{p4[0], p4[1], p4[2], p4[3]});
    jac = std::max(jac, jacobian_error(f4, p4, {a4.d_planes.begin(), a4.d_planes.end()}));

    // Corridor between planes 0 and 2, anchored somewhere along its axis.
    const Vec2 anchor = r.center + along(rng) * r.axis;
    const Vec2 c2 = anchor + jitter;
    zero = std::max(zero, residual_room2(anchor, r.planes[0], r.planes[2], anchor).residual.cwiseAbs().maxCoeff());
    const auto p2 = perturbed({r.planes[0], r.planes[2]});
    auto f2 = [&](const std::vector<Plane>& ps) { return residual_room2(c2, ps[0], ps[1], anchor).residual; };
    const auto a2 = residual_room2(c2, p2[0], p2[1], anchor);
    jac = std::max(jac, jacobian_error(f2, p2, {a2.d_planes.begin(), a2.d_planes.end()}));

    // Wall: two outward-facing surfaces a thickness apart.
    const Vec2 n = r.planes[1].normal();
    const double t = thick(rng);
    const Vec2 surface = r.center + along(rng) * Vec2(-n.y(), n.x());
    const Plane wa = plane_through(-n, surface), wb = plane_through(n, surface - t * n);
    const Vec2 mid = surface - 0.5 * t * n;
    const Vec2 cw = mid + jitter;
    zero = std::max(zero, residual_wall(mid, wa, wb, mid).residual.cwiseAbs().maxCoeff());
    const auto pw = perturbed({wa, wb});
    auto fw = [&](const std::vector<Plane>& ps) { return residual_wall(cw, ps[0], ps[1], mid).residual; };
    const auto aw = residual_wall(cw, pw[0], pw[1], mid);
    jac = std::max(jac, jacobian_error(fw, pw, {aw.d_planes.begin(), aw.d_planes.end()}));
  }
  return {zero <= 1e-12 && jac < 1e-6,
          format("max |residual| at exact geometry %.3g (<= 1e-12), max Jacobian rel error %.3g (< 1e-6)", zero, jac)};
}

SceneFactorGraph rect_graph(const Rect& r, const Vec2& center) {
  SceneFactorGraph g;
  std::array<int, 4> idx{};
  for (std::size_t i = 0; i < 4; ++i) {
    idx[i] = g.add_plane(static_cast<PlaneId>(i), r.planes[i]);
    g.add_plane_prior(idx[i], r.planes[i], Eigen::Matrix2d::Identity() * 1e8);
  }
  g.add_room4(g.add_center(0, center), idx);
  return g;
}

Outcome refinement() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  double worst_dist = 0.0;
  int worst_iters = 0, increases = 0, not_converged = 0;
  for (int i = 0; i < 100; ++i) {
    const Rect r = random_rect(rng);
    SceneFactorGraph reference = rect_graph(r, r.center);
    refine(reference);
    const Vec2 optimum = reference.centers[0].value;

    const double t = ang(rng);
    SceneFactorGraph g = rect_graph(r, r.center + 0.3 * Vec2(std::cos(t), std::sin(t)));
    const RefineResult res = refine(g);
    worst_dist = std::max(worst_dist, (g.centers[0].value - optimum).norm());
    worst_iters = std::max(worst_iters, res.iterations);
    not_converged += !res.converged;
    for (std::size_t k = 1; k < res.cost_history.size(); ++k) increases += res.cost_history[k] > res.cost_history[k - 1];
  }
  return {worst_dist <= 1e-8 && worst_iters <= 10 && increases == 0,
          format("100 rooms: max distance to optimum %.3g (<= 1e-8), max iterations %d (<= 10), %d cost increases, "
                 "%d not converged",
                 worst_dist, worst_iters, increases, not_converged)};
}

// ---------------------------------------------------------------- 5, 6, 7

std::vector<Layout> layouts(std::uint64_t first, int count) {
  std::vector<Layout> out;
  for (int i = 0; i < count; ++i) out.push_back(generate_layout(GenConfig{.seed = first + static_cast<std::uint64_t>(i)}));
  return out;
}

EdgeClassifierModel train_model(Relation relation, const std::vector<Layout>& data) {
  std::vector<TrainingExample> examples;
  for (const auto& l : data) examples.push_back(make_example(l, relation));
  TrainConfig cfg;
  cfg.pos_weight = default_pos_weight(relation);
  EdgeClassifierModel model(relation, 32, cfg.seed);
  train(model, examples, {}, cfg);
  return model;
}

struct Trained {
  EdgeClassifierModel room, wall;
  std::vector<Layout> test;
  double train_seconds = 0.0;
};

const Trained& trained() {
  static const Trained t = [] {
    const auto t0 = Clock::now();
    const auto data = layouts(1000, 200);
    Trained r{train_model(Relation::kSameRoom, data), train_model(Relation::kSameWall, data), layouts(5000, 50), 0.0};
    r.train_seconds = seconds_since(t0);
    return r;
  }();
  return t;
}

Outcome wall_learning() {
  const Trained& t = trained();
  std::vector<DetectionReport> reports;
  for (const auto& l : t.test) {
    const Prediction p = infer(l.planes, t.room, t.wall, InferenceConfig{});
    reports.push_back(score_walls(p.wall_pairs(), l));
  }
  const auto r = aggregate(reports);
  return {r.precision >= 0.95 && r.recall >= 0.75,
          format("held-out walls P %.4f (>= 0.95) R %.4f (>= 0.75); TP %.0f FP %.0f FN %.0f; both models trained in "
                 "%.1f s",
                 r.precision, r.recall, r.counts.true_positives, r.counts.false_positives, r.counts.false_negatives,
                 t.train_seconds)};
}

Outcome room_learning() {
  const Trained& t = trained();
  InferenceConfig conservative, greedy;
  greedy.mode = Mode::kGreedy;
  std::vector<DetectionReport> rc, rg;
  std::size_t superset_violations = 0;
  for (const auto& l : t.test) {
    const Prediction pc = infer(l.planes, t.room, t.wall, conservative);
    const Prediction pg = cluster_predictions(l.planes, pc.edges, greedy);
    rc.push_back(score_rooms(pc.room_clusters(), l));
    rg.push_back(score_rooms(pg.room_clusters(), l));
    for (const auto& e : pc.edges) {
      const bool kept_c = e.p_room >= conservative.tau_room(), kept_g = e.p_room >= greedy.tau_room();
      superset_violations += kept_c && !kept_g;
    }
  }
  const auto c = aggregate(rc), g = aggregate(rg);
  return {c.precision >= 0.80 && c.recall >= 0.60 && g.recall >= c.recall && superset_violations == 0,
          format("conservative rooms P %.4f (>= 0.80) R %.4f (>= 0.60); greedy R %.4f (>= conservative R); "
                 "%zu kept-edge superset violations",
                 c.precision, c.recall, g.recall, superset_violations)};
}

Outcome latency() {
  const Trained& t = trained();
  std::optional<Layout> scene;
  for (std::uint64_t s = 7000; !scene; ++s) {
    Layout l = generate_layout(GenConfig{.seed = s});
    if (l.planes.size() == 30) scene = std::move(l);
  }
  const double ms = time_pipeline(scene->planes, t.room, t.wall, InferenceConfig{}, 5);
  return {ms < 100.0, format("30-plane scene: median %.2f ms over 5 runs (< 100 ms)", ms)};
}

// ---------------------------------------------------------------- 8, 9

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "scenegraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) throw Error("scenegraph " + args[1] + " exited with " + std::to_string(code) + ": " + err.str());
  return code;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "scenegraph_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    cli({"gen-dataset", "--out", (d / "data").string(), "--count", "20", "--seed", "300"});
    for (const char* rel : {"room", "wall"}) {
      cli({"train", "--data", (d / "data").string(), "--relation", rel, "--epochs", "3", "--seed", "9", "--out",
           (d / (std::string(rel) + ".json")).string()});
    }
    cli({"infer", "--model", (d / "room.json").string(), "--model", (d / "wall.json").string(), "--layout",
         (d / "data" / "layout_00019.json").string(), "--out", (d / "pred.json").string()});
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(d)) {
      if (e.is_regular_file()) files[fs::relative(e.path(), d).string()] = read_text(e.path());
    }
    runs.push_back(std::move(files));
  }
  fs::remove_all(root);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : runs[0]) differing += !runs[1].count(name) || runs[1].at(name) != bytes;
  const bool same_set = runs[0].size() == runs[1].size();
  return {differing == 0 && same_set && runs[0].size() == 23,
          format("%zu files per run (20 layouts, 2 checkpoints, 1 prediction), %zu differ", runs[0].size(), differing)};
}

Outcome round_trip() {
  int layout_diffs = 0, checkpoint_diffs = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    GenConfig cfg;
    cfg.seed = 9000 + s;
    const std::string a = serialize_layout(generate_layout(cfg));
    layout_diffs += serialize_layout(parse_layout(a)) != a;
    const std::string c = serialize_checkpoint(fixtures::random_checkpoint(s));
    checkpoint_diffs += serialize_checkpoint(parse_checkpoint(c)) != c;
  }
  return {layout_diffs == 0 && checkpoint_diffs == 0,
          format("100 layouts: %d not byte-identical; 100 checkpoints: %d not byte-identical", layout_diffs,
                 checkpoint_diffs)};
}

}  // namespace

int main() {
  report(1, "gradient correctness", gradient_check);
  report(2, "clustering oracle equivalence", clustering_oracle);
  report(3, "residual zeros and Jacobians", residual_zeros_and_jacobians);
  report(4, "refinement", refinement);
  report(5, "wall detection on held-out layouts", wall_learning);
  report(6, "room detection on held-out layouts", room_learning);
  report(7, "pipeline latency", latency);
  report(8, "determinism", determinism);
  report(9, "round-trip", round_trip);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
