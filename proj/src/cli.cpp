#include <scenegraph/cli.hpp>

#include <scenegraph/io.hpp>
#include <scenegraph/svg.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace scenegraph {

namespace fs = std::filesystem;

namespace {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level_from_env() {
  const char* v = std::getenv("SCENEGRAPH_LOG");
  if (v == nullptr) return LogLevel::kInfo;
  const std::string s(v);
  if (s == "error") return LogLevel::kError;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  LogLevel level;

  bool info() const { return level >= LogLevel::kInfo; }
  bool debug() const { return level >= LogLevel::kDebug; }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<fs::path> layout_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

Layout load_layout(const fs::path& path) {
  try {
    return parse_layout(read_text(path));
  } catch (const SchemaError& e) {
    throw SchemaError(e.pointer(), path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const fs::path& path) {
  try {
    return parse_checkpoint(read_text(path));
  } catch (const SchemaError& e) {
    throw SchemaError(e.pointer(), path.string() + ": " + e.what());
  }
}

Prediction load_prediction(const fs::path& path) {
  try {
    return prediction_from_json(parse_json(read_text(path)));
  } catch (const SchemaError& e) {
    throw SchemaError(e.pointer(), path.string() + ": " + e.what());
  }
}

IntRange parse_int_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw InvalidArgument("--rooms expects A..B, got '" + s + "'");
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo = s.substr(0, dots), hi = s.substr(dots + 2);
    IntRange r{std::stoi(lo, &used_lo), std::stoi(hi, &used_hi)};
    if (used_lo != lo.size() || used_hi != hi.size()) throw std::invalid_argument(s);
    return r;
  } catch (const std::logic_error&) {
    throw InvalidArgument("--rooms expects A..B, got '" + s + "'");
  }
}

// Room and wall models in that order, whatever order they were given in.
std::pair<EdgeClassifierModel, EdgeClassifierModel> load_model_pair(const std::vector<std::string>& paths) {
  if (paths.size() != 2) throw InvalidArgument("infer needs exactly two --model files (room and wall)");
  std::optional<EdgeClassifierModel> room, wall;
  for (const auto& p : paths) {
    auto model = load_checkpoint(p).model;
    auto& slot = model.relation == Relation::kSameRoom ? room : wall;
    if (slot) throw InvalidArgument("two " + to_string(model.relation) + " models given; need one room and one wall model");
    slot = std::move(model);
  }
  return {std::move(*room), std::move(*wall)};
}

// --- commands -------------------------------------------------------------------

struct GenArgs {
  std::string out;
  int count = 0;
  std::uint64_t seed = 0;
  std::string rooms;
  std::optional<double> corridor_prob;
};

int cmd_gen_dataset(const GenArgs& a, Context& ctx) {
  GenConfig base;
  if (!a.rooms.empty()) base.n_rooms = parse_int_range(a.rooms);
  if (a.corridor_prob) base.corridor_prob = *a.corridor_prob;
  if (a.count < 0) throw InvalidArgument("--count must be >= 0");
  validate(base);
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec || !fs::is_directory(a.out)) throw Error("cannot create output directory " + a.out);
  for (int i = 0; i < a.count; ++i) {
    GenConfig cfg = base;
    cfg.seed = a.seed + static_cast<std::uint64_t>(i);
    char name[32];
    std::snprintf(name, sizeof name, "layout_%05d.json", i);
    const Layout layout = generate_layout(cfg);
    write_text(fs::path(a.out) / name, serialize_layout(layout));
    if (ctx.debug()) {
      ctx.err << name << ": " << layout.planes.size() << " planes, " << layout.rooms.size() << " rooms, "
              << layout.walls.size() << " walls\n";
    }
  }
  if (ctx.info()) ctx.out << "wrote " << a.count << " layouts to " << a.out << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data;
  std::string val;
  std::string relation;
  std::string out;
  int epochs = 35;
  std::uint64_t seed = 0;
  int hidden = 32;
  std::optional<double> pos_weight;
  double lr = 1e-3;
  std::size_t k = 15;
};

std::vector<TrainingExample> load_examples(const std::vector<fs::path>& files, Relation relation, std::size_t k) {
  std::vector<TrainingExample> examples;
  examples.reserve(files.size());
  for (const auto& f : files) examples.push_back(make_example(load_layout(f), relation, k));
  return examples;
}

int cmd_train(const TrainArgs& a, Context& ctx) {
  const Relation relation = relation_from_string(a.relation);
  auto files = layout_files(a.data);
  if (files.empty()) throw Error("no layout files in " + a.data);
  std::vector<fs::path> val_files;
  if (!a.val.empty()) {
    val_files = layout_files(a.val);
  } else {
    const std::size_t held = files.size() / 10;
    val_files.assign(files.end() - static_cast<std::ptrdiff_t>(held), files.end());
    files.resize(files.size() - held);
  }
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  cfg.learning_rate = a.lr;
  cfg.pos_weight = a.pos_weight.value_or(default_pos_weight(relation));
  validate(cfg);

  const auto train_set = load_examples(files, relation, a.k);
  const auto heldout = load_examples(val_files, relation, a.k);
  if (ctx.info()) {
    ctx.out << "training " << to_string(relation) << " model on " << train_set.size() << " layouts, "
            << heldout.size() << " held out\n";
  }
  EdgeClassifierModel model(relation, a.hidden, a.seed);
  train(model, train_set, heldout, cfg, [&](const EpochMetrics& m) {
    if (!ctx.info()) return;
    ctx.out << "epoch " << m.epoch << " loss " << fmt("%.6f", m.mean_loss);
    if (!std::isnan(m.precision)) ctx.out << " heldout P " << fmt("%.4f", m.precision);
    if (!std::isnan(m.recall)) ctx.out << " R " << fmt("%.4f", m.recall);
    ctx.out << "\n";
  });
  write_text(a.out, serialize_checkpoint(Checkpoint{std::move(model), cfg}));
  if (ctx.info()) ctx.out << "wrote " << a.out << "\n";
  return kExitOk;
}

struct InferArgs {
  std::vector<std::string> models;
  std::string layout;
  std::string mode = "conservative";
  std::string out;
};

int cmd_infer(const InferArgs& a, Context& ctx) {
  const auto [room, wall] = load_model_pair(a.models);
  const Layout layout = load_layout(a.layout);
  InferenceConfig cfg;
  cfg.mode = mode_from_string(a.mode);
  const Prediction pred = infer(layout.planes, room, wall, cfg);
  write_text(a.out, dump_json(prediction_to_json(pred)));
  if (ctx.info()) {
    ctx.out << "detected " << pred.rooms.size() << " rooms and " << pred.walls.size() << " walls (" << a.mode
            << ", tau_room " << cfg.tau_room() << ")\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path, const std::string& json_out, Context& ctx) {
  const Prediction pred = load_prediction(pred_path);
  const Layout gt = load_layout(gt_path);
  const auto rooms = pred.room_clusters();
  const auto walls = pred.wall_pairs();
  const DetectionReport room_report = score_rooms(rooms, gt);
  const DetectionReport wall_report = score_walls(walls, gt);
  ctx.out << format_report(room_report) << format_report(wall_report);
  if (!json_out.empty()) {
    write_text(json_out, dump_json(Json{{"rooms", report_to_json(room_report)}, {"walls", report_to_json(wall_report)}}));
  }
  return kExitOk;
}

int cmd_plot(const std::string& layout_path, const std::string& pred_path, const std::string& out_path, Context& ctx) {
  const Layout layout = load_layout(layout_path);
  std::optional<Prediction> pred;
  if (!pred_path.empty()) pred = load_prediction(pred_path);
  write_text(out_path, render_svg(layout, pred ? &*pred : nullptr));
  if (ctx.info()) ctx.out << "wrote " << out_path << " (" << layout.planes.size() << " plane segments)\n";
  return kExitOk;
}

int cmd_refine(const std::string& pred_path, const std::string& layout_path, const std::string& out_path, Context& ctx) {
  const Prediction pred = load_prediction(pred_path);
  const Layout layout = load_layout(layout_path);
  SceneBuild build = build_scene_graph(layout.planes, pred);
  for (const auto& s : build.skipped) ctx.err << "skipped " << s << "\n";
  const RefineResult r = refine(build.graph);
  ctx.out << "initial cost " << fmt("%.6e", r.initial_cost) << "\n"
          << "final cost " << fmt("%.6e", r.final_cost) << " after " << r.iterations << " iterations"
          << (r.converged ? "" : " (not converged)") << "\n";

  Json rooms = Json::array(), walls = Json::array(), planes = Json::array();
  auto center_json = [&](std::int64_t id, int idx) {
    const Vec2& c = build.graph.centers[static_cast<std::size_t>(idx)].value;
    return Json{{"id", id}, {"center", Json::array({c.x(), c.y()})}};
  };
  for (std::size_t i = 0; i < pred.rooms.size(); ++i) {
    if (build.room_centers[i] >= 0) rooms.push_back(center_json(pred.rooms[i].id, build.room_centers[i]));
  }
  for (std::size_t i = 0; i < pred.walls.size(); ++i) {
    if (build.wall_centers[i] >= 0) walls.push_back(center_json(pred.walls[i].id, build.wall_centers[i]));
  }
  for (const auto& p : build.graph.planes) {
    const Vec2 n = p.value.normal();
    planes.push_back({{"id", p.id}, {"theta", p.value.theta}, {"d", p.value.d}, {"normal", Json::array({n.x(), n.y()})}});
  }
  const Json doc{{"format_version", kFormatVersion},
                 {"initial_cost", r.initial_cost},
                 {"final_cost", r.final_cost},
                 {"iterations", r.iterations},
                 {"converged", r.converged},
                 {"rooms", rooms},
                 {"walls", walls},
                 {"planes", planes},
                 {"skipped", build.skipped}};
  write_text(out_path, dump_json(doc));
  return kExitOk;
}

int cmd_time(const std::vector<std::string>& models, const std::string& layout_path, const std::string& mode, int runs,
             Context& ctx) {
  const auto [room, wall] = load_model_pair(models);
  const Layout layout = load_layout(layout_path);
  InferenceConfig cfg;
  cfg.mode = mode_from_string(mode);
  if (runs < 1) throw InvalidArgument("--runs must be >= 1");
  const double ms = time_pipeline(layout.planes, room, wall, cfg, runs);
  ctx.out << "median latency " << fmt("%.3f", ms) << " ms over " << runs << " runs (" << layout.planes.size()
          << " planes)\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, log_level_from_env()};
  CLI::App app{"Room and wall detection from plane features", "scenegraph"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "Generate labeled synthetic layouts");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--count", gen.count, "Number of layouts")->required();
  gen_cmd->add_option("--seed", gen.seed, "Base seed; layout i uses seed+i")->required();
  gen_cmd->add_option("--rooms", gen.rooms, "Room count range A..B");
  gen_cmd->add_option("--corridor-prob", gen.corridor_prob, "Corridor probability per grid boundary");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one edge classifier");
  train_cmd->add_option("--data", tr.data, "Directory of layout files")->required();
  train_cmd->add_option("--val", tr.val, "Held-out directory (default: last 10% of --data)");
  train_cmd->add_option("--relation", tr.relation, "room or wall")->required();
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
  train_cmd->add_option("--seed", tr.seed, "Initialization and shuffle seed")->capture_default_str();
  train_cmd->add_option("--hidden", tr.hidden, "Hidden width")->capture_default_str();
  train_cmd->add_option("--pos-weight", tr.pos_weight, "Positive class weight (default 3 room, 5 wall)");
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate")->capture_default_str();

  InferArgs inf;
  auto* infer_cmd = app.add_subcommand("infer", "Detect rooms and walls in one layout");
  infer_cmd->add_option("--model", inf.models, "Room and wall checkpoints")->required();
  infer_cmd->add_option("--layout", inf.layout, "Layout file")->required();
  infer_cmd->add_option("--mode", inf.mode, "conservative or greedy")->capture_default_str();
  infer_cmd->add_option("--out", inf.out, "Prediction path")->required();

  std::string eval_pred, eval_gt, eval_json;
  auto* eval_cmd = app.add_subcommand("eval", "Score a prediction against ground truth");
  eval_cmd->add_option("--pred", eval_pred)->required();
  eval_cmd->add_option("--gt", eval_gt)->required();
  eval_cmd->add_option("--json", eval_json, "Also write the reports as JSON");

  std::string plot_layout, plot_pred, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render a layout (and prediction) as SVG");
  plot_cmd->add_option("--layout", plot_layout)->required();
  plot_cmd->add_option("--pred", plot_pred);
  plot_cmd->add_option("--out", plot_out)->required();

  std::string ref_pred, ref_layout, ref_out;
  auto* refine_cmd = app.add_subcommand("refine", "Gauss-Newton refinement of planes and centers");
  refine_cmd->add_option("--pred", ref_pred)->required();
  refine_cmd->add_option("--layout", ref_layout)->required();
  refine_cmd->add_option("--out", ref_out)->required();

  std::vector<std::string> time_models;
  std::string time_layout, time_mode = "conservative";
  int time_runs = 5;
  auto* time_cmd = app.add_subcommand("time", "Median inference latency on one layout");
  time_cmd->add_option("--model", time_models)->required();
  time_cmd->add_option("--layout", time_layout)->required();
  time_cmd->add_option("--mode", time_mode)->capture_default_str();
  time_cmd->add_option("--runs", time_runs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*gen_cmd) return cmd_gen_dataset(gen, ctx);
    if (*train_cmd) return cmd_train(tr, ctx);
    if (*infer_cmd) return cmd_infer(inf, ctx);
    if (*eval_cmd) return cmd_eval(eval_pred, eval_gt, eval_json, ctx);
    if (*plot_cmd) return cmd_plot(plot_layout, plot_pred, plot_out, ctx);
    if (*refine_cmd) return cmd_refine(ref_pred, ref_layout, ref_out, ctx);
    if (*time_cmd) return cmd_time(time_models, time_layout, time_mode, time_runs, ctx);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace scenegraph
