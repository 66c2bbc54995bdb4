#include <scenegraph/cli.hpp>
#include <scenegraph/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <regex>
#include <sstream>

using namespace scenegraph;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "scenegraph");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("scenegraph_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }

  fs::path dir;
};

std::string read(const std::string& path) { return read_text(path); }

Prediction prediction_from_truth(const Layout& l) {
  Prediction pred;
  for (const auto& r : l.rooms) pred.rooms.push_back({r.id, r.plane_ids, r.center});
  for (const auto& w : l.walls) pred.walls.push_back({w.id, w.plane_ids, w.center, 1.0});
  return pred;
}

}  // namespace

TEST_F(CliTest, GenDatasetIsDeterministic) {
  ASSERT_EQ(run({"gen-dataset", "--out", p("a"), "--count", "3", "--seed", "1"}).code, kExitOk);
  ASSERT_EQ(run({"gen-dataset", "--out", p("b"), "--count", "3", "--seed", "1"}).code, kExitOk);
  for (const char* f : {"layout_00000.json", "layout_00001.json", "layout_00002.json"}) {
    EXPECT_EQ(read(p(std::string("a/") + f)), read(p(std::string("b/") + f)));
  }
  EXPECT_FALSE(fs::exists(p("a/layout_00003.json")));
  // File i is the layout for seed + i.
  EXPECT_EQ(parse_layout(read(p("a/layout_00002.json"))), generate_layout(GenConfig{.seed = 3}));
}

TEST_F(CliTest, GenDatasetOptions) {
  ASSERT_EQ(run({"gen-dataset", "--out", p("a"), "--count", "2", "--seed", "4", "--rooms", "1..1", "--corridor-prob",
                 "0"})
                .code,
            kExitOk);
  EXPECT_EQ(parse_layout(read(p("a/layout_00000.json"))).rooms.size(), 1u);
  EXPECT_EQ(run({"gen-dataset", "--out", p("c"), "--count", "1", "--seed", "0", "--rooms", "5..2"}).code, kExitInput);
}

TEST_F(CliTest, UnwritableOutputIsInputError) {
  write_text(p("file"), "x");
  const auto r = run({"gen-dataset", "--out", p("file/sub"), "--count", "1", "--seed", "0"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitInput);
  EXPECT_EQ(run({"frobnicate"}).code, kExitInput);
  EXPECT_EQ(run({"train", "--relation", "room"}).code, kExitInput);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, TrainMissingDataIsInputError) {
  EXPECT_EQ(run({"train", "--data", p("nope"), "--relation", "room", "--out", p("m.json")}).code, kExitInput);
  fs::create_directories(p("empty"));
  EXPECT_EQ(run({"train", "--data", p("empty"), "--relation", "room", "--out", p("m.json")}).code, kExitInput);
}

TEST_F(CliTest, TrainInferEvalPlotRefine) {
  ASSERT_EQ(run({"gen-dataset", "--out", p("data"), "--count", "10", "--seed", "100"}).code, kExitOk);
  const auto train_room = run({"train", "--data", p("data"), "--relation", "room", "--epochs", "1", "--hidden", "8",
                               "--out", p("room.json")});
  ASSERT_EQ(train_room.code, kExitOk) << train_room.err;
  EXPECT_TRUE(std::regex_search(train_room.out, std::regex("epoch 1 loss [0-9.]+ heldout P")));
  ASSERT_EQ(run({"train", "--data", p("data"), "--relation", "wall", "--epochs", "1", "--hidden", "8", "--out",
                 p("wall.json")})
                .code,
            kExitOk);
  EXPECT_EQ(parse_checkpoint(read(p("wall.json"))).model.relation, Relation::kSameWall);

  const std::string layout = p("data/layout_00009.json");
  const auto inf = run({"infer", "--model", p("room.json"), "--model", p("wall.json"), "--layout", layout, "--mode",
                        "greedy", "--out", p("pred.json")});
  ASSERT_EQ(inf.code, kExitOk) << inf.err;
  EXPECT_NE(inf.out.find("tau_room 0.5"), std::string::npos);
  const Prediction pred = prediction_from_json(parse_json(read(p("pred.json"))));
  EXPECT_EQ(pred.mode, Mode::kGreedy);
  EXPECT_FALSE(pred.edges.empty());

  // Wrong relation or count of models.
  EXPECT_EQ(run({"infer", "--model", p("room.json"), "--model", p("room.json"), "--layout", layout, "--out",
                 p("x.json")})
                .code,
            kExitInput);
  EXPECT_EQ(run({"infer", "--model", p("room.json"), "--layout", layout, "--out", p("x.json")}).code, kExitInput);

  const auto eval = run({"eval", "--pred", p("pred.json"), "--gt", layout, "--json", p("report.json")});
  EXPECT_EQ(eval.code, kExitOk);
  EXPECT_NE(eval.out.find("rooms: TP"), std::string::npos);
  EXPECT_NE(eval.out.find("walls: TP"), std::string::npos);
  EXPECT_TRUE(parse_json(read(p("report.json"))).contains("walls"));

  EXPECT_EQ(run({"plot", "--layout", layout, "--pred", p("pred.json"), "--out", p("fig.svg")}).code, kExitOk);
  EXPECT_NE(read(p("fig.svg")).find("<svg"), std::string::npos);

  const auto timed = run({"time", "--model", p("room.json"), "--model", p("wall.json"), "--layout", layout, "--runs",
                          "2"});
  EXPECT_EQ(timed.code, kExitOk);
  EXPECT_NE(timed.out.find("median latency"), std::string::npos);
}

TEST_F(CliTest, NanLossIsNumericFailure) {
  ASSERT_EQ(run({"gen-dataset", "--out", p("data"), "--count", "4", "--seed", "7"}).code, kExitOk);
  const auto r = run({"train", "--data", p("data"), "--relation", "room", "--epochs", "3", "--hidden", "4", "--lr",
                      "1e300", "--out", p("m.json")});
  EXPECT_EQ(r.code, kExitNumeric) << r.out << r.err;
  EXPECT_FALSE(fs::exists(p("m.json")));
}

TEST_F(CliTest, EmptyLayoutGivesEmptyPrediction) {
  write_text(p("room.json"), serialize_checkpoint({EdgeClassifierModel(Relation::kSameRoom, 4, 1), {}}));
  write_text(p("wall.json"), serialize_checkpoint({EdgeClassifierModel(Relation::kSameWall, 4, 2), {}}));
  write_text(p("empty.json"), serialize_layout(Layout{}));
  ASSERT_EQ(run({"infer", "--model", p("wall.json"), "--model", p("room.json"), "--layout", p("empty.json"), "--out",
                 p("pred.json")})
                .code,
            kExitOk);
  const Prediction pred = prediction_from_json(parse_json(read(p("pred.json"))));
  EXPECT_TRUE(pred.rooms.empty());
  EXPECT_TRUE(pred.walls.empty());
  EXPECT_TRUE(pred.edges.empty());
}

TEST_F(CliTest, PerfectPredictionEvaluatesToOne) {
  const Layout l = generate_layout(GenConfig{.seed = 11});
  write_text(p("gt.json"), serialize_layout(l));
  write_text(p("pred.json"), dump_json(prediction_to_json(prediction_from_truth(l))));
  const auto r = run({"eval", "--pred", p("pred.json"), "--gt", p("gt.json")});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) EXPECT_NE(line.find("P 1.0000  R 1.0000"), std::string::npos) << line;
}

TEST_F(CliTest, PlotDrawsEveryPlane) {
  GenConfig cfg;
  cfg.seed = 5;
  cfg.n_rooms = {4, 4};
  cfg.corridor_prob = 0.0;
  const Layout l = generate_layout(cfg);
  ASSERT_EQ(l.rooms.size(), 4u);
  write_text(p("gt.json"), serialize_layout(l));
  ASSERT_EQ(run({"plot", "--layout", p("gt.json"), "--out", p("fig.svg")}).code, kExitOk);
  const std::string svg = read(p("fig.svg"));
  const auto begin = svg.find("<g id=\"planes\"");
  ASSERT_NE(begin, std::string::npos);
  const std::string group = svg.substr(begin, svg.find("</g>", begin) - begin);
  std::size_t segments = 0;
  for (auto pos = group.find("<line"); pos != std::string::npos; pos = group.find("<line", pos + 1)) ++segments;
  EXPECT_GE(segments, 16u);
  EXPECT_EQ(segments, l.planes.size());
}

TEST_F(CliTest, RefineOnGroundTruth) {
  const Layout l = generate_layout(GenConfig{.seed = 12});
  write_text(p("gt.json"), serialize_layout(l));
  write_text(p("pred.json"), dump_json(prediction_to_json(prediction_from_truth(l))));
  const auto r = run({"refine", "--pred", p("pred.json"), "--layout", p("gt.json"), "--out", p("refined.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json doc = parse_json(read(p("refined.json")));
  EXPECT_LT(doc["final_cost"].get<double>(), 1e-12);
  EXPECT_NE(r.out.find("final cost"), std::string::npos);
  EXPECT_EQ(doc["rooms"].size(), l.rooms.size());
}

TEST_F(CliTest, SchemaViolationReportsPointer) {
  Json j = layout_to_json(generate_layout(GenConfig{.seed = 13}));
  j["planes"][2]["width"] = "wide";
  write_text(p("bad.json"), dump_json(j));
  const auto r = run({"plot", "--layout", p("bad.json"), "--out", p("fig.svg")});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("/planes/2/width"), std::string::npos) << r.err;
}
