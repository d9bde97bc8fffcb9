// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "spherewalk/image.hpp"
#include "spherewalk/io.hpp"
#include "spherewalk/toyworld.hpp"
#include "spherewalk/walk.hpp"

namespace fs = std::filesystem;
namespace cli = spherewalk::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> tsv_rows(const fs::path& p) {
  std::istringstream in(spherewalk::read_file(p));
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

std::vector<std::string> cells(const std::string& row) {
  std::vector<std::string> out;
  std::istringstream in(row);
  for (std::string c; std::getline(in, c, '\t');) out.push_back(c);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sw_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, HelpAndParseErrors) {
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  EXPECT_NE(help.out.find("walk"), std::string::npos);
  EXPECT_NE(help.out.find("eval-collapse"), std::string::npos);
  EXPECT_EQ(run({}).code, cli::kExitValidation);
  EXPECT_EQ(run({"teleport"}).code, cli::kExitValidation);
  EXPECT_EQ(run({"eval-collapse", "--trials", "many"}).code, cli::kExitValidation);
}

TEST(Cli, MissingCheckpointIsExplained) {
  const auto ws = scratch("missing");
  const auto r = run({"walk", "--workspace", ws.string(), "--image", "0"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("missing"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("prepare"), std::string::npos) << r.err;
}

TEST(Cli, GradcheckPassesAndCatchesCorruption) {
  const auto ok = run({"gradcheck", "--seeds", "1"});
  EXPECT_EQ(ok.code, cli::kExitOk) << ok.out;
  for (const char* kind : {"dense", "tanh", "sigmoid", "batchnorm"}) {
    EXPECT_NE(ok.out.find(kind), std::string::npos) << kind;
  }
  const auto bad = run({"gradcheck", "--seeds", "1", "--corrupt-backward"});
  EXPECT_EQ(bad.code, cli::kExitNumeric);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(Cli, CollapseWithOneSampleIsExact) {
  const auto dir = scratch("collapse");
  const auto r = run({"eval-collapse", "--workspace", dir.string(), "--n", "1,8", "--trials", "20",
                      "--dim", "16"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto rows = tsv_rows(dir / "out" / "collapse.tsv");
  ASSERT_EQ(rows.size(), 3u);
  const auto one = cells(rows[1]);
  EXPECT_EQ(one[0], "1");
  EXPECT_DOUBLE_EQ(std::stod(one[2]), 1.0);
  EXPECT_LT(std::stod(cells(rows[2])[2]), 0.6);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifests" / "eval-collapse.json"));
  EXPECT_EQ(run({"eval-collapse", "--trials", "1"}).code, cli::kExitValidation);
  fs::remove_all(dir);
}

// One small workspace shared by the pipeline tests.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ws_ = new fs::path(scratch("pipeline"));
    const std::string w = ws_->string();
    prepare_ = new Outcome(run({"prepare", "--workspace", w, "--seed", "3", "--n", "600", "--dim", "16",
                            "--ae-epochs", "3", "--encoder-epochs", "3"}));
    mapping_ = new Outcome(run({"train-mapping", "--workspace", w, "--seed", "3", "--epochs", "3"}));
    classifiers_ = new Outcome(run({"train-classifiers", "--workspace", w, "--seed", "3", "--attrs",
                                "smile", "--epochs", "3", "--depth", "4", "--width", "16"}));
  }
  static void TearDownTestSuite() {
    fs::remove_all(*ws_);
    delete ws_;
    delete prepare_;
    delete mapping_;
    delete classifiers_;
  }
  void SetUp() override {
    ASSERT_EQ(prepare_->code, 0) << prepare_->err;
    ASSERT_EQ(mapping_->code, 0) << mapping_->err;
    ASSERT_EQ(classifiers_->code, 0) << classifiers_->err;
  }
  static std::string ws() { return ws_->string(); }

  static fs::path* ws_;
  static Outcome* prepare_;
  static Outcome* mapping_;
  static Outcome* classifiers_;
};

fs::path* Pipeline::ws_ = nullptr;
Outcome* Pipeline::prepare_ = nullptr;
Outcome* Pipeline::mapping_ = nullptr;
Outcome* Pipeline::classifiers_ = nullptr;

TEST_F(Pipeline, PrepareManifestListsModels) {
  const auto doc = nlohmann::json::parse(spherewalk::read_file(*ws_ / "manifests" / "prepare.json"));
  EXPECT_EQ(doc["command"], "prepare");
  EXPECT_EQ(doc["seed"], 3);
  int models = 0;
  for (const auto& a : doc["artifacts"]) {
    const std::string p = a["path"];
    if (p.rfind("models/", 0) == 0) ++models;
    EXPECT_EQ(a["sha256"].get<std::string>().size(), 64u);
  }
  EXPECT_EQ(models, 3);
  EXPECT_TRUE(doc["timings_s"].contains("total"));
}

TEST_F(Pipeline, RefusesToOverwriteWithoutForce) {
  const auto before = spherewalk::read_file(*ws_ / "models" / "mapping.json");
  const auto r = run({"train-mapping", "--workspace", ws(), "--seed", "3", "--epochs", "3"});
  EXPECT_EQ(r.code, cli::kExitValidation);
  EXPECT_NE(r.err.find("--force"), std::string::npos) << r.err;
  const auto forced =
      run({"train-mapping", "--workspace", ws(), "--seed", "3", "--epochs", "3", "--force"});
  EXPECT_EQ(forced.code, cli::kExitOk) << forced.err;
  EXPECT_EQ(spherewalk::read_file(*ws_ / "models" / "mapping.json"), before);
}

TEST_F(Pipeline, ClassifierReport) {
  const auto rows = tsv_rows(*ws_ / "reports" / "classifiers.tsv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(cells(rows[0])[0], "attribute");
  EXPECT_EQ(cells(rows[1])[0], "smile");
  EXPECT_EQ(cells(rows[1])[1], "4");
}

TEST_F(Pipeline, WalkWritesArtifacts) {
  const auto r = run({"walk", "--workspace", ws(), "--image", "5", "--attr", "smile", "--y", "1",
                      "--iterations", "40", "--snapshot-every", "10", "--stop-loss", "0"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const fs::path out = *ws_ / "out";
  fs::path traj;
  for (const auto& e : fs::directory_iterator(out)) {
    const auto name = e.path().filename().string();
    if (name.rfind("walk_smile_y1_", 0) == 0 && e.path().extension() == ".json") traj = e.path();
  }
  ASSERT_FALSE(traj.empty());
  const auto t = spherewalk::walk::import_trajectory(traj, 16);
  EXPECT_EQ(t.iterations(), 40);
  EXPECT_EQ(t.snapshots.size(), 5u);
  const std::string stem = traj.string().substr(0, traj.string().size() - 16);
  const auto grid = spherewalk::read_pgm(stem + ".pgm");
  EXPECT_EQ(grid.height, 32);
  EXPECT_EQ(grid.width, 5 * 32 + 4);
  EXPECT_EQ(tsv_rows(stem + ".snapshots.tsv").size(), 6u);
  EXPECT_TRUE(fs::exists(stem + ".gradient_dims.tsv"));

  EXPECT_EQ(run({"walk", "--workspace", ws(), "--image", "5", "--attr", "hair"}).code,
            cli::kExitValidation);
  EXPECT_EQ(run({"walk", "--workspace", ws(), "--image", "5", "--attr", "eye_size"}).code,
            cli::kExitValidation);
  EXPECT_EQ(run({"walk", "--workspace", ws(), "--image", "99999"}).code, cli::kExitValidation);
}

TEST_F(Pipeline, InterpolateAverageArith) {
  const auto i = run({"interpolate", "--workspace", ws(), "--a", "1", "--b", "2", "--steps", "6"});
  ASSERT_EQ(i.code, cli::kExitOk) << i.err;
  const auto grid = spherewalk::read_pgm(*ws_ / "out" / "interpolate_1_2.pgm");
  EXPECT_EQ(grid.width, 6 * 32 + 5);
  EXPECT_EQ(grid.height, 2 * 32 + 1);

  const auto a = run({"average", "--workspace", ws(), "--ids", "1,2,3"});
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  const auto r = run({"average", "--workspace", ws(), "--random", "50"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;

  const auto c = run({"arith", "--workspace", ws(), "--a", "1", "--b", "2", "--c", "3"});
  ASSERT_EQ(c.code, cli::kExitOk) << c.err;
  EXPECT_TRUE(fs::exists(*ws_ / "out" / "arith_1_2_3.pgm"));
  EXPECT_EQ(run({"arith", "--workspace", ws(), "--a", "1", "--b", "1", "--c", "1"}).code,
            cli::kExitOk);
}

TEST_F(Pipeline, PgmInputIsAccepted) {
  const fs::path pgm = *ws_ / "probe.pgm";
  spherewalk::write_pgm(spherewalk::toyworld::render_glyph({}), pgm);
  const auto r = run({"walk", "--workspace", ws(), "--image", pgm.string(), "--attr", "smile",
                      "--iterations", "10", "--snapshot-every", "5"});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
}

namespace {

spherewalk::GlyphImage tile(const spherewalk::GlyphImage& grid, int col, int row) {
  spherewalk::GlyphImage t(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) t.at(x, y) = grid.at(col * 33 + x, row * 33 + y);
  return t;
}

double max_abs_diff(const spherewalk::GlyphImage& a, const spherewalk::GlyphImage& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
  return m;
}

}  // namespace

TEST_F(Pipeline, StripsAgreeOnReconstructions) {
  ASSERT_EQ(run({"interpolate", "--workspace", ws(), "--a", "4", "--b", "7", "--steps", "5"}).code, 0);
  ASSERT_EQ(run({"arith", "--workspace", ws(), "--a", "4", "--b", "7", "--c", "7"}).code, 0);
  const auto interp = spherewalk::read_pgm(*ws_ / "out" / "interpolate_4_7.pgm");
  const auto arith = spherewalk::read_pgm(*ws_ / "out" / "arith_4_7_7.pgm");
  const double level = 1.0 / 255 + 1e-12;
  for (int row : {0, 1}) {
    EXPECT_LE(max_abs_diff(tile(interp, 0, row), tile(arith, 0, 0)), level);
    EXPECT_LE(max_abs_diff(tile(interp, 4, row), tile(arith, 1, 0)), level);
  }
  // a - b + b is a.
  EXPECT_LE(max_abs_diff(tile(arith, 3, 0), tile(arith, 0, 0)), level);
}

// E|mean|^2 = 1/n for independent uniform unit vectors, so about 1/8 at n = 64.
TEST_F(Pipeline, AverageOfRandomLatentsCollapses) {
  const auto r = run({"average", "--workspace", ws(), "--random", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  double norm = -1, sph = -1;
  for (std::string key; in >> key;) {
    if (key == "linear_mean_norm") in >> norm;
    if (key == "spherical_mean_norm") in >> sph;
  }
  EXPECT_NEAR(norm, 0.125, 0.07);
  EXPECT_NEAR(sph, 1.0, 1e-9);
}

TEST_F(Pipeline, OppositeWalkGridsDiffer) {
  for (const char* y : {"0", "1"}) {
    ASSERT_EQ(run({"walk", "--workspace", ws(), "--image", "9", "--attr", "smile", "--y", y,
                   "--iterations", "100", "--snapshot-every", "10", "--stop-loss", "0"})
                  .code,
              0);
  }
  const auto y0 = spherewalk::read_file(*ws_ / "out" / "walk_smile_y0_9.pgm");
  const auto y1 = spherewalk::read_file(*ws_ / "out" / "walk_smile_y1_9.pgm");
  EXPECT_NE(y0, y1);
}
