/* Copyright 2026 The fundus-prep Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Runs the fundus_prep binary end to end on a small generated corpus.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fprep/image_io.hpp"
#include "fprep/resample.hpp"
#include "oracles.hpp"

using namespace fprep;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "fprep_cli";

struct CmdResult {
  int status;
  std::string out;
};

CmdResult run(const std::string& args, const std::string& env = "") {
  const fs::path log = kRoot / "stdout.txt";
  const std::string cmd =
      env + " " + FUNDUS_PREP_BIN + " " + args + " > " + log.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot / "raw");
    fs::create_directories(kRoot / "ext");
    std::mt19937_64 rng(99);
    std::string manifest = "id,label\n";
    for (int i = 0; i < 10; ++i) {
      const std::string id = "img" + std::to_string(i);
      const Image im = oracle::smooth_noise(rng, 64, 48, 3, 1.5);
      save_image(im, kRoot / "raw" / (id + ".png"));
      save_image(box_downscale(im, 8), kRoot / "ext" / (id + ".png"));
      manifest += id + "," + std::to_string(i % 5) + "\n";
    }
    write(kRoot / "raw" / "labels.csv", manifest);
  }
};

}  // namespace

TEST_F(Cli, HelpAndBadArguments) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("roundtrip --scale 0 -m x -o y").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
}

TEST_F(Cli, RoundtripWritesAllColumns) {
  const fs::path out = kRoot / "rt";
  const CmdResult r = run("roundtrip -m " + (kRoot / "raw" / "labels.csv").string() + " --external-dir " +
                    (kRoot / "ext").string() + " -o " + out.string() + " -j 2");
  ASSERT_EQ(r.status, 0);
  const auto doc = nlohmann::json::parse(slurp(out / "roundtrip.json"));
  EXPECT_EQ(doc["rows"].size(), 60u);
  EXPECT_EQ(doc["aggregates"].size(), 30u);
  const std::string table = slurp(out / "roundtrip_table.txt");
  for (const char* name : {"nearest", "bilinear", "bicubic", "lanczos", "rdip", "external"}) {
    EXPECT_NE(table.find(name), std::string::npos) << name;
  }
  const std::string rows = slurp(out / "roundtrip_rows.csv");
  EXPECT_EQ(rows.rfind("id,label,algorithm,psnr,ssim,status,message\n", 0), 0u);
  const auto cfg = nlohmann::json::parse(slurp(out / "resolved_config.json"));
  EXPECT_EQ(cfg["workers"], 2);
  EXPECT_EQ(cfg["report"]["scale"], 8);

  // Worker count does not change the bytes of the report.
  const fs::path out1 = kRoot / "rt1";
  ASSERT_EQ(run("roundtrip -m " + (kRoot / "raw" / "labels.csv").string() + " --external-dir " +
                (kRoot / "ext").string() + " -o " + out1.string(),
                "FUNDUS_PREP_WORKERS=1")
                .status,
            0);
  EXPECT_EQ(slurp(out1 / "roundtrip.json"), slurp(out / "roundtrip.json"));
  EXPECT_EQ(nlohmann::json::parse(slurp(out1 / "resolved_config.json"))["workers"], 1);
}

TEST_F(Cli, RoundtripConfigFileAndFlags) {
  const fs::path cfg = kRoot / "cfg.toml";
  write(cfg, "[roundtrip]\nscale = 4\nalgos = \"bilinear\"\n");
  const fs::path out = kRoot / "rt_cfg";
  ASSERT_EQ(run("--config " + cfg.string() + " roundtrip -m " +
                (kRoot / "raw" / "labels.csv").string() + " -o " + out.string() + " --scale 2")
                .status,
            0);
  const auto doc = nlohmann::json::parse(slurp(out / "resolved_config.json"));
  EXPECT_EQ(doc["report"]["scale"], 2);
  EXPECT_EQ(doc["report"]["downscalers"].size(), 1u);
}

TEST_F(Cli, RoundtripFailures) {
  write(kRoot / "empty" / "labels.csv", "id,label\n");
  EXPECT_EQ(run("roundtrip -m " + (kRoot / "empty" / "labels.csv").string() + " -o " +
                (kRoot / "rt_empty").string())
                .status,
            2);
  // One unreadable record: partial failure, the rest still scored.
  write(kRoot / "raw" / "partial.csv", "id,label\nimg0,0\nnothere,1\n");
  EXPECT_EQ(run("roundtrip -m " + (kRoot / "raw" / "partial.csv").string() + " -o " +
                (kRoot / "rt_partial").string() + " --algos bilinear")
                .status,
            1);
  EXPECT_EQ(run("roundtrip -m " + (kRoot / "raw" / "labels.csv").string() + " -o " +
                    (kRoot / "rt_env").string(),
                "FUNDUS_PREP_WORKERS=0")
                .status,
            2);
}

TEST_F(Cli, PreprocessAndTile) {
  const fs::path src = kRoot / "fundus";
  fs::create_directories(src);
  save_image(oracle::bordered_disc(200, 20, 1e9, 3), src / "a.png");
  save_image(Image::filled_u8(40, 40, 3, 0), src / "b.png");
  write(src / "labels.csv", "image,level\na,1\nb,0\n");
  const fs::path out = kRoot / "prep";
  const CmdResult r = run("preprocess -m " + (src / "labels.csv").string() + " --source kaggle -o " +
                    out.string() + " --target-width 24 --target-height 24 --tile");
  EXPECT_EQ(r.status, 1);
  const Image a = load_image(out / "a.png");
  EXPECT_EQ(a.width(), 24);
  EXPECT_EQ(load_image(out / "a_br.png").width(), 12);
  EXPECT_EQ(slurp(out / "manifest.csv"), "id,path,label,source,split\na,a.png,1,kaggle,unassigned\n");
  EXPECT_NE(slurp(out / "failures.csv").find("\nb,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "resolved_config.json"));

  const fs::path tiles = kRoot / "tiles";
  ASSERT_EQ(run("tile " + (out / "a.png").string() + " -o " + tiles.string()).status, 0);
  EXPECT_EQ(load_image(tiles / "a_tl.png"), load_image(out / "a_tl.png"));
}

TEST_F(Cli, SplitIsReproducible) {
  std::string kaggle = "image,level\n", idrid = "Image name,Retinopathy grade\n";
  for (int c = 0; c < 5; ++c) {
    for (int i = 0; i < 4; ++i) kaggle += "k" + std::to_string(c) + "_" + std::to_string(i) + "," +
                                          std::to_string(c) + "\n";
    idrid += "IDRiD_" + std::to_string(c) + "," + std::to_string(c) + "\n";
  }
  write(kRoot / "split" / "kaggle.csv", kaggle);
  write(kRoot / "split" / "idrid.csv", idrid);
  const std::string args = "split -m " + (kRoot / "split" / "kaggle.csv").string() + ":kaggle -m " +
                           (kRoot / "split" / "idrid.csv").string() + ":idrid --seed 7 -o ";
  ASSERT_EQ(run(args + (kRoot / "split" / "a.csv").string()).status, 0);
  ASSERT_EQ(run(args + (kRoot / "split" / "b.csv").string()).status, 0);
  const std::string a = slurp(kRoot / "split" / "a.csv");
  EXPECT_EQ(a, slurp(kRoot / "split" / "b.csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 26);
  for (const char* s : {",train\n", ",val\n", ",test\n", ",idrid,"}) {
    EXPECT_NE(a.find(s), std::string::npos) << s;
  }
  // A class with two records cannot fill three splits.
  write(kRoot / "split" / "tiny.csv", "id,label,source\nx,0,kaggle\ny,0,kaggle\n");
  EXPECT_EQ(run("split -m " + (kRoot / "split" / "tiny.csv").string() + " -o " +
                (kRoot / "split" / "tiny_out.csv").string())
                .status,
            2);
}

TEST_F(Cli, MetricsFromPredictions) {
  std::string csv = "id,actual,predicted\n";
  int id = 0;
  auto add = [&](int n, int actual, int predicted) {
    for (int i = 0; i < n; ++i) {
      csv += std::to_string(id++) + "," + std::to_string(actual) + "," +
             std::to_string(predicted) + "\n";
    }
  };
  add(3194, 0, 0);
  add(664, 0, 3);
  add(454, 2, 0);
  add(3298, 4, 1);
  write(kRoot / "metrics" / "pred.csv", csv);
  const CmdResult r = run("metrics " + (kRoot / "metrics" / "pred.csv").string() + " -o " +
                    (kRoot / "metrics" / "out").string() + " --conventional");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("85.31% 83.24% 87.55%"), std::string::npos) << r.out;
  const auto doc = nlohmann::json::parse(slurp(kRoot / "metrics" / "out" / "metrics.json"));
  EXPECT_EQ(doc["confusion"]["tn"], 3194);
  EXPECT_EQ(doc["confusion"]["fn"], 664);
  EXPECT_TRUE(doc.contains("confusion_conventional"));

  write(kRoot / "metrics" / "empty.csv", "");
  EXPECT_EQ(run("metrics " + (kRoot / "metrics" / "empty.csv").string()).status, 2);
  write(kRoot / "metrics" / "bad.csv", "id,actual,predicted\na,0,1\nb,7,0\n");
  EXPECT_EQ(run("metrics " + (kRoot / "metrics" / "bad.csv").string()).status, 2);
}

TEST_F(Cli, PsnrAndSsim) {
  const std::string a = (kRoot / "raw" / "img0.png").string();
  EXPECT_EQ(run("psnr " + a + " " + a).out, "inf\n");
  EXPECT_EQ(run("ssim " + a + " " + a).out, "1.0000000000\n");
  EXPECT_EQ(run("psnr " + a + " " + (kRoot / "raw" / "img1.png").string()).status, 0);
}
