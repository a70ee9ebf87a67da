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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "fprep/external.hpp"
#include "fprep/harness.hpp"
#include "fprep/image_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fprep;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fprep_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ResampleSpec spec_of(Algorithm a) {
  ResampleSpec s;
  s.algorithm = a;
  return s;
}

std::vector<ResampleSpec> native_specs() {
  return {spec_of(Algorithm::nearest), spec_of(Algorithm::bilinear), spec_of(Algorithm::bicubic),
          spec_of(Algorithm::lanczos), spec_of(Algorithm::rdip)};
}

// Writes `labels.size()` smooth random images and returns their manifest.
Manifest write_corpus(const fs::path& dir, const std::vector<int>& labels, int w, int h,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Manifest m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    DatasetRecord r;
    r.id = "img" + std::to_string(i);
    r.path = dir / (r.id + ".png");
    r.label = labels[i];
    save_image(oracle::smooth_noise(rng, w, h, 3, 3.0), r.path);
    m.records.push_back(r);
  }
  return m;
}

std::string json_text(const RoundTripReport& r) { return to_json(r).dump(2); }

}  // namespace

TEST(RoundTrip, ConstantImageIsLossless) {
  const Image im = Image::filled_u8(37, 29, 3, 140);
  for (const auto& s : native_specs()) {
    const RoundTripScore score = roundtrip_one(im, s);
    EXPECT_EQ(score.psnr, kInfinitePsnr) << s.label();
    EXPECT_EQ(score.ssim, 1.0);
  }
}

TEST(RoundTrip, MatchesComposedOracles) {
  std::mt19937_64 rng(1);
  const Image im = oracle::smooth_noise(rng, 16, 16, 1, 1.5);
  for (auto a : {Algorithm::nearest, Algorithm::bicubic}) {
    ResampleSpec s = spec_of(a);
    s.scale = 8;
    std::vector<double> small =
        a == Algorithm::nearest ? oracle::nearest(im, 8) : oracle::downscale(im, s);
    std::vector<std::uint8_t> q;
    for (double v : small) q.push_back(quantize(v));
    const Image down(2, 2, 1, q);
    std::vector<std::uint8_t> up;
    for (double v : oracle::upscale_lanczos4(down, 8)) up.push_back(quantize(v));
    const Image restored(16, 16, 1, up);
    const RoundTripScore score = roundtrip_one(im, s);
    EXPECT_NEAR(score.psnr, oracle::psnr(im, restored), 1e-9);
    EXPECT_NEAR(score.ssim, oracle::ssim(im, restored), 1e-9);
  }
}

TEST(RoundTrip, RangeAndCropping) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5; ++trial) {
    const Image im = oracle::random_u8(rng, 21 + trial, 19, 3);
    for (const auto& s : native_specs()) {
      const RoundTripScore score = roundtrip_one(im, s);
      EXPECT_GE(score.psnr, 0.0);
      EXPECT_GE(score.ssim, -1.0);
      EXPECT_LE(score.ssim, 1.0);
    }
  }
  EXPECT_THROW(roundtrip_one(Image::filled_u8(7, 20, 1, 0), spec_of(Algorithm::bilinear)),
               std::invalid_argument);
  // A downscaled image that is too small to cover the original after upscaling.
  EXPECT_THROW(roundtrip_from_downscaled(Image::filled_u8(24, 24, 1, 0),
                                         Image::filled_u8(2, 3, 1, 0), 8),
               std::invalid_argument);
}

TEST(Aggregate, MeansExcludeInfinitePsnr) {
  std::vector<QualityRow> rows = {
      {"a", 0, "nearest", 30.0, 0.9, RowStatus::ok, ""},
      {"b", 0, "nearest", kInfinitePsnr, 1.0, RowStatus::ok, ""},
      {"c", 0, "nearest", 40.0, 0.7, RowStatus::warning, "dims"},
      {"d", 0, "nearest", 0.0, 0.0, RowStatus::error, "bad"},
      {"e", 2, "nearest", kInfinitePsnr, 1.0, RowStatus::ok, ""},
  };
  const auto agg = aggregate(rows, {"nearest"});
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].count, 3u);
  EXPECT_EQ(agg[0].infinite_psnr, 1u);
  EXPECT_DOUBLE_EQ(agg[0].mean_psnr, 35.0);
  EXPECT_NEAR(agg[0].mean_ssim, 2.6 / 3, 1e-15);
  EXPECT_EQ(agg[1].label, 2);
  EXPECT_EQ(agg[1].mean_psnr, kInfinitePsnr);
}

TEST(Rank, ReferencePsnrClassThree) {
  const std::vector<std::pair<std::string, double>> row = {
      {"nearest", 37.537186}, {"rdip", 37.708631},     {"lanczos", 37.808070},
      {"bicubic", 37.829595}, {"bilinear", 37.846174}, {"external", 37.777964}};
  std::vector<Aggregate> aggs;
  for (const auto& [name, v] : row) aggs.push_back({3, name, 1, 0, v, 0.5});
  const auto ranking = rank_algorithms(aggs, RankMetric::psnr);
  ASSERT_EQ(ranking.size(), 1u);
  const auto& e = ranking[0].entries;
  ASSERT_EQ(e.size(), 6u);
  EXPECT_EQ(e[0].algorithm, "bilinear");
  EXPECT_EQ(e[1].algorithm, "bicubic");
  EXPECT_EQ(e[2].algorithm, "lanczos");
  EXPECT_EQ(e[3].algorithm, "external");
  EXPECT_EQ(e.back().algorithm, "nearest");
  EXPECT_FALSE(e[0].tied);
}

TEST(Rank, ReferenceSsimClassZero) {
  const std::vector<std::pair<std::string, double>> row = {
      {"nearest", 0.916743}, {"rdip", 0.918756},     {"lanczos", 0.919373},
      {"bicubic", 0.919742}, {"bilinear", 0.920029}, {"external", 0.933177}};
  std::vector<Aggregate> aggs;
  for (const auto& [name, v] : row) aggs.push_back({0, name, 1, 0, 30.0, v});
  const auto ranking = rank_algorithms(aggs, RankMetric::ssim);
  EXPECT_EQ(ranking[0].entries[0].algorithm, "external");
  EXPECT_EQ(ranking[0].entries[1].algorithm, "bilinear");
}

TEST(Rank, TiesAndSingles) {
  std::vector<Aggregate> aggs = {{1, "rdip", 1, 0, 30.0, 0.8},
                                 {1, "bicubic", 1, 0, 30.0, 0.8},
                                 {1, "nearest", 1, 0, 20.0, 0.7},
                                 {4, "bilinear", 1, 0, 25.0, 0.6}};
  const auto ranking = rank_algorithms(aggs, RankMetric::psnr);
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0].entries[0].algorithm, "bicubic");
  EXPECT_TRUE(ranking[0].entries[0].tied);
  EXPECT_EQ(ranking[0].entries[1].algorithm, "rdip");
  EXPECT_TRUE(ranking[0].entries[1].tied);
  EXPECT_FALSE(ranking[0].entries[2].tied);
  EXPECT_EQ(ranking[1].entries.size(), 1u);
  // Infinite PSNR ranks first.
  aggs[2].mean_psnr = kInfinitePsnr;
  EXPECT_EQ(rank_algorithms(aggs, RankMetric::psnr)[0].entries[0].algorithm, "nearest");
}

TEST(Eval, CountsRowsAndAggregates) {
  const fs::path dir = scratch_dir("counts");
  const Manifest m = write_corpus(dir, {2, 2}, 40, 32, 3);
  RoundTripConfig cfg;
  cfg.specs = {spec_of(Algorithm::nearest), spec_of(Algorithm::bilinear),
               spec_of(Algorithm::bicubic)};
  const RoundTripReport r = roundtrip_eval(m, cfg);
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.rows[0].id, "img0");
  EXPECT_EQ(r.rows[0].algorithm, "nearest");
  EXPECT_EQ(r.rows[5].id, "img1");
  EXPECT_EQ(r.rows[5].algorithm, "bicubic");
  ASSERT_EQ(r.aggregates.size(), 3u);
  for (const auto& a : r.aggregates) {
    EXPECT_EQ(a.count, 2u);
    double psnr = 0, ssim = 0;
    for (const auto& row : r.rows) {
      if (row.algorithm != a.algorithm) continue;
      psnr += row.psnr;
      ssim += row.ssim;
    }
    EXPECT_NEAR(a.mean_psnr, psnr / 2, 1e-9);
    EXPECT_NEAR(a.mean_ssim, ssim / 2, 1e-9);
  }
}

TEST(Eval, UnreadableFileBecomesErrorRow) {
  const fs::path dir = scratch_dir("unreadable");
  Manifest m = write_corpus(dir, {0, 1, 2, 3, 4, 0, 1, 2, 3, 4}, 24, 24, 4);
  m.records[6].path = dir / "missing.png";
  RoundTripConfig cfg;
  cfg.specs = {spec_of(Algorithm::bilinear)};
  const RoundTripReport r = roundtrip_eval(m, cfg);
  ASSERT_EQ(r.rows.size(), 10u);
  EXPECT_EQ(r.error_count(), 1u);
  EXPECT_EQ(r.rows[6].status, RowStatus::error);
  EXPECT_NE(r.rows[6].message.find("missing.png"), std::string::npos);
  std::size_t counted = 0;
  for (const auto& a : r.aggregates) counted += a.count;
  EXPECT_EQ(counted, 9u);
}

TEST(Eval, EmptyAndAllBad) {
  RoundTripConfig cfg;
  cfg.specs = {spec_of(Algorithm::bilinear)};
  EXPECT_THROW(roundtrip_eval(Manifest{}, cfg), EmptyBatchError);
  Manifest m;
  m.records.push_back({"x", "/nonexistent/x.png", 0, Source::kaggle, Split::unassigned});
  EXPECT_THROW(roundtrip_eval(m, cfg), EmptyBatchError);
}

TEST(Eval, ReportsAreDeterministicAcrossWorkerCounts) {
  const fs::path dir = scratch_dir("determinism");
  const Manifest m = write_corpus(dir, {0, 1, 2, 3, 4, 4}, 30, 26, 5);
  RoundTripConfig cfg;
  cfg.specs = native_specs();
  cfg.workers = 1;
  const RoundTripReport a = roundtrip_eval(m, cfg);
  cfg.workers = 3;
  const RoundTripReport b = roundtrip_eval(m, cfg);
  cfg.workers = 1;
  EXPECT_EQ(json_text(a), json_text(roundtrip_eval(m, cfg)));
  EXPECT_EQ(b.config.workers, 3);
  // Worker count is not part of the serialized report.
  EXPECT_EQ(json_text(a), json_text(b));
  std::ostringstream ca, cb;
  write_rows_csv(a, ca);
  write_rows_csv(b, cb);
  EXPECT_EQ(ca.str(), cb.str());
}

TEST(Eval, ExternalColumnWithWarnings) {
  const fs::path dir = scratch_dir("external");
  const fs::path ext = dir / "ext";
  fs::create_directories(ext);
  const Manifest m = write_corpus(dir, {0, 1, 2}, 40, 24, 6);
  ResampleSpec bilinear = spec_of(Algorithm::bilinear);
  bilinear.scale = 8;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const Image small = i == 2 ? Image::filled_u8(6, 4, 3, 90)
                               : downscale(load_image(m.records[i].path), bilinear);
    save_image(small, external_path(ext, m.records[i]));
  }
  ResampleSpec e = spec_of(Algorithm::external);
  e.external_dir = ext;
  RoundTripConfig cfg;
  cfg.specs = {bilinear, e};
  const RoundTripReport r = roundtrip_eval(m, cfg);
  EXPECT_EQ(r.algorithms(), (std::vector<std::string>{"bilinear", "external"}));
  ASSERT_EQ(r.rows.size(), 6u);
  // Precomputed bilinear output scores exactly like the native path.
  EXPECT_EQ(r.rows[0].psnr, r.rows[1].psnr);
  EXPECT_EQ(r.rows[0].ssim, r.rows[1].ssim);
  EXPECT_EQ(r.rows[5].status, RowStatus::warning);
  EXPECT_NE(r.rows[5].message.find("6x4"), std::string::npos) << r.rows[5].message;
  EXPECT_NE(r.rows[5].message.find("5x3"), std::string::npos) << r.rows[5].message;

  std::ostringstream table;
  write_table(r, table);
  EXPECT_NE(table.str().find("external"), std::string::npos);
}

TEST(External, ImportPairsAndNamesMissingStem) {
  const fs::path dir = scratch_dir("import");
  const fs::path ext = dir / "ext";
  fs::create_directories(ext);
  const Manifest m = write_corpus(dir, {0, 3}, 16, 16, 7);
  save_image(Image::filled_u8(2, 2, 3, 1), external_path(ext, m.records[0]));
  try {
    import_external(ext, m);
    ADD_FAILURE();
  } catch (const MissingExternalError& err) {
    EXPECT_EQ(err.stem, "img1");
  }
  save_image(Image::filled_u8(3, 2, 3, 1), external_path(ext, m.records[1]));
  const auto pairs = import_external(ext, m);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[1].record_index, 1u);
  EXPECT_FALSE(pairs[0].warning);
  ASSERT_TRUE(pairs[1].warning);
  EXPECT_EQ(pairs[1].warning->expected_width, 2);
  EXPECT_EQ(pairs[1].warning->actual_width, 3);
}

TEST(Writers, CsvAndJsonShape) {
  RoundTripReport r;
  r.config.specs = {spec_of(Algorithm::bilinear)};
  r.rows = {{"a,1", 0, "bilinear", kInfinitePsnr, 1.0, RowStatus::ok, ""},
            {"b", 0, "bilinear", 0.0, 0.0, RowStatus::error, "cannot open"}};
  r.aggregates = aggregate(r.rows, r.algorithms());
  std::ostringstream out;
  write_rows_csv(r, out);
  EXPECT_EQ(out.str(),
            "id,label,algorithm,psnr,ssim,status,message\n"
            "\"a,1\",0,bilinear,inf,1.0000000000,ok,\n"
            "b,0,bilinear,,,error,cannot open\n");
  const auto j = to_json(r);
  EXPECT_EQ(j["rows"][0]["psnr"], "inf");
  EXPECT_EQ(j["aggregates"][0]["mean_psnr"], "inf");
  EXPECT_EQ(j["config"]["ssim"]["dynamic_range"], 255.0);
  EXPECT_EQ(j["config"]["downscalers"][0]["antialias"], true);
  EXPECT_EQ(j["errors"], 1);
}
