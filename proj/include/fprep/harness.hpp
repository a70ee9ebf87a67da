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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fprep/dataset.hpp"
#include "fprep/image.hpp"
#include "fprep/iqa.hpp"
#include "fprep/resample.hpp"

namespace fprep {

struct RoundTripScore {
  double psnr = 0.0;
  double ssim = 0.0;
};

/// Upscales `downscaled` by `scale` with the 4-tap Lanczos kernel, crops the
/// result to the original size from the top-left, and scores it.
RoundTripScore roundtrip_from_downscaled(const Image& original, const Image& downscaled,
                                         int scale, const SsimParams& ssim_params = {});

/// Shrink with `spec`, grow back with Lanczos, score against the original.
RoundTripScore roundtrip_one(const Image& image, const ResampleSpec& spec, int scale = 8,
                             const SsimParams& ssim_params = {});

enum class RowStatus { ok, warning, error };
std::string_view to_string(RowStatus status);

struct QualityRow {
  std::string id;
  int label = 0;
  std::string algorithm;
  double psnr = 0.0;
  double ssim = 0.0;
  RowStatus status = RowStatus::ok;
  std::string message;

  bool scored() const { return status != RowStatus::error; }
};

/// Per (class, algorithm) means. Rows with infinite PSNR count toward
/// `count` and `ssim` but are left out of the PSNR mean.
struct Aggregate {
  int label = 0;
  std::string algorithm;
  std::size_t count = 0;
  std::size_t infinite_psnr = 0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
};

struct RoundTripConfig {
  int scale = 8;
  std::vector<ResampleSpec> specs;
  SsimParams ssim;
  /// Records processed concurrently; 0 means the OpenMP default.
  int workers = 0;
};

struct RoundTripReport {
  std::vector<QualityRow> rows;
  std::vector<Aggregate> aggregates;
  RoundTripConfig config;

  /// Algorithm labels in configuration order.
  std::vector<std::string> algorithms() const;
  std::size_t error_count() const;
};

/// Groups scored rows by (label, algorithm); labels ascending, algorithms in
/// `algorithm_order`.
std::vector<Aggregate> aggregate(const std::vector<QualityRow>& rows,
                                 const std::vector<std::string>& algorithm_order);

class EmptyBatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row per (record, spec) in manifest order. Per-image failures become
/// error rows. Throws EmptyBatchError for an empty manifest or when no image
/// could be read at all.
RoundTripReport roundtrip_eval(const Manifest& manifest, const RoundTripConfig& config,
                               const PathResolver& resolve = {});

enum class RankMetric { psnr, ssim };

struct RankEntry {
  std::string algorithm;
  double value = 0.0;
  /// Same value as a neighbour; order among tied entries is alphabetical.
  bool tied = false;
};

struct ClassRanking {
  int label = 0;
  RankMetric metric = RankMetric::psnr;
  std::vector<RankEntry> entries;
};

/// Per class, algorithms by descending mean PSNR or SSIM.
std::vector<ClassRanking> rank_algorithms(const std::vector<Aggregate>& aggregates,
                                          RankMetric metric);
std::vector<ClassRanking> rank_algorithms(const RoundTripReport& report, RankMetric metric);

/// id,label,algorithm,psnr,ssim,status,message; infinite PSNR as "inf".
void write_rows_csv(const RoundTripReport& report, std::ostream& out);
/// Rows, aggregates and the full configuration.
nlohmann::json to_json(const RoundTripReport& report);
/// Class-by-algorithm grids of mean PSNR and mean SSIM.
void write_table(const RoundTripReport& report, std::ostream& out);

nlohmann::json to_json(const ResampleSpec& spec);
nlohmann::json to_json(const SsimParams& params);

}  // namespace fprep
