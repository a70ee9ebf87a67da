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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fprep/dataset.hpp"
#include "fprep/image.hpp"
#include "fprep/resample.hpp"

namespace fprep {

struct PreprocessConfig {
  int crop_threshold = kDefaultCropThreshold;
  /// Bilinear 8x by default.
  ResampleSpec downscale;
  int target_width = 600;
  int target_height = 600;
  /// Center-crop images that are still larger than the target after
  /// downscaling instead of failing them.
  bool center_crop = false;
  bool tile = false;
  /// Records processed concurrently; 0 means the OpenMP default.
  int workers = 0;

  void validate() const;
};

struct Preprocessed {
  Image image;
  CropBox crop;
  int offset_x = 0;
  int offset_y = 0;
  std::optional<Quadrants> tiles;
};

/// crop_borders, downscale, pad_to the target, and optionally tile.
Preprocessed preprocess_image(const Image& image, const PreprocessConfig& config);

/// "_tl", "_tr", "_bl", "_br" in Quadrants member order.
inline constexpr const char* kTileSuffixes[4] = {"_tl", "_tr", "_bl", "_br"};

struct PreprocessFailure {
  std::string id;
  std::filesystem::path path;
  std::string message;
};

struct PreprocessSummary {
  /// Successful records with `path` set to the written file name, relative
  /// to the output directory.
  Manifest manifest;
  std::vector<PreprocessFailure> failures;
};

/// Runs preprocess_image over every record and writes `<id>.png` (plus tile
/// files) into `out_dir`, which is created if needed. Per-record failures are
/// collected; an output directory that cannot be created or written throws.
PreprocessSummary preprocess_batch(const Manifest& manifest, const PreprocessConfig& config,
                                   const std::filesystem::path& out_dir,
                                   const PathResolver& resolve = {});

}  // namespace fprep
