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

#include "fprep/pipeline.hpp"

#include <fstream>

#include "fprep/image_io.hpp"

namespace fprep {

void PreprocessConfig::validate() const {
  downscale.validate();
  if (downscale.algorithm == Algorithm::external) {
    throw std::invalid_argument("preprocessing needs a native downscaler");
  }
  if (crop_threshold < 0 || crop_threshold > 255) {
    throw std::invalid_argument("crop threshold must lie in 0-255");
  }
  if (target_width < 1 || target_height < 1) {
    throw std::invalid_argument("target size must be positive");
  }
  if (tile && (target_width % 2 || target_height % 2)) {
    throw std::invalid_argument("tiling needs an even target size");
  }
  if (workers < 0) throw std::invalid_argument("worker count must be at least 1");
}

Preprocessed preprocess_image(const Image& image, const PreprocessConfig& config) {
  config.validate();
  Preprocessed out;
  const CropResult cropped = crop_borders(image, config.crop_threshold);
  out.crop = cropped.box;
  Image small = downscale(cropped.image, config.downscale);
  if (config.center_crop) small = center_crop(small, config.target_width, config.target_height);
  PadResult padded = pad_to(small, config.target_width, config.target_height);
  out.image = std::move(padded.image);
  out.offset_x = padded.offset_x;
  out.offset_y = padded.offset_y;
  if (config.tile) out.tiles = tile_quadrants(out.image);
  return out;
}

PreprocessSummary preprocess_batch(const Manifest& manifest, const PreprocessConfig& config,
                                   const std::filesystem::path& out_dir,
                                   const PathResolver& resolve) {
  namespace fs = std::filesystem;
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw ImageIoError(ImageIoError::Kind::io, out_dir, "cannot create output directory");
  }
  {
    const fs::path probe = out_dir / ".write_test";
    std::ofstream(probe) << "";
    if (!fs::exists(probe)) {
      throw ImageIoError(ImageIoError::Kind::io, out_dir, "output directory is not writable");
    }
    fs::remove(probe, ec);
  }

  const auto n = static_cast<long>(manifest.records.size());
  std::vector<std::optional<std::string>> errors(manifest.records.size());
  auto run = [&](long i) {
    const DatasetRecord& rec = manifest.records[i];
    try {
      const Preprocessed p = preprocess_image(load_image(resolve_path(resolve, rec)), config);
      save_image(p.image, out_dir / (rec.id + ".png"));
      if (p.tiles) {
        const Image* tiles[4] = {&p.tiles->top_left, &p.tiles->top_right, &p.tiles->bottom_left,
                                 &p.tiles->bottom_right};
        for (int t = 0; t < 4; ++t) {
          save_image(*tiles[t], out_dir / (rec.id + kTileSuffixes[t] + ".png"));
        }
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  };
  if (config.workers == 1) {
    for (long i = 0; i < n; ++i) run(i);
  } else if (config.workers > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
    for (long i = 0; i < n; ++i) run(i);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) run(i);
  }

  PreprocessSummary summary;
  summary.manifest.source_files = manifest.source_files;
  summary.manifest.loaded_at = manifest.loaded_at;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const DatasetRecord& rec = manifest.records[i];
    if (errors[i]) {
      summary.failures.push_back({rec.id, resolve_path(resolve, rec), *errors[i]});
      continue;
    }
    DatasetRecord out = rec;
    out.path = rec.id + ".png";
    summary.manifest.records.push_back(std::move(out));
  }
  return summary;
}

}  // namespace fprep
