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

#include "fprep/external.hpp"

#include "fprep/image_io.hpp"
#include "fprep/resample.hpp"

namespace fprep {

std::string DimensionWarning::message() const {
  return "external image is " + std::to_string(actual_width) + "x" +
         std::to_string(actual_height) + ", expected " + std::to_string(expected_width) + "x" +
         std::to_string(expected_height);
}

MissingExternalError::MissingExternalError(const std::string& stem)
    : std::runtime_error("no external downscale for stem '" + stem + "'"), stem(stem) {}

std::filesystem::path external_path(const std::filesystem::path& dir,
                                    const DatasetRecord& record) {
  return dir / (record.id + ".png");
}

ExternalImage import_external_one(const std::filesystem::path& dir, const DatasetRecord& record,
                                  int original_width, int original_height, int scale) {
  const auto path = external_path(dir, record);
  if (!std::filesystem::is_regular_file(path)) throw MissingExternalError(record.id);
  ExternalImage out;
  out.image = load_image(path);
  const int ew = downscaled_size(original_width, scale);
  const int eh = downscaled_size(original_height, scale);
  if (out.image.width() != ew || out.image.height() != eh) {
    out.warning = DimensionWarning{ew, eh, out.image.width(), out.image.height()};
  }
  return out;
}

std::vector<ExternalImage> import_external(const std::filesystem::path& dir,
                                           const Manifest& manifest, const PathResolver& resolve,
                                           int scale) {
  std::vector<ExternalImage> out;
  out.reserve(manifest.records.size());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& rec = manifest.records[i];
    const ImageInfo info = probe_image(resolve_path(resolve, rec));
    ExternalImage ext = import_external_one(dir, rec, info.width, info.height, scale);
    ext.record_index = i;
    out.push_back(std::move(ext));
  }
  return out;
}

}  // namespace fprep
