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
#include <stdexcept>
#include <string>
#include <vector>

#include "fprep/dataset.hpp"
#include "fprep/image.hpp"

namespace fprep {

/// A precomputed downscale whose size differs from ceil(w / s) x ceil(h / s).
struct DimensionWarning {
  int expected_width = 0;
  int expected_height = 0;
  int actual_width = 0;
  int actual_height = 0;

  std::string message() const;
};

struct ExternalImage {
  std::size_t record_index = 0;
  Image image;
  std::optional<DimensionWarning> warning;
};

class MissingExternalError : public std::runtime_error {
 public:
  explicit MissingExternalError(const std::string& stem);
  std::string stem;
};

/// `<dir>/<id>.png` for a record.
std::filesystem::path external_path(const std::filesystem::path& dir, const DatasetRecord& record);

/// Loads the precomputed output for one record and checks it against the
/// size a native shrink of `original_width` x `original_height` would give.
ExternalImage import_external_one(const std::filesystem::path& dir, const DatasetRecord& record,
                                  int original_width, int original_height, int scale = 8);

/// Pairs every manifest record with its precomputed downscale. Original sizes
/// come from the headers of the images `resolve` points at. Throws
/// MissingExternalError naming the first stem without a file.
std::vector<ExternalImage> import_external(const std::filesystem::path& dir,
                                           const Manifest& manifest,
                                           const PathResolver& resolve = {}, int scale = 8);

}  // namespace fprep
