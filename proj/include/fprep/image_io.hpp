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
#include <stdexcept>
#include <string>

#include "fprep/image.hpp"

namespace fprep {

enum class ImageFormat { png, jpeg };

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { io, unsupported_format, corrupt_stream, precondition };

  ImageIoError(Kind kind, const std::filesystem::path& path, const std::string& cause);

  Kind kind() const { return kind_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  Kind kind_;
  std::filesystem::path path_;
};

/// Decodes a PNG or JPEG (sniffed from the file signature, not the extension).
/// Grayscale sources load as one channel, everything else as RGB. Alpha is
/// composited onto black.
Image load_image(const std::filesystem::path& path);

struct ImageInfo {
  int width = 0;
  int height = 0;
  int channels = 0;
};

/// Reads only the header: dimensions and the channel count load_image yields.
ImageInfo probe_image(const std::filesystem::path& path);

/// Writes an 8-bit image. Real-sample images must be converted with to_u8 first.
void save_image(const Image& image, const std::filesystem::path& path,
                ImageFormat format = ImageFormat::png, int jpeg_quality = 95);

}  // namespace fprep
