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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fprep {

enum class SampleKind { u8, real };

/// Dense row-major raster with interleaved channels.
///
/// Samples are either 8-bit integers or reals in [0, 1]. The real range is
/// checked on construction, so every Image in circulation satisfies it.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, std::vector<std::uint8_t> samples);
  Image(int width, int height, int channels, std::vector<float> samples);

  static Image filled_u8(int width, int height, int channels, std::uint8_t value);
  static Image filled_real(int width, int height, int channels, float value);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  SampleKind kind() const {
    return std::holds_alternative<std::vector<float>>(samples_) ? SampleKind::real
                                                                : SampleKind::u8;
  }
  bool empty() const { return width_ == 0; }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(width_) * height_ * channels_;
  }
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::span<const std::uint8_t> u8() const;
  std::span<std::uint8_t> u8();
  std::span<const float> real() const;

  /// Sample value in real units, whatever the storage kind.
  double value(int x, int y, int c) const;

  bool operator==(const Image& other) const = default;

 private:
  void check_shape() const;

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> samples_;
};

/// real = integer / 255
Image to_real(const Image& image);
/// integer = round-half-away-from-zero(real * 255), clamped to [0, 255]
Image to_u8(const Image& image);

std::uint8_t quantize(double real_value);

/// Inclusive left/top, exclusive right/bottom.
struct CropBox {
  int left = 0;
  int top = 0;
  int right = 0;
  int bottom = 0;

  int width() const { return right - left; }
  int height() const { return bottom - top; }
  bool operator==(const CropBox&) const = default;
};

struct CropResult {
  Image image;
  CropBox box;
};

struct PadResult {
  Image image;
  int offset_x = 0;
  int offset_y = 0;
};

struct Quadrants {
  Image top_left;
  Image top_right;
  Image bottom_left;
  Image bottom_right;
};

class FullyBackgroundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OversizeError : public std::runtime_error {
 public:
  OversizeError(int width, int height, int target_width, int target_height);
  int width;
  int height;
  int target_width;
  int target_height;
};

class OddDimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kDefaultCropThreshold = 10;

/// Copy of the rectangle `box`; the box must lie inside the image.
Image extract(const Image& image, const CropBox& box);

/// Removes dark borders. A row (column) is background when the mean of its
/// channel-averaged intensities is below `threshold`. Trimming repeats until
/// the box is stable, so the result is a fixed point of this function.
CropResult crop_borders(const Image& image, int threshold = kDefaultCropThreshold);

/// Centers `image` on a target-sized canvas of `fill`. An odd remainder puts
/// the extra pixel on the right/bottom. `fill` is in the image's own units.
PadResult pad_to(const Image& image, int target_width, int target_height, double fill = 0.0);

/// Keeps the centered target-sized window; extra pixel trimmed from the
/// right/bottom. Dimensions already within the target are left as is.
Image center_crop(const Image& image, int target_width, int target_height);

Quadrants tile_quadrants(const Image& image);
Image stitch_quadrants(const Quadrants& tiles);

}  // namespace fprep
