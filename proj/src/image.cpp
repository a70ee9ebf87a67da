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

#include "fprep/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fprep {

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape();
}

Image::Image(int width, int height, int channels, std::vector<float> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape();
  for (float v : std::get<std::vector<float>>(samples_)) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("real sample outside [0, 1]");
    }
  }
}

Image Image::filled_u8(int width, int height, int channels, std::uint8_t value) {
  return Image(width, height, channels,
               std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * channels,
                                         value));
}

Image Image::filled_real(int width, int height, int channels, float value) {
  return Image(width, height, channels,
               std::vector<float>(static_cast<std::size_t>(width) * height * channels, value));
}

void Image::check_shape() const {
  if (width_ < 1 || height_ < 1) {
    throw std::invalid_argument("image dimensions must be at least 1x1");
  }
  if (channels_ != 1 && channels_ != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels, got " +
                                std::to_string(channels_));
  }
  const std::size_t have = std::visit([](const auto& v) { return v.size(); }, samples_);
  if (have != sample_count()) {
    std::ostringstream msg;
    msg << "sample buffer holds " << have << " values, expected " << sample_count();
    throw std::invalid_argument(msg.str());
  }
}

std::span<const std::uint8_t> Image::u8() const {
  if (kind() != SampleKind::u8) throw std::logic_error("image does not hold 8-bit samples");
  return std::get<std::vector<std::uint8_t>>(samples_);
}

std::span<std::uint8_t> Image::u8() {
  if (kind() != SampleKind::u8) throw std::logic_error("image does not hold 8-bit samples");
  return std::get<std::vector<std::uint8_t>>(samples_);
}

std::span<const float> Image::real() const {
  if (kind() != SampleKind::real) throw std::logic_error("image does not hold real samples");
  return std::get<std::vector<float>>(samples_);
}

double Image::value(int x, int y, int c) const {
  const std::size_t i = index(x, y, c);
  if (kind() == SampleKind::u8) return std::get<std::vector<std::uint8_t>>(samples_)[i] / 255.0;
  return std::get<std::vector<float>>(samples_)[i];
}

std::uint8_t quantize(double real_value) {
  const double scaled = std::round(real_value * 255.0);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Image to_real(const Image& image) {
  if (image.kind() == SampleKind::real) return image;
  auto src = image.u8();
  std::vector<float> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v / 255.0); });
  return Image(image.width(), image.height(), image.channels(), std::move(out));
}

Image to_u8(const Image& image) {
  if (image.kind() == SampleKind::u8) return image;
  auto src = image.real();
  std::vector<std::uint8_t> out(src.size());
  std::transform(src.begin(), src.end(), out.begin(), [](float v) { return quantize(v); });
  return Image(image.width(), image.height(), image.channels(), std::move(out));
}

namespace {

template <typename T>
std::vector<T> copy_rect(std::span<const T> src, int src_width, int channels,
                         const CropBox& box) {
  std::vector<T> out(static_cast<std::size_t>(box.width()) * box.height() * channels);
  const std::size_t row_len = static_cast<std::size_t>(box.width()) * channels;
  for (int y = 0; y < box.height(); ++y) {
    const auto* from =
        src.data() + (static_cast<std::size_t>(box.top + y) * src_width + box.left) * channels;
    std::copy(from, from + row_len, out.data() + y * row_len);
  }
  return out;
}

// Mean channel-averaged intensity of row `y` over columns [x0, x1), in 8-bit units.
double row_mean(std::span<const std::uint8_t> px, int width, int channels, int y, int x0,
                int x1) {
  std::uint64_t sum = 0;
  const auto* row = px.data() + static_cast<std::size_t>(y) * width * channels;
  for (int x = x0 * channels; x < x1 * channels; ++x) sum += row[x];
  return static_cast<double>(sum) / (static_cast<double>(x1 - x0) * channels);
}

double column_mean(std::span<const std::uint8_t> px, int width, int channels, int x, int y0,
                   int y1) {
  std::uint64_t sum = 0;
  for (int y = y0; y < y1; ++y) {
    const auto* p = px.data() + (static_cast<std::size_t>(y) * width + x) * channels;
    for (int c = 0; c < channels; ++c) sum += p[c];
  }
  return static_cast<double>(sum) / (static_cast<double>(y1 - y0) * channels);
}

}  // namespace

Image extract(const Image& image, const CropBox& box) {
  if (box.left < 0 || box.top < 0 || box.right > image.width() || box.bottom > image.height() ||
      box.left >= box.right || box.top >= box.bottom) {
    throw std::invalid_argument("crop box outside image");
  }
  if (image.kind() == SampleKind::u8) {
    return Image(box.width(), box.height(), image.channels(),
                 copy_rect(image.u8(), image.width(), image.channels(), box));
  }
  return Image(box.width(), box.height(), image.channels(),
               copy_rect(image.real(), image.width(), image.channels(), box));
}

CropResult crop_borders(const Image& image, int threshold) {
  if (image.kind() != SampleKind::u8) {
    throw std::invalid_argument("crop_borders requires an 8-bit image");
  }
  const auto px = image.u8();
  const int w = image.width();
  const int c = image.channels();
  CropBox box{0, 0, image.width(), image.height()};

  for (;;) {
    CropBox next = box;
    auto row_fg = [&](int y) { return row_mean(px, w, c, y, box.left, box.right) >= threshold; };
    auto col_fg = [&](int x) {
      return column_mean(px, w, c, x, box.top, box.bottom) >= threshold;
    };
    while (next.top < next.bottom && !row_fg(next.top)) ++next.top;
    while (next.bottom > next.top && !row_fg(next.bottom - 1)) --next.bottom;
    while (next.left < next.right && !col_fg(next.left)) ++next.left;
    while (next.right > next.left && !col_fg(next.right - 1)) --next.right;
    if (next.top >= next.bottom || next.left >= next.right) {
      throw FullyBackgroundError("image is entirely background at threshold " +
                                 std::to_string(threshold));
    }
    if (next == box) break;
    box = next;
  }
  return {extract(image, box), box};
}

OversizeError::OversizeError(int w, int h, int tw, int th)
    : std::runtime_error("image " + std::to_string(w) + "x" + std::to_string(h) +
                         " exceeds target " + std::to_string(tw) + "x" + std::to_string(th)),
      width(w),
      height(h),
      target_width(tw),
      target_height(th) {}

namespace {

template <typename T>
std::vector<T> paste(std::span<const T> src, int w, int h, int channels, int tw, int th, int ox,
                     int oy, T fill) {
  std::vector<T> out(static_cast<std::size_t>(tw) * th * channels, fill);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  for (int y = 0; y < h; ++y) {
    std::copy(src.data() + y * row_len, src.data() + (y + 1) * row_len,
              out.data() + (static_cast<std::size_t>(oy + y) * tw + ox) * channels);
  }
  return out;
}

}  // namespace

PadResult pad_to(const Image& image, int target_width, int target_height, double fill) {
  if (image.width() > target_width || image.height() > target_height) {
    throw OversizeError(image.width(), image.height(), target_width, target_height);
  }
  const int ox = (target_width - image.width()) / 2;
  const int oy = (target_height - image.height()) / 2;
  PadResult result;
  result.offset_x = ox;
  result.offset_y = oy;
  if (image.kind() == SampleKind::u8) {
    if (fill < 0.0 || fill > 255.0) throw std::invalid_argument("8-bit fill outside [0, 255]");
    result.image = Image(target_width, target_height, image.channels(),
                         paste(image.u8(), image.width(), image.height(), image.channels(),
                               target_width, target_height, ox, oy,
                               static_cast<std::uint8_t>(std::lround(fill))));
  } else {
    if (fill < 0.0 || fill > 1.0) throw std::invalid_argument("real fill outside [0, 1]");
    result.image = Image(target_width, target_height, image.channels(),
                         paste(image.real(), image.width(), image.height(), image.channels(),
                               target_width, target_height, ox, oy, static_cast<float>(fill)));
  }
  return result;
}

Image center_crop(const Image& image, int target_width, int target_height) {
  const int w = std::min(image.width(), target_width);
  const int h = std::min(image.height(), target_height);
  const int left = (image.width() - w) / 2;
  const int top = (image.height() - h) / 2;
  return extract(image, CropBox{left, top, left + w, top + h});
}

Quadrants tile_quadrants(const Image& image) {
  if (image.width() % 2 != 0 || image.height() % 2 != 0) {
    throw OddDimensionError("cannot tile " + std::to_string(image.width()) + "x" +
                            std::to_string(image.height()) + " image: dimensions must be even");
  }
  const int hw = image.width() / 2;
  const int hh = image.height() / 2;
  return {extract(image, {0, 0, hw, hh}), extract(image, {hw, 0, 2 * hw, hh}),
          extract(image, {0, hh, hw, 2 * hh}), extract(image, {hw, hh, 2 * hw, 2 * hh})};
}

Image stitch_quadrants(const Quadrants& t) {
  const std::array<const Image*, 4> parts{&t.top_left, &t.top_right, &t.bottom_left,
                                          &t.bottom_right};
  for (const Image* p : parts) {
    if (p->width() != t.top_left.width() || p->height() != t.top_left.height() ||
        p->channels() != t.top_left.channels() || p->kind() != t.top_left.kind()) {
      throw std::invalid_argument("quadrants differ in shape or sample kind");
    }
  }
  const int hw = t.top_left.width();
  const int hh = t.top_left.height();
  const int c = t.top_left.channels();

  auto assemble = [&](auto span_of) {
    using T = typename decltype(span_of(t.top_left))::value_type;
    std::vector<std::remove_const_t<T>> out(static_cast<std::size_t>(4) * hw * hh * c);
    const std::size_t tile_row = static_cast<std::size_t>(hw) * c;
    for (int q = 0; q < 4; ++q) {
      auto src = span_of(*parts[q]);
      const int ox = (q % 2) * hw;
      const int oy = (q / 2) * hh;
      for (int y = 0; y < hh; ++y) {
        std::copy(src.data() + y * tile_row, src.data() + (y + 1) * tile_row,
                  out.data() + (static_cast<std::size_t>(oy + y) * 2 * hw + ox) * c);
      }
    }
    return Image(2 * hw, 2 * hh, c, std::move(out));
  };
  if (t.top_left.kind() == SampleKind::u8) {
    return assemble([](const Image& im) { return im.u8(); });
  }
  return assemble([](const Image& im) { return im.real(); });
}

}  // namespace fprep
