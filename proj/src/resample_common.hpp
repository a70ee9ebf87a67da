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

// Pieces shared by the parallel kernels and their serial reference.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fprep/image.hpp"
#include "fprep/resample.hpp"

namespace fprep::detail {

/// Maps output index i to the source coordinate (i + 0.5) * num / den - 0.5.
/// A null kernel selects nearest-sample picking.
struct AxisGeometry {
  int in_size = 0;
  int out_size = 0;
  int num = 1;
  int den = 1;
  double stretch = 1.0;
  const Kernel* kernel = nullptr;

  double center(int i) const { return (i + 0.5) * num / den - 0.5; }
  int clamp(int j) const { return std::clamp(j, 0, in_size - 1); }
  double radius() const { return kernel ? kernel->support() * stretch : 0.5; }
  /// Taps j with |j - center| < radius.
  int first_tap(int i) const {
    return static_cast<int>(std::floor(center(i) - radius())) + 1;
  }
  int last_tap(int i) const {
    return static_cast<int>(std::ceil(center(i) + radius())) - 1;
  }
  /// Round half up; ties pick the higher index.
  int nearest(int i) const { return clamp(static_cast<int>(std::floor(center(i) + 0.5))); }
  double weight(int i, int j) const { return (*kernel)((j - center(i)) / stretch); }
};

inline AxisGeometry shrink_axis(int in_size, const ResampleSpec& spec, const Kernel* kernel) {
  return {in_size, downscaled_size(in_size, spec.scale), spec.scale, 1,
          spec.antialias ? static_cast<double>(spec.scale) : 1.0, kernel};
}

inline AxisGeometry grow_axis(int in_size, int scale, const Kernel* kernel) {
  return {in_size, in_size * scale, 1, scale, 1.0, kernel};
}

/// Kernel for a shrink spec; the nearest algorithm has none.
inline const Kernel* spec_kernel(const ResampleSpec& spec, Kernel& storage) {
  switch (spec.algorithm) {
    case Algorithm::bilinear: storage = Kernel::triangle(); return &storage;
    case Algorithm::bicubic: storage = Kernel::cubic(); return &storage;
    case Algorithm::lanczos: storage = Kernel::lanczos(spec.lanczos_taps / 2); return &storage;
    default: return nullptr;
  }
}

inline const std::array<double, 256>& u8_to_real() {
  static const std::array<double, 256> table = [] {
    std::array<double, 256> t{};
    for (int v = 0; v < 256; ++v) t[v] = v / 255.0;
    return t;
  }();
  return table;
}

/// Reads samples in real units regardless of storage kind.
class SampleReader {
 public:
  explicit SampleReader(const Image& image)
      : lut_(u8_to_real()),
        u8_(image.kind() == SampleKind::u8 ? image.u8().data() : nullptr),
        real_(image.kind() == SampleKind::real ? image.real().data() : nullptr) {}

  double operator[](std::size_t i) const { return u8_ ? lut_[u8_[i]] : real_[i]; }

 private:
  const std::array<double, 256>& lut_;
  const std::uint8_t* u8_;
  const float* real_;
};

/// Stores real-unit results, clamped, in the requested sample kind.
class SampleWriter {
 public:
  SampleWriter(SampleKind kind, std::size_t count) : kind_(kind) {
    if (kind == SampleKind::u8) {
      u8_.resize(count);
    } else {
      real_.resize(count);
    }
  }

  void store(std::size_t i, double v) {
    if (kind_ == SampleKind::u8) {
      u8_[i] = quantize(v);
    } else {
      real_[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }

  Image release(int width, int height, int channels) {
    if (kind_ == SampleKind::u8) return Image(width, height, channels, std::move(u8_));
    return Image(width, height, channels, std::move(real_));
  }

 private:
  SampleKind kind_;
  std::vector<std::uint8_t> u8_;
  std::vector<float> real_;
};

void check_rdip_args(int scale, double lambda, double epsilon);
void check_scale(int scale);

}  // namespace fprep::detail
