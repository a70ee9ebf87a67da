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
#include <string>
#include <string_view>

#include "fprep/image.hpp"

namespace fprep {

enum class Algorithm { nearest, bilinear, bicubic, lanczos, rdip, external };

std::string_view to_string(Algorithm algorithm);
/// Accepts the names produced by to_string; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);

struct ResampleSpec {
  Algorithm algorithm = Algorithm::bilinear;
  int scale = 8;
  /// Window width of the Lanczos kernel: 4, 6 or 8 taps (a = taps / 2).
  int lanczos_taps = 4;
  double rdip_lambda = 1.0;
  double rdip_epsilon = 1e-6;
  /// Stretch kernel support by the scale factor when shrinking. Off gives
  /// plain interpolation at the sample centers.
  bool antialias = true;
  /// Directory of precomputed `<stem>.png` outputs, for Algorithm::external.
  std::filesystem::path external_dir;

  /// Column name used in reports: "lanczos" for the 4-tap default,
  /// "lanczos6"/"lanczos8" otherwise, the algorithm name for everything else.
  std::string label() const;
  void validate() const;
};

/// Symmetric 1-D filter kernel; weight is zero at and beyond `support()`.
class Kernel {
 public:
  enum class Shape { triangle, cubic, lanczos };

  static Kernel triangle() { return Kernel(Shape::triangle, 1.0); }
  /// Keys cubic convolution; a = -0.5 is the Catmull-Rom member.
  static Kernel cubic(double a = -0.5) { return Kernel(Shape::cubic, a); }
  /// Windowed sinc with lobes = a; the 4-tap ("4 x 4") kernel is a = 2.
  static Kernel lanczos(int a) { return Kernel(Shape::lanczos, a); }

  Shape shape() const { return shape_; }
  double param() const { return param_; }
  double support() const;
  double operator()(double t) const;

 private:
  Kernel(Shape shape, double param) : shape_(shape), param_(param) {}

  Shape shape_;
  double param_;
};

double kernel_weight(const Kernel& kernel, double t);

/// Output size of an integer-factor shrink: ceil(size / scale).
inline int downscaled_size(int size, int scale) { return (size + scale - 1) / scale; }

// The functions below use OpenMP across rows. Results are independent of the
// thread count.

/// Separable nearest/bilinear/bicubic/lanczos shrink by `spec.scale`, also
/// dispatching rdip. Output sample kind matches the input.
Image downscale(const Image& image, const ResampleSpec& spec);

/// Detail-preserving shrink: each output pixel is a weighted mean of its
/// scale x scale patch, weight |I(p) - B|^lambda + epsilon, where I is the
/// channel-mean intensity and B the patch mean of I.
Image rdip_downscale(const Image& image, int scale, double lambda = 1.0, double epsilon = 1e-6);

/// Patch mean over scale x scale blocks (edge-replicated when partial).
Image box_downscale(const Image& image, int scale);

/// Lanczos a = 2 interpolation to width * scale by height * scale.
Image upscale_lanczos4(const Image& image, int scale);

/// Single-threaded reference versions with the same arithmetic, kept for
/// cross-checking and benchmarking the parallel kernels.
namespace serial {
Image downscale(const Image& image, const ResampleSpec& spec);
Image rdip_downscale(const Image& image, int scale, double lambda = 1.0, double epsilon = 1e-6);
Image box_downscale(const Image& image, int scale);
Image upscale_lanczos4(const Image& image, int scale);
}  // namespace serial

}  // namespace fprep
