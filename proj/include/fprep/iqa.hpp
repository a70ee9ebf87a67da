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

#include <limits>
#include <stdexcept>

#include "fprep/image.hpp"

namespace fprep {

class DimensionMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Uniform-window SSIM settings. Dynamic range defaults to 255 for 8-bit data;
/// set `dynamic_range` to 7 to reproduce the literal constant some texts quote.
struct SsimParams {
  int window = 8;
  int stride = 1;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  void validate() const;
};

/// PSNR of identical images.
inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

/// Mean squared difference over all samples and channels, in 8-bit units.
double mse(const Image& x, const Image& y);

/// 10 * log10(peak^2 / MSE); kInfinitePsnr when MSE is zero.
double psnr(const Image& x, const Image& y, double peak = 255.0);

/// Mean of per-window SSIM over every window position, with population
/// statistics. Multichannel images are scored per channel and averaged.
/// Samples are compared in 8-bit units. Parallel over window rows; the result
/// does not depend on the thread count.
double ssim(const Image& x, const Image& y, const SsimParams& params = {});

namespace serial {
/// Direct per-window evaluation, single-threaded.
double ssim(const Image& x, const Image& y, const SsimParams& params = {});
}  // namespace serial

}  // namespace fprep
